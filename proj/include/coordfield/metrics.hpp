#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coordfield/geometry.hpp"
#include "coordfield/swarm.hpp"
#include "coordfield/types.hpp"

namespace coordfield {

enum class TaskEventKind : unsigned char { injected, serviced, completed };
std::string_view to_string(TaskEventKind k);

struct TaskEvent {
  long step = 0;
  TaskEventKind kind = TaskEventKind::injected;
  int task_id = 0;
  double amount = 0.0;       // injected weight, or weight removed
  std::vector<int> uav_ids;  // servicing / credited UAVs
  friend bool operator==(const TaskEvent&, const TaskEvent&) = default;
};

/// What metrics are computed from. statuses[s][k] is the status of
/// uav_ids[k] after step s + 1.
struct RunTrace {
  std::uint64_t seed = 0;
  std::string strategy;
  long steps = 0;
  std::vector<int> uav_ids;
  std::vector<std::vector<UavStatus>> statuses;
  std::vector<TaskEvent> events;
};

/// Throws InvariantError on out-of-order events, a completion or service
/// without injection, or a status row of the wrong width.
void check_trace(const RunTrace& trace);

double completion_rate(const RunTrace& trace);
double coverage_efficiency(const RunTrace& trace);
/// Completed-task credits per UAV, in uav_ids order.
std::vector<int> credit_counts(const RunTrace& trace);
/// Population standard deviation of the credit counts.
double task_load_balance(const RunTrace& trace);
double task_load_balance(std::span<const int> counts);
double uav_utilization(const RunTrace& trace);

/// One task as the parsers see it: where, how urgent, what kind.
struct TaskTuple {
  Vec2 position;
  double weight = 0.0;
  Role type = Role::patrol;
};

/// Positions compare by 10-unit bucket, weights by priority tier.
bool tuples_match(const TaskTuple& gold, const TaskTuple& parsed);
bool tuples_match(std::span<const TaskTuple> gold, std::span<const TaskTuple> parsed);

struct CorpusResult {
  std::vector<TaskTuple> gold;
  std::optional<std::vector<TaskTuple>> parsed;  // nullopt when parsing failed
};

/// Fraction of instances whose parsed tuples all match gold.
/// Throws std::invalid_argument on an empty corpus.
double parsing_accuracy(std::span<const CorpusResult> results);

struct MetricsReport {
  double cr = 1.0;
  double ce = 1.0;
  double tlb = 0.0;
  double uur = 0.0;
  std::optional<double> tpa;
  std::vector<int> per_uav_task_counts;
};

MetricsReport compute_metrics(const RunTrace& trace);

nlohmann::json to_json(const MetricsReport& m);
inline constexpr const char* kMetricsCsvHeader = "run_id,strategy,seed,cr,ce,tlb,uur,tpa";
std::string metrics_csv_row(const std::string& run_id, const std::string& strategy, std::uint64_t seed,
                            const MetricsReport& m);

}  // namespace coordfield
