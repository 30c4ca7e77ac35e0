#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "coordfield/baselines.hpp"
#include "coordfield/field.hpp"
#include "coordfield/metrics.hpp"
#include "coordfield/scenario.hpp"

namespace coordfield {

struct SimConfig {
  StrategyKind strategy = StrategyKind::coordfield;
  nlohmann::json strategy_params = nlohmann::json::object();
  FieldParams field;
  long t_max = 2000;
  int snapshot_stride = 1;
  std::uint64_t seed = 0;
  double dt = 1.0;
  /// Stop as soon as every injected task is complete.
  bool stop_when_complete = true;
  /// Run the lattice-wide invariant checks on every step.
  bool check_every_step = false;
  /// Cells per side of one downsampled phi sample in snapshots (0 picks one
  /// so the longer side has at most 100 samples).
  int phi_stride = 0;

  /// Throws ConfigError on nonsense values.
  void validate(const WorldMap& world) const;
};

/// Sums the metrics incrementally so snapshots can carry them cheaply.
struct MetricsTally {
  int injected = 0;
  int completed = 0;
  double weight_injected = 0.0;
  double weight_serviced = 0.0;
  double busy_sum = 0.0;
  long steps = 0;
  std::vector<int> credits;  // roster order
  MetricsReport report() const;
};

struct Snapshot {
  long step = 0;
  WorldMap world;
  TaskSet tasks;
  std::vector<Uav> uavs;
  int phi_stride = 1;
  std::array<ScalarLattice, 2> phi;  // downsampled, indexed by role
  MetricsReport metrics;
};

/// One simulation: scenario state, field lattices, strategy and trace.
/// step() is called from one thread; inject() and latest() are safe from any.
class Engine {
 public:
  Engine(Scenario scenario, SimConfig config);

  /// Queues a task for the next step. A zero id is replaced by the next
  /// free id when the queue is drained.
  void inject(Task draft);
  /// Drafts rejected at drain time, with the reason.
  std::vector<std::pair<Task, std::string>> take_rejected();

  /// Runs one full step. When a module invariant breaks, a diagnostic
  /// snapshot of the broken state is published and InvariantError rethrown.
  std::shared_ptr<const Snapshot> step();
  bool done() const;
  long step_index() const { return step_; }

  std::shared_ptr<const Snapshot> latest() const;
  const RunTrace& trace() const { return trace_; }
  const FieldGrid& field() const { return field_; }
  const Scenario& state() const { return state_; }
  const SimConfig& config() const { return config_; }
  MetricsReport metrics() const { return tally_.report(); }

 private:
  void advance();
  void drain_queue();
  void record_injection(const Task& t);
  void check_invariants() const;
  std::shared_ptr<const Snapshot> publish();

  Scenario state_;
  SimConfig config_;
  FieldGrid field_;
  std::unique_ptr<Strategy> strategy_;
  RunTrace trace_;
  MetricsTally tally_;
  long step_ = 0;
  int next_task_id_ = 1;

  mutable std::mutex queue_mutex_;
  std::deque<Task> queue_;
  std::vector<std::pair<Task, std::string>> rejected_;

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> latest_;
};

struct RunResult {
  RunTrace trace;
  MetricsReport metrics;
  std::shared_ptr<const Snapshot> final_snapshot;
};

using SnapshotSink = std::function<void(const Snapshot&)>;

/// Steps until done. `sink` sees the initial snapshot and then every
/// `snapshot_stride`-th one plus the last.
RunResult run(Scenario scenario, const SimConfig& config, const SnapshotSink& sink = {});

}  // namespace coordfield
