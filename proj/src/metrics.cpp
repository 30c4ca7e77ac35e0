#include "coordfield/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace coordfield {

std::string_view to_string(TaskEventKind k) {
  switch (k) {
    case TaskEventKind::injected: return "injected";
    case TaskEventKind::serviced: return "serviced";
    case TaskEventKind::completed: return "completed";
  }
  return "?";
}

void check_trace(const RunTrace& trace) {
  long last = 0;
  std::map<int, bool> seen;  // task id -> completed
  for (const TaskEvent& e : trace.events) {
    if (e.step < last) throw InvariantError("trace events out of order");
    last = e.step;
    if (e.kind == TaskEventKind::injected) {
      if (seen.count(e.task_id)) throw InvariantError("task injected twice: " + std::to_string(e.task_id));
      seen[e.task_id] = false;
      continue;
    }
    auto it = seen.find(e.task_id);
    if (it == seen.end()) throw InvariantError("event for task never injected: " + std::to_string(e.task_id));
    if (it->second) throw InvariantError("event after completion: " + std::to_string(e.task_id));
    if (e.kind == TaskEventKind::completed) it->second = true;
  }
  if (static_cast<long>(trace.statuses.size()) != trace.steps) throw InvariantError("status rows != steps");
  for (const auto& row : trace.statuses)
    if (row.size() != trace.uav_ids.size()) throw InvariantError("status row width != roster size");
}

double completion_rate(const RunTrace& trace) {
  int injected = 0;
  int completed = 0;
  for (const TaskEvent& e : trace.events) {
    injected += e.kind == TaskEventKind::injected;
    completed += e.kind == TaskEventKind::completed;
  }
  return injected == 0 ? 1.0 : static_cast<double>(completed) / injected;
}

double coverage_efficiency(const RunTrace& trace) {
  double injected = 0.0;
  double serviced = 0.0;
  for (const TaskEvent& e : trace.events) {
    if (e.kind == TaskEventKind::injected) injected += e.amount;
    if (e.kind == TaskEventKind::serviced) serviced += e.amount;
  }
  if (injected <= 0.0) return 1.0;
  return std::clamp(serviced / injected, 0.0, 1.0);
}

std::vector<int> credit_counts(const RunTrace& trace) {
  std::map<int, int> by_id;
  for (int id : trace.uav_ids) by_id[id] = 0;
  for (const TaskEvent& e : trace.events)
    if (e.kind == TaskEventKind::completed)
      for (int id : e.uav_ids) ++by_id[id];
  std::vector<int> counts;
  counts.reserve(trace.uav_ids.size());
  for (int id : trace.uav_ids) counts.push_back(by_id[id]);
  return counts;
}

double task_load_balance(std::span<const int> counts) {
  if (counts.empty()) return 0.0;
  double mean = 0.0;
  for (int c : counts) mean += c;
  mean /= static_cast<double>(counts.size());
  double var = 0.0;
  for (int c : counts) var += (c - mean) * (c - mean);
  return std::sqrt(var / static_cast<double>(counts.size()));
}

double task_load_balance(const RunTrace& trace) {
  const auto counts = credit_counts(trace);
  return task_load_balance(counts);
}

double uav_utilization(const RunTrace& trace) {
  if (trace.statuses.empty() || trace.uav_ids.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& row : trace.statuses) {
    const auto busy = std::count_if(row.begin(), row.end(), [](UavStatus s) { return s != UavStatus::idle; });
    sum += static_cast<double>(busy) / static_cast<double>(row.size());
  }
  return sum / static_cast<double>(trace.statuses.size());
}

namespace {

int weight_tier(double w) {
  if (w >= 4.0) return 2;
  if (w >= 2.0) return 1;
  return 0;
}

}  // namespace

bool tuples_match(const TaskTuple& gold, const TaskTuple& parsed) {
  return gold.type == parsed.type && std::floor(gold.position.x / 10.0) == std::floor(parsed.position.x / 10.0) &&
         std::floor(gold.position.y / 10.0) == std::floor(parsed.position.y / 10.0) &&
         weight_tier(gold.weight) == weight_tier(parsed.weight);
}

bool tuples_match(std::span<const TaskTuple> gold, std::span<const TaskTuple> parsed) {
  if (gold.size() != parsed.size()) return false;
  for (std::size_t k = 0; k < gold.size(); ++k)
    if (!tuples_match(gold[k], parsed[k])) return false;
  return true;
}

double parsing_accuracy(std::span<const CorpusResult> results) {
  if (results.empty()) throw std::invalid_argument("parsing_accuracy: empty corpus");
  const auto hits = std::count_if(results.begin(), results.end(), [](const CorpusResult& r) {
    return r.parsed && tuples_match(std::span<const TaskTuple>(r.gold), std::span<const TaskTuple>(*r.parsed));
  });
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

MetricsReport compute_metrics(const RunTrace& trace) {
  MetricsReport m;
  m.cr = completion_rate(trace);
  m.ce = coverage_efficiency(trace);
  m.per_uav_task_counts = credit_counts(trace);
  m.tlb = task_load_balance(m.per_uav_task_counts);
  m.uur = uav_utilization(trace);
  return m;
}

nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json j{{"cr", m.cr}, {"ce", m.ce}, {"tlb", m.tlb}, {"uur", m.uur}};
  j["tpa"] = m.tpa ? nlohmann::json(*m.tpa) : nlohmann::json(nullptr);
  j["per_uav_task_counts"] = m.per_uav_task_counts;
  return j;
}

std::string metrics_csv_row(const std::string& run_id, const std::string& strategy, std::uint64_t seed,
                            const MetricsReport& m) {
  // shortest text that reads back to the same double
  const auto num = [](double v) {
    char buf[32];
    return std::string(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
  };
  std::string row = run_id + "," + strategy + "," + std::to_string(seed) + "," + num(m.cr) + "," + num(m.ce) + "," +
                    num(m.tlb) + "," + num(m.uur) + ",";
  if (m.tpa) row += num(*m.tpa);
  return row;
}

}  // namespace coordfield
