#include "coordfield/task.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "coordfield/swarm.hpp"
#include "coordfield/world.hpp"

namespace coordfield {

TaskSet inject_task(TaskSet tasks, Task t, const WorldMap& world) {
  const std::string tag = "task " + std::to_string(t.id);
  if (std::any_of(tasks.begin(), tasks.end(), [&](const Task& o) { return o.id == t.id; }))
    throw ConfigError(tag + ": duplicate id", "id");
  if (!(t.sigma > 0.0)) throw ConfigError(tag + ": sigma must be positive", "sigma");
  if (!(t.weight >= 0.0)) throw ConfigError(tag + ": weight must be non-negative", "w");
  if (is_obstacle(world, t.position))
    throw ConfigError(tag + ": position (" + std::to_string(t.position.x) + ", " +
                          std::to_string(t.position.y) + ") is on an obstacle or outside the map",
                      "x");
  t.state = t.weight <= kWeightEpsilon ? TaskState::complete : TaskState::active;
  t.completed_by.clear();
  const auto pos = std::lower_bound(tasks.begin(), tasks.end(), t.id,
                                    [](const Task& a, int id) { return a.id < id; });
  tasks.insert(pos, std::move(t));
  return tasks;
}

ServiceOutcome service_tick(const TaskSet& tasks, std::span<const Uav> uavs, double dt, long step) {
  if (!(dt > 0.0)) throw std::invalid_argument("service_tick: dt must be positive");
  ServiceOutcome out{tasks, {}};
  const double r2 = kServiceRadius * kServiceRadius;
  for (Task& t : out.tasks) {
    if (!t.active()) continue;
    std::vector<int> servicing;
    for (const Uav& u : uavs)
      if (u.type == t.type && squared_distance(u.position, t.position) <= r2) servicing.push_back(u.id);
    if (servicing.empty()) continue;
    std::sort(servicing.begin(), servicing.end());

    const double before = t.weight;
    t.weight = std::max(0.0, before - static_cast<double>(servicing.size()) * kServiceRate * dt);
    ServiceRecord rec{t.id, before - t.weight, false, servicing};
    if (t.weight <= kWeightEpsilon) {
      rec.amount = before;
      t.weight = 0.0;
      t.state = TaskState::complete;
      t.completed_at = step;
      t.completed_by = servicing;
      rec.completed = true;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

double total_active_weight(const TaskSet& tasks) {
  double sum = 0.0;
  for (const Task& t : tasks)
    if (t.active()) sum += t.weight;
  return sum;
}

bool all_complete(const TaskSet& tasks) {
  return std::none_of(tasks.begin(), tasks.end(), [](const Task& t) { return t.active(); });
}

const Task* find_task(const TaskSet& tasks, int id) {
  const auto it = std::find_if(tasks.begin(), tasks.end(), [&](const Task& t) { return t.id == id; });
  return it == tasks.end() ? nullptr : &*it;
}

void check_task_invariants(const TaskSet& tasks, const WorldMap& world) {
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const Task& t = tasks[k];
    const std::string tag = "task " + std::to_string(t.id);
    if (k > 0 && tasks[k - 1].id >= t.id) throw InvariantError("task set not sorted by unique id");
    if (t.weight < 0.0) throw InvariantError(tag + ": negative weight");
    if ((t.state == TaskState::complete) != (t.weight <= kWeightEpsilon))
      throw InvariantError(tag + ": state disagrees with weight");
    if (!(t.sigma > 0.0)) throw InvariantError(tag + ": non-positive sigma");
    if (is_obstacle(world, t.position)) throw InvariantError(tag + ": on obstacle");
  }
}

}  // namespace coordfield
