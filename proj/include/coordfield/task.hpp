#pragma once

#include <span>
#include <vector>

#include "coordfield/geometry.hpp"
#include "coordfield/types.hpp"

namespace coordfield {

class WorldMap;
struct Uav;

enum class TaskState : unsigned char { active, complete };

/// Weight units serviced per step by each matched UAV.
inline constexpr double kServiceRate = 0.5;
/// Distance (world units) within which a matched UAV services a task.
inline constexpr double kServiceRadius = 10.0;
/// A task whose weight falls to this level or below is complete.
inline constexpr double kWeightEpsilon = 1e-3;
inline constexpr double kDefaultSigma = 25.0;

struct Task {
  int id = 0;
  Vec2 position;
  double weight = 0.0;  // urgency, never negative
  double sigma = kDefaultSigma;
  Role type = Role::patrol;
  TaskState state = TaskState::active;
  long created_at = 0;
  long completed_at = -1;
  std::vector<int> completed_by;  // UAVs credited with completion

  bool active() const { return state == TaskState::active; }
  friend bool operator==(const Task&, const Task&) = default;
};

/// Tasks ordered by id.
using TaskSet = std::vector<Task>;

/// Appends `t` as active and keeps the set sorted by id. Throws ConfigError
/// on a duplicate id, non-positive sigma, negative weight or a position on
/// an obstacle.
TaskSet inject_task(TaskSet tasks, Task t, const WorldMap& world);

/// One servicing step of a task during service_tick.
struct ServiceRecord {
  int task_id = 0;
  double amount = 0.0;  // weight removed this tick
  bool completed = false;
  std::vector<int> uav_ids;  // matched UAVs inside the service radius
};

struct ServiceOutcome {
  TaskSet tasks;
  std::vector<ServiceRecord> records;
};

/// Drains each active task by kServiceRate * dt per matched UAV within
/// kServiceRadius. Completion zeroes the weight and credits every UAV that
/// was servicing at that tick.
ServiceOutcome service_tick(const TaskSet& tasks, std::span<const Uav> uavs, double dt, long step);

double total_active_weight(const TaskSet& tasks);
bool all_complete(const TaskSet& tasks);
const Task* find_task(const TaskSet& tasks, int id);

void check_task_invariants(const TaskSet& tasks, const WorldMap& world);

}  // namespace coordfield
