#pragma once

#include <span>
#include <string_view>

#include "coordfield/field.hpp"
#include "coordfield/geometry.hpp"
#include "coordfield/task.hpp"
#include "coordfield/types.hpp"

namespace coordfield {

enum class UavStatus : unsigned char { idle, engaged, servicing };

std::string_view to_string(UavStatus s);

/// Below this speed (cells/step) a UAV that is not servicing counts as idle.
inline constexpr double kIdleSpeed = 0.05;
/// Capability multiplier when the UAV's role differs from the local dominant task role.
inline constexpr double kMismatchFactor = 0.3;
/// Tasks within this many sigmas of a UAV shape its capability.
inline constexpr double kCapabilityReach = 3.0;

struct Uav {
  int id = 0;
  Role type = Role::patrol;
  Vec2 position;
  Vec2 velocity;
  double base_capability = 1.0;
  double capability = 1.0;
  UavStatus status = UavStatus::idle;
  double odometer = 0.0;
  friend bool operator==(const Uav&, const Uav&) = default;
};

/// Result of moving a point along a velocity with building clipping.
struct Motion {
  Vec2 position;
  Vec2 velocity;  // with the blocked component zeroed
  double travelled = 0.0;
  bool blocked = false;
};

/// Walks the segment position -> position + velocity * dt cell by cell and
/// stops just inside the last free cell if a blocked cell is met.
/// Throws InvariantError if `position` itself is blocked.
Motion clip_motion(const Mask& mask, double cell_size, Vec2 position, Vec2 velocity, double dt);

/// servicing inside kServiceRadius of a matched active task, engaged above
/// kIdleSpeed, idle otherwise.
UavStatus classify_status(const Uav& uav, const TaskSet& tasks);

/// Applies a commanded velocity: clipping, odometer and status update.
Uav apply_velocity(const Uav& uav, Vec2 velocity, const Mask& mask, double cell_size, const TaskSet& tasks,
                   double dt);

/// Samples v_new for `uav` against the published field and roster, then
/// moves it. `gammas` are the roster's circulations (see `circulations`).
Uav step_uav(const Uav& uav, const FieldGrid& field, std::span<const Uav> roster, std::span<const double> gammas,
             const TaskSet& tasks, double dt);
Uav step_uav(const Uav& uav, const FieldGrid& field, std::span<const Uav> roster, const TaskSet& tasks,
             double dt);

/// capability = base * (1 if the dominant active task role within
/// kCapabilityReach * sigma matches the UAV role, else kMismatchFactor).
/// Dominance is by summed weight; ties and empty neighbourhoods count as a match.
Uav update_capability(const Uav& uav, const TaskSet& tasks);

void check_uav_invariants(std::span<const Uav> uavs, const Mask& mask, double cell_size, double v_max);

}  // namespace coordfield
