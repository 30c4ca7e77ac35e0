#include "coordfield/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace coordfield {

std::string_view to_string(UavStatus s) {
  switch (s) {
    case UavStatus::idle: return "idle";
    case UavStatus::engaged: return "engaged";
    case UavStatus::servicing: return "servicing";
  }
  return "idle";
}

namespace {

bool blocked(const Mask& mask, int i, int j) { return !mask.contains(i, j) || mask(i, j) != 0; }

}  // namespace

Motion clip_motion(const Mask& mask, double h, Vec2 p, Vec2 velocity, double dt) {
  const int ci = static_cast<int>(std::floor(p.x / h));
  const int cj = static_cast<int>(std::floor(p.y / h));
  if (!(p.x >= 0.0) || !(p.y >= 0.0) || blocked(mask, ci, cj))
    throw InvariantError("clip_motion: start position is blocked");

  const Vec2 d = velocity * dt;
  Motion m{p + d, velocity, norm(d), false};
  if (d.x == 0.0 && d.y == 0.0) return m;

  // Grid traversal: parametric t in [0, 1] along the segment.
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int step_i = d.x > 0 ? 1 : (d.x < 0 ? -1 : 0);
  const int step_j = d.y > 0 ? 1 : (d.y < 0 ? -1 : 0);
  int i = ci;
  int j = cj;
  double t_max_x = step_i == 0 ? inf : (((step_i > 0 ? i + 1 : i) * h) - p.x) / d.x;
  double t_max_y = step_j == 0 ? inf : (((step_j > 0 ? j + 1 : j) * h) - p.y) / d.y;
  const double t_delta_x = step_i == 0 ? inf : h / std::abs(d.x);
  const double t_delta_y = step_j == 0 ? inf : h / std::abs(d.y);

  while (std::min(t_max_x, t_max_y) <= 1.0) {
    const bool cross_x = t_max_x <= t_max_y;
    const double t_hit = cross_x ? t_max_x : t_max_y;
    const int ni = cross_x ? i + step_i : i;
    const int nj = cross_x ? j : j + step_j;
    if (blocked(mask, ni, nj)) {
      const double nudge = 1e-7 * h;
      Vec2 stop = p + d * t_hit;
      if (cross_x) {
        stop.x = step_i > 0 ? (i + 1) * h - nudge : i * h + nudge;
        stop.y = std::clamp(stop.y, j * h, (j + 1) * h - nudge);
        m.velocity.x = 0.0;
      } else {
        stop.y = step_j > 0 ? (j + 1) * h - nudge : j * h + nudge;
        stop.x = std::clamp(stop.x, i * h, (i + 1) * h - nudge);
        m.velocity.y = 0.0;
      }
      m.position = stop;
      m.travelled = distance(p, stop);
      m.blocked = true;
      return m;
    }
    i = ni;
    j = nj;
    if (cross_x)
      t_max_x += t_delta_x;
    else
      t_max_y += t_delta_y;
  }
  return m;
}

UavStatus classify_status(const Uav& uav, const TaskSet& tasks) {
  const double r2 = kServiceRadius * kServiceRadius;
  for (const Task& t : tasks)
    if (t.active() && t.type == uav.type && squared_distance(uav.position, t.position) <= r2)
      return UavStatus::servicing;
  return norm(uav.velocity) > kIdleSpeed ? UavStatus::engaged : UavStatus::idle;
}

Uav apply_velocity(const Uav& uav, Vec2 velocity, const Mask& mask, double cell_size, const TaskSet& tasks,
                   double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_uav: dt must be positive");
  const Motion m = clip_motion(mask, cell_size, uav.position, velocity, dt);
  Uav next = uav;
  next.position = m.position;
  next.velocity = m.velocity;
  next.odometer += m.travelled;
  next.status = classify_status(next, tasks);
  return next;
}

Uav step_uav(const Uav& uav, const FieldGrid& field, std::span<const Uav> roster, std::span<const double> gammas,
             const TaskSet& tasks, double dt) {
  const Vec2 v = compose_v_new(field, roster, gammas, uav.position, uav.id);
  return apply_velocity(uav, v, field.mask(), field.cell_size(), tasks, dt);
}

Uav step_uav(const Uav& uav, const FieldGrid& field, std::span<const Uav> roster, const TaskSet& tasks,
             double dt) {
  const auto gammas = circulations(field, roster);
  return step_uav(uav, field, roster, gammas, tasks, dt);
}

Uav update_capability(const Uav& uav, const TaskSet& tasks) {
  double matched = 0.0;
  double other = 0.0;
  for (const Task& t : tasks) {
    if (!t.active()) continue;
    const double reach = kCapabilityReach * t.sigma;
    if (squared_distance(uav.position, t.position) > reach * reach) continue;
    (t.type == uav.type ? matched : other) += t.weight;
  }
  Uav next = uav;
  next.capability = uav.base_capability * (other > matched ? kMismatchFactor : 1.0);
  return next;
}

void check_uav_invariants(std::span<const Uav> uavs, const Mask& mask, double cell_size, double v_max) {
  for (const Uav& u : uavs) {
    const std::string tag = "uav " + std::to_string(u.id);
    const int i = static_cast<int>(std::floor(u.position.x / cell_size));
    const int j = static_cast<int>(std::floor(u.position.y / cell_size));
    if (!(u.position.x >= 0.0) || !(u.position.y >= 0.0) || blocked(mask, i, j))
      throw InvariantError(tag + ": on a masked cell or outside the map");
    if (norm(u.velocity) > v_max * (1.0 + 1e-12)) throw InvariantError(tag + ": speed exceeds v_max");
    if (!(u.capability > 0.0)) throw InvariantError(tag + ": capability must be positive");
  }
}

}  // namespace coordfield
