#include "coordfield/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "coordfield/types.hpp"

namespace coordfield {

std::string_view to_string(EntityKind k) {
  return k == EntityKind::pedestrian ? "pedestrian" : "vehicle";
}

std::optional<EntityKind> entity_kind_from_string(std::string_view s) {
  if (s == "pedestrian") return EntityKind::pedestrian;
  if (s == "vehicle") return EntityKind::vehicle;
  return std::nullopt;
}

double max_speed(EntityKind k) {
  return k == EntityKind::pedestrian ? kPedestrianMaxSpeed : kVehicleMaxSpeed;
}

WorldMap::WorldMap(int width, int height, double cell_size, const std::vector<Rect>& obstacles)
    : cell_size_(cell_size) {
  if (width < 1 || height < 1) throw ConfigError("world dimensions must be >= 1", "width");
  if (!(cell_size > 0.0)) throw ConfigError("cell_size must be positive", "cell_size");
  Mask mask(width, height, 0);
  for (const Rect& r : obstacles) {
    if (r.w <= 0 || r.h <= 0) throw ConfigError("obstacle width/height must be positive", "obstacles");
    for (int j = std::max(0, r.y); j < std::min(height, r.y + r.h); ++j)
      for (int i = std::max(0, r.x); i < std::min(width, r.x + r.w); ++i) mask(i, j) = 1;
  }
  mask_ = std::make_shared<const Mask>(std::move(mask));
}

std::optional<Cell> WorldMap::cell_of(Vec2 p) const {
  if (!(p.x >= 0.0) || !(p.y >= 0.0)) return std::nullopt;
  const double fi = std::floor(p.x / cell_size_);
  const double fj = std::floor(p.y / cell_size_);
  if (fi >= width() || fj >= height()) return std::nullopt;
  return Cell{static_cast<int>(fi), static_cast<int>(fj)};
}

std::optional<Vec2> WorldMap::nearest_free_point(Vec2 p) const {
  const double cx = std::clamp(std::floor(p.x / cell_size_), 0.0, double(width() - 1));
  const double cy = std::clamp(std::floor(p.y / cell_size_), 0.0, double(height() - 1));
  const Cell origin{static_cast<int>(cx), static_cast<int>(cy)};
  const int max_ring = std::max(width(), height());
  for (int ring = 0; ring <= max_ring; ++ring) {
    std::optional<Cell> best;
    double best_d2 = 0.0;
    for (int j = origin.j - ring; j <= origin.j + ring; ++j) {
      for (int i = origin.i - ring; i <= origin.i + ring; ++i) {
        if (std::max(std::abs(i - origin.i), std::abs(j - origin.j)) != ring) continue;
        if (cell_blocked(i, j)) continue;
        const double d2 = squared_distance(cell_center({i, j}), p);
        if (!best || d2 < best_d2) {
          best = Cell{i, j};
          best_d2 = d2;
        }
      }
    }
    if (best) return cell_center(*best);
  }
  return std::nullopt;
}

bool is_obstacle(const WorldMap& map, Vec2 p) {
  const auto c = map.cell_of(p);
  return !c || map.cell_blocked(c->i, c->j);
}

namespace {

// Moves one entity by `dt` in sub-steps no longer than half a cell so that
// thin walls cannot be skipped. Each axis reflects independently.
void advance_entity(const WorldMap& map, Entity& e, double dt) {
  const double speed = norm(e.velocity);
  const int substeps = std::max(1, static_cast<int>(std::ceil(speed * dt / (0.5 * map.cell_size()))));
  const double h = dt / substeps;
  for (int s = 0; s < substeps; ++s) {
    Vec2 next{e.position.x + e.velocity.x * h, e.position.y};
    if (is_obstacle(map, next)) {
      e.velocity.x = -e.velocity.x;
      next.x = e.position.x;
    }
    next.y = e.position.y + e.velocity.y * h;
    if (is_obstacle(map, next)) {
      e.velocity.y = -e.velocity.y;
      next.y = e.position.y;
    }
    e.position = next;
  }
}

}  // namespace

WorldMap step_entities(const WorldMap& map, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_entities: dt must be positive");
  WorldMap next = map;
  for (Entity& e : next.entities) advance_entity(next, e, dt);
  for (TrafficLight& light : next.traffic_lights) {
    light.timer += dt;
    while (light.timer >= kTrafficLightPhaseLength) {
      light.timer -= kTrafficLightPhaseLength;
      light.phase = (light.phase + 1) % kTrafficLightPhases;
    }
  }
  return next;
}

void check_world_invariants(const WorldMap& map) {
  for (const Entity& e : map.entities) {
    if (is_obstacle(map, e.position))
      throw InvariantError("entity " + std::to_string(e.id) + " on obstacle or outside the domain");
    if (norm(e.velocity) > max_speed(e.kind) + 1e-12)
      throw InvariantError("entity " + std::to_string(e.id) + " exceeds its speed limit");
  }
}

}  // namespace coordfield
