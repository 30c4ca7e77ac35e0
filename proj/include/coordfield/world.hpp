#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "coordfield/geometry.hpp"

namespace coordfield {

enum class EntityKind : unsigned char { pedestrian, vehicle };

std::string_view to_string(EntityKind k);
std::optional<EntityKind> entity_kind_from_string(std::string_view s);

/// Default speed ceilings in cells per step.
inline constexpr double kPedestrianMaxSpeed = 0.5;
inline constexpr double kVehicleMaxSpeed = 2.0;

double max_speed(EntityKind k);

struct Entity {
  int id = 0;
  EntityKind kind = EntityKind::pedestrian;
  Vec2 position;
  Vec2 velocity;
  friend bool operator==(const Entity&, const Entity&) = default;
};

struct TrafficLight {
  Vec2 position;
  int phase = 0;       // 0 green, 1 amber, 2 red
  double timer = 0.0;  // steps spent in the current phase
  friend bool operator==(const TrafficLight&, const TrafficLight&) = default;
};

inline constexpr int kTrafficLightPhases = 3;
inline constexpr double kTrafficLightPhaseLength = 30.0;

/// Axis-aligned building footprint in cell units.
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
};

/// Urban map snapshot. The obstacle lattice is shared between snapshots and
/// never mutated after construction, so copies are cheap.
class WorldMap {
 public:
  WorldMap(int width, int height, double cell_size = 1.0, const std::vector<Rect>& obstacles = {});

  int width() const { return mask_->width(); }
  int height() const { return mask_->height(); }
  double cell_size() const { return cell_size_; }
  double extent_x() const { return width() * cell_size_; }
  double extent_y() const { return height() * cell_size_; }

  const Mask& mask() const { return *mask_; }
  std::shared_ptr<const Mask> shared_mask() const { return mask_; }

  /// Out-of-range cells count as blocked.
  bool cell_blocked(int i, int j) const {
    return !mask_->contains(i, j) || (*mask_)(i, j) != 0;
  }
  /// Containing cell of a world point, or nullopt outside the domain.
  std::optional<Cell> cell_of(Vec2 p) const;
  Vec2 cell_center(Cell c) const {
    return {(c.i + 0.5) * cell_size_, (c.j + 0.5) * cell_size_};
  }

  /// Nearest free cell centre to `p` by breadth-first ring search; the
  /// first free cell in (j, i) order wins among equals.
  std::optional<Vec2> nearest_free_point(Vec2 p) const;

  std::vector<Entity> entities;
  std::vector<TrafficLight> traffic_lights;

 private:
  std::shared_ptr<const Mask> mask_;
  double cell_size_;
};

bool is_obstacle(const WorldMap& map, Vec2 p);

/// Advances entities with reflection off buildings and domain edges and
/// cycles traffic lights. Throws std::invalid_argument when dt <= 0.
WorldMap step_entities(const WorldMap& map, double dt);

/// Throws InvariantError when an entity is outside the domain, on a
/// building, or faster than its kind allows.
void check_world_invariants(const WorldMap& map);

}  // namespace coordfield
