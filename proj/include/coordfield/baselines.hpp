#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "coordfield/field.hpp"
#include "coordfield/swarm.hpp"
#include "coordfield/task.hpp"
#include "coordfield/world.hpp"

namespace coordfield {

// ---------------------------------------------------------------------------
// Lattice paths

struct Path {
  std::vector<Cell> cells;  // start to goal inclusive
  int straight = 0;         // axis-aligned moves
  int diagonal = 0;         // diagonal moves
  double cells_length() const;
};

/// Shortest 8-connected path (diagonal cost sqrt 2, no corner cutting) with
/// a Euclidean heuristic. Open-list ties go to the smaller (y, x) cell.
/// Returns nullopt when the goal is unreachable. Throws std::invalid_argument
/// if either endpoint is blocked.
std::optional<Path> plan_astar(const Mask& mask, Cell from, Cell to);
std::optional<Path> plan_astar(const WorldMap& world, Vec2 from, Vec2 to);

/// Single-source shortest path lengths (in cells) over the same move rules,
/// +inf where unreachable.
class DistanceMap {
 public:
  DistanceMap(const Mask& mask, Cell source);
  double at(Cell c) const { return dist_(c.i, c.j); }

 private:
  Lattice<double> dist_;
};

// ---------------------------------------------------------------------------
// Assignment problems shared by the centralised strategies

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (uav id, task id), by uav id
  std::vector<int> unassigned;             // task ids without a UAV
};

inline constexpr double kLambdaBalance = 5.0;
inline constexpr double kUnreachableCost = 1e6;

/// Caches per-task distance maps for one world.
class DistanceCache {
 public:
  explicit DistanceCache(const WorldMap& world) : world_(&world) {}
  /// Path distance in world units from `p` to task `t`.
  double distance(const Task& t, Vec2 p);

 private:
  const WorldMap* world_;
  std::map<int, DistanceMap> maps_;
};

/// Dense cost model over UAVs x active tasks.
///   cost(choice) = sum_u pair(u, choice[u]) + lambda * variance(counts per task)
/// pair(u, t) is the path distance plus a mismatch penalty (width + height in
/// world units) when the roles differ.
class AssignmentProblem {
 public:
  AssignmentProblem(std::vector<int> uav_ids, std::vector<int> task_ids, std::vector<double> pair_costs,
                    double lambda_balance = kLambdaBalance);

  static AssignmentProblem build(const WorldMap& world, const TaskSet& tasks, std::span<const Uav> uavs,
                                 DistanceCache* cache = nullptr, double lambda_balance = kLambdaBalance);

  std::size_t uav_count() const { return uav_ids_.size(); }
  std::size_t task_count() const { return task_ids_.size(); }
  /// At most ceil(N_uav / N_task) + 1 UAVs per task.
  int cap() const;
  double pair(std::size_t u, std::size_t t) const { return pair_[u * task_ids_.size() + t]; }
  /// choice[u] is a task index; throws if a task exceeds the cap.
  double evaluate(std::span<const int> choice) const;
  bool feasible(std::span<const int> choice) const;
  Assignment to_assignment(std::span<const int> choice) const;
  const std::vector<int>& uav_ids() const { return uav_ids_; }
  const std::vector<int>& task_ids() const { return task_ids_; }

 private:
  std::vector<int> uav_ids_;
  std::vector<int> task_ids_;
  std::vector<double> pair_;
  double lambda_;
};

/// Keeps the best choice seen; equal costs resolve to the lexicographically
/// smaller choice (lower UAV ids on lower task ids).
struct BestChoice {
  std::vector<int> choice;
  double cost = std::numeric_limits<double>::infinity();
  bool offer(const std::vector<int>& candidate, double candidate_cost);
};

struct AcoParams {
  int n_ants = 30;
  int iterations = 50;
  double evaporation = 0.5;
  double alpha = 1.0;
  double beta = 2.0;
};

struct GwoParams {
  int pack_size = 20;
  int iterations = 60;
};

struct WoaParams {
  int pod_size = 20;
  int iterations = 60;
  double spiral_b = 1.0;
};

/// Task-index choice per UAV; empty when there are no tasks.
std::vector<int> solve_aco(const AssignmentProblem& problem, const AcoParams& params, std::uint64_t seed);
std::vector<int> solve_gwo(const AssignmentProblem& problem, const GwoParams& params, std::uint64_t seed);
std::vector<int> solve_woa(const AssignmentProblem& problem, const WoaParams& params, std::uint64_t seed);
/// Greedy nearest-task choice in UAV id order, unclaimed tasks first.
std::vector<int> solve_greedy(const AssignmentProblem& problem);

/// Continuous score vector (UAV-major, one score per task) to a feasible
/// choice: each UAV in order takes its lowest-score task still under the cap.
std::vector<int> decode_scores(const AssignmentProblem& problem, std::span<const double> scores);

Assignment assign_aco(const WorldMap& world, const TaskSet& tasks, std::span<const Uav> uavs,
                      const AcoParams& params, std::uint64_t seed);
Assignment assign_gwo(const WorldMap& world, const TaskSet& tasks, std::span<const Uav> uavs,
                      const GwoParams& params, std::uint64_t seed);
Assignment assign_woa(const WorldMap& world, const TaskSet& tasks, std::span<const Uav> uavs,
                      const WoaParams& params, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Strategies

enum class StrategyKind : unsigned char { coordfield, aco, gwo, woa, astar };

inline constexpr std::array<StrategyKind, 5> kAllStrategies{StrategyKind::coordfield, StrategyKind::aco,
                                                            StrategyKind::gwo, StrategyKind::woa, StrategyKind::astar};

std::string_view to_string(StrategyKind k);
std::optional<StrategyKind> strategy_from_string(std::string_view s);

struct StepContext {
  const WorldMap& world;
  const TaskSet& tasks;
  std::span<const Uav> uavs;
  const FieldGrid& field;
  long step = 0;  // index of the step being computed, from 1
  double dt = 1.0;
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual StrategyKind kind() const = 0;
  /// Whether the engine must advance the velocity lattices for this strategy.
  virtual bool uses_velocity_field() const = 0;
  /// Moves every UAV one step against the same snapshot.
  virtual std::vector<Uav> step(const StepContext& ctx) = 0;
};

inline constexpr int kDefaultReassignInterval = 20;

/// Builds a strategy; `params` is the strategy_params object of the scenario
/// (unknown keys raise ConfigError).
std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const nlohmann::json& params, std::uint64_t seed);

std::vector<Uav> run_strategy_step(Strategy& strategy, const StepContext& ctx);

}  // namespace coordfield
