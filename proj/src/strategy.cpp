#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "coordfield/baselines.hpp"
#include "coordfield/rng.hpp"

namespace coordfield {

std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::coordfield: return "coordfield";
    case StrategyKind::aco: return "aco";
    case StrategyKind::gwo: return "gwo";
    case StrategyKind::woa: return "woa";
    case StrategyKind::astar: return "astar";
  }
  return "?";
}

std::optional<StrategyKind> strategy_from_string(std::string_view s) {
  for (StrategyKind k : kAllStrategies)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

namespace {

using json = nlohmann::json;

// Reads the keys listed in `fields` from `params`, rejecting anything else.
class ParamReader {
 public:
  ParamReader(const json& params, StrategyKind kind) : params_(params), kind_(kind) {
    if (!params_.is_null() && !params_.is_object())
      throw ConfigError("strategy_params must be an object", "strategy_params");
  }

  template <class T>
  void read(const char* key, T& out, T min_value) {
    seen_.emplace_back(key);
    if (params_.is_null() || !params_.contains(key)) return;
    const json& v = params_.at(key);
    const std::string field = std::string("strategy_params.") + key;
    if (!v.is_number()) throw ConfigError("expected a number", field);
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("expected an integer", field);
    }
    out = v.get<T>();
    if (out < min_value) throw ConfigError("value out of range", field);
  }

  void finish() const {
    if (params_.is_null()) return;
    for (const auto& [key, value] : params_.items())
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
        throw ConfigError("unknown parameter for " + std::string(to_string(kind_)), "strategy_params." + key);
  }

 private:
  const json& params_;
  StrategyKind kind_;
  std::vector<std::string> seen_;
};

class CoordFieldStrategy final : public Strategy {
 public:
  StrategyKind kind() const override { return StrategyKind::coordfield; }
  bool uses_velocity_field() const override { return true; }

  std::vector<Uav> step(const StepContext& ctx) override {
    const auto gammas = circulations(ctx.field, ctx.uavs);
    std::vector<Uav> next;
    next.reserve(ctx.uavs.size());
    for (const Uav& u : ctx.uavs) next.push_back(step_uav(u, ctx.field, ctx.uavs, gammas, ctx.tasks, ctx.dt));
    return next;
  }
};

struct Route {
  int task_id = -1;
  std::vector<Vec2> waypoints;
  std::size_t next = 0;
};

// Assign-then-fly: every `interval` steps the UAVs are matched to tasks, and
// in between each flies its A* route at full speed.
class CentralizedStrategy final : public Strategy {
 public:
  CentralizedStrategy(StrategyKind kind, const json& params, std::uint64_t seed) : kind_(kind), seed_(seed) {
    ParamReader r(params, kind);
    r.read("reassign_interval", interval_, 1);
    r.read("lambda_balance", lambda_, 0.0);
    switch (kind) {
      case StrategyKind::aco:
        r.read("n_ants", aco_.n_ants, 1);
        r.read("iterations", aco_.iterations, 1);
        r.read("evaporation", aco_.evaporation, 0.0);
        r.read("alpha", aco_.alpha, 0.0);
        r.read("beta", aco_.beta, 0.0);
        if (aco_.evaporation >= 1.0) throw ConfigError("evaporation must be below 1", "strategy_params.evaporation");
        break;
      case StrategyKind::gwo:
        r.read("pack_size", gwo_.pack_size, 3);
        r.read("iterations", gwo_.iterations, 1);
        break;
      case StrategyKind::woa:
        r.read("pod_size", woa_.pod_size, 1);
        r.read("iterations", woa_.iterations, 1);
        r.read("spiral_b", woa_.spiral_b, 0.0);
        break;
      default:
        break;
    }
    r.finish();
  }

  StrategyKind kind() const override { return kind_; }
  bool uses_velocity_field() const override { return false; }

  std::vector<Uav> step(const StepContext& ctx) override {
    if (world_ != &ctx.world) {
      world_ = &ctx.world;
      cache_ = std::make_unique<DistanceCache>(ctx.world);
      routes_.clear();
    }
    if ((ctx.step - 1) % interval_ == 0) reassign(ctx);

    const double v_max = ctx.field.params().v_max;
    std::vector<Uav> next;
    next.reserve(ctx.uavs.size());
    for (const Uav& u : ctx.uavs) {
      Route& route = routes_[u.id];
      const Task* target = route.task_id >= 0 ? find_task(ctx.tasks, route.task_id) : nullptr;
      Vec2 v{};
      if (target && target->active()) {
        if (route.waypoints.empty()) plan(route, ctx.world, u.position, target->position);
        v = follow(route, u.position, v_max * ctx.dt) * (1.0 / ctx.dt);
      }
      Uav moved = apply_velocity(u, v, ctx.world.mask(), ctx.world.cell_size(), ctx.tasks, ctx.dt);
      const Vec2 intended = u.position + v * ctx.dt;
      if (distance(moved.position, intended) > 1e-6 * ctx.world.cell_size()) route.waypoints.clear();
      next.push_back(std::move(moved));
    }
    return next;
  }

 private:
  void reassign(const StepContext& ctx) {
    const auto problem = AssignmentProblem::build(ctx.world, ctx.tasks, ctx.uavs, cache_.get(), lambda_);
    const std::uint64_t seed = derive_seed(seed_, "reassign." + std::to_string(ctx.step));
    std::vector<int> choice;
    switch (kind_) {
      case StrategyKind::aco: choice = solve_aco(problem, aco_, seed); break;
      case StrategyKind::gwo: choice = solve_gwo(problem, gwo_, seed); break;
      case StrategyKind::woa: choice = solve_woa(problem, woa_, seed); break;
      default: choice = solve_greedy(problem); break;
    }
    std::map<int, int> task_of;
    for (const auto& [uav, task] : problem.to_assignment(choice).pairs) task_of[uav] = task;
    for (const Uav& u : ctx.uavs) {
      Route& route = routes_[u.id];
      const auto it = task_of.find(u.id);
      const int task = it == task_of.end() ? -1 : it->second;
      if (task != route.task_id) route = Route{task, {}, 0};
    }
  }

  static void plan(Route& route, const WorldMap& world, Vec2 from, Vec2 to) {
    const auto path = plan_astar(world, from, to);
    if (!path) {
      route.waypoints = {from};  // unreachable; hover
      route.next = 0;
      return;
    }
    route.waypoints.clear();
    for (std::size_t k = 1; k < path->cells.size(); ++k) route.waypoints.push_back(world.cell_center(path->cells[k]));
    route.waypoints.push_back(to);
    route.next = 0;
  }

  // Displacement of at most `budget` along the remaining waypoints.
  static Vec2 follow(Route& route, Vec2 from, double budget) {
    Vec2 at = from;
    while (route.next < route.waypoints.size()) {
      const Vec2 w = route.waypoints[route.next];
      const double d = distance(at, w);
      if (d > budget) {
        at = at + (w - at) * (budget / d);
        break;
      }
      budget -= d;
      at = w;
      if (route.next + 1 == route.waypoints.size()) break;
      ++route.next;
    }
    return at - from;
  }

  StrategyKind kind_;
  std::uint64_t seed_;
  int interval_ = kDefaultReassignInterval;
  double lambda_ = kLambdaBalance;
  AcoParams aco_;
  GwoParams gwo_;
  WoaParams woa_;
  const WorldMap* world_ = nullptr;
  std::unique_ptr<DistanceCache> cache_;
  std::map<int, Route> routes_;
};

}  // namespace

std::unique_ptr<Strategy> make_strategy(StrategyKind kind, const nlohmann::json& params, std::uint64_t seed) {
  if (kind == StrategyKind::coordfield) {
    ParamReader(params, kind).finish();
    return std::make_unique<CoordFieldStrategy>();
  }
  return std::make_unique<CentralizedStrategy>(kind, params, seed);
}

std::vector<Uav> run_strategy_step(Strategy& strategy, const StepContext& ctx) { return strategy.step(ctx); }

}  // namespace coordfield
