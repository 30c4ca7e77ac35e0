#include "doctest.h"

#include <algorithm>
#include <functional>
#include <cmath>
#include <random>

#include "coordfield/baselines.hpp"
#include "coordfield/field.hpp"
#include "coordfield/swarm.hpp"
#include "assignment_oracle.hpp"

using namespace coordfield;

namespace {

Task make_task(int id, Vec2 p, Role type = Role::patrol, double w = 3.0) {
  Task t;
  t.id = id;
  t.position = p;
  t.weight = w;
  t.type = type;
  return t;
}

Uav make_uav(int id, Vec2 p, Role type = Role::patrol) {
  Uav u;
  u.id = id;
  u.position = p;
  u.type = type;
  return u;
}

using Solver = std::function<Assignment(const WorldMap&, const TaskSet&, std::span<const Uav>, std::uint64_t)>;

std::vector<std::pair<const char*, Solver>> solvers() {
  return {
      {"aco", [](const WorldMap& w, const TaskSet& t, std::span<const Uav> u,
                 std::uint64_t s) { return assign_aco(w, t, u, AcoParams{}, s); }},
      {"gwo", [](const WorldMap& w, const TaskSet& t, std::span<const Uav> u,
                 std::uint64_t s) { return assign_gwo(w, t, u, GwoParams{}, s); }},
      {"woa", [](const WorldMap& w, const TaskSet& t, std::span<const Uav> u,
                 std::uint64_t s) { return assign_woa(w, t, u, WoaParams{}, s); }},
  };
}

Mask random_mask(std::mt19937_64& rng, int n, double density) {
  std::bernoulli_distribution wall(density);
  Mask m(n, n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m(i, j) = wall(rng) ? 1 : 0;
  return m;
}

bool valid_path(const Mask& m, const Path& p) {
  for (std::size_t k = 0; k < p.cells.size(); ++k) {
    const Cell c = p.cells[k];
    if (!m.contains(c.i, c.j) || m(c.i, c.j) != 0) return false;
    if (k == 0) continue;
    const int di = c.i - p.cells[k - 1].i;
    const int dj = c.j - p.cells[k - 1].j;
    if (std::abs(di) > 1 || std::abs(dj) > 1 || (di == 0 && dj == 0)) return false;
    if (di != 0 && dj != 0 && (m(c.i - di, c.j) != 0 || m(c.i, c.j - dj) != 0)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("assignment: one UAV, one task") {
  const WorldMap world(50, 50);
  const TaskSet tasks{make_task(7, {40.5, 40.5})};
  const std::vector<Uav> uavs{make_uav(3, {5.5, 5.5})};
  for (const auto& [name, solve] : solvers()) {
    CAPTURE(std::string(name));
    const Assignment a = solve(world, tasks, uavs, 1);
    REQUIRE(a.pairs.size() == 1);
    CHECK(a.pairs[0] == std::pair{3, 7});
    CHECK(a.unassigned.empty());
  }
}

TEST_CASE("assignment: empty task set gives an empty assignment") {
  const WorldMap world(50, 50);
  const std::vector<Uav> uavs{make_uav(1, {5.5, 5.5})};
  for (const auto& [name, solve] : solvers()) {
    const Assignment a = solve(world, {}, uavs, 1);
    CHECK(a.pairs.empty());
    CHECK(a.unassigned.empty());
  }
}

TEST_CASE("assignment: crossing distances resolve to the shorter matching") {
  const WorldMap world(60, 60);
  const TaskSet tasks{make_task(1, {40.5, 12.5}), make_task(2, {40.5, 48.5})};
  const std::vector<Uav> uavs{make_uav(1, {10.5, 10.5}), make_uav(2, {10.5, 50.5})};
  const oracle::CostOracle oracle(world, tasks, uavs);
  CHECK(oracle.cost({0, 1}) < oracle.cost({1, 0}));
  for (const auto& [name, solve] : solvers()) {
    CAPTURE(std::string(name));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Assignment a = solve(world, tasks, uavs, seed);
      CHECK(a.pairs == std::vector<std::pair<int, int>>{{1, 1}, {2, 2}});
    }
  }
}

TEST_CASE("assignment: symmetric instance takes lower UAV id to lower task id") {
  // odd width so that cell columns mirror exactly about the centre column
  const WorldMap world(41, 41);
  const TaskSet tasks{make_task(1, {10.5, 20.5}), make_task(2, {30.5, 20.5})};
  const std::vector<Uav> uavs{make_uav(1, {20.5, 10.5}), make_uav(2, {20.5, 30.5})};
  const oracle::CostOracle oracle(world, tasks, uavs);
  REQUIRE(oracle.cost({0, 1}) == oracle.cost({1, 0}));
  for (const auto& [name, solve] : solvers()) {
    CAPTURE(std::string(name));
    for (std::uint64_t seed = 0; seed < 5; ++seed)
      CHECK(solve(world, tasks, uavs, seed).pairs == std::vector<std::pair<int, int>>{{1, 1}, {2, 2}});
  }
}

TEST_CASE("assignment: respects the per-task cap") {
  const WorldMap world(60, 60);
  const TaskSet tasks{make_task(1, {30.5, 30.5}), make_task(2, {58.5, 58.5})};
  std::vector<Uav> uavs;
  for (int id = 1; id <= 6; ++id) uavs.push_back(make_uav(id, {28.5 + id, 29.5}));
  for (const auto& [name, solve] : solvers()) {
    CAPTURE(std::string(name));
    const Assignment a = solve(world, tasks, uavs, 3);
    CHECK(a.pairs.size() == 6);
    const auto on1 = std::count_if(a.pairs.begin(), a.pairs.end(), [](auto p) { return p.second == 1; });
    CHECK(on1 <= 4);
  }
}

TEST_CASE("assignment: fixed seed is deterministic") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(1.0, 59.0);
  const WorldMap world(60, 60);
  TaskSet tasks;
  std::vector<Uav> uavs;
  for (int id = 1; id <= 6; ++id) {
    tasks.push_back(make_task(id, {pos(rng), pos(rng)}, id % 2 ? Role::patrol : Role::tracking));
    uavs.push_back(make_uav(id, {pos(rng), pos(rng)}, id % 3 ? Role::patrol : Role::tracking));
  }
  for (const auto& [name, solve] : solvers()) {
    const Assignment a = solve(world, tasks, uavs, 42);
    const Assignment b = solve(world, tasks, uavs, 42);
    CHECK(a.pairs == b.pairs);
    CHECK(a.unassigned == b.unassigned);
  }
}

TEST_CASE("assignment: 5x5 median cost within 15% of the exhaustive optimum") {
  for (const auto& inst : oracle::five_by_five_instances()) {
    const oracle::CostOracle cost(inst.world, inst.tasks, inst.uavs);
    const double best = cost.optimum();
    for (const auto& [name, solve] : solvers()) {
      CAPTURE(inst.index);
      CAPTURE(std::string(name));
      std::vector<double> ratios;
      for (std::uint64_t seed = 0; seed < 20; ++seed)
        ratios.push_back(cost.cost(solve(inst.world, inst.tasks, inst.uavs, seed), inst.tasks, inst.uavs) / best);
      std::nth_element(ratios.begin(), ratios.begin() + 10, ratios.end());
      CHECK(ratios[10] >= 1.0 - 1e-12);
      CHECK(ratios[10] <= 1.15);
    }
  }
}

TEST_CASE("assignment: 6 UAVs on 4 tasks stays close to the optimum") {
  std::mt19937_64 rng(77);
  const WorldMap world(60, 60);
  std::uniform_real_distribution<double> pos(0.0, 60.0);
  TaskSet tasks;
  std::vector<Uav> uavs;
  for (int id = 1; id <= 4; ++id) tasks.push_back(make_task(id, {pos(rng), pos(rng)}));
  for (int id = 1; id <= 6; ++id) uavs.push_back(make_uav(id, {pos(rng), pos(rng)}));
  const oracle::CostOracle oracle(world, tasks, uavs);
  const double best = oracle.optimum();
  for (const auto& [name, solve] : solvers()) {
    CAPTURE(std::string(name));
    std::vector<double> ratios;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      ratios.push_back(oracle.cost(solve(world, tasks, uavs, seed), tasks, uavs) / best);
    std::nth_element(ratios.begin(), ratios.begin() + 10, ratios.end());
    CHECK(ratios[10] <= 1.15);
  }
}

TEST_CASE("decode_scores takes the per-UAV argmin under the cap") {
  const AssignmentProblem p({1, 2, 3}, {10, 20}, {1, 2, 1, 2, 1, 2});
  REQUIRE(p.cap() == 3);
  CHECK(decode_scores(p, std::vector<double>{0.1, 0.9, 0.2, 0.1, 0.5, 0.4}) == std::vector<int>{0, 1, 1});
  const AssignmentProblem q({1, 2, 3, 4}, {10, 20, 30, 40}, std::vector<double>(16, 1.0));
  REQUIRE(q.cap() == 2);
  const std::vector<double> all_first{0, 1, 1, 1, 0, 1, 1, 1, 0, 1, 1, 1, 0, 1, 1, 1};
  CHECK(decode_scores(q, all_first) == std::vector<int>{0, 0, 1, 1});
}

TEST_CASE("astar: identity and corridor") {
  const Mask open(20, 20, 0);
  const auto same = plan_astar(open, {4, 4}, {4, 4});
  REQUIRE(same);
  CHECK(same->cells.size() == 1);
  CHECK(same->cells_length() == 0.0);

  Mask corridor(12, 3, 1);
  for (int i = 0; i < 12; ++i) corridor(i, 1) = 0;
  const auto line = plan_astar(corridor, {0, 1}, {10, 1});
  REQUIRE(line);
  CHECK(line->cells_length() == 10.0);
  CHECK(line->cells.size() == 11);
}

TEST_CASE("astar: unreachable and blocked endpoints") {
  Mask m(10, 10, 0);
  for (int j = 0; j < 10; ++j) m(5, j) = 1;
  CHECK_FALSE(plan_astar(m, {1, 1}, {8, 8}));
  CHECK_THROWS_AS(plan_astar(m, {5, 1}, {8, 8}), std::invalid_argument);
  CHECK_THROWS_AS(plan_astar(m, {1, 1}, {10, 8}), std::invalid_argument);
}

TEST_CASE("astar: no corner cutting") {
  Mask m(3, 3, 0);
  m(1, 0) = 1;
  const auto p = plan_astar(m, {0, 0}, {2, 0});
  REQUIRE(p);
  CHECK(p->cells_length() == 4.0);
  CHECK(valid_path(m, *p));
}

TEST_CASE("astar: lengths equal Dijkstra on 50 random 20x20 maps") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> coord(0, 19);
  int compared = 0;
  int reachable = 0;
  while (compared < 50) {
    const Mask m = random_mask(rng, 20, 0.3);
    const Cell a{coord(rng), coord(rng)};
    const Cell b{coord(rng), coord(rng)};
    if (m(a.i, a.j) != 0 || m(b.i, b.j) != 0) continue;
    const double truth = oracle::dijkstra(m, a, b);
    const auto p = plan_astar(m, a, b);
    if (std::isinf(truth)) {
      CHECK_FALSE(p);
    } else {
      REQUIRE(p);
      // the planner counts moves exactly, Dijkstra sums floats; distinct
      // (straight, diagonal) pairs at this size differ by far more than 1e-9
      CHECK(std::abs(p->cells_length() - truth) < 1e-9);
      CHECK(p->cells.front() == a);
      CHECK(p->cells.back() == b);
      CHECK(valid_path(m, *p));
      const auto again = plan_astar(m, a, b);
      CHECK(again->cells == p->cells);
      ++reachable;
    }
    ++compared;
  }
  CHECK(reachable >= 25);
}

TEST_CASE("DistanceMap agrees with Dijkstra") {
  std::mt19937_64 rng(5);
  const Mask m = random_mask(rng, 25, 0.25);
  Cell src{0, 0};
  while (m(src.i, src.j) != 0) ++src.i;
  const DistanceMap d(m, src);
  for (int j = 0; j < 25; ++j)
    for (int i = 0; i < 25; ++i) {
      if (m(i, j) != 0) continue;
      const double truth = oracle::dijkstra(m, src, {i, j});
      if (std::isinf(truth))
        CHECK(std::isinf(d.at({i, j})));
      else
        CHECK(d.at({i, j}) == doctest::Approx(truth).epsilon(1e-12));
    }
}

TEST_CASE("strategy names round-trip and bad params are rejected") {
  for (StrategyKind k : kAllStrategies) CHECK(strategy_from_string(to_string(k)) == k);
  CHECK_FALSE(strategy_from_string("pso"));
  CHECK_THROWS_AS(make_strategy(StrategyKind::coordfield, {{"n_ants", 3}}, 1), ConfigError);
  CHECK_THROWS_AS(make_strategy(StrategyKind::gwo, {{"n_ants", 3}}, 1), ConfigError);
  CHECK_THROWS_AS(make_strategy(StrategyKind::aco, {{"evaporation", 1.5}}, 1), ConfigError);
  CHECK_NOTHROW(make_strategy(StrategyKind::aco, {{"n_ants", 5}, {"reassign_interval", 10}}, 1));
  CHECK_FALSE(make_strategy(StrategyKind::astar, nlohmann::json::object(), 1)->uses_velocity_field());
  CHECK(make_strategy(StrategyKind::coordfield, nlohmann::json::object(), 1)->uses_velocity_field());
}

TEST_CASE("coordfield strategy is the swarm update") {
  const WorldMap world(120, 120, 1.0, {{50, 50, 10, 10}});
  FieldGrid field(world.shared_mask(), 1.0, FieldParams{});
  const TaskSet tasks{make_task(1, {90.5, 80.5}), make_task(2, {20.5, 30.5}, Role::tracking)};
  const std::vector<Uav> uavs{make_uav(1, {30.2, 70.8}), make_uav(2, {70.1, 20.4}, Role::tracking)};
  field.rebuild_phi(tasks);
  for (int s = 0; s < 15; ++s) field.advance_velocity();
  auto strategy = make_strategy(StrategyKind::coordfield, nlohmann::json::object(), 9);
  const StepContext ctx{world, tasks, uavs, field, 1, 1.0};
  const auto next = run_strategy_step(*strategy, ctx);
  const auto gammas = circulations(field, uavs);
  REQUIRE(next.size() == uavs.size());
  for (std::size_t k = 0; k < uavs.size(); ++k) CHECK(next[k] == step_uav(uavs[k], field, uavs, gammas, tasks, 1.0));
}

TEST_CASE("astar strategy routes around a building") {
  const WorldMap world(100, 60, 1.0, {{40, 0, 20, 45}});
  FieldGrid field(world.shared_mask(), 1.0, FieldParams{});
  const TaskSet tasks{make_task(1, {80.5, 20.5})};
  std::vector<Uav> uavs{make_uav(1, {20.5, 20.5})};
  const auto path = plan_astar(world, uavs[0].position, tasks[0].position);
  REQUIRE(path);
  const double route_len = path->cells_length();
  CHECK(route_len > 60.0 + 1.0);  // the straight line is blocked

  auto strategy = make_strategy(StrategyKind::astar, nlohmann::json::object(), 1);
  long arrived = -1;
  for (long step = 1; step <= 200 && arrived < 0; ++step) {
    const StepContext ctx{world, tasks, uavs, field, step, 1.0};
    uavs = run_strategy_step(*strategy, ctx);
    REQUIRE_FALSE(is_obstacle(world, uavs[0].position));
    REQUIRE(norm(uavs[0].velocity) <= 3.0 + 1e-9);
    // every visited point lies in a cell of the planned path or next to it
    const Cell c = *world.cell_of(uavs[0].position);
    const bool near_path = std::any_of(path->cells.begin(), path->cells.end(), [&](Cell p) {
      return std::abs(p.i - c.i) <= 1 && std::abs(p.j - c.j) <= 1;
    });
    REQUIRE(near_path);
    if (distance(uavs[0].position, tasks[0].position) < 1e-9) arrived = step;
  }
  REQUIRE(arrived > 0);
  // full speed along the route; start and target are both cell centres
  CHECK(arrived == static_cast<long>(std::ceil(route_len / 3.0)));
  // per-step chords cut the route's corners
  CHECK(uavs[0].odometer <= route_len + 1e-9);
  CHECK(uavs[0].odometer >= 0.95 * route_len);
}

TEST_CASE("centralised strategy redirects after completion within the interval") {
  const WorldMap world(100, 100);
  FieldGrid field(world.shared_mask(), 1.0, FieldParams{});
  TaskSet tasks{make_task(1, {30.5, 50.5}), make_task(2, {80.5, 50.5})};
  std::vector<Uav> uavs{make_uav(1, {20.5, 50.5})};
  auto strategy = make_strategy(StrategyKind::astar, nlohmann::json::object(), 1);
  long step = 1;
  for (; step <= 10; ++step) uavs = run_strategy_step(*strategy, {world, tasks, uavs, field, step, 1.0});
  CHECK(distance(uavs[0].position, tasks[0].position) < 1e-9);
  tasks[0].state = TaskState::complete;
  tasks[0].weight = 0.0;
  const long completed_at = step - 1;
  long redirected = -1;
  for (; step <= 60; ++step) {
    const Vec2 before = uavs[0].position;
    uavs = run_strategy_step(*strategy, {world, tasks, uavs, field, step, 1.0});
    if (redirected < 0 && uavs[0].position.x > before.x) redirected = step;
  }
  REQUIRE(redirected > 0);
  CHECK(redirected - completed_at <= kDefaultReassignInterval);
  CHECK(redirected == kDefaultReassignInterval + 1);
  CHECK(distance(uavs[0].position, tasks[1].position) < 1e-9);
}

TEST_CASE("every strategy keeps UAVs out of buildings and is seed-deterministic") {
  const WorldMap world(120, 120, 1.0, {{30, 30, 20, 20}, {70, 20, 15, 60}, {20, 80, 40, 15}});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(0.0, 120.0);
  const auto free_point = [&] {
    Vec2 p;
    do p = {pos(rng), pos(rng)};
    while (is_obstacle(world, p));
    return p;
  };
  TaskSet tasks;
  std::vector<Uav> start;
  for (int id = 1; id <= 4; ++id) tasks.push_back(make_task(id, free_point(), id % 2 ? Role::patrol : Role::tracking));
  for (int id = 1; id <= 5; ++id) start.push_back(make_uav(id, free_point(), id % 2 ? Role::patrol : Role::tracking));
  for (StrategyKind kind : kAllStrategies) {
    CAPTURE(to_string(kind));
    std::vector<std::vector<Uav>> runs;
    for (int rep = 0; rep < 2; ++rep) {
      FieldGrid field(world.shared_mask(), 1.0, FieldParams{});
      field.rebuild_phi(tasks);
      auto strategy = make_strategy(kind, nlohmann::json::object(), 17);
      std::vector<Uav> uavs = start;
      for (long step = 1; step <= 120; ++step) {
        if (strategy->uses_velocity_field()) field.advance_velocity();
        uavs = run_strategy_step(*strategy, {world, tasks, uavs, field, step, 1.0});
        for (const Uav& u : uavs) REQUIRE_FALSE(is_obstacle(world, u.position));
      }
      runs.push_back(uavs);
    }
    CHECK(runs[0] == runs[1]);
  }
}
