#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <omp.h>

#include "coordfield/field.hpp"
#include "coordfield/kernels.hpp"
#include "coordfield/swarm.hpp"
#include "oracles.hpp"

using namespace coordfield;

namespace {

Task make_task(int id, Vec2 p, double w, double sigma, Role type = Role::patrol) {
  Task t;
  t.id = id;
  t.position = p;
  t.weight = w;
  t.sigma = sigma;
  t.type = type;
  return t;
}

Vec2 centre(int i, int j) { return {i + 0.5, j + 0.5}; }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<Task> random_tasks(std::mt19937_64& rng, int n, int extent, double smin, double smax) {
  std::uniform_real_distribution<double> pos(0.0, extent);
  std::uniform_real_distribution<double> w(0.5, 5.0);
  std::uniform_real_distribution<double> s(smin, smax);
  std::vector<Task> tasks;
  for (int k = 0; k < n; ++k) tasks.push_back(make_task(k + 1, {pos(rng), pos(rng)}, w(rng), s(rng)));
  return tasks;
}

}  // namespace

TEST_CASE("build_phi: empty task set gives a zero field") {
  Mask mask(30, 20, 0);
  const auto phi = build_phi({}, mask, 1.0, Role::patrol);
  CHECK(std::all_of(phi.values().begin(), phi.values().end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("build_phi: analytic anchors at the centre and at one sigma") {
  Mask mask(101, 101, 0);
  const std::vector<Task> tasks{make_task(1, centre(50, 50), 1.0, 25.0)};
  const auto phi = build_phi(tasks, mask, 1.0, Role::patrol);
  CHECK(phi(50, 50) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(phi(75, 50) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(phi(50, 25) == doctest::Approx(0.60653066).epsilon(1e-8));
}

TEST_CASE("build_phi: only active tasks of the requested role contribute") {
  Mask mask(40, 40, 0);
  std::vector<Task> tasks{make_task(1, centre(10, 10), 2.0, 10.0), make_task(2, centre(30, 30), 3.0, 10.0, Role::tracking)};
  tasks.push_back(make_task(3, centre(20, 20), 4.0, 10.0));
  tasks.back().state = TaskState::complete;
  const auto phi = build_phi(tasks, mask, 1.0, Role::patrol);
  const auto g = oracle::mixture_of(tasks, Role::patrol);
  REQUIRE(g.size() == 1);
  CHECK(rel_err(phi(30, 30), oracle::phi(g, 30.5, 30.5)) < 1e-12);
}

TEST_CASE("build_phi: 5 random tasks vs direct summation at 20 random cells") {
  std::mt19937_64 rng(2024);
  Mask mask(120, 90, 0);
  const auto tasks = random_tasks(rng, 5, 90, 5.0, 40.0);
  const auto phi = build_phi(tasks, mask, 1.0, Role::patrol);
  const auto g = oracle::mixture_of(tasks, Role::patrol);
  std::uniform_int_distribution<int> ci(0, 119);
  std::uniform_int_distribution<int> cj(0, 89);
  for (int n = 0; n < 20; ++n) {
    const int i = ci(rng);
    const int j = cj(rng);
    CHECK(rel_err(phi(i, j), oracle::phi(g, i + 0.5, j + 0.5)) < 1e-12);
  }
}

TEST_CASE("build_phi: cell_size scales the cell centres") {
  Mask mask(50, 50, 0);
  const std::vector<Task> tasks{make_task(1, {31.0, 47.0}, 2.0, 12.0)};
  const auto phi = build_phi(tasks, mask, 2.0, Role::patrol);
  const auto g = oracle::mixture_of(tasks, Role::patrol);
  CHECK(rel_err(phi(7, 30), oracle::phi(g, 15.0, 61.0)) < 1e-12);
}

TEST_CASE("build_phi: masked cells are exactly zero, bounds hold") {
  std::mt19937_64 rng(7);
  Mask mask(60, 60, 0);
  for (int j = 20; j < 35; ++j)
    for (int i = 10; i < 40; ++i) mask(i, j) = 1;
  const auto tasks = random_tasks(rng, 8, 60, 5.0, 20.0);
  const auto phi = build_phi(tasks, mask, 1.0, Role::patrol);
  double total_w = 0.0;
  for (const Task& t : tasks) total_w += t.weight;
  for (int j = 0; j < 60; ++j)
    for (int i = 0; i < 60; ++i) {
      if (mask(i, j)) REQUIRE(phi(i, j) == 0.0);
      REQUIRE(phi(i, j) >= 0.0);
      REQUIRE(phi(i, j) <= total_w);
    }
}

TEST_CASE("kernels: OpenMP and serial reference are bit-identical") {
  omp_set_num_threads(4);
  std::mt19937_64 rng(99);
  Mask mask(97, 83, 0);
  for (int j = 30; j < 50; ++j)
    for (int i = 40; i < 45; ++i) mask(i, j) = 1;
  const auto tasks = random_tasks(rng, 12, 80, 5.0, 30.0);
  const auto phi_par = kernels::build_phi(tasks, mask, 1.0, Role::patrol);
  const auto phi_ser = reference::build_phi(tasks, mask, 1.0, Role::patrol);
  CHECK(phi_par == phi_ser);

  const auto g_par = kernels::phi_gradient(phi_par, mask, 1.0);
  const auto g_ser = reference::phi_gradient(phi_ser, mask, 1.0);
  CHECK(g_par == g_ser);

  FieldParams params;
  VectorLattice v_par(97, 83);
  VectorLattice v_ser(97, 83);
  for (int s = 0; s < 50; ++s) {
    v_par = kernels::step_velocity(v_par, g_par, mask, 1.0, params);
    v_ser = reference::step_velocity(v_ser, g_ser, mask, 1.0, params);
  }
  CHECK(v_par == v_ser);
  omp_set_num_threads(1);
}

TEST_CASE("grad_phi: uniform field has zero gradient") {
  Mask mask(20, 20, 0);
  ScalarLattice phi(20, 20, 3.25);
  for (Vec2 p : {Vec2{0.2, 0.3}, Vec2{10.0, 10.0}, Vec2{19.9, 5.5}, Vec2{7.3, 12.8}}) {
    const Vec2 g = grad_phi(phi, mask, 1.0, p);
    CHECK(g.x == 0.0);
    CHECK(g.y == 0.0);
  }
}

TEST_CASE("grad_phi: a point west of a Gaussian centre points east") {
  Mask mask(101, 101, 0);
  const std::vector<Task> tasks{make_task(1, centre(50, 50), 1.0, 25.0)};
  const auto phi = build_phi(tasks, mask, 1.0, Role::patrol);
  const Vec2 g = grad_phi(phi, mask, 1.0, centre(30, 50));
  CHECK(g.x > 0.0);
  CHECK(std::abs(g.y) < 1e-12);
}

TEST_CASE("grad_phi: random mixture vs analytic gradient at lattice points") {
  std::mt19937_64 rng(11);
  Mask mask(100, 100, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto tasks = random_tasks(rng, 4, 100, 10.0, 30.0);
    const auto phi = build_phi(tasks, mask, 1.0, Role::patrol);
    const auto g = oracle::mixture_of(tasks, Role::patrol);
    std::uniform_int_distribution<int> c(2, 97);
    for (int n = 0; n < 50; ++n) {
      const int i = c(rng);
      const int j = c(rng);
      const Vec2 got = grad_phi(phi, mask, 1.0, centre(i, j));
      const Vec2 want = oracle::grad(g, i + 0.5, j + 0.5);
      const double denom = std::max(norm(want), 1e-6 * oracle::gradient_scale(g));
      CHECK(norm(got - want) / denom < 1e-3);
    }
  }
}

TEST_CASE("grad_phi: off-lattice bilinear samples stay within 1e-3 of the field-wide gradient scale") {
  std::mt19937_64 rng(12);
  Mask mask(150, 150, 0);
  const auto tasks = random_tasks(rng, 4, 150, 25.0, 40.0);
  const auto phi = build_phi(tasks, mask, 1.0, Role::patrol);
  const auto g = oracle::mixture_of(tasks, Role::patrol);
  std::uniform_real_distribution<double> p(3.0, 147.0);
  double worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    const Vec2 q{p(rng), p(rng)};
    worst = std::max(worst, norm(grad_phi(phi, mask, 1.0, q) - oracle::grad(g, q.x, q.y)));
  }
  CHECK(worst / oracle::gradient_scale(g) < 1e-3);
}

TEST_CASE("grad_phi: one-sided differences next to a mask, errors on masked points") {
  Mask mask(20, 20, 0);
  for (int j = 0; j < 20; ++j) mask(10, j) = 1;
  ScalarLattice phi(20, 20, 0.0);
  for (int j = 0; j < 20; ++j)
    for (int i = 0; i < 20; ++i) phi(i, j) = mask(i, j) ? 0.0 : 2.0 * i;
  // Cell 9 borders the wall: backward difference of a linear ramp gives 2.
  CHECK(grad_phi(phi, mask, 1.0, centre(9, 5)).x == doctest::Approx(2.0));
  CHECK(grad_phi(phi, mask, 1.0, centre(11, 5)).x == doctest::Approx(2.0));
  CHECK_THROWS_AS(grad_phi(phi, mask, 1.0, centre(10, 5)), std::domain_error);
  CHECK_THROWS_AS(grad_phi(phi, mask, 1.0, {-0.5, 3.0}), std::domain_error);
  CHECK_THROWS_AS(grad_phi(phi, mask, 1.0, {3.0, 20.0}), std::domain_error);
}

TEST_CASE("FieldParams: stability bound is enforced at construction") {
  FieldParams p;
  CHECK_NOTHROW(p.validate(1.0));
  p.nu = 2.0;  // 2.0 * 0.2 = 0.4 > 0.25
  CHECK_THROWS_AS(FieldGrid(std::make_shared<Mask>(10, 10, 0), 1.0, p), ConfigError);
  p.nu = 0.5;
  p.rho = 2.0;
  CHECK_THROWS_AS(p.validate(1.0), ConfigError);
  p.rho = 1.0;
  p.r0 = 0.0;
  CHECK_THROWS_AS(p.validate(1.0), ConfigError);
  CHECK(FieldParams{}.substeps() == 5);
}

TEST_CASE("step_velocity: zero field and zero potential is a fixed point") {
  Mask mask(30, 30, 0);
  VectorLattice v(30, 30);
  const ScalarLattice phi(30, 30, 0.0);
  const auto next = step_velocity(v, phi, mask, 1.0, FieldParams{});
  CHECK(next == v);
}

TEST_CASE("step_velocity: one step from rest equals dt * k * grad(phi)") {
  std::mt19937_64 rng(5);
  Mask mask(60, 60, 0);
  for (int j = 25; j < 30; ++j)
    for (int i = 20; i < 40; ++i) mask(i, j) = 1;
  const auto tasks = random_tasks(rng, 5, 60, 8.0, 20.0);
  const auto phi = build_phi(tasks, mask, 1.0, Role::patrol);
  FieldParams params;
  params.k = 1.7;
  const auto v = step_velocity(VectorLattice(60, 60), phi, mask, 1.0, params);
  for (int j = 1; j < 59; ++j)
    for (int i = 1; i < 59; ++i) {
      if (mask(i, j)) {
        REQUIRE(v(i, j) == Vec2{});
        continue;
      }
      const Vec2 want = grad_phi(phi, mask, 1.0, centre(i, j)) * (params.dt_field * params.k);
      REQUIRE(norm(v(i, j) - want) <= 1e-12);
    }
}

TEST_CASE("step_velocity: viscous decay of a sinusoidal field is monotone") {
  const int n = 64;
  Mask mask(n, n, 0);
  VectorLattice v(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const double sx = std::sin(std::numbers::pi * (i + 1) / (n + 1));
      const double sy = std::sin(std::numbers::pi * (j + 1) / (n + 1));
      v(i, j) = {2.0 * sx * sy, -1.5 * sx * sy};
    }
  const ScalarLattice phi(n, n, 0.0);
  FieldParams params;
  params.nu = 1.25;  // nu * dt = 0.25, at the stability limit
  auto max_speed = [](const VectorLattice& f) {
    double m = 0.0;
    for (const Vec2& x : f.values()) m = std::max(m, norm(x));
    return m;
  };
  double prev = max_speed(v);
  const double initial = prev;
  for (int s = 0; s < 400; ++s) {
    v = step_velocity(v, phi, mask, 1.0, params);
    const double now = max_speed(v);
    REQUIRE(now <= prev);
    prev = now;
  }
  // the mode is an eigenvector of the masked 5-point Laplacian
  const double lambda = 2.0 * (2.0 - 2.0 * std::cos(std::numbers::pi / (n + 1)));
  const double g = 1.0 - params.nu * params.dt_field * lambda;
  CHECK(prev == doctest::Approx(initial * std::pow(g, 400)).epsilon(1e-9));
}

TEST_CASE("step_velocity: speed is clamped to v_max") {
  Mask mask(40, 40, 0);
  const std::vector<Task> tasks{make_task(1, centre(20, 20), 500.0, 5.0)};
  const auto phi = build_phi(tasks, mask, 1.0, Role::patrol);
  FieldParams params;
  VectorLattice v(40, 40);
  for (int s = 0; s < 30; ++s) v = step_velocity(v, phi, mask, 1.0, params);
  for (const Vec2& x : v.values()) REQUIRE(norm(x) <= params.v_max * (1 + 1e-12));
}

TEST_CASE("gamma_i examples") {
  const std::vector<double> equal{1.0, 1.0, 1.0, 1.0};
  CHECK(gamma_i(1.0, 0.8, equal) == doctest::Approx(0.2));
  CHECK(gamma_i(1.0, 0.0, equal) == 0.0);
  const std::vector<double> caps{1.0, 2.0, 3.0};
  CHECK(gamma_i(2.0, 0.6, caps) == doctest::Approx(2.0 * 0.6 / 6.0));
  const std::vector<double> zero{0.0, 0.0};
  CHECK_THROWS_AS(gamma_i(0.0, 1.0, zero), std::invalid_argument);
}

TEST_CASE("vortex_tangential anchors") {
  const double r0 = 15.0;
  CHECK(std::abs(vortex_tangential(2 * std::numbers::pi, r0, r0) - (1.0 - std::exp(-1.0)) / r0) < 1e-12);
  CHECK(vortex_tangential(3.0, 0.0, r0) == 0.0);
  // continuity across the limit branch
  const double guard = 1e-6 * r0;
  const double below = vortex_tangential(3.0, guard * (1 - 1e-12), r0);
  const double above = vortex_tangential(3.0, guard, r0);
  CHECK(std::abs(below - above) / above < 1e-9);
  // far field
  const double r = 10 * r0;
  CHECK(rel_err(vortex_tangential(3.0, r, r0), 3.0 / (2 * std::numbers::pi * r)) < 1e-9);
}

TEST_CASE("vorticity_profile anchors") {
  const double r0 = 15.0;
  CHECK(vorticity_profile(2 * std::numbers::pi, r0, r0) == doctest::Approx(std::exp(-1.0) / r0).epsilon(1e-14));
  CHECK(vorticity_profile(0.0, 3.0, r0) == 0.0);
  const double r = 5 * r0;
  CHECK(rel_err(vorticity_profile(2.0, r, r0), 2.0 / (2 * std::numbers::pi * r) * std::exp(-25.0)) < 1e-12);
  CHECK(vorticity_profile(2.0, r, r0) / (2.0 / (2 * std::numbers::pi * r)) == doctest::Approx(1.4e-11).epsilon(0.05));
  CHECK_THROWS_AS(vorticity_profile(1.0, 0.0, r0), std::domain_error);
}

namespace {

struct VortexFixture {
  std::shared_ptr<Mask> mask = std::make_shared<Mask>(100, 100, 0);
  FieldGrid field{mask, 1.0, FieldParams{}};
  std::vector<Task> tasks;
  std::vector<Uav> uavs;

  explicit VortexFixture(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    tasks = {make_task(1, centre(50, 50), 4.0, 30.0), make_task(2, centre(20, 70), 2.0, 20.0, Role::tracking)};
    field.rebuild_phi(tasks);
    VectorLattice bg(100, 100, Vec2{0.3, -0.2});
    field.set_velocity(Role::patrol, bg);
    field.set_velocity(Role::tracking, VectorLattice(100, 100, Vec2{-0.1, 0.05}));
    std::uniform_int_distribution<int> c(10, 89);
    std::uniform_real_distribution<double> cap(0.3, 1.5);
    for (int k = 1; k <= 4; ++k) {
      Uav u;
      u.id = k;
      u.type = k % 2 ? Role::patrol : Role::tracking;
      u.position = centre(c(rng), c(rng));
      u.capability = cap(rng);
      uavs.push_back(u);
    }
  }
};

}  // namespace

TEST_CASE("compose_v_new: no other UAVs gives the background sample") {
  VortexFixture fx(1);
  const std::vector<Uav> solo{fx.uavs[0]};
  const Vec2 p{33.3, 44.4};
  CHECK(compose_v_new(fx.field, solo, p, solo[0].id) ==
        sample_bilinear(fx.field.velocity(solo[0].type), 1.0, p));
}

TEST_CASE("compose_v_new: matches the brute-force vortex sum") {
  for (std::uint64_t seed : {3u, 4u, 5u, 6u}) {
    VortexFixture fx(seed);
    std::vector<Vec2> centres;
    std::vector<double> gammas;
    double total_c = 0.0;
    for (const Uav& u : fx.uavs) total_c += u.capability;
    for (std::size_t k = 1; k < fx.uavs.size(); ++k) {
      const Uav& u = fx.uavs[k];
      centres.push_back(u.position);
      const double phi = oracle::phi(oracle::mixture_of(fx.tasks, u.type), u.position.x, u.position.y);
      gammas.push_back(u.capability * phi / total_c);
    }
    const Vec2 p{41.7, 58.2};
    const Vec2 want = Vec2{0.3, -0.2} + oracle::vortex_sum(centres, gammas, p, 15.0);
    const Vec2 got = compose_v_new(fx.field, fx.uavs, p, fx.uavs[0].id);
    CHECK(norm(got - want) < 1e-12);
  }
}

TEST_CASE("compose_v_new: UAV order does not matter") {
  VortexFixture fx(8);
  std::vector<Uav> perm = fx.uavs;
  std::reverse(perm.begin(), perm.end());
  const Vec2 p{12.0, 80.0};
  CHECK(norm(compose_v_new(fx.field, fx.uavs, p, 2) - compose_v_new(fx.field, perm, p, 2)) < 1e-12);
}

TEST_CASE("compose_v_new: symmetric pair swapped gives the same vector") {
  auto mask = std::make_shared<Mask>(100, 100, 0);
  FieldGrid field(mask, 1.0, FieldParams{});
  field.rebuild_phi(std::vector<Task>{make_task(1, centre(50, 50), 3.0, 40.0)});
  Uav self, a, b;
  self.id = 9;
  self.position = {50.5, 20.5};
  a.id = 1;
  a.position = centre(40, 50);
  b.id = 2;
  b.position = centre(60, 50);
  const Vec2 p{50.5, 70.5};  // on the perpendicular bisector of a-b
  const std::vector<Uav> ab{self, a, b};
  Uav a2 = a, b2 = b;
  a2.position = b.position;
  b2.position = a.position;
  const std::vector<Uav> ba{self, a2, b2};
  CHECK(norm(compose_v_new(field, ab, p, 9) - compose_v_new(field, ba, p, 9)) < 1e-12);
}

TEST_CASE("compose_v_new: clamp and error paths") {
  auto mask = std::make_shared<Mask>(50, 50, 0);
  (*mask)(10, 10) = 1;
  FieldParams params;
  FieldGrid field(mask, 1.0, params);
  field.rebuild_phi(std::vector<Task>{make_task(1, centre(25, 25), 1e6, 30.0)});
  std::vector<Uav> uavs(3);
  for (int k = 0; k < 3; ++k) {
    uavs[k].id = k + 1;
    uavs[k].position = centre(20 + 3 * k, 25);
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> p(0.0, 50.0);
  for (int n = 0; n < 200; ++n) {
    const Vec2 q{p(rng), p(rng)};
    if (mask->operator()(static_cast<int>(q.x), static_cast<int>(q.y))) continue;
    CHECK(norm(compose_v_new(field, uavs, q, 1)) <= params.v_max * (1 + 1e-12));
  }
  CHECK_THROWS_AS(compose_v_new(field, uavs, {10.5, 10.5}, 1), std::domain_error);
  CHECK_THROWS_AS(compose_v_new(field, uavs, {5.5, 5.5}, 42), std::invalid_argument);
}

TEST_CASE("FieldGrid keeps masked cells at zero through rebuild and advance") {
  std::mt19937_64 rng(3);
  auto mask = std::make_shared<Mask>(80, 80, 0);
  for (int j = 30; j < 50; ++j)
    for (int i = 30; i < 50; ++i) (*mask)(i, j) = 1;
  FieldGrid field(mask, 1.0, FieldParams{});
  auto tasks = random_tasks(rng, 6, 80, 10.0, 25.0);
  tasks.erase(std::remove_if(tasks.begin(), tasks.end(),
                             [&](const Task& t) { return (*mask)(int(t.position.x), int(t.position.y)); }),
              tasks.end());
  for (int s = 0; s < 40; ++s) {
    field.rebuild_phi(tasks);
    field.advance_velocity();
    REQUIRE_NOTHROW(field.check_invariants());
  }
}
