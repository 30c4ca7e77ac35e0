#include <map>

#include <benchmark/benchmark.h>

#include "coordfield/kernels.hpp"
#include "coordfield/scenario.hpp"

using namespace coordfield;

namespace {

// One city per lattice side, cached across benchmarks.
const Scenario& city(int side) {
  static std::map<int, Scenario> cache;
  auto it = cache.find(side);
  if (it == cache.end()) {
    CityParams p;
    p.width = p.height = side;
    p.n_tasks = 40;
    it = cache.emplace(side, generate_city(p, 7)).first;
  }
  return it->second;
}

template <auto Fn>
void phi(benchmark::State& state) {
  const Scenario& s = city(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(Fn(s.tasks, s.world.mask(), s.world.cell_size(), Role::patrol));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

template <auto Grad, auto Step>
void velocity(benchmark::State& state) {
  const Scenario& s = city(static_cast<int>(state.range(0)));
  const FieldParams params;
  const auto p = reference::build_phi(s.tasks, s.world.mask(), s.world.cell_size(), Role::patrol);
  const auto grad = Grad(p, s.world.mask(), s.world.cell_size());
  VectorLattice a(s.world.width(), s.world.height());
  VectorLattice b(s.world.width(), s.world.height());
  for (auto _ : state) {
    Step(a, grad, s.world.mask(), s.world.cell_size(), params, b);
    std::swap(a, b);
  }
  benchmark::DoNotOptimize(a);
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

constexpr ScalarLattice (*omp_phi)(std::span<const Task>, const Mask&, double, Role) = kernels::build_phi;
constexpr ScalarLattice (*ref_phi)(std::span<const Task>, const Mask&, double, Role) = reference::build_phi;
constexpr void (*omp_step)(const VectorLattice&, const VectorLattice&, const Mask&, double, const FieldParams&,
                           VectorLattice&) = kernels::step_velocity;
constexpr void (*ref_step)(const VectorLattice&, const VectorLattice&, const Mask&, double, const FieldParams&,
                           VectorLattice&) = reference::step_velocity;

}  // namespace

BENCHMARK(phi<omp_phi>)->Name("build_phi/omp")->Arg(200)->Arg(1000);
BENCHMARK(phi<ref_phi>)->Name("build_phi/reference")->Arg(200)->Arg(1000);
BENCHMARK(velocity<kernels::phi_gradient, omp_step>)->Name("step_velocity/omp")->Arg(200)->Arg(1000);
BENCHMARK(velocity<reference::phi_gradient, ref_step>)->Name("step_velocity/reference")->Arg(200)->Arg(1000);

BENCHMARK_MAIN();
