#pragma once

#include <span>

#include "coordfield/field.hpp"

// Lattice kernels in two builds: OpenMP-parallel (`kernels`) and a plain
// serial loop nest (`reference`). Both evaluate each cell with the same
// arithmetic in the same order, so their outputs are bit-identical.

namespace coordfield::kernels {

ScalarLattice build_phi(std::span<const Task> tasks, const Mask& mask, double cell_size, Role type);
VectorLattice phi_gradient(const ScalarLattice& phi, const Mask& mask, double cell_size);
VectorLattice step_velocity(const VectorLattice& vel, const VectorLattice& grad, const Mask& mask,
                            double cell_size, const FieldParams& params);
/// Same, writing into `out` (same shape, distinct from `vel`).
void step_velocity(const VectorLattice& vel, const VectorLattice& grad, const Mask& mask, double cell_size,
                   const FieldParams& params, VectorLattice& out);

}  // namespace coordfield::kernels

namespace coordfield::reference {

ScalarLattice build_phi(std::span<const Task> tasks, const Mask& mask, double cell_size, Role type);
VectorLattice phi_gradient(const ScalarLattice& phi, const Mask& mask, double cell_size);
VectorLattice step_velocity(const VectorLattice& vel, const VectorLattice& grad, const Mask& mask,
                            double cell_size, const FieldParams& params);
/// Same, writing into `out` (same shape, distinct from `vel`).
void step_velocity(const VectorLattice& vel, const VectorLattice& grad, const Mask& mask, double cell_size,
                   const FieldParams& params, VectorLattice& out);

}  // namespace coordfield::reference
