#include "coordfield/kernels.hpp"

#include "kernels_common.hpp"

namespace coordfield::kernels {

ScalarLattice build_phi(std::span<const Task> tasks, const Mask& mask, double cell_size, Role type) {
  const int w = mask.width();
  const int h = mask.height();
  const detail::PhiTables tables(tasks, w, h, cell_size, type);
  ScalarLattice phi(w, h, 0.0);
  if (tables.count() == 0) return phi;

#pragma omp parallel for schedule(static)
  for (int j = 0; j < h; ++j) tables.row(j, mask, phi.values().data() + static_cast<std::size_t>(j) * w);
  return phi;
}

VectorLattice phi_gradient(const ScalarLattice& phi, const Mask& mask, double cell_size) {
  const int w = mask.width();
  const int h = mask.height();
  VectorLattice grad(w, h);

#pragma omp parallel for schedule(static)
  for (int j = 0; j < h; ++j) detail::gradient_row(phi, mask, j, cell_size, grad);
  return grad;
}

void step_velocity(const VectorLattice& vel, const VectorLattice& grad, const Mask& mask, double cell_size,
                   const FieldParams& params, VectorLattice& out) {
  const double inv_h2 = 1.0 / (cell_size * cell_size);
  const int h = mask.height();

#pragma omp parallel for schedule(static)
  for (int j = 0; j < h; ++j)
    detail::velocity_row(vel, grad, mask, j, inv_h2, params.nu, params.k, params.dt_field, params.v_max, out);
}

VectorLattice step_velocity(const VectorLattice& vel, const VectorLattice& grad, const Mask& mask,
                            double cell_size, const FieldParams& params) {
  VectorLattice next(mask.width(), mask.height());
  step_velocity(vel, grad, mask, cell_size, params, next);
  return next;
}

}  // namespace coordfield::kernels
