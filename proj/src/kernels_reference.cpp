#include "coordfield/kernels.hpp"

#include "kernels_common.hpp"

namespace coordfield::reference {

ScalarLattice build_phi(std::span<const Task> tasks, const Mask& mask, double cell_size, Role type) {
  const detail::PhiTables tables(tasks, mask.width(), mask.height(), cell_size, type);
  ScalarLattice phi(mask.width(), mask.height(), 0.0);
  for (int j = 0; j < mask.height(); ++j)
    tables.row(j, mask, phi.values().data() + static_cast<std::size_t>(j) * mask.width());
  return phi;
}

VectorLattice phi_gradient(const ScalarLattice& phi, const Mask& mask, double cell_size) {
  VectorLattice grad(mask.width(), mask.height());
  for (int j = 0; j < mask.height(); ++j) detail::gradient_row(phi, mask, j, cell_size, grad);
  return grad;
}

void step_velocity(const VectorLattice& vel, const VectorLattice& grad, const Mask& mask, double cell_size,
                   const FieldParams& params, VectorLattice& out) {
  const double inv_h2 = 1.0 / (cell_size * cell_size);
  const int h = mask.height();
  for (int j = 0; j < h; ++j)
    detail::velocity_row(vel, grad, mask, j, inv_h2, params.nu, params.k, params.dt_field, params.v_max, out);
}

VectorLattice step_velocity(const VectorLattice& vel, const VectorLattice& grad, const Mask& mask,
                            double cell_size, const FieldParams& params) {
  VectorLattice next(mask.width(), mask.height());
  step_velocity(vel, grad, mask, cell_size, params, next);
  return next;
}

}  // namespace coordfield::reference
