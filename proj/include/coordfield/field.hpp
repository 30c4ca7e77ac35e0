#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "coordfield/geometry.hpp"
#include "coordfield/task.hpp"
#include "coordfield/types.hpp"

namespace coordfield {

struct Uav;

/// Coefficients of the velocity-field update and the vortex layer.
struct FieldParams {
  double k = 1.0;         // attraction gain on grad(phi)
  double nu = 0.5;        // viscosity, cells^2 / step
  double rho = 1.0;       // normalised density; must stay 1
  double r0 = 15.0;       // vortex core radius, world units
  double dt_field = 0.2;  // field sub-step, steps
  double v_max = 3.0;     // speed clamp, cells / step

  /// Throws ConfigError unless every coefficient is positive, rho == 1 and
  /// nu * dt_field / cell_size^2 <= 0.25.
  void validate(double cell_size) const;
  /// Number of field sub-steps per simulation step, ceil(1 / dt_field).
  int substeps() const;
};

/// Bilinear sample between cell centres; points beyond the outermost centres
/// clamp to the edge value. Ties resolve to the lower-indexed cell.
double sample_bilinear(const ScalarLattice& lattice, double cell_size, Vec2 p);
Vec2 sample_bilinear(const VectorLattice& lattice, double cell_size, Vec2 p);

/// Weighted Gaussian sum over the active tasks of `type`, evaluated at cell
/// centres; zero on masked cells.
ScalarLattice build_phi(std::span<const Task> tasks, const Mask& mask, double cell_size, Role type);

/// Lattice gradient of phi at every cell (zero on masked cells).
VectorLattice phi_gradient(const ScalarLattice& phi, const Mask& mask, double cell_size);

/// Gradient of phi at `p`: finite differences on the lattice, interpolated
/// bilinearly. Throws std::domain_error if `p` is masked or outside.
Vec2 grad_phi(const ScalarLattice& phi, const Mask& mask, double cell_size, Vec2 p);

/// One explicit sub-step v += dt_field * (nu * lap(v) + k * grad(phi)).
/// Masked cells are forced to zero and every cell is clamped to v_max.
VectorLattice step_velocity(const VectorLattice& vel, const ScalarLattice& phi, const Mask& mask,
                            double cell_size, const FieldParams& params);

/// Circulation of a UAV: c_i * phi(x_i) / sum_j c_j.
/// Throws std::invalid_argument if the capabilities sum to zero.
double gamma_i(double capability, double phi_at_uav, std::span<const double> all_capabilities);

/// Tangential speed at distance r from a vortex of circulation gamma.
double vortex_tangential(double gamma, double r, double r0);

/// Vorticity profile around a UAV; diagnostics only. Throws
/// std::domain_error when r <= 0.
double vorticity_profile(double gamma, double r, double r0);

/// Per-role potential and velocity lattices over one obstacle mask.
class FieldGrid {
 public:
  FieldGrid(std::shared_ptr<const Mask> mask, double cell_size, FieldParams params);

  const Mask& mask() const { return *mask_; }
  double cell_size() const { return cell_size_; }
  const FieldParams& params() const { return params_; }

  const ScalarLattice& phi(Role r) const { return phi_[role_index(r)]; }
  const VectorLattice& velocity(Role r) const { return vel_[role_index(r)]; }

  /// Rebuilds phi (and the cached gradient) for both roles from `tasks`.
  void rebuild_phi(std::span<const Task> tasks);
  /// Runs `substeps()` velocity sub-steps per role against the current phi.
  void advance_velocity();
  void advance_velocity(Role r, int substeps);
  void set_velocity(Role r, VectorLattice v);

  /// phi >= 0, phi == 0 and v == 0 on masked cells, shapes agree.
  void check_invariants() const;

 private:
  std::shared_ptr<const Mask> mask_;
  double cell_size_;
  FieldParams params_;
  std::array<ScalarLattice, 2> phi_;
  std::array<VectorLattice, 2> grad_;
  std::array<VectorLattice, 2> vel_;
  VectorLattice scratch_;
};

/// Circulation of every UAV in `uavs` (same order), using each UAV's own
/// role field for phi.
std::vector<double> circulations(const FieldGrid& field, std::span<const Uav> uavs);

/// Background velocity of `for_uav`'s role at `p` plus the counter-clockwise
/// vortices of every other UAV, clamped to v_max.
/// Throws std::domain_error if `p` is masked and std::invalid_argument if
/// `for_uav` is not in `uavs`.
Vec2 compose_v_new(const FieldGrid& field, std::span<const Uav> uavs, Vec2 p, int for_uav);
/// Same, with circulations already computed by `circulations`.
Vec2 compose_v_new(const FieldGrid& field, std::span<const Uav> uavs, std::span<const double> gammas,
                   Vec2 p, int for_uav);

}  // namespace coordfield
