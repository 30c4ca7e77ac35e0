#include "coordfield/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "coordfield/detail/stencil.hpp"
#include "coordfield/kernels.hpp"
#include "coordfield/swarm.hpp"

namespace coordfield {

void FieldParams::validate(double cell_size) const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive", name);
  };
  positive(k, "k");
  positive(nu, "nu");
  positive(rho, "rho");
  positive(r0, "r0");
  positive(dt_field, "dt_field");
  positive(v_max, "v_max");
  positive(cell_size, "cell_size");
  if (rho != 1.0) throw ConfigError("rho is normalised and must equal 1", "rho");
  if (nu * dt_field / (cell_size * cell_size) > 0.25)
    throw ConfigError("explicit diffusion unstable: nu * dt_field / cell_size^2 exceeds 0.25", "nu");
}

int FieldParams::substeps() const { return static_cast<int>(std::ceil(1.0 / dt_field - 1e-12)); }

namespace {

struct Stencil1D {
  int lo;
  int hi;
  double f;
};

// Interpolation coordinates along one axis for n nodes at (k + 0.5) h.
Stencil1D bilinear_axis(double x, double h, int n) {
  if (n == 1) return {0, 0, 0.0};
  const double u = x / h - 0.5;
  if (!(u > 0.0)) return {0, 1, 0.0};
  const double fl = std::floor(u);
  if (fl >= n - 1) return {n - 2, n - 1, 1.0};
  const int lo = static_cast<int>(fl);
  return {lo, lo + 1, u - fl};
}

}  // namespace

double sample_bilinear(const ScalarLattice& lattice, double cell_size, Vec2 p) {
  const Stencil1D sx = bilinear_axis(p.x, cell_size, lattice.width());
  const Stencil1D sy = bilinear_axis(p.y, cell_size, lattice.height());
  const double a = lattice(sx.lo, sy.lo) * (1.0 - sx.f) + lattice(sx.hi, sy.lo) * sx.f;
  const double b = lattice(sx.lo, sy.hi) * (1.0 - sx.f) + lattice(sx.hi, sy.hi) * sx.f;
  return a * (1.0 - sy.f) + b * sy.f;
}

Vec2 sample_bilinear(const VectorLattice& lattice, double cell_size, Vec2 p) {
  const Stencil1D sx = bilinear_axis(p.x, cell_size, lattice.width());
  const Stencil1D sy = bilinear_axis(p.y, cell_size, lattice.height());
  const Vec2 a = lattice(sx.lo, sy.lo) * (1.0 - sx.f) + lattice(sx.hi, sy.lo) * sx.f;
  const Vec2 b = lattice(sx.lo, sy.hi) * (1.0 - sx.f) + lattice(sx.hi, sy.hi) * sx.f;
  return a * (1.0 - sy.f) + b * sy.f;
}

ScalarLattice build_phi(std::span<const Task> tasks, const Mask& mask, double cell_size, Role type) {
  return kernels::build_phi(tasks, mask, cell_size, type);
}

VectorLattice phi_gradient(const ScalarLattice& phi, const Mask& mask, double cell_size) {
  return kernels::phi_gradient(phi, mask, cell_size);
}

Vec2 grad_phi(const ScalarLattice& phi, const Mask& mask, double cell_size, Vec2 p) {
  if (!phi.same_shape(mask)) throw std::invalid_argument("grad_phi: lattice and mask shapes differ");
  const double fi = std::floor(p.x / cell_size);
  const double fj = std::floor(p.y / cell_size);
  if (!(p.x >= 0.0) || !(p.y >= 0.0) || fi >= mask.width() || fj >= mask.height() ||
      mask(static_cast<int>(fi), static_cast<int>(fj)) != 0)
    throw std::domain_error("grad_phi: sample point is masked or outside the domain");

  const Stencil1D sx = bilinear_axis(p.x, cell_size, mask.width());
  const Stencil1D sy = bilinear_axis(p.y, cell_size, mask.height());
  const auto g = [&](int i, int j) { return detail::node_gradient(phi, mask, i, j, cell_size); };
  const Vec2 a = g(sx.lo, sy.lo) * (1.0 - sx.f) + g(sx.hi, sy.lo) * sx.f;
  const Vec2 b = g(sx.lo, sy.hi) * (1.0 - sx.f) + g(sx.hi, sy.hi) * sx.f;
  return a * (1.0 - sy.f) + b * sy.f;
}

VectorLattice step_velocity(const VectorLattice& vel, const ScalarLattice& phi, const Mask& mask,
                            double cell_size, const FieldParams& params) {
  if (!vel.same_shape(mask) || !phi.same_shape(mask))
    throw std::invalid_argument("step_velocity: lattice shapes differ");
  return kernels::step_velocity(vel, kernels::phi_gradient(phi, mask, cell_size), mask, cell_size, params);
}

double gamma_i(double capability, double phi_at_uav, std::span<const double> all_capabilities) {
  double total = 0.0;
  for (double c : all_capabilities) total += c;
  if (!(total > 0.0)) throw std::invalid_argument("gamma_i: capabilities sum to zero");
  return capability * phi_at_uav / total;
}

double vortex_tangential(double gamma, double r, double r0) {
  const double guard = 1e-6 * r0;
  if (r < guard) return gamma * r / (2.0 * std::numbers::pi * r0 * r0);
  const double s = r / r0;
  return gamma / (2.0 * std::numbers::pi * r) * -std::expm1(-s * s);
}

double vorticity_profile(double gamma, double r, double r0) {
  if (!(r > 0.0)) throw std::domain_error("vorticity_profile: r must be positive");
  const double s = r / r0;
  return gamma / (2.0 * std::numbers::pi * r) * std::exp(-s * s);
}

FieldGrid::FieldGrid(std::shared_ptr<const Mask> mask, double cell_size, FieldParams params)
    : mask_(std::move(mask)), cell_size_(cell_size), params_(params) {
  if (!mask_) throw std::invalid_argument("FieldGrid: null mask");
  params_.validate(cell_size_);
  for (Role r : kRoles) {
    phi_[role_index(r)] = ScalarLattice(mask_->width(), mask_->height(), 0.0);
    grad_[role_index(r)] = VectorLattice(mask_->width(), mask_->height());
    vel_[role_index(r)] = VectorLattice(mask_->width(), mask_->height());
  }
}

void FieldGrid::rebuild_phi(std::span<const Task> tasks) {
  for (Role r : kRoles) {
    phi_[role_index(r)] = kernels::build_phi(tasks, *mask_, cell_size_, r);
    grad_[role_index(r)] = kernels::phi_gradient(phi_[role_index(r)], *mask_, cell_size_);
  }
}

void FieldGrid::advance_velocity() {
  for (Role r : kRoles) advance_velocity(r, params_.substeps());
}

void FieldGrid::advance_velocity(Role r, int substeps) {
  auto& v = vel_[role_index(r)];
  if (!scratch_.same_shape(v)) scratch_ = VectorLattice(v.width(), v.height());
  for (int s = 0; s < substeps; ++s) {
    kernels::step_velocity(v, grad_[role_index(r)], *mask_, cell_size_, params_, scratch_);
    std::swap(v, scratch_);
  }
}

void FieldGrid::set_velocity(Role r, VectorLattice v) {
  if (!v.same_shape(*mask_)) throw std::invalid_argument("set_velocity: shape mismatch");
  for (std::size_t k = 0; k < v.size(); ++k)
    if ((*mask_)[k] != 0) v[k] = {};
  vel_[role_index(r)] = std::move(v);
}

void FieldGrid::check_invariants() const {
  for (Role r : kRoles) {
    const auto& phi = phi_[role_index(r)];
    const auto& vel = vel_[role_index(r)];
    if (!phi.same_shape(*mask_) || !vel.same_shape(*mask_)) throw InvariantError("field shape mismatch");
    for (std::size_t k = 0; k < phi.size(); ++k) {
      if (!(phi[k] >= 0.0)) throw InvariantError("phi negative or NaN");
      if ((*mask_)[k] != 0 && (phi[k] != 0.0 || vel[k] != Vec2{}))
        throw InvariantError("field non-zero on a masked cell");
      if (norm(vel[k]) > params_.v_max * (1.0 + 1e-12)) throw InvariantError("velocity exceeds v_max");
    }
  }
}

std::vector<double> circulations(const FieldGrid& field, std::span<const Uav> uavs) {
  std::vector<double> caps;
  caps.reserve(uavs.size());
  for (const Uav& u : uavs) caps.push_back(u.capability);
  std::vector<double> out;
  out.reserve(uavs.size());
  for (const Uav& u : uavs) {
    const double phi = sample_bilinear(field.phi(u.type), field.cell_size(), u.position);
    out.push_back(gamma_i(u.capability, phi, caps));
  }
  return out;
}

Vec2 compose_v_new(const FieldGrid& field, std::span<const Uav> uavs, Vec2 p, int for_uav) {
  const auto gammas = circulations(field, uavs);
  return compose_v_new(field, uavs, gammas, p, for_uav);
}

Vec2 compose_v_new(const FieldGrid& field, std::span<const Uav> uavs, std::span<const double> gammas, Vec2 p,
                   int for_uav) {
  if (gammas.size() != uavs.size()) throw std::invalid_argument("compose_v_new: one circulation per UAV");
  const auto self = std::find_if(uavs.begin(), uavs.end(), [&](const Uav& u) { return u.id == for_uav; });
  if (self == uavs.end()) throw std::invalid_argument("compose_v_new: unknown UAV " + std::to_string(for_uav));
  const auto cell_i = std::floor(p.x / field.cell_size());
  const auto cell_j = std::floor(p.y / field.cell_size());
  if (!(p.x >= 0.0) || !(p.y >= 0.0) || cell_i >= field.mask().width() || cell_j >= field.mask().height() ||
      field.mask()(static_cast<int>(cell_i), static_cast<int>(cell_j)) != 0)
    throw std::domain_error("compose_v_new: sample point is masked or outside the domain");

  Vec2 v = sample_bilinear(field.velocity(self->type), field.cell_size(), p);
  for (std::size_t n = 0; n < uavs.size(); ++n) {
    if (uavs[n].id == for_uav) continue;
    const Vec2 d = p - uavs[n].position;
    const double r = norm(d);
    if (r == 0.0) continue;
    const double speed = vortex_tangential(gammas[n], r, field.params().r0);
    // Counter-clockwise unit tangent around the other UAV.
    v += Vec2{-d.y / r, d.x / r} * speed;
  }
  return clamp_length(v, field.params().v_max);
}

}  // namespace coordfield
