#pragma once

#include <cmath>
#include <cstdint>

#include "coordfield/geometry.hpp"

namespace coordfield::detail {

inline bool free_cell(const Mask& mask, int i, int j) {
  return mask.contains(i, j) && mask(i, j) == 0;
}

// Derivative along one axis at an unmasked node. Fourth-order central where
// two free neighbours exist on both sides, second-order central with one,
// one-sided first-order against a mask or the boundary, zero if isolated.
inline double axis_derivative(const ScalarLattice& phi, const Mask& mask, int i, int j, int di, int dj,
                              double h) {
  const bool p1 = free_cell(mask, i + di, j + dj);
  const bool m1 = free_cell(mask, i - di, j - dj);
  if (p1 && m1) {
    const bool p2 = free_cell(mask, i + 2 * di, j + 2 * dj);
    const bool m2 = free_cell(mask, i - 2 * di, j - 2 * dj);
    const double fp1 = phi(i + di, j + dj);
    const double fm1 = phi(i - di, j - dj);
    if (p2 && m2) {
      const double fp2 = phi(i + 2 * di, j + 2 * dj);
      const double fm2 = phi(i - 2 * di, j - 2 * dj);
      return (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h);
    }
    return (fp1 - fm1) / (2.0 * h);
  }
  if (p1) return (phi(i + di, j + dj) - phi(i, j)) / h;
  if (m1) return (phi(i, j) - phi(i - di, j - dj)) / h;
  return 0.0;
}

inline Vec2 node_gradient(const ScalarLattice& phi, const Mask& mask, int i, int j, double h) {
  if (!free_cell(mask, i, j)) return {};
  return {axis_derivative(phi, mask, i, j, 1, 0, h), axis_derivative(phi, mask, i, j, 0, 1, h)};
}

// node_gradient over one row, skipping the neighbour tests where the whole
// five-point cross on both axes is free.
inline void gradient_row(const ScalarLattice& phi, const Mask& mask, int j, double h, VectorLattice& out) {
  const int w = mask.width();
  const int hh = mask.height();
  const std::size_t sw = static_cast<std::size_t>(w);
  const std::size_t row = static_cast<std::size_t>(j) * sw;
  const std::uint8_t* m = mask.values().data() + row;
  const double* f = phi.values().data() + row;
  Vec2* o = out.values().data() + row;
  const bool rows_ok = j >= 2 && j + 2 < hh;
  for (int i = 0; i < w; ++i) {
    const bool fast = rows_ok && i >= 2 && i + 2 < w && m[i] == 0 && m[i - 1] == 0 && m[i + 1] == 0 &&
                      m[i - 2] == 0 && m[i + 2] == 0 && m[i - sw] == 0 && m[i + sw] == 0 &&
                      m[i - 2 * sw] == 0 && m[i + 2 * sw] == 0;
    if (!fast) {
      o[i] = node_gradient(phi, mask, i, j, h);
      continue;
    }
    o[i] = {(8.0 * (f[i + 1] - f[i - 1]) - (f[i + 2] - f[i - 2])) / (12.0 * h),
            (8.0 * (f[i + sw] - f[i - sw]) - (f[i + 2 * sw] - f[i - 2 * sw])) / (12.0 * h)};
  }
}

// One row of the explicit velocity update. The 5-point Laplacian treats
// masked and out-of-domain neighbours as zero velocity; masked cells come
// out as zero and every cell is clamped to v_max.
inline void velocity_row(const VectorLattice& vel, const VectorLattice& grad, const Mask& mask, int j,
                         double inv_h2, double nu, double k, double dt, double v_max, VectorLattice& out) {
  const int w = mask.width();
  const int h = mask.height();
  const std::size_t row = static_cast<std::size_t>(j) * static_cast<std::size_t>(w);
  const std::uint8_t* m = mask.values().data() + row;
  const Vec2* v = vel.values().data() + row;
  const Vec2* g = grad.values().data() + row;
  Vec2* o = out.values().data() + row;
  const bool has_up = j + 1 < h;
  const bool has_down = j > 0;
  const double v2 = v_max * v_max;
  for (int i = 0; i < w; ++i) {
    if (m[i] != 0) {
      o[i] = {};
      continue;
    }
    Vec2 sum{};
    if (i + 1 < w && m[i + 1] == 0) sum += v[i + 1];
    if (i > 0 && m[i - 1] == 0) sum += v[i - 1];
    if (has_up && m[i + w] == 0) sum += v[i + w];
    if (has_down && m[i - w] == 0) sum += v[i - w];
    const Vec2 c = v[i];
    const double lx = (sum.x - 4.0 * c.x) * inv_h2;
    const double ly = (sum.y - 4.0 * c.y) * inv_h2;
    Vec2 next{c.x + dt * (nu * lx + k * g[i].x), c.y + dt * (nu * ly + k * g[i].y)};
    const double n2 = next.x * next.x + next.y * next.y;
    if (n2 > v2) next = next * (v_max / std::sqrt(n2));
    o[i] = next;
  }
}

// 1D Gaussian factors exp(-(c_n - centre)^2 / (2 sigma^2)) at the cell
// centres c_n = (n + 0.5) h, n in [0, count).
inline void gaussian_factors(double centre, double sigma, double h, int count, double* out) {
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int n = 0; n < count; ++n) {
    const double d = (n + 0.5) * h - centre;
    out[n] = std::exp(-d * d * inv);
  }
}

}  // namespace coordfield::detail
