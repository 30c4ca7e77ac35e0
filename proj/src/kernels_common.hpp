#pragma once

#include <vector>

#include "coordfield/detail/stencil.hpp"
#include "coordfield/field.hpp"

namespace coordfield::detail {

// Separable Gaussian tables for the active tasks of one role. Row t of `fx`
// holds the x factors of task t, row t of `fy` the y factors.
struct PhiTables {
  std::vector<double> weight;
  std::vector<double> fx;
  std::vector<double> fy;
  std::vector<double> wfx;  // weight * fx
  int width = 0;
  int height = 0;

  std::size_t count() const { return weight.size(); }

  PhiTables(std::span<const Task> tasks, int w, int h, double cell_size, Role type) : width(w), height(h) {
    for (const Task& t : tasks) {
      if (!t.active() || t.type != type) continue;
      weight.push_back(t.weight);
      fx.resize(fx.size() + static_cast<std::size_t>(w));
      fy.resize(fy.size() + static_cast<std::size_t>(h));
      gaussian_factors(t.position.x, t.sigma, cell_size, w, fx.data() + fx.size() - w);
      gaussian_factors(t.position.y, t.sigma, cell_size, h, fy.data() + fy.size() - h);
    }
    wfx.resize(fx.size());
    for (std::size_t t = 0; t < weight.size(); ++t)
      for (std::size_t i = 0; i < static_cast<std::size_t>(w); ++i)
        wfx[t * static_cast<std::size_t>(w) + i] = weight[t] * fx[t * static_cast<std::size_t>(w) + i];
  }

  // Tasks are summed in id order; the order is fixed per cell. Masked cells
  // are left at zero.
  void row(int j, const Mask& mask, double* out) const {
    const std::size_t w = static_cast<std::size_t>(width);
    const std::uint8_t* m = mask.values().data() + static_cast<std::size_t>(j) * w;
    for (std::size_t i = 0; i < w; ++i) out[i] = 0.0;
    for (std::size_t t = 0; t < weight.size(); ++t) {
      const double* wx = wfx.data() + t * w;
      const double y = fy[t * static_cast<std::size_t>(height) + static_cast<std::size_t>(j)];
      for (std::size_t i = 0; i < w; ++i) out[i] += wx[i] * y;
    }
    for (std::size_t i = 0; i < w; ++i)
      if (m[i] != 0) out[i] = 0.0;
  }
};

}  // namespace coordfield::detail
