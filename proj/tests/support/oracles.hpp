#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the lattice kernels, the stencil helpers or the sampling code.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <vector>

#include "coordfield/geometry.hpp"
#include "coordfield/task.hpp"

namespace oracle {

using coordfield::Role;
using coordfield::Task;
using coordfield::Vec2;

struct Gaussian {
  double x, y, w, sigma;
};

inline std::vector<Gaussian> mixture_of(const std::vector<Task>& tasks, Role type) {
  std::vector<Gaussian> out;
  for (const Task& t : tasks)
    if (t.active() && t.type == type) out.push_back({t.position.x, t.position.y, t.weight, t.sigma});
  return out;
}

// Direct pointwise evaluation of the weighted Gaussian sum.
inline double phi(const std::vector<Gaussian>& g, double x, double y) {
  double s = 0.0;
  for (const auto& c : g) {
    const double r2 = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
    s += c.w * std::exp(-r2 / (2.0 * c.sigma * c.sigma));
  }
  return s;
}

// Analytic gradient of the mixture.
inline Vec2 grad(const std::vector<Gaussian>& g, double x, double y) {
  Vec2 s{};
  for (const auto& c : g) {
    const double r2 = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
    const double e = c.w * std::exp(-r2 / (2.0 * c.sigma * c.sigma)) / (c.sigma * c.sigma);
    s.x += -(x - c.x) * e;
    s.y += -(y - c.y) * e;
  }
  return s;
}

// Largest gradient magnitude a single component can produce; used as the
// floor of the relative-error denominator where the true gradient vanishes.
inline double gradient_scale(const std::vector<Gaussian>& g) {
  double s = 0.0;
  for (const auto& c : g) s += c.w * std::exp(-0.5) / c.sigma;
  return s;
}

inline double tangential(double gamma, double r, double r0) {
  if (r == 0.0) return 0.0;
  return gamma / (2.0 * std::numbers::pi * r) * (1.0 - std::exp(-(r / r0) * (r / r0)));
}

// Brute-force vortex superposition: sum of CCW tangential velocities.
inline Vec2 vortex_sum(const std::vector<Vec2>& centres, const std::vector<double>& gammas, Vec2 p, double r0) {
  Vec2 v{};
  for (std::size_t n = 0; n < centres.size(); ++n) {
    const double dx = p.x - centres[n].x;
    const double dy = p.y - centres[n].y;
    const double r = std::sqrt(dx * dx + dy * dy);
    if (r == 0.0) continue;
    const double s = tangential(gammas[n], r, r0);
    v.x += -dy / r * s;
    v.y += dx / r * s;
  }
  return v;
}

// Dijkstra over the 8-connected lattice with the same move rules as the
// planner (no corner cutting). Returns the distance in cells, or +inf.
inline double dijkstra(const coordfield::Mask& mask, coordfield::Cell from, coordfield::Cell to) {
  const int w = mask.width();
  const int h = mask.height();
  const auto free = [&](int i, int j) { return i >= 0 && j >= 0 && i < w && j < h && mask(i, j) == 0; };
  std::vector<double> dist(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[from.j * w + from.i] = 0.0;
  pq.push({0.0, from.j * w + from.i});
  while (!pq.empty()) {
    auto [d, k] = pq.top();
    pq.pop();
    if (d > dist[k]) continue;
    const int i = k % w;
    const int j = k / w;
    if (i == to.i && j == to.j) return d;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int ni = i + di;
        const int nj = j + dj;
        if (!free(ni, nj)) continue;
        if (di != 0 && dj != 0 && (!free(i + di, j) || !free(i, j + dj))) continue;
        const double nd = d + (di != 0 && dj != 0 ? std::numbers::sqrt2 : 1.0);
        if (nd < dist[nj * w + ni]) {
          dist[nj * w + ni] = nd;
          pq.push({nd, nj * w + ni});
        }
      }
  }
  return std::numeric_limits<double>::infinity();
}

inline double population_stddev(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace oracle
