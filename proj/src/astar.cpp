#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "coordfield/baselines.hpp"

namespace coordfield {

double Path::cells_length() const { return straight + diagonal * std::numbers::sqrt2; }

namespace {

struct Move {
  int di;
  int dj;
  bool diagonal;
};

constexpr std::array<Move, 8> kMoves{{{1, 0, false},
                                      {-1, 0, false},
                                      {0, 1, false},
                                      {0, -1, false},
                                      {1, 1, true},
                                      {-1, 1, true},
                                      {1, -1, true},
                                      {-1, -1, true}}};

bool open_cell(const Mask& m, int i, int j) { return m.contains(i, j) && m(i, j) == 0; }

// Diagonal moves may not squeeze between two blocked orthogonal neighbours
// or clip a single blocked corner.
bool can_move(const Mask& m, int i, int j, const Move& mv) {
  if (!open_cell(m, i + mv.di, j + mv.dj)) return false;
  if (!mv.diagonal) return true;
  return open_cell(m, i + mv.di, j) && open_cell(m, i, j + mv.dj);
}

}  // namespace

std::optional<Path> plan_astar(const Mask& mask, Cell from, Cell to) {
  if (!open_cell(mask, from.i, from.j) || !open_cell(mask, to.i, to.j))
    throw std::invalid_argument("plan_astar: endpoint is blocked or outside the map");

  const int w = mask.width();
  const auto idx = [w](int i, int j) { return static_cast<std::size_t>(j) * w + i; };
  const std::size_t n = mask.size();
  // g is kept as exact move counts so equal-length paths compare equal.
  std::vector<int> g_straight(n, -1);
  std::vector<int> g_diag(n, -1);
  std::vector<std::int64_t> parent(n, -1);
  std::vector<char> closed(n, 0);
  const auto g_of = [&](std::size_t k) { return g_straight[k] + g_diag[k] * std::numbers::sqrt2; };
  const auto h_of = [&](int i, int j) { return std::hypot(double(i - to.i), double(j - to.j)); };

  // (f, y, x): smaller f first, then smaller row, then smaller column.
  using Key = std::tuple<double, int, int>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> open;
  g_straight[idx(from.i, from.j)] = 0;
  g_diag[idx(from.i, from.j)] = 0;
  open.emplace(h_of(from.i, from.j), from.j, from.i);

  while (!open.empty()) {
    const auto [f, j, i] = open.top();
    open.pop();
    const std::size_t k = idx(i, j);
    if (closed[k]) continue;
    if (f > g_of(k) + h_of(i, j) + 1e-9) continue;  // stale entry
    closed[k] = 1;
    if (i == to.i && j == to.j) {
      Path path;
      path.straight = g_straight[k];
      path.diagonal = g_diag[k];
      for (std::int64_t c = static_cast<std::int64_t>(k); c >= 0; c = parent[c])
        path.cells.push_back({static_cast<int>(c % w), static_cast<int>(c / w)});
      std::reverse(path.cells.begin(), path.cells.end());
      return path;
    }
    for (const Move& mv : kMoves) {
      if (!can_move(mask, i, j, mv)) continue;
      const int ni = i + mv.di;
      const int nj = j + mv.dj;
      const std::size_t nk = idx(ni, nj);
      if (closed[nk]) continue;
      const int s = g_straight[k] + (mv.diagonal ? 0 : 1);
      const int d = g_diag[k] + (mv.diagonal ? 1 : 0);
      const double g = s + d * std::numbers::sqrt2;
      if (g_straight[nk] >= 0 && !(g < g_of(nk) - 1e-12)) continue;
      g_straight[nk] = s;
      g_diag[nk] = d;
      parent[nk] = static_cast<std::int64_t>(k);
      open.emplace(g + h_of(ni, nj), nj, ni);
    }
  }
  return std::nullopt;
}

std::optional<Path> plan_astar(const WorldMap& world, Vec2 from, Vec2 to) {
  const auto a = world.cell_of(from);
  const auto b = world.cell_of(to);
  if (!a || !b) throw std::invalid_argument("plan_astar: endpoint outside the map");
  return plan_astar(world.mask(), *a, *b);
}

DistanceMap::DistanceMap(const Mask& mask, Cell source)
    : dist_(mask.width(), mask.height(), std::numeric_limits<double>::infinity()) {
  if (!open_cell(mask, source.i, source.j)) return;
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const int w = mask.width();
  dist_(source.i, source.j) = 0.0;
  pq.emplace(0.0, dist_.index(source.i, source.j));
  while (!pq.empty()) {
    const auto [d, k] = pq.top();
    pq.pop();
    if (d > dist_[k]) continue;
    const int i = static_cast<int>(k % w);
    const int j = static_cast<int>(k / w);
    for (const Move& mv : kMoves) {
      if (!can_move(mask, i, j, mv)) continue;
      const double nd = d + (mv.diagonal ? std::numbers::sqrt2 : 1.0);
      double& slot = dist_(i + mv.di, j + mv.dj);
      if (nd < slot) {
        slot = nd;
        pq.emplace(nd, dist_.index(i + mv.di, j + mv.dj));
      }
    }
  }
}

double DistanceCache::distance(const Task& t, Vec2 p) {
  auto it = maps_.find(t.id);
  if (it == maps_.end()) {
    const auto c = world_->cell_of(t.position);
    if (!c) return std::numeric_limits<double>::infinity();
    it = maps_.emplace(t.id, DistanceMap(world_->mask(), *c)).first;
  }
  const auto c = world_->cell_of(p);
  if (!c) return std::numeric_limits<double>::infinity();
  return it->second.at(*c) * world_->cell_size();
}

}  // namespace coordfield
