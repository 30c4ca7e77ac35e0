#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace coordfield {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend Vec2 operator*(double s, Vec2 a) { return {a.x * s, a.y * s}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }
inline double squared_distance(Vec2 a, Vec2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Scales `v` down so that its length does not exceed `limit`.
inline Vec2 clamp_length(Vec2 v, double limit) {
  const double n = norm(v);
  if (n > limit && n > 0.0) return v * (limit / n);
  return v;
}

struct Cell {
  int i = 0;  // column (x)
  int j = 0;  // row (y)
  friend bool operator==(Cell, Cell) = default;
};

/// Dense row-major 2D lattice. Element (i, j) sits at index j * width + i.
template <typename T>
class Lattice {
 public:
  Lattice() = default;
  Lattice(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 1 || height < 1) throw std::invalid_argument("lattice dimensions must be >= 1");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  bool contains(int i, int j) const { return i >= 0 && j >= 0 && i < width_ && j < height_; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(i);
  }

  T& operator()(int i, int j) { return data_[index(i, j)]; }
  const T& operator()(int i, int j) const { return data_[index(i, j)]; }
  T& operator[](std::size_t k) { return data_[k]; }
  const T& operator[](std::size_t k) const { return data_[k]; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  template <typename U>
  bool same_shape(const Lattice<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Obstacle lattice: non-zero marks a blocked (building) cell.
using Mask = Lattice<std::uint8_t>;
using ScalarLattice = Lattice<double>;
using VectorLattice = Lattice<Vec2>;

}  // namespace coordfield
