#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace perimetry {

/// Input that fails a documented precondition or schema (CLI exit code 2).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A sampling budget that cannot reach the requested precision (CLI exit code 3).
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kMaxDim = 8;

// Small fixed-capacity point/direction in R^n, n <= kMaxDim.
class Vector {
 public:
  Vector() = default;

  explicit Vector(int dim) : dim_(dim) {
    if (dim < 0 || dim > kMaxDim) {
      throw ValidationError("Vector: dimension " + std::to_string(dim) + " outside [0, " +
                            std::to_string(kMaxDim) + "]");
    }
  }

  Vector(std::initializer_list<double> coords) : Vector(static_cast<int>(coords.size())) {
    std::copy(coords.begin(), coords.end(), c_.begin());
  }

  static Vector from(std::span<const double> coords) {
    Vector v(static_cast<int>(coords.size()));
    std::copy(coords.begin(), coords.end(), v.c_.begin());
    return v;
  }

  static Vector unit(int dim, int axis) {
    Vector v(dim);
    v[axis] = 1.0;
    return v;
  }

  int dim() const { return dim_; }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

  std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  Vector& operator+=(const Vector& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Vector& operator-=(const Vector& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Vector& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }

  friend Vector operator+(Vector a, const Vector& b) { return a += b; }
  friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
  friend Vector operator*(Vector a, double s) { return a *= s; }
  friend Vector operator*(double s, Vector a) { return a *= s; }
  friend Vector operator/(Vector a, double s) { return a *= 1.0 / s; }
  friend Vector operator-(Vector a) { return a *= -1.0; }

  friend bool operator==(const Vector& a, const Vector& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }

  double norm2() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * c_[i];
    return s;
  }
  double norm() const { return std::sqrt(norm2()); }

  bool is_finite() const {
    for (int i = 0; i < dim_; ++i)
      if (!std::isfinite(c_[i])) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline void require_same_dim(const Vector& a, const Vector& b, const char* where) {
  if (a.dim() != b.dim()) {
    throw ValidationError(std::string(where) + ": dimension mismatch (" + std::to_string(a.dim()) +
                          " vs " + std::to_string(b.dim()) + ")");
  }
}

inline double dot(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double distance(const Vector& a, const Vector& b) { return (a - b).norm(); }

inline Vector normalized(const Vector& v) {
  const double n = v.norm();
  if (n == 0.0) throw ValidationError("normalized: zero vector");
  return v / n;
}

/// Volume of the unit ball in R^k, pi^{k/2} / Gamma(k/2 + 1).
inline double unit_ball_volume(int k) {
  static const std::array<double, 65> table = [] {
    std::array<double, 65> t{};
    for (int i = 0; i < static_cast<int>(t.size()); ++i) {
      t[static_cast<std::size_t>(i)] =
          std::pow(std::numbers::pi, 0.5 * i) / std::tgamma(0.5 * i + 1.0);
    }
    return t;
  }();
  if (k < 0 || k >= static_cast<int>(table.size())) {
    throw ValidationError("unit_ball_volume: dimension out of range");
  }
  return table[static_cast<std::size_t>(k)];
}

/// Surface area of the unit sphere S^{n-1}, n * kappa_n.
inline double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

// Axis-aligned box [lo, hi].
struct Box {
  Vector lo;
  Vector hi;

  int dim() const { return lo.dim(); }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < lo.dim(); ++i) v *= std::max(0.0, hi[i] - lo[i]);
    return v;
  }

  bool contains(const Vector& x) const {
    for (int i = 0; i < lo.dim(); ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }

  Box inflated(double m) const {
    Box b = *this;
    for (int i = 0; i < lo.dim(); ++i) {
      b.lo[i] -= m;
      b.hi[i] += m;
    }
    return b;
  }

  Box united(const Box& o) const {
    Box b = *this;
    for (int i = 0; i < lo.dim(); ++i) {
      b.lo[i] = std::min(b.lo[i], o.lo[i]);
      b.hi[i] = std::max(b.hi[i], o.hi[i]);
    }
    return b;
  }

  Box translated(const Vector& y) const { return Box{lo + y, hi + y}; }
};

}  // namespace perimetry
