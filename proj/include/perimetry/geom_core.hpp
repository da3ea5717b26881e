#pragma once

// Vector algebra on finite point sets: support functions, sphere quadrature,
// enclosing/inscribed balls, mean width and the cosine transform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "perimetry/random.hpp"
#include "perimetry/vector.hpp"

namespace perimetry {

// ---------------------------------------------------------------------------
// Surface measures (discrete measures on the unit sphere)
// ---------------------------------------------------------------------------

struct SurfaceAtom {
  Vector normal;  // outer unit normal
  double weight;  // (n-1)-dimensional area carried by this normal
};

/// Discrete surface area measure: the boundary area of a set sorted by outer
/// normal direction. Total mass is the perimeter.
class SurfaceMeasure {
 public:
  SurfaceMeasure() = default;
  explicit SurfaceMeasure(int dim) : dim_(dim) {}
  SurfaceMeasure(int dim, std::vector<SurfaceAtom> atoms) : dim_(dim), atoms_(std::move(atoms)) {}

  int dim() const { return dim_; }
  const std::vector<SurfaceAtom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }

  void add(const Vector& normal, double weight) { atoms_.push_back({normal, weight}); }

  void append(const SurfaceMeasure& other) {
    atoms_.insert(atoms_.end(), other.atoms_.begin(), other.atoms_.end());
  }

  double total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight;
    return s;
  }

  /// Sum of weight * normal. Vanishes for the boundary of any bounded set of
  /// finite perimeter.
  Vector vector_sum() const {
    Vector s(dim_);
    for (const auto& a : atoms_) s += a.weight * a.normal;
    return s;
  }

  SurfaceMeasure reflected() const {
    SurfaceMeasure r(dim_);
    for (const auto& a : atoms_) r.add(-a.normal, a.weight);
    return r;
  }

  SurfaceMeasure scaled(double factor) const {
    SurfaceMeasure r(dim_);
    for (const auto& a : atoms_) r.add(a.normal, a.weight * factor);
    return r;
  }

  /// Throws ValidationError if a normal is not a unit vector (1e-12) or a
  /// weight is negative.
  void validate() const {
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const auto& a = atoms_[i];
      if (a.normal.dim() != dim_) {
        throw ValidationError("SurfaceMeasure: atom " + std::to_string(i) + " has wrong dimension");
      }
      if (std::abs(a.normal.norm() - 1.0) > 1e-12) {
        throw ValidationError("SurfaceMeasure: atom " + std::to_string(i) + " normal is not a unit vector");
      }
      if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) {
        throw ValidationError("SurfaceMeasure: atom " + std::to_string(i) + " has negative weight");
      }
    }
  }

 private:
  int dim_ = 0;
  std::vector<SurfaceAtom> atoms_;
};

// ---------------------------------------------------------------------------
// Sphere quadrature
// ---------------------------------------------------------------------------

struct SphereQuadrature {
  int dim = 0;
  std::vector<Vector> nodes;
  std::vector<double> weights;  // sum to n * kappa_n
};

/// n = 1: the two points of S^0 with unit weights; n = 2: N equally spaced
/// angles; n = 3: N-point spherical Fibonacci lattice with equal weights.
inline SphereQuadrature sphere_quadrature(int n, int N) {
  if (n < 1 || n > 3) throw ValidationError("sphere_quadrature: only n in {1,2,3} is supported");
  if (N < 2) throw ValidationError("sphere_quadrature: need N >= 2 nodes");
  SphereQuadrature q;
  q.dim = n;
  if (n == 1) {
    q.nodes = {Vector{1.0}, Vector{-1.0}};
    q.weights = {1.0, 1.0};
    return q;
  }
  q.nodes.reserve(static_cast<std::size_t>(N));
  if (n == 2) {
    for (int k = 0; k < N; ++k) {
      const double t = 2.0 * std::numbers::pi * k / N;
      q.nodes.push_back(Vector{std::cos(t), std::sin(t)});
    }
    q.weights.assign(static_cast<std::size_t>(N), 2.0 * std::numbers::pi / N);
    return q;
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < N; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / N;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * k;
    Vector v{rho * std::cos(phi), rho * std::sin(phi), z};
    q.nodes.push_back(v / v.norm());
  }
  q.weights.assign(static_cast<std::size_t>(N), 4.0 * std::numbers::pi / N);
  return q;
}

// ---------------------------------------------------------------------------
// Structuring elements
// ---------------------------------------------------------------------------

/// Finite, nonempty point set Q in R^n. Exact duplicates are dropped; the
/// remaining points keep their input order.
class StructuringElement {
 public:
  StructuringElement() = default;

  explicit StructuringElement(std::vector<Vector> points) {
    if (points.empty()) throw ValidationError("StructuringElement: empty point set");
    dim_ = points.front().dim();
    for (const auto& p : points) {
      if (p.dim() != dim_) throw ValidationError("StructuringElement: points of mixed dimension");
      if (!p.is_finite()) throw ValidationError("StructuringElement: non-finite coordinate");
      if (std::find(points_.begin(), points_.end(), p) == points_.end()) points_.push_back(p);
    }
  }

  StructuringElement(std::initializer_list<Vector> points)
      : StructuringElement(std::vector<Vector>(points)) {}

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<Vector>& points() const { return points_; }

  bool contains_origin() const {
    return std::find(points_.begin(), points_.end(), Vector(dim_)) != points_.end();
  }

  bool is_origin_only() const {
    return std::all_of(points_.begin(), points_.end(), [](const Vector& p) { return p.norm2() == 0.0; });
  }

  StructuringElement with_origin() const {
    auto pts = points_;
    pts.push_back(Vector(dim_));
    return StructuringElement(std::move(pts));
  }

  StructuringElement negated() const {
    std::vector<Vector> pts;
    for (const auto& p : points_) pts.push_back(-p);
    return StructuringElement(std::move(pts));
  }

  StructuringElement translated(const Vector& x) const {
    std::vector<Vector> pts;
    for (const auto& p : points_) pts.push_back(p + x);
    return StructuringElement(std::move(pts));
  }

  StructuringElement scaled(double s) const {
    std::vector<Vector> pts;
    for (const auto& p : points_) pts.push_back(p * s);
    return StructuringElement(std::move(pts));
  }

  double max_norm() const {
    double m = 0.0;
    for (const auto& p : points_) m = std::max(m, p.norm());
    return m;
  }

 private:
  int dim_ = 0;
  std::vector<Vector> points_;
};

/// h(Q, u) = max over q in Q of u . q.
inline double support(const StructuringElement& Q, const Vector& u) {
  if (Q.size() == 0) throw ValidationError("support: empty structuring element");
  require_same_dim(Q.points().front(), u, "support");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& q : Q.points()) best = std::max(best, dot(u, q));
  return best;
}

/// h(Q u {0}, u) = max(h(Q, u), 0).
inline double support_pos(const StructuringElement& Q, const Vector& u) {
  return std::max(0.0, support(Q, u));
}

inline double cosine_transform(const SurfaceMeasure& S, const Vector& u) {
  double s = 0.0;
  for (const auto& a : S.atoms()) s += a.weight * std::abs(dot(u, a.normal));
  return s;
}

/// Convex hull in the plane, counter-clockwise, collinear points removed.
inline std::vector<Vector> convex_hull_2d(std::vector<Vector> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](const Vector& o, const Vector& a, const Vector& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Vector> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

/// Quadrature approximation of the mean width b(conv(Q u {0})).
inline double mean_width(const StructuringElement& Q, const SphereQuadrature& quad) {
  if (quad.dim != Q.dim()) throw ValidationError("mean_width: quadrature dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < quad.nodes.size(); ++i) s += quad.weights[i] * support_pos(Q, quad.nodes[i]);
  return 2.0 * s / unit_sphere_area(Q.dim());
}

/// Mean width of conv(Q u {0}); exact for n <= 2 (perimeter / pi in the
/// plane), fine Fibonacci quadrature for n = 3.
inline double mean_width(const StructuringElement& Q) {
  const int n = Q.dim();
  if (n == 1) {
    return support_pos(Q, Vector{1.0}) + support_pos(Q, Vector{-1.0});
  }
  if (n == 2) {
    auto pts = Q.points();
    pts.push_back(Vector(2));
    const auto hull = convex_hull_2d(pts);
    if (hull.size() < 2) return 0.0;
    double per = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) per += distance(hull[i], hull[(i + 1) % hull.size()]);
    if (hull.size() == 2) per = 2.0 * distance(hull[0], hull[1]);
    return per / std::numbers::pi;
  }
  return mean_width(Q, sphere_quadrature(n, 40000));
}

// ---------------------------------------------------------------------------
// Small dense linear algebra
// ---------------------------------------------------------------------------

/// Solves the k x k system M x = rhs by Gaussian elimination with partial
/// pivoting. Returns nullopt for (numerically) singular M.
inline std::optional<std::vector<double>> solve_linear(std::vector<std::vector<double>> M, std::vector<double> rhs) {
  const std::size_t k = rhs.size();
  double scale = 0.0;
  for (const auto& row : M)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return std::nullopt;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
    if (std::abs(M[piv][col]) <= 1e-13 * scale) return std::nullopt;
    std::swap(M[piv], M[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = col + 1; r < k; ++r) {
      const double f = M[r][col] / M[col][col];
      for (std::size_t c = col; c < k; ++c) M[r][c] -= f * M[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(k);
  for (std::size_t i = k; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t c = i + 1; c < k; ++c) s -= M[i][c] * x[c];
    x[i] = s / M[i][i];
  }
  return x;
}

struct LpSolution {
  bool bounded = true;
  double value = 0.0;
  std::vector<double> x;
};

/// Maximizes c.x subject to A x <= b, x >= 0, for b >= 0 (the origin is
/// feasible, so no phase one is needed). Dense tableau with Bland's rule.
inline LpSolution simplex_maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                                   const std::vector<double>& c) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  const std::size_t cols = n + m + 1;
  std::vector<double> T((m + 1) * cols, 0.0);
  auto at = [&](std::size_t r, std::size_t col) -> double& { return T[r * cols + col]; };
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (b[i] < 0.0) throw ValidationError("simplex_maximize: right-hand side must be nonnegative");
    for (std::size_t j = 0; j < n; ++j) at(i, j) = A[i][j];
    at(i, n + i) = 1.0;
    at(i, cols - 1) = b[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) at(m, j) = -c[j];
  constexpr double eps = 1e-12;
  for (std::size_t iter = 0; iter < 100000; ++iter) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      if (at(m, j) < -eps) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;
    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = at(i, enter);
      if (a > eps) {
        const double ratio = at(i, cols - 1) / a;
        if (ratio < best - 1e-15 || (ratio <= best + 1e-15 && leave < m && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave == m) return LpSolution{false, std::numeric_limits<double>::infinity(), {}};
    const double p = at(leave, enter);
    for (std::size_t col = 0; col < cols; ++col) at(leave, col) /= p;
    for (std::size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (std::size_t col = 0; col < cols; ++col) at(r, col) -= f * at(leave, col);
    }
    basis[leave] = enter;
  }
  LpSolution sol;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) sol.x[basis[i]] = at(i, cols - 1);
  sol.value = at(m, cols - 1);
  return sol;
}

// ---------------------------------------------------------------------------
// Enclosing and inscribed balls
// ---------------------------------------------------------------------------

namespace detail {

struct BallFit {
  Vector center;
  double radius2 = -1.0;  // negative: empty ball
};

inline BallFit ball_through(const std::vector<Vector>& R, int dim) {
  if (R.empty()) return BallFit{Vector(dim), -1.0};
  if (R.size() == 1) return BallFit{R[0], 0.0};
  const std::size_t k = R.size() - 1;
  std::vector<std::vector<double>> G(k, std::vector<double>(k));
  std::vector<double> rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    const Vector di = R[i + 1] - R[0];
    for (std::size_t j = 0; j < k; ++j) G[i][j] = 2.0 * dot(di, R[j + 1] - R[0]);
    rhs[i] = di.norm2();
  }
  if (auto lam = solve_linear(G, rhs)) {
    Vector c = R[0];
    for (std::size_t i = 0; i < k; ++i) c += (*lam)[i] * (R[i + 1] - R[0]);
    double r2 = 0.0;
    for (const auto& p : R) r2 = std::max(r2, (p - c).norm2());
    return BallFit{c, r2};
  }
  // Affinely dependent support set: the farthest pair determines the ball.
  std::size_t a = 0, b = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < R.size(); ++i)
    for (std::size_t j = i + 1; j < R.size(); ++j)
      if ((R[i] - R[j]).norm2() > best) {
        best = (R[i] - R[j]).norm2();
        a = i;
        b = j;
      }
  const Vector c = 0.5 * (R[a] + R[b]);
  double r2 = 0.0;
  for (const auto& p : R) r2 = std::max(r2, (p - c).norm2());
  return BallFit{c, r2};
}

inline bool in_ball(const BallFit& B, const Vector& p, double scale2) {
  return B.radius2 >= 0.0 && (p - B.center).norm2() <= B.radius2 + 1e-12 * scale2;
}

inline BallFit welzl(std::vector<Vector>& P, std::size_t n, std::vector<Vector>& R, int dim, double scale2) {
  if (n == 0 || static_cast<int>(R.size()) == dim + 1) return ball_through(R, dim);
  const Vector p = P[n - 1];
  BallFit D = welzl(P, n - 1, R, dim, scale2);
  if (in_ball(D, p, scale2)) return D;
  R.push_back(p);
  D = welzl(P, n - 1, R, dim, scale2);
  R.pop_back();
  return D;
}

}  // namespace detail

/// Radius of the smallest ball containing Q u {0} (Welzl's algorithm; exact
/// up to rounding in every dimension).
inline double circumradius(const StructuringElement& Q) {
  auto P = Q.with_origin().points();
  double scale2 = 0.0;
  for (const auto& p : P) scale2 = std::max(scale2, p.norm2());
  if (scale2 == 0.0) return 0.0;
  // Deterministic shuffle keeps the expected running time linear.
  CounterRng rng(0x5eedULL, P.size());
  for (std::size_t i = P.size(); i > 1; --i) std::swap(P[i - 1], P[rng() % i]);
  std::vector<Vector> R;
  const auto B = detail::welzl(P, P.size(), R, Q.dim(), scale2);
  return std::sqrt(std::max(0.0, B.radius2));
}

struct Inball {
  double radius = 0.0;
  Vector center;
};

/// Orthonormal basis of span(points), modified Gram-Schmidt.
inline std::vector<Vector> span_basis(const std::vector<Vector>& points, double rel_tol = 1e-10) {
  std::vector<Vector> basis;
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, p.norm());
  if (scale == 0.0) return basis;
  for (const auto& p : points) {
    Vector v = p;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& e : basis) v -= dot(v, e) * e;
    if (v.norm() > rel_tol * scale) basis.push_back(v / v.norm());
  }
  return basis;
}

/// Relative inradius of K = conv(Q u {0}) inside L = span(Q), with an
/// incenter. Solved as a linear program over the directions `dirs` projected
/// into L; the LP optimum is then lowered by the Lipschitz error of the
/// direction sampling, so the returned radius never exceeds the true one and
/// converges to it as `dirs` is refined.
inline Inball inradius_in_span(const StructuringElement& Q, const SphereQuadrature& dirs) {
  const int n = Q.dim();
  if (dirs.dim != n) throw ValidationError("inradius_in_span: direction set dimension mismatch");
  const auto basis = span_basis(Q.points());
  const int k = static_cast<int>(basis.size());
  if (k == 0) return Inball{0.0, Vector(n)};

  std::vector<Vector> pts;  // coordinates in L
  double hull_radius = 0.0;
  for (const auto& q : Q.points()) {
    Vector c(k);
    for (int i = 0; i < k; ++i) c[i] = dot(q, basis[static_cast<std::size_t>(i)]);
    hull_radius = std::max(hull_radius, c.norm());
    pts.push_back(c);
  }

  std::vector<Vector> us;
  if (k == 1) {
    us = {Vector{1.0}, Vector{-1.0}};
  } else {
    for (const auto& node : dirs.nodes) {
      Vector u(k);
      for (int i = 0; i < k; ++i) u[i] = dot(node, basis[static_cast<std::size_t>(i)]);
      if (u.norm() > 1e-9) us.push_back(u / u.norm());
    }
  }

  // Chordal covering radius of the projected directions on S^{k-1}.
  double cover = 0.0;
  if (k == 2) {
    std::vector<double> ang;
    for (const auto& u : us) ang.push_back(std::atan2(u[1], u[0]));
    std::sort(ang.begin(), ang.end());
    double gap = ang.empty() ? 2.0 * std::numbers::pi : 0.0;
    for (std::size_t i = 0; i < ang.size(); ++i) {
      const double next = i + 1 < ang.size() ? ang[i + 1] : ang[0] + 2.0 * std::numbers::pi;
      gap = std::max(gap, next - ang[i]);
    }
    cover = 2.0 * std::sin(std::min(gap, 2.0 * std::numbers::pi) / 4.0);
  } else if (k >= 3) {
    const auto probe = sphere_quadrature(3, 20000);
    for (const auto& t : probe.nodes) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& u : us) best = std::min(best, (t - u).norm2());
      cover = std::max(cover, std::sqrt(best));
    }
    cover += 3.6 / std::sqrt(20000.0);
  }

  // Variables: y+ (k), y- (k), s.  u.y + s <= h(K, u).
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (const auto& u : us) {
    std::vector<double> row(static_cast<std::size_t>(2 * k + 1));
    for (int i = 0; i < k; ++i) {
      row[static_cast<std::size_t>(i)] = u[i];
      row[static_cast<std::size_t>(k + i)] = -u[i];
    }
    row[static_cast<std::size_t>(2 * k)] = 1.0;
    double h = 0.0;
    for (const auto& p : pts) h = std::max(h, dot(u, p));
    A.push_back(std::move(row));
    b.push_back(h);
  }
  std::vector<double> c(static_cast<std::size_t>(2 * k + 1), 0.0);
  c.back() = 1.0;
  const auto sol = simplex_maximize(A, b, c);
  if (!sol.bounded) throw ValidationError("inradius_in_span: direction set does not bound the hull");

  Vector y(k);
  for (int i = 0; i < k; ++i) y[i] = sol.x[static_cast<std::size_t>(i)] - sol.x[static_cast<std::size_t>(k + i)];
  const double s = std::max(0.0, sol.value - (hull_radius + y.norm()) * cover);
  Vector center(n);
  for (int i = 0; i < k; ++i) center += y[i] * basis[static_cast<std::size_t>(i)];
  return Inball{s, center};
}

// ---------------------------------------------------------------------------
// Rotations (n <= 3)
// ---------------------------------------------------------------------------

struct Rotation {
  int dim = 0;
  std::array<double, 9> m{};  // row-major, dim x dim block used

  Vector apply(const Vector& v) const {
    Vector r(dim);
    for (int i = 0; i < dim; ++i) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += m[static_cast<std::size_t>(3 * i + j)] * v[j];
      r[i] = s;
    }
    return r;
  }

  StructuringElement apply(const StructuringElement& Q) const {
    std::vector<Vector> pts;
    for (const auto& p : Q.points()) pts.push_back(apply(p));
    return StructuringElement(std::move(pts));
  }

  static Rotation planar(double angle) {
    Rotation R;
    R.dim = 2;
    R.m = {std::cos(angle), -std::sin(angle), 0, std::sin(angle), std::cos(angle), 0, 0, 0, 1};
    return R;
  }
};

/// Haar-distributed rotation of R^dim, dim in {1, 2, 3}.
inline Rotation random_rotation(int dim, CounterRng& rng) {
  if (dim == 1) {
    Rotation R;
    R.dim = 1;
    R.m[0] = 1.0;
    return R;
  }
  if (dim == 2) return Rotation::planar(2.0 * std::numbers::pi * rng.uniform());
  if (dim != 3) throw ValidationError("random_rotation: only n <= 3 supported");
  // Shoemake's uniform unit quaternion.
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double w = a * std::sin(2.0 * std::numbers::pi * u2), x = a * std::cos(2.0 * std::numbers::pi * u2);
  const double y = b * std::sin(2.0 * std::numbers::pi * u3), z = b * std::cos(2.0 * std::numbers::pi * u3);
  Rotation R;
  R.dim = 3;
  R.m = {1 - 2 * (y * y + z * z), 2 * (x * y - z * w),     2 * (x * z + y * w),
         2 * (x * y + z * w),     1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
         2 * (x * z - y * w),     2 * (y * z + x * w),     1 - 2 * (x * x + y * y)};
  return R;
}

}  // namespace perimetry
