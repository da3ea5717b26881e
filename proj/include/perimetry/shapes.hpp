#pragma once

// Analytic test sets: convex polytopes (n <= 3), balls, and finite disjoint
// unions of those, with exact membership, volume and surface area measure.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "perimetry/geom_core.hpp"
#include "perimetry/vector.hpp"

namespace perimetry {

struct Halfspace {
  Vector normal;  // unit outer normal
  double offset;  // {x : normal . x <= offset}
};

inline Vector cross3(const Vector& a, const Vector& b) {
  return Vector{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

class Polytope {
 public:
  /// Bounded, full-dimensional intersection of half-spaces in R^n, n <= 3.
  /// Redundant half-spaces are dropped. Throws ValidationError otherwise.
  static Polytope from_halfspaces(int dim, const std::vector<Halfspace>& hs) {
    auto p = build(dim, hs, true);
    return std::move(*p);
  }

  /// Like from_halfspaces but returns nullopt for empty, lower-dimensional or
  /// unbounded intersections instead of throwing.
  static std::optional<Polytope> try_from_halfspaces(int dim, const std::vector<Halfspace>& hs) {
    return build(dim, hs, false);
  }

  /// Convex hull of a point set (n <= 3); must be full-dimensional.
  static Polytope from_vertices(const std::vector<Vector>& pts) {
    if (pts.empty()) throw ValidationError("Polytope: empty vertex list");
    const int n = pts.front().dim();
    for (const auto& p : pts) {
      if (p.dim() != n) throw ValidationError("Polytope: vertices of mixed dimension");
      if (!p.is_finite()) throw ValidationError("Polytope: non-finite vertex coordinate");
    }
    std::vector<Halfspace> hs;
    if (n == 1) {
      double lo = pts[0][0], hi = pts[0][0];
      for (const auto& p : pts) {
        lo = std::min(lo, p[0]);
        hi = std::max(hi, p[0]);
      }
      hs = {{Vector{1.0}, hi}, {Vector{-1.0}, -lo}};
    } else if (n == 2) {
      const auto hull = convex_hull_2d(pts);
      if (hull.size() < 3) throw ValidationError("Polytope: vertices are collinear");
      for (std::size_t i = 0; i < hull.size(); ++i) {
        const Vector& a = hull[i];
        const Vector& b = hull[(i + 1) % hull.size()];
        const Vector nrm = normalized(Vector{b[1] - a[1], a[0] - b[0]});
        hs.push_back({nrm, dot(nrm, a)});
      }
    } else if (n == 3) {
      double scale = 0.0;
      for (const auto& p : pts) scale = std::max(scale, p.norm());
      const double tol = 1e-10 * (1.0 + scale);
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
          for (std::size_t k = j + 1; k < pts.size(); ++k) {
            Vector c = cross3(pts[j] - pts[i], pts[k] - pts[i]);
            if (c.norm() <= 1e-12 * (1.0 + scale * scale)) continue;
            c = c / c.norm();
            const double off = dot(c, pts[i]);
            bool below = true, above = true;
            for (const auto& p : pts) {
              const double s = dot(c, p) - off;
              if (s > tol) below = false;
              if (s < -tol) above = false;
            }
            if (below) hs.push_back({c, off});
            if (above) hs.push_back({-c, -off});
          }
    } else {
      throw ValidationError("Polytope: only dimensions 1, 2, 3 are supported");
    }
    return from_halfspaces(n, hs);
  }

  static Polytope box(const Vector& lo, const Vector& hi) {
    require_same_dim(lo, hi, "Polytope::box");
    std::vector<Halfspace> hs;
    for (int i = 0; i < lo.dim(); ++i) {
      if (!(hi[i] > lo[i])) throw ValidationError("Polytope::box: need lo < hi in every coordinate");
      hs.push_back({Vector::unit(lo.dim(), i), hi[i]});
      hs.push_back({-Vector::unit(lo.dim(), i), -lo[i]});
    }
    return from_halfspaces(lo.dim(), hs);
  }

  int dim() const { return dim_; }
  const std::vector<Halfspace>& facets() const { return facets_; }
  const std::vector<double>& facet_areas() const { return areas_; }
  const std::vector<Vector>& vertices() const { return vertices_; }
  double volume() const { return volume_; }
  const Box& bbox() const { return bbox_; }
  bool is_axis_box() const { return axis_box_; }

  bool contains(const Vector& x) const {
    require_same_dim(x, bbox_.lo, "Polytope::contains");
    for (const auto& h : facets_)
      if (dot(h.normal, x) > h.offset + tol_) return false;
    return true;
  }

  double support(const Vector& u) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices_) best = std::max(best, dot(u, v));
    return best;
  }

  Polytope translated(const Vector& y) const {
    Polytope p = *this;
    for (auto& h : p.facets_) h.offset += dot(h.normal, y);
    for (auto& v : p.vertices_) v += y;
    p.bbox_ = bbox_.translated(y);
    return p;
  }

  Polytope scaled(double c) const {
    Polytope p = *this;
    for (auto& h : p.facets_) h.offset *= c;
    for (auto& v : p.vertices_) v *= c;
    for (auto& a : p.areas_) a *= std::pow(c, dim_ - 1);
    p.volume_ *= std::pow(c, dim_);
    p.bbox_ = Box{bbox_.lo * c, bbox_.hi * c};
    p.tol_ *= c;
    return p;
  }

  SurfaceMeasure surface_measure() const {
    SurfaceMeasure S(dim_);
    for (std::size_t i = 0; i < facets_.size(); ++i) S.add(facets_[i].normal, areas_[i]);
    return S;
  }

 private:
  static std::optional<Polytope> build(int dim, const std::vector<Halfspace>& input, bool strict) {
    auto fail = [&](const std::string& msg) -> std::optional<Polytope> {
      if (strict) throw ValidationError("Polytope: " + msg);
      return std::nullopt;
    };
    if (dim < 1 || dim > 3) return fail("only dimensions 1, 2, 3 are supported");

    // Normalize, then keep the tightest offset per normal direction.
    std::vector<Halfspace> hs;
    double scale = 0.0;
    for (const auto& h : input) {
      if (h.normal.dim() != dim) return fail("half-space of wrong dimension");
      const double len = h.normal.norm();
      if (!(len > 0.0) || !std::isfinite(h.offset) || !h.normal.is_finite()) {
        return fail("degenerate half-space normal");
      }
      Halfspace u{h.normal / len, h.offset / len};
      scale = std::max(scale, std::abs(u.offset));
      auto same = std::find_if(hs.begin(), hs.end(), [&](const Halfspace& o) { return distance(o.normal, u.normal) < 1e-12; });
      if (same == hs.end()) {
        hs.push_back(u);
      } else {
        same->offset = std::min(same->offset, u.offset);
      }
    }
    if (!positively_spanning(dim, hs)) return fail("half-spaces do not bound a region (unbounded polytope)");

    const double tol = 1e-10 * (1.0 + scale);
    Polytope P;
    P.dim_ = dim;
    P.tol_ = tol;

    // Vertices: feasible intersections of n bounding hyperplanes.
    std::vector<std::size_t> idx(static_cast<std::size_t>(dim));
    auto try_vertex = [&](const std::vector<std::size_t>& sel) {
      std::vector<std::vector<double>> M;
      std::vector<double> rhs;
      for (auto s : sel) {
        M.emplace_back(hs[s].normal.coords().begin(), hs[s].normal.coords().end());
        rhs.push_back(hs[s].offset);
      }
      const auto x = solve_linear(M, rhs);
      if (!x) return;
      const Vector v = Vector::from(*x);
      for (const auto& h : hs)
        if (dot(h.normal, v) > h.offset + tol) return;
      for (const auto& w : P.vertices_)
        if (distance(w, v) <= tol) return;
      P.vertices_.push_back(v);
    };
    const std::size_t m = hs.size();
    if (dim == 1) {
      for (std::size_t a = 0; a < m; ++a) try_vertex({a});
    } else if (dim == 2) {
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) try_vertex({a, b});
    } else {
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
          for (std::size_t c = b + 1; c < m; ++c) try_vertex({a, b, c});
    }
    if (static_cast<int>(P.vertices_.size()) < dim + 1) return fail("empty or lower-dimensional intersection");

    // Facet areas; half-spaces touching in a lower-dimensional face are redundant.
    for (const auto& h : hs) {
      std::vector<Vector> on;
      for (const auto& v : P.vertices_)
        if (std::abs(dot(h.normal, v) - h.offset) <= 10.0 * tol) on.push_back(v);
      double area = 0.0;
      if (dim == 1) {
        area = on.empty() ? 0.0 : 1.0;
      } else if (dim == 2) {
        for (std::size_t i = 0; i < on.size(); ++i)
          for (std::size_t j = i + 1; j < on.size(); ++j) area = std::max(area, distance(on[i], on[j]));
      } else if (on.size() >= 3) {
        // Orthonormal frame of the facet plane, then a planar hull.
        Vector e1 = std::abs(h.normal[0]) < 0.9 ? Vector{1, 0, 0} : Vector{0, 1, 0};
        e1 = normalized(e1 - dot(e1, h.normal) * h.normal);
        const Vector e2 = cross3(h.normal, e1);
        std::vector<Vector> flat;
        for (const auto& v : on) flat.push_back(Vector{dot(v, e1), dot(v, e2)});
        const auto hull = convex_hull_2d(flat);
        for (std::size_t i = 0; i < hull.size(); ++i) {
          const auto& a = hull[i];
          const auto& b = hull[(i + 1) % hull.size()];
          area += a[0] * b[1] - a[1] * b[0];
        }
        area = 0.5 * std::abs(area);
      }
      if (area > tol) {
        P.facets_.push_back(h);
        P.areas_.push_back(area);
      }
    }
    double vol = 0.0;
    for (std::size_t i = 0; i < P.facets_.size(); ++i) vol += P.areas_[i] * P.facets_[i].offset;
    P.volume_ = vol / dim;
    if (!(P.volume_ > tol)) return fail("polytope is not full-dimensional");

    P.bbox_ = Box{P.vertices_[0], P.vertices_[0]};
    for (const auto& v : P.vertices_) P.bbox_ = P.bbox_.united(Box{v, v});
    P.axis_box_ = static_cast<int>(P.facets_.size()) == 2 * dim &&
                  std::all_of(P.facets_.begin(), P.facets_.end(), [](const Halfspace& h) {
                    int nz = 0;
                    for (int i = 0; i < h.normal.dim(); ++i) nz += h.normal[i] != 0.0;
                    return nz == 1;
                  });
    return P;
  }

  // No nonzero d with normal . d <= 0 for all normals.
  static bool positively_spanning(int dim, const std::vector<Halfspace>& hs) {
    std::vector<Vector> normals;
    for (const auto& h : hs) normals.push_back(h.normal);
    if (static_cast<int>(span_basis(normals).size()) < dim) return false;
    auto recedes = [&](const Vector& d) {
      for (const auto& v : normals)
        if (dot(v, d) > 1e-12) return false;
      return true;
    };
    std::vector<Vector> cand;
    if (dim == 1) {
      cand = {Vector{1.0}, Vector{-1.0}};
    } else if (dim == 2) {
      for (const auto& v : normals) {
        cand.push_back(Vector{-v[1], v[0]});
        cand.push_back(Vector{v[1], -v[0]});
      }
    } else {
      for (std::size_t i = 0; i < normals.size(); ++i)
        for (std::size_t j = i + 1; j < normals.size(); ++j) {
          const Vector c = cross3(normals[i], normals[j]);
          if (c.norm() < 1e-12) continue;
          cand.push_back(c / c.norm());
          cand.push_back(-c / c.norm());
        }
    }
    return std::none_of(cand.begin(), cand.end(), recedes);
  }

  int dim_ = 0;
  std::vector<Halfspace> facets_;
  std::vector<double> areas_;
  std::vector<Vector> vertices_;
  double volume_ = 0.0;
  double tol_ = 0.0;
  Box bbox_;
  bool axis_box_ = false;
};

class Ball {
 public:
  Ball(Vector center, double radius) : center_(std::move(center)), radius_(radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("Ball: radius must be positive");
    if (center_.dim() < 1 || center_.dim() > 3) throw ValidationError("Ball: only dimensions 1, 2, 3 are supported");
    if (!center_.is_finite()) throw ValidationError("Ball: non-finite center");
  }

  int dim() const { return center_.dim(); }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

  bool contains(const Vector& x) const { return (x - center_).norm2() <= radius_ * radius_; }
  double volume() const { return unit_ball_volume(dim()) * std::pow(radius_, dim()); }
  double support(const Vector& u) const { return dot(u, center_) + radius_ * u.norm(); }
  Box bbox() const { return Box{center_, center_}.inflated(radius_); }

  /// Quadrature atoms renormalized to the exact sphere area n kappa_n r^{n-1}.
  SurfaceMeasure surface_measure(int atoms) const {
    if (atoms < 8) throw ValidationError("Ball::surface_measure: need at least 8 atoms");
    const int n = dim();
    const auto q = sphere_quadrature(n, atoms);
    const double total = unit_sphere_area(n) * std::pow(radius_, n - 1);
    SurfaceMeasure S(n);
    for (const auto& node : q.nodes) S.add(node, total / static_cast<double>(q.nodes.size()));
    return S;
  }

 private:
  Vector center_;
  double radius_;
};

using ConvexPiece = std::variant<Polytope, Ball>;

inline int piece_dim(const ConvexPiece& p) {
  return std::visit([](const auto& s) { return s.dim(); }, p);
}
inline Box piece_bbox(const ConvexPiece& p) {
  return std::visit([](const auto& s) { return Box(s.bbox()); }, p);
}
inline double piece_support(const ConvexPiece& p, const Vector& u) {
  return std::visit([&](const auto& s) { return s.support(u); }, p);
}
inline bool piece_contains(const ConvexPiece& p, const Vector& x) {
  return std::visit([&](const auto& s) { return s.contains(x); }, p);
}

namespace detail {

// True when some direction d gives max_{K1} d.x < min_{K2} d.x.
inline bool positively_separated(const ConvexPiece& a, const ConvexPiece& b) {
  const int n = piece_dim(a);
  if (std::holds_alternative<Ball>(a) && std::holds_alternative<Ball>(b)) {
    const auto& A = std::get<Ball>(a);
    const auto& B = std::get<Ball>(b);
    return distance(A.center(), B.center()) > A.radius() + B.radius();
  }
  std::vector<Vector> dirs;
  for (const auto* p : {&a, &b}) {
    if (const auto* P = std::get_if<Polytope>(p))
      for (const auto& h : P->facets()) {
        dirs.push_back(h.normal);
        dirs.push_back(-h.normal);
      }
  }
  const Box ba = piece_bbox(a), bb = piece_bbox(b);
  const Vector dc = 0.5 * (bb.lo + bb.hi) - 0.5 * (ba.lo + ba.hi);
  if (dc.norm() > 0.0) dirs.push_back(dc / dc.norm());
  const auto quad = sphere_quadrature(n, n == 1 ? 2 : (n == 2 ? 720 : 4000));
  dirs.insert(dirs.end(), quad.nodes.begin(), quad.nodes.end());
  double scale = 1.0;
  for (int i = 0; i < n; ++i) scale = std::max({scale, std::abs(ba.lo[i]), std::abs(ba.hi[i]), std::abs(bb.lo[i]), std::abs(bb.hi[i])});
  for (const auto& d : dirs) {
    const double gap = -piece_support(b, -d) - piece_support(a, d);
    if (gap > 1e-12 * scale) return true;
  }
  return false;
}

}  // namespace detail

/// A set A: a single convex piece or a disjoint union of convex pieces with
/// pairwise positive separation. Nested unions are flattened.
class Shape {
 public:
  Shape(Polytope p) : pieces_{std::move(p)} {}  // NOLINT(google-explicit-constructor)
  Shape(Ball b) : pieces_{std::move(b)} {}      // NOLINT(google-explicit-constructor)

  static Shape disjoint_union(const std::vector<Shape>& members) {
    if (members.empty()) throw ValidationError("DisjointUnion: no members");
    Shape s;
    for (const auto& m : members) {
      if (m.dim() != members.front().dim()) throw ValidationError("DisjointUnion: members of mixed dimension");
      s.pieces_.insert(s.pieces_.end(), m.pieces_.begin(), m.pieces_.end());
    }
    for (std::size_t i = 0; i < s.pieces_.size(); ++i)
      for (std::size_t j = i + 1; j < s.pieces_.size(); ++j)
        if (!detail::positively_separated(s.pieces_[i], s.pieces_[j])) {
          throw ValidationError("DisjointUnion: members " + std::to_string(i) + " and " + std::to_string(j) +
                                " are not separated by a positive gap");
        }
    s.is_union_ = true;
    return s;
  }

  int dim() const { return piece_dim(pieces_.front()); }
  bool is_union() const { return is_union_; }
  const std::vector<ConvexPiece>& pieces() const { return pieces_; }

  Box bbox() const {
    Box b = piece_bbox(pieces_.front());
    for (const auto& p : pieces_) b = b.united(piece_bbox(p));
    return b;
  }

  bool all_axis_boxes() const {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const ConvexPiece& p) {
      const auto* P = std::get_if<Polytope>(&p);
      return P && P->is_axis_box();
    });
  }

  bool all_balls() const {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const ConvexPiece& p) { return std::holds_alternative<Ball>(p); });
  }

 private:
  Shape() = default;
  std::vector<ConvexPiece> pieces_;
  bool is_union_ = false;
};

inline bool contains(const Shape& A, const Vector& x) {
  for (const auto& p : A.pieces())
    if (piece_contains(p, x)) return true;
  return false;
}

inline double volume(const Shape& A) {
  double v = 0.0;
  for (const auto& p : A.pieces()) v += std::visit([](const auto& s) { return s.volume(); }, p);
  return v;
}

inline SurfaceMeasure surface_measure(const Shape& A, int ball_atoms = 256) {
  SurfaceMeasure S(A.dim());
  for (const auto& p : A.pieces()) {
    if (const auto* P = std::get_if<Polytope>(&p)) {
      S.append(P->surface_measure());
    } else {
      S.append(std::get<Ball>(p).surface_measure(ball_atoms));
    }
  }
  return S;
}

inline double perimeter(const Shape& A) {
  double s = 0.0;
  for (const auto& p : A.pieces()) {
    if (const auto* P = std::get_if<Polytope>(&p)) {
      for (double a : P->facet_areas()) s += a;
    } else {
      const auto& B = std::get<Ball>(p);
      s += unit_sphere_area(B.dim()) * std::pow(B.radius(), B.dim() - 1);
    }
  }
  return s;
}

inline Box bbox(const Shape& A) { return A.bbox(); }

namespace detail {
template <class F>
Shape map_pieces(const Shape& A, F&& f) {
  std::vector<Shape> out;
  for (const auto& p : A.pieces()) out.push_back(std::visit([&](const auto& s) { return Shape(f(s)); }, p));
  if (!A.is_union()) return out.front();
  return Shape::disjoint_union(out);
}
}  // namespace detail

inline Shape translate(const Shape& A, const Vector& y) {
  require_same_dim(A.bbox().lo, y, "translate");
  return detail::map_pieces(A, [&](const auto& s) {
    if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Ball>) {
      return Ball(s.center() + y, s.radius());
    } else {
      return s.translated(y);
    }
  });
}

inline Shape minkowski_scale(const Shape& A, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("minkowski_scale: factor must be positive");
  return detail::map_pieces(A, [&](const auto& s) {
    if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Ball>) {
      return Ball(s.center() * c, s.radius() * c);
    } else {
      return s.scaled(c);
    }
  });
}

/// Volume of P1 n P2 for convex polytopes (0 when the intersection has empty
/// interior).
inline double polytope_intersection_volume(const Polytope& a, const Polytope& b) {
  auto hs = a.facets();
  hs.insert(hs.end(), b.facets().begin(), b.facets().end());
  const auto p = Polytope::try_from_halfspaces(a.dim(), hs);
  return p ? p->volume() : 0.0;
}

}  // namespace perimetry
