#pragma once

// Dilation excess G(rQ, 1_A) = vol((A + rQ) \ A), its first-order behaviour
// as r -> 0, Q-variations and the covariogram.

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "perimetry/exact_union.hpp"
#include "perimetry/geom_core.hpp"
#include "perimetry/gridset.hpp"
#include "perimetry/sampling.hpp"
#include "perimetry/shapes.hpp"

namespace perimetry {

/// sum_i w_i h(Q, nu_i)^+ : the limit of G(rQ, 1_A) / r.
inline double rhs_theorem1(const SurfaceMeasure& S, const StructuringElement& Q) {
  if (S.dim() != Q.dim()) throw ValidationError("rhs_theorem1: dimension mismatch");
  double s = 0.0;
  for (const auto& a : S.atoms()) s += a.weight * support_pos(Q, a.normal);
  return s;
}

/// V^Q(1_A) = sum_i w_i h(-Q, nu_i)^+.
inline double qvariation(const SurfaceMeasure& S, const StructuringElement& Q) {
  return rhs_theorem1(S, Q.negated());
}

/// V_L(1_A) = sum_i w_i |p_L nu_i| with L spanned by `basis` (orthonormal).
inline double subspace_variation(const SurfaceMeasure& S, const std::vector<Vector>& basis) {
  double s = 0.0;
  for (const auto& a : S.atoms()) {
    double p2 = 0.0;
    for (const auto& e : basis) p2 += dot(a.normal, e) * dot(a.normal, e);
    s += a.weight * std::sqrt(p2);
  }
  return s;
}

namespace detail {

inline std::vector<Vector> nonzero_offsets(const StructuringElement& Q, double r) {
  std::vector<Vector> out;
  for (const auto& q : Q.points())
    if (q.norm2() > 0.0) out.push_back(r * q);
  return out;
}

// Boxes of A when every piece is an axis box (intervals in dimension 1).
inline std::optional<std::vector<Box>> as_boxes(const Shape& A) {
  std::vector<Box> boxes;
  for (const auto& p : A.pieces()) {
    if (const auto* P = std::get_if<Polytope>(&p); P && (P->is_axis_box() || P->dim() == 1)) {
      boxes.push_back(P->bbox());
    } else if (const auto* B = std::get_if<Ball>(&p); B && B->dim() == 1) {
      boxes.push_back(B->bbox());
    } else {
      return std::nullopt;
    }
  }
  return boxes;
}

inline std::optional<std::vector<Disc>> as_discs(const Shape& A) {
  if (A.dim() != 2 || !A.all_balls()) return std::nullopt;
  std::vector<Disc> discs;
  for (const auto& p : A.pieces()) {
    const auto& B = std::get<Ball>(p);
    discs.push_back({B.center()[0], B.center()[1], B.radius()});
  }
  return discs;
}

inline std::optional<double> exact_dilation_excess(const Shape& A, const std::vector<Vector>& offsets) {
  if (auto boxes = as_boxes(A)) {
    std::vector<Box> extra;
    for (const auto& o : offsets)
      for (const auto& b : *boxes) extra.push_back(b.translated(o));
    return box_union_excess(*boxes, extra);
  }
  if (auto discs = as_discs(A)) {
    double base = 0.0;
    for (const auto& d : *discs) base += std::numbers::pi * d.r * d.r;
    auto all = *discs;
    for (const auto& o : offsets)
      for (const auto& d : *discs) all.push_back({d.x + o[0], d.y + o[1], d.r});
    return disc_union_area(all) - base;
  }
  return std::nullopt;
}

inline Box offset_hull(const Box& b, const std::vector<Vector>& offsets) {
  Box out = b;
  for (const auto& o : offsets) out = out.united(b.translated(o));
  return out;
}

}  // namespace detail

/// vol((A + rQ) \ A). Exact for unions of axis boxes and for unions of discs
/// in the plane; otherwise Monte Carlo (or grid when requested).
inline Estimate dilation_excess(const Shape& A, const StructuringElement& Q, double r, const SamplerConfig& cfg = {}) {
  if (Q.dim() != A.dim()) throw ValidationError("dilation_excess: dimension mismatch");
  if (!(r >= 0.0) || !std::isfinite(r)) throw ValidationError("dilation_excess: r must be a nonnegative number");
  if (r == 0.0 || Q.is_origin_only()) return Estimate::exact(0.0);
  const auto offsets = detail::nonzero_offsets(Q, r);

  if (cfg.method == SamplingMethod::automatic || cfg.method == SamplingMethod::exact) {
    if (auto v = detail::exact_dilation_excess(A, offsets)) return Estimate::exact(std::max(0.0, *v));
    if (cfg.method == SamplingMethod::exact) {
      throw ValidationError("dilation_excess: no closed form for this shape; use monte_carlo or grid");
    }
  }

  if (cfg.method == SamplingMethod::grid) {
    double h = cfg.grid_h;
    if (h <= 0.0) {
      double shortest = std::numeric_limits<double>::infinity();
      for (const auto& o : offsets) shortest = std::min(shortest, o.norm());
      h = shortest / 4.0;
    }
    const Box window = detail::offset_hull(A.bbox(), offsets).inflated(h);
    const auto G = rasterize(A, h, window);
    const auto D = dilate(G, Q, r, cfg.workers);
    const double v = static_cast<double>(D.count() - G.count()) * G.cell_volume();
    return Estimate{v, 0.5 * h * perimeter(A), static_cast<std::int64_t>(D.count()), Estimate::Method::grid};
  }

  const Box domain = detail::offset_hull(A.bbox(), offsets);
  auto in_excess = [&](const Vector& x) {
    if (contains(A, x)) return false;
    for (const auto& o : offsets)
      if (contains(A, x - o)) return true;
    return false;
  };
  return stratified_volume(domain, in_excess, cfg, 0x6578636573ULL);
}

struct RSchedule {
  double r0 = 0.0;  // 0: 0.2 * n * vol(A) / P(A), the inradius for tangential bodies
  double rho = 0.5;
  int steps = 7;
  std::vector<double> explicit_r;  // overrides the geometric schedule when nonempty

  std::vector<double> values(double default_r0) const {
    std::vector<double> r = explicit_r;
    if (r.empty()) {
      const double start = r0 > 0.0 ? r0 : default_r0;
      for (int k = 0; k < steps; ++k) r.push_back(start * std::pow(rho, k));
    }
    if (r.size() < 2) throw ValidationError("r schedule: need at least two radii");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!(r[i] > 0.0) || !std::isfinite(r[i])) throw ValidationError("r schedule: radii must be positive");
      if (i > 0 && !(r[i] < r[i - 1])) throw ValidationError("r schedule: radii must be strictly decreasing");
    }
    return r;
  }
};

inline double default_r0(const Shape& A) { return 0.2 * A.dim() * volume(A) / perimeter(A); }

struct LimitFit {
  Estimate limit;
  double slope = 0.0;
  double spread = 0.0;  // |fitted limit - value at smallest r|
  bool linear = true;   // false: fell back to the smallest-r value
};

/// Fits y(r) = L + c r by weighted least squares (weights 1/err^2, or equal
/// weights when every point is exact). If the residuals exceed three times
/// the noise, the value at the smallest r is used instead, with the spread of
/// the two smallest-r values added to its error.
inline LimitFit extrapolate_to_zero(const std::vector<double>& r, const std::vector<double>& y, const std::vector<double>& err,
                                    Estimate::Method method, std::int64_t samples) {
  const std::size_t k = r.size();
  const bool exact = method == Estimate::Method::exact;
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = exact ? 1.0 : 1.0 / std::max(err[i] * err[i], 1e-300);
    sw += w;
    sx += w * r[i];
    sy += w * y[i];
    sxx += w * r[i] * r[i];
    sxy += w * r[i] * y[i];
  }
  const double det = sw * sxx - sx * sx;
  const double c = (sw * sxy - sx * sy) / det;
  const double L = (sxx * sy - sx * sxy) / det;
  const double var_L = exact ? 0.0 : sxx / det;

  double chi2 = 0.0, resid2 = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double res = y[i] - (L + c * r[i]);
    resid2 += res * res;
    scale = std::max(scale, std::abs(y[i]));
    if (!exact) chi2 += res * res / std::max(err[i] * err[i], 1e-300);
  }
  const double dof = static_cast<double>(std::max<std::size_t>(1, k - 2));
  const bool bad = exact ? std::sqrt(resid2 / dof) > 3.0 * 1e-9 * std::max(1.0, scale) : chi2 / dof > 9.0;

  LimitFit fit;
  fit.slope = c;
  fit.spread = std::abs(L - y.back());
  if (!bad) {
    fit.limit = Estimate{L, exact ? 0.0 : std::sqrt(var_L), samples, method};
    return fit;
  }
  fit.linear = false;
  const double spread = std::abs(y[k - 1] - y[k - 2]);
  fit.limit = Estimate{y.back(), exact ? 0.0 : std::hypot(err.back(), spread), samples, method};
  return fit;
}

struct DerivativeReport {
  std::vector<double> r_values;
  std::vector<Estimate> excess;
  std::vector<double> ratios;
  std::vector<double> ratio_err;
  Estimate extrapolated;
  double extrapolation_spread = 0.0;
  bool linear_fit = true;
  double rhs_exact = 0.0;
  bool flagged = false;  // precision target missed; std_err inflated
};

/// G(rQ, 1_A) / r along a decreasing schedule, extrapolated to r = 0, next to
/// sum_i w_i h(Q, nu_i)^+ from the surface measure of A.
inline DerivativeReport derivative_report(const Shape& A, const StructuringElement& Q, const RSchedule& schedule = {},
                                          const SamplerConfig& cfg = {}, double target_precision = 0.0,
                                          int ball_atoms = 4096) {
  DerivativeReport rep;
  rep.r_values = schedule.values(default_r0(A));
  rep.rhs_exact = rhs_theorem1(surface_measure(A, ball_atoms), Q);
  Estimate::Method method = Estimate::Method::exact;
  std::int64_t samples = 0;
  for (std::size_t i = 0; i < rep.r_values.size(); ++i) {
    SamplerConfig c = cfg;
    c.seed = mix64(cfg.seed + i);
    const double r = rep.r_values[i];
    const auto e = dilation_excess(A, Q, r, c);
    rep.excess.push_back(e);
    rep.ratios.push_back(e.value / r);
    rep.ratio_err.push_back(e.std_err / r);
    if (e.method != Estimate::Method::exact) method = e.method;
    samples += e.samples;
  }
  const auto fit = extrapolate_to_zero(rep.r_values, rep.ratios, rep.ratio_err, method, samples);
  rep.extrapolated = fit.limit;
  rep.extrapolation_spread = fit.spread;
  rep.linear_fit = fit.linear;
  if (method != Estimate::Method::exact && target_precision > 0.0 && rep.extrapolated.std_err > target_precision) {
    rep.flagged = true;
    rep.extrapolated.std_err = std::hypot(rep.extrapolated.std_err, fit.spread);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Covariogram
// ---------------------------------------------------------------------------

namespace detail {

inline std::optional<double> exact_piece_overlap(const ConvexPiece& a, const ConvexPiece& b, const Vector& y) {
  const auto* Pa = std::get_if<Polytope>(&a);
  const auto* Pb = std::get_if<Polytope>(&b);
  if (Pa && Pb) {
    if (Pa->is_axis_box() && Pb->is_axis_box()) {
      const Box ba = Pa->bbox(), bb = Pb->bbox().translated(y);
      double v = 1.0;
      for (int i = 0; i < ba.dim(); ++i) v *= std::max(0.0, std::min(ba.hi[i], bb.hi[i]) - std::max(ba.lo[i], bb.lo[i]));
      return v;
    }
    return polytope_intersection_volume(*Pa, Pb->translated(y));
  }
  const auto* Ba = std::get_if<Ball>(&a);
  const auto* Bb = std::get_if<Ball>(&b);
  if (Ba && Bb) return ball_intersection_volume(Ba->dim(), Ba->radius(), Bb->radius(), distance(Ba->center(), Bb->center() + y));
  return std::nullopt;
}

inline std::optional<double> exact_covariogram(const Shape& A, const Vector& y) {
  double s = 0.0;
  for (const auto& a : A.pieces())
    for (const auto& b : A.pieces()) {
      const auto v = exact_piece_overlap(a, b, y);
      if (!v) return std::nullopt;
      s += *v;
    }
  return s;
}

}  // namespace detail

/// C(A, y) = vol(A n (A + y)).
inline Estimate covariogram(const Shape& A, const Vector& y, const SamplerConfig& cfg = {}) {
  require_same_dim(A.bbox().lo, y, "covariogram");
  if (cfg.method != SamplingMethod::monte_carlo && cfg.method != SamplingMethod::grid) {
    if (auto v = detail::exact_covariogram(A, y)) return Estimate::exact(*v);
    if (cfg.method == SamplingMethod::exact) throw ValidationError("covariogram: no closed form for this shape");
  }
  const Box a = A.bbox(), b = A.bbox().translated(y);
  Box d = a;
  for (int i = 0; i < a.dim(); ++i) {
    d.lo[i] = std::max(a.lo[i], b.lo[i]);
    d.hi[i] = std::min(a.hi[i], b.hi[i]);
    if (d.hi[i] <= d.lo[i]) return Estimate{0.0, 0.0, 0, Estimate::Method::monte_carlo};
  }
  return stratified_volume(d, [&](const Vector& x) { return contains(A, x) && contains(A, x - y); }, cfg, 0x636f76ULL);
}

/// vol(A \ (A + y)) = C(A, 0) - C(A, y), sampled directly near the boundary
/// when no closed form is available.
inline Estimate covariogram_loss(const Shape& A, const Vector& y, const SamplerConfig& cfg = {}) {
  if (cfg.method != SamplingMethod::monte_carlo && cfg.method != SamplingMethod::grid) {
    if (auto v = detail::exact_covariogram(A, y)) return Estimate::exact(std::max(0.0, volume(A) - *v));
    if (cfg.method == SamplingMethod::exact) throw ValidationError("covariogram: no closed form for this shape");
  }
  return stratified_volume(A.bbox(), [&](const Vector& x) { return contains(A, x) && !contains(A, x - y); }, cfg,
                           0x6c6f7373ULL);
}

struct CovariogramDerivative {
  std::vector<double> r_values;
  std::vector<double> slopes;  // (C(A, r u) - C(A, 0)) / r
  std::vector<double> slope_err;
  Estimate extrapolated;
  double rhs = 0.0;  // -1/2 * cosine transform of the surface measure at u
  bool linear_fit = true;
};

inline CovariogramDerivative covariogram_derivative(const Shape& A, const Vector& u, const RSchedule& schedule = {},
                                                    const SamplerConfig& cfg = {}, int ball_atoms = 4096) {
  if (std::abs(u.norm() - 1.0) > 1e-12) throw ValidationError("covariogram_derivative: u must be a unit vector");
  CovariogramDerivative out;
  out.r_values = schedule.values(default_r0(A));
  out.rhs = -0.5 * cosine_transform(surface_measure(A, ball_atoms), u);
  Estimate::Method method = Estimate::Method::exact;
  std::int64_t samples = 0;
  for (std::size_t i = 0; i < out.r_values.size(); ++i) {
    SamplerConfig c = cfg;
    c.seed = mix64(cfg.seed + 0x100 + i);
    const double r = out.r_values[i];
    const auto loss = covariogram_loss(A, r * u, c);
    out.slopes.push_back(-loss.value / r);
    out.slope_err.push_back(loss.std_err / r);
    if (loss.method != Estimate::Method::exact) method = loss.method;
    samples += loss.samples;
  }
  const auto fit = extrapolate_to_zero(out.r_values, out.slopes, out.slope_err, method, samples);
  out.extrapolated = fit.limit;
  out.linear_fit = fit.linear;
  return out;
}

}  // namespace perimetry
