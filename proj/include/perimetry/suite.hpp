#pragma once

// Property batteries run by `perimetry suite`. Every check is a pure function
// of the suite seed; `full` widens the random batteries and adds the
// expensive constructions.

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "perimetry/boolean_lab.hpp"
#include "perimetry/counterexample.hpp"
#include "perimetry/dilation_lab.hpp"
#include "perimetry/geom_core.hpp"
#include "perimetry/gridset.hpp"
#include "perimetry/shapes.hpp"

namespace perimetry {

enum class SuiteLevel { smoke, full };

struct SuiteOptions {
  SuiteLevel level = SuiteLevel::smoke;
  std::uint64_t seed = 1;
  int workers = 1;
  bool inject_corrupt_normal = false;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::vector<CheckResult> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return !checks.empty();
  }
};

/// Convex polygon from the hull of 3..12 random points in the unit disc.
inline Polytope random_polygon(CounterRng& rng) {
  for (;;) {
    const int k = 3 + static_cast<int>(rng.uniform() * 10.0);
    std::vector<Vector> pts;
    for (int i = 0; i < k; ++i) {
      const double t = 2.0 * std::numbers::pi * rng.uniform(), r = std::sqrt(rng.uniform());
      pts.push_back(Vector{r * std::cos(t), r * std::sin(t)});
    }
    auto hull = convex_hull_2d(pts);
    if (hull.size() < 3) continue;
    auto P = Polytope::from_vertices(hull);
    if (P.volume() > 1e-3) return P;
  }
}

/// 1..max_points random points in [-1, 1]^n.
inline StructuringElement random_q(CounterRng& rng, int n, int max_points = 6) {
  const int k = 1 + static_cast<int>(rng.uniform() * max_points);
  std::vector<Vector> pts;
  for (int i = 0; i < k; ++i) {
    Vector q(n);
    for (int a = 0; a < n; ++a) q[a] = rng.uniform(-1.0, 1.0);
    pts.push_back(q);
  }
  return StructuringElement(std::move(pts));
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace detail

inline SuiteReport run_suite(const SuiteOptions& opt) {
  const bool full = opt.level == SuiteLevel::full;
  SuiteReport rep;
  auto check = [&](const std::string& name, const std::function<std::string()>& body) {
    CheckResult r{name, true, ""};
    try {
      r.detail = body();
      if (!r.detail.empty() && r.detail.rfind("FAIL", 0) == 0) r.passed = false;
    } catch (const std::exception& e) {
      r.passed = false;
      r.detail = std::string("FAIL: ") + e.what();
    }
    rep.checks.push_back(std::move(r));
  };
  const int polygons = full ? 100 : 20;

  check("surface_measure_valid", [&]() -> std::string {
    CounterRng rng(opt.seed, 1);
    for (int i = 0; i < polygons; ++i) {
      auto S = random_polygon(rng).surface_measure();
      if (opt.inject_corrupt_normal && i == 0) {
        auto atoms = S.atoms();
        atoms.front().normal = 1.5 * atoms.front().normal;
        S = SurfaceMeasure(2, atoms);
      }
      S.validate();
    }
    return "";
  });

  check("minkowski_relation", [&]() -> std::string {
    CounterRng rng(opt.seed, 2);
    double worst = 0.0;
    for (int i = 0; i < polygons; ++i) worst = std::max(worst, random_polygon(rng).surface_measure().vector_sum().norm());
    for (const auto& A : {Shape(Polytope::box(Vector{0.0, 0.0, 0.0}, Vector{1.0, 2.0, 0.5})), Shape(Ball(Vector{0.0, 0.0}, 1.0))})
      worst = std::max(worst, surface_measure(A).vector_sum().norm());
    return worst <= 1e-9 ? "max |sum w nu| = " + detail::fmt(worst) : "FAIL: max |sum w nu| = " + detail::fmt(worst);
  });

  check("rhs_translation_invariance", [&]() -> std::string {
    CounterRng rng(opt.seed, 3);
    double worst = 0.0;
    for (int i = 0; i < polygons; ++i) {
      const auto S = random_polygon(rng).surface_measure();
      const auto Q = random_q(rng, 2).with_origin();
      const double base = rhs_theorem1(S, Q);
      for (const auto& x : Q.points()) worst = std::max(worst, std::abs(rhs_theorem1(S, Q.translated(-1.0 * x)) - base));
    }
    return worst <= 1e-9 ? "" : "FAIL: deviation " + detail::fmt(worst);
  });

  check("variation_vs_cosine_transform", [&]() -> std::string {
    CounterRng rng(opt.seed, 4);
    double worst = 0.0;
    for (int i = 0; i < polygons; ++i) {
      const auto S = random_polygon(rng).surface_measure();
      const double t = 2.0 * std::numbers::pi * rng.uniform();
      const Vector u{std::cos(t), std::sin(t)};
      worst = std::max(worst, std::abs(2.0 * qvariation(S, StructuringElement{u}) - cosine_transform(S, u)));
    }
    return worst <= 1e-9 ? "" : "FAIL: deviation " + detail::fmt(worst);
  });

  check("qvariation_ladder", [&]() -> std::string {
    CounterRng rng(opt.seed, 5);
    const auto dirs = sphere_quadrature(2, 256);
    int violations = 0;
    for (int i = 0; i < polygons; ++i) {
      const auto A = random_polygon(rng);
      const auto S = A.surface_measure();
      const auto Q = random_q(rng, 2);
      const double V = qvariation(S, Q);
      const double s = inradius_in_span(Q, dirs).radius;
      const double VL = subspace_variation(S, span_basis(Q.points()));
      const double R = circumradius(Q);
      if (s * VL > V * (1 + 1e-12) + 1e-12 || V > R * S.total_mass() * (1 + 1e-12) + 1e-12) ++violations;
    }
    return violations == 0 ? "" : "FAIL: " + std::to_string(violations) + " violations";
  });

  check("rotation_average", [&]() -> std::string {
    CounterRng rng(opt.seed, 6);
    const int pairs = full ? 10 : 2;
    const int M = full ? 10000 : 2000;
    double worst_z = 0.0;
    for (int i = 0; i < pairs; ++i) {
      const auto S = random_polygon(rng).surface_measure();
      const auto Q = random_q(rng, 2);
      double sum = 0.0, sum2 = 0.0;
      for (int k = 0; k < M; ++k) {
        CounterRng rr(opt.seed, 1000 + static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k));
        const double v = qvariation(S, random_rotation(2, rr).apply(Q));
        sum += v;
        sum2 += v * v;
      }
      const double mean = sum / M;
      const double se = std::sqrt(std::max(0.0, sum2 / M - mean * mean) / (M - 1));
      const double target = 0.5 * mean_width(Q) * S.total_mass();
      worst_z = std::max(worst_z, std::abs(mean - target) / std::max(se, 1e-15));
    }
    return worst_z <= 3.0 ? "max |z| = " + detail::fmt(worst_z) : "FAIL: max |z| = " + detail::fmt(worst_z);
  });

  check("derivative_unit_square", [&]() -> std::string {
    const Shape A = Polytope::box(Vector{0.0, 0.0}, Vector{1.0, 1.0});
    const auto r = derivative_report(A, StructuringElement{Vector{0.0, 0.0}, Vector{1.0, 0.0}});
    const double d = std::abs(r.extrapolated.value - r.rhs_exact);
    return d <= 0.01 ? "" : "FAIL: extrapolated " + detail::fmt(r.extrapolated.value) + " vs " + detail::fmt(r.rhs_exact);
  });

  check("q_union_origin_invariance", [&]() -> std::string {
    CounterRng rng(opt.seed, 7);
    double worst = 0.0;
    for (int i = 0; i < (full ? 20 : 5); ++i) {
      const Shape A = Polytope::box(Vector{0.0, 0.0}, Vector{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)});
      const auto Q = random_q(rng, 2, 3);
      const double r = rng.uniform(0.01, 0.2);
      worst = std::max(worst, std::abs(dilation_excess(A, Q, r).value - dilation_excess(A, Q.with_origin(), r).value));
      const auto S = surface_measure(A);
      worst = std::max(worst, std::abs(rhs_theorem1(S, Q) - rhs_theorem1(S, Q.with_origin())));
    }
    return worst <= 1e-12 ? "" : "FAIL: deviation " + detail::fmt(worst);
  });

  check("covariogram_square", [&]() -> std::string {
    const Shape A = Polytope::box(Vector{0.0, 0.0}, Vector{1.0, 1.0});
    const auto c = covariogram_derivative(A, Vector{1.0, 0.0});
    return std::abs(c.extrapolated.value + 1.0) <= 0.01 ? "" : "FAIL: slope " + detail::fmt(c.extrapolated.value);
  });

  check("grid_shift_inequality", [&]() -> std::string {
    CounterRng rng(opt.seed, 8);
    int violations = 0;
    const int trials = full ? 500 : 100;
    for (int t = 0; t < trials; ++t) {
      const int n = rng.uniform() < 0.7 ? 2 : 3;
      const std::int64_t side = n == 2 ? 24 : 10;
      GridSet G(Vector(n), 1.0, {side, side, n == 3 ? side : 1});
      const double fill = rng.uniform(0.1, 0.7);
      G.paint(G.window(), [&](const Vector&) { return rng.uniform() < fill; });
      const int axis = static_cast<int>(rng.uniform() * n);
      const auto k = static_cast<std::int64_t>(1 + rng.uniform() * 6);
      const int sign = rng.uniform() < 0.5 ? -1 : 1;
      if (shift_loss(G, axis, sign * k) > static_cast<std::uint64_t>(k) * directional_exits(G, axis, sign)) ++violations;
      // G is contained in its dilation by Q u {0}, and dilation is monotone in G.
      std::vector<Vector> qs;
      while (qs.size() < 3) {
        Vector q(n);
        for (int a = 0; a < n; ++a) q[a] = std::round(rng.uniform(-6.0, 6.0));
        if (q.norm() >= 4.0) qs.push_back(q);
      }
      const StructuringElement Q(qs);
      const auto D = dilate(G, Q, 1.0);
      auto H = G;
      H.paint(H.window(), [&](const Vector&) { return rng.uniform() < 0.2; });
      const auto DH = dilate(H, Q, 1.0);
      for (const auto& x : G.voxels())
        if (!D.get(D.index_of(G.center(x)))) {
          ++violations;
          break;
        }
      for (const auto& x : D.voxels())
        if (!DH.get(DH.index_of(D.center(x)))) {
          ++violations;
          break;
        }
    }
    return violations == 0 ? "" : "FAIL: " + std::to_string(violations) + " violations";
  });

  check("boolean_isotropic_consistency", [&]() -> std::string {
    CounterRng rng(opt.seed, 9);
    const auto quad = sphere_quadrature(2, 4096);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const auto Q = random_q(rng, 2);
      double integral = 0.0, mass = 0.0;
      const auto mQ = Q.negated();
      for (std::size_t k = 0; k < quad.nodes.size(); ++k) {
        integral += quad.weights[k] * support_pos(mQ, quad.nodes[k]);
        mass += quad.weights[k];
      }
      worst = std::max(worst, std::abs(integral / mass - rose_integral(RoseOfDirections{}, Q)));
    }
    return worst <= 1e-5 ? "" : "FAIL: deviation " + detail::fmt(worst);
  });

  check("boolean_volume_fraction", [&]() -> std::string {
    BooleanModelSpec spec;
    spec.intensity = 5.0;
    spec.grain = FixedDisc{0.1};
    EstimationConfig cfg{opt.seed, full ? 4000 : 400, 64, opt.workers};
    const auto p = volume_fraction(spec, cfg);
    const double target = 1.0 - std::exp(-5.0 * std::numbers::pi * 0.01);
    const double z = (p.value - target) / p.std_err;
    return std::abs(z) <= 3.0 ? "z = " + detail::fmt(z) : "FAIL: z = " + detail::fmt(z);
  });

  check("contact_at_zero", [&]() -> std::string {
    BooleanModelSpec spec;
    spec.intensity = 5.0;
    EstimationConfig cfg{opt.seed, 50, 64, opt.workers};
    const auto c = contact_distribution(spec, StructuringElement{Vector{1.0, 0.0}}, {0.0}, cfg);
    return c.points.front().H.value == 0.0 ? "" : "FAIL: H(0) = " + detail::fmt(c.points.front().H.value);
  });

  check("worker_count_independence", [&]() -> std::string {
    BooleanModelSpec spec;
    spec.intensity = 5.0;
    EstimationConfig a{opt.seed, 64, 32, 1}, b{opt.seed, 64, 32, 4};
    const bool same = volume_fraction(spec, a).value == volume_fraction(spec, b).value;
    SamplerConfig sa;
    sa.seed = opt.seed;
    sa.samples = 1 << 14;
    sa.workers = 1;
    SamplerConfig sb = sa;
    sb.workers = 4;
    sa.method = sb.method = SamplingMethod::monte_carlo;
    const Shape disc = Ball(Vector{0.0, 0.0}, 1.0);
    const StructuringElement Q{Vector{1.0, 0.3}};
    const bool same2 = dilation_excess(disc, Q, 0.05, sa).value == dilation_excess(disc, Q, 0.05, sb).value;
    return same && same2 ? "" : "FAIL: results differ between 1 and 4 workers";
  });

  if (full) {
    check("counterexample_growth", [&]() -> std::string {
      CounterexampleConfig cfg{opt.seed, 100000, opt.workers};
      const auto ce = counterexample(12, cfg);
      const auto& r6 = ce.rows[6 - 4];
      const auto& r12 = ce.rows[12 - 4];
      const bool ok = r12.ratio_lower >= 4.0 * std::max(r6.ratio_lower, r6.ratio_upper) && r12.ratio_lower > ce.qvariation_bound;
      return (ok ? "" : "FAIL: ") + std::string("ratio(12) = ") + detail::fmt(r12.ratio_lower) + ", ratio(6) = " + detail::fmt(r6.ratio_lower) +
             ", bound = " + detail::fmt(ce.qvariation_bound);
    });
  }
  return rep;
}

}  // namespace perimetry
