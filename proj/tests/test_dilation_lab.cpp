#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "perimetry/dilation_lab.hpp"

using namespace perimetry;

namespace {

constexpr double kPi = std::numbers::pi;

// Area of the intersection of two unit discs at center distance d.
double lens(double d) { return 2.0 * std::acos(d / 2.0) - 0.5 * d * std::sqrt(4.0 - d * d); }

Shape unit_square() { return Polytope::box(Vector{0.0, 0.0}, Vector{1.0, 1.0}); }
Shape unit_disc() { return Ball(Vector{0.0, 0.0}, 1.0); }
Shape triangle() { return Polytope::from_vertices({Vector{0.0, 0.0}, Vector{1.0, 0.0}, Vector{0.0, 1.0}}); }

SamplerConfig monte_carlo(std::uint64_t seed, std::int64_t samples = 1 << 18) {
  SamplerConfig c;
  c.method = SamplingMethod::monte_carlo;
  c.seed = seed;
  c.samples = samples;
  return c;
}

}  // namespace

TEST(RhsTheorem1, ClosedForms) {
  const auto S = surface_measure(unit_square());
  EXPECT_DOUBLE_EQ(rhs_theorem1(S, StructuringElement{Vector{1.0, 0.0}}), 1.0);
  EXPECT_DOUBLE_EQ(rhs_theorem1(S, StructuringElement{Vector{1.0, 0.0}, Vector{0.0, 1.0}}), 2.0);
  EXPECT_DOUBLE_EQ(rhs_theorem1(S, StructuringElement{Vector{-2.0, 0.0}}), 2.0);
  EXPECT_NEAR(rhs_theorem1(surface_measure(unit_disc(), 4096), StructuringElement{Vector{1.0, 0.0}, Vector{-1.0, 0.0}}),
              4.0, 1e-5);
}

TEST(DilationExcess, SquareExactIsLinear) {
  const StructuringElement Q{Vector{0.0, 0.0}, Vector{1.0, 0.0}};
  for (double r : {0.5, 0.1, 0.01}) {
    const auto e = dilation_excess(unit_square(), Q, r);
    EXPECT_EQ(e.method, Estimate::Method::exact);
    EXPECT_NEAR(e.value, r, 1e-14);
  }
  EXPECT_NEAR(dilation_excess(unit_square(), StructuringElement{Vector{1.0, 0.0}, Vector{0.0, 1.0}}, 0.2).value, 0.4, 1e-14);
}

TEST(DilationExcess, CubeIsThreeSlabs) {
  const Shape cube = Polytope::box(Vector{0.0, 0.0, 0.0}, Vector{1.0, 1.0, 1.0});
  const StructuringElement Q{Vector{1.0, 0.0, 0.0}, Vector{0.0, 1.0, 0.0}, Vector{0.0, 0.0, 1.0}};
  for (double r : {0.2, 0.05}) EXPECT_NEAR(dilation_excess(cube, Q, r).value, 3.0 * r, 1e-13);
  const auto mc = dilation_excess(cube, Q, 0.1, monte_carlo(4));
  EXPECT_EQ(mc.method, Estimate::Method::monte_carlo);
  EXPECT_GT(mc.std_err, 0.0);
  EXPECT_NEAR(mc.value, 0.3, 4.0 * mc.std_err);
}

TEST(DilationExcess, DiscMatchesLensArea) {
  const StructuringElement Q{Vector{1.0, 0.0}, Vector{-1.0, 0.0}};
  for (double r : {0.4, 0.1, 0.02}) {
    const double oracle = 2.0 * (kPi - lens(r));
    EXPECT_NEAR(dilation_excess(unit_disc(), Q, r).value, oracle, 1e-10);
    const auto mc = dilation_excess(unit_disc(), Q, r, monte_carlo(7));
    EXPECT_NEAR(mc.value, oracle, 4.0 * mc.std_err + 1e-12);
  }
}

TEST(DilationExcess, TriangleMonteCarloAgainstTranslateOverlap) {
  const StructuringElement Q{Vector{1.0, 0.0}};
  for (double r : {0.2, 0.05}) {
    const double oracle = 0.5 * (1.0 - (1.0 - r) * (1.0 - r));
    const auto mc = dilation_excess(triangle(), Q, r);
    EXPECT_EQ(mc.method, Estimate::Method::monte_carlo);
    EXPECT_NEAR(mc.value, oracle, 4.0 * mc.std_err);
  }
  SamplerConfig exact;
  exact.method = SamplingMethod::exact;
  EXPECT_THROW(dilation_excess(triangle(), Q, 0.1, exact), ValidationError);
}

TEST(DilationExcess, GridOnAlignedSquare) {
  SamplerConfig c;
  c.method = SamplingMethod::grid;
  const auto e = dilation_excess(unit_square(), StructuringElement{Vector{1.0, 0.0}}, 0.25, c);
  EXPECT_EQ(e.method, Estimate::Method::grid);
  EXPECT_NEAR(e.value, 0.25, e.std_err);
}

TEST(DilationExcess, AddingTheOriginChangesNothing) {
  const StructuringElement Q{Vector{0.3, -0.7}, Vector{-1.0, 0.2}};
  for (const auto& A : {unit_square(), unit_disc()}) {
    EXPECT_DOUBLE_EQ(dilation_excess(A, Q, 0.1).value, dilation_excess(A, Q.with_origin(), 0.1).value);
  }
  EXPECT_DOUBLE_EQ(dilation_excess(triangle(), Q, 0.1, monte_carlo(3)).value,
                   dilation_excess(triangle(), Q.with_origin(), 0.1, monte_carlo(3)).value);
  EXPECT_EQ(dilation_excess(unit_disc(), StructuringElement{Vector{0.0, 0.0}}, 0.3).value, 0.0);
}

TEST(DilationExcess, SeedAndWorkerDeterminism) {
  auto c1 = monte_carlo(11, 1 << 16);
  auto c4 = c1;
  c4.workers = 4;
  const StructuringElement Q{Vector{1.0, 1.0}};
  const auto a = dilation_excess(triangle(), Q, 0.1, c1);
  const auto b = dilation_excess(triangle(), Q, 0.1, c4);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_err, b.std_err);
  c1.seed = 12;
  EXPECT_NE(dilation_excess(triangle(), Q, 0.1, c1).value, a.value);
}

TEST(DerivativeReport, DiscConvergesToFourRadii) {
  const auto rep = derivative_report(unit_disc(), StructuringElement{Vector{1.0, 0.0}, Vector{-1.0, 0.0}});
  EXPECT_NEAR(rep.rhs_exact, 4.0, 1e-5);
  EXPECT_NEAR(rep.extrapolated.value, 4.0, 1e-3);
  ASSERT_EQ(rep.ratios.size(), rep.r_values.size());
  for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
    EXPECT_NEAR(rep.ratios[i], 2.0 * (kPi - lens(rep.r_values[i])) / rep.r_values[i], 1e-8);
  }
}

TEST(DerivativeReport, ConvexSingleDirectionRatiosApproachFromBelow) {
  CounterRng rng(17, 0);
  for (int t = 0; t < 5; ++t) {
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const StructuringElement Q{Vector{std::cos(phi), std::sin(phi)}};
    const auto rep = derivative_report(unit_disc(), Q);
    for (std::size_t i = 0; i < rep.ratios.size(); ++i) {
      EXPECT_LE(rep.ratios[i], rep.rhs_exact + 1e-5);
      if (i > 0) {
        EXPECT_GE(rep.ratios[i], rep.ratios[i - 1] - 1e-12);
      }
    }
  }
}

TEST(DerivativeReport, PrecisionFlag) {
  auto c = monte_carlo(5, 1 << 12);
  RSchedule s;
  s.explicit_r = {0.2, 0.1, 0.05};
  const auto rep = derivative_report(triangle(), StructuringElement{Vector{1.0, 0.0}}, s, c, 1e-6);
  EXPECT_TRUE(rep.flagged);
  EXPECT_FALSE(derivative_report(unit_square(), StructuringElement{Vector{1.0, 0.0}}, s, {}, 1e-6).flagged);
}

TEST(RSchedule, RejectsBadSchedules) {
  RSchedule s;
  s.explicit_r = {0.1};
  EXPECT_THROW(s.values(1.0), ValidationError);
  s.explicit_r = {0.1, 0.2};
  EXPECT_THROW(s.values(1.0), ValidationError);
  s.explicit_r = {0.1, -0.05};
  EXPECT_THROW(s.values(1.0), ValidationError);
  RSchedule g;
  g.r0 = 0.4;
  g.steps = 3;
  EXPECT_EQ(g.values(1.0), (std::vector<double>{0.4, 0.2, 0.1}));
}

TEST(Covariogram, SquareProductFormula) {
  for (const Vector& y : {Vector{0.3, 0.1}, Vector{-0.2, 0.5}, Vector{0.9, -0.9}, Vector{1.5, 0.0}}) {
    const double oracle = std::max(0.0, 1.0 - std::abs(y[0])) * std::max(0.0, 1.0 - std::abs(y[1]));
    EXPECT_NEAR(covariogram(unit_square(), y).value, oracle, 1e-14);
    const auto mc = covariogram(unit_square(), y, monte_carlo(2));
    EXPECT_NEAR(mc.value, oracle, 4.0 * mc.std_err + 1e-12);
  }
}

TEST(Covariogram, DiscMatchesLens) {
  EXPECT_NEAR(covariogram(unit_disc(), Vector{0.6, 0.8}).value, lens(1.0), 1e-12);
}

TEST(CovariogramDerivative, SquareAxisAndDiagonal) {
  const auto e1 = covariogram_derivative(unit_square(), Vector{1.0, 0.0});
  EXPECT_DOUBLE_EQ(e1.rhs, -1.0);
  EXPECT_NEAR(e1.extrapolated.value, -1.0, 1e-12);
  const auto diag = covariogram_derivative(unit_square(), normalized(Vector{1.0, 1.0}));
  EXPECT_NEAR(diag.rhs, -std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(diag.extrapolated.value, -std::sqrt(2.0), 1e-9);
  for (std::size_t i = 0; i < diag.r_values.size(); ++i) {
    const double r = diag.r_values[i];
    const double s = 1.0 - r / std::sqrt(2.0);
    EXPECT_NEAR(diag.slopes[i], -(1.0 - s * s) / r, 1e-12);
  }
  EXPECT_THROW(covariogram_derivative(unit_square(), Vector{1.0, 1.0}), ValidationError);
}

TEST(CovariogramDerivative, TriangleMonteCarlo) {
  RSchedule s;
  s.explicit_r = {0.1, 0.05};
  const auto out = covariogram_derivative(triangle(), Vector{1.0, 0.0}, s, monte_carlo(9));
  EXPECT_NEAR(out.rhs, -1.0, 1e-14);
  for (std::size_t i = 0; i < out.r_values.size(); ++i) {
    const double r = out.r_values[i];
    EXPECT_NEAR(out.slopes[i], -(r - 0.5 * r * r) / r, 4.0 * out.slope_err[i]);
  }
}

TEST(Qvariation, LadderOnSquare) {
  const auto S = surface_measure(unit_square());
  const StructuringElement Q{Vector{1.0, 0.0}, Vector{0.0, 1.0}};
  const double V = qvariation(S, Q);
  EXPECT_DOUBLE_EQ(V, 2.0);
  EXPECT_LE(V, circumradius(Q) * perimeter(unit_square()) + 1e-12);
  EXPECT_DOUBLE_EQ(subspace_variation(S, {Vector{1.0, 0.0}}), 2.0);
}
