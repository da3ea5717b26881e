#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "perimetry/boolean_lab.hpp"

using namespace perimetry;

namespace {

constexpr double kPi = std::numbers::pi;

BooleanModelSpec discs(double gamma = 5.0, double R = 0.1) {
  BooleanModelSpec s;
  s.intensity = gamma;
  s.grain = FixedDisc{R};
  return s;
}

BooleanModelSpec boxes(double gamma = 5.0) {
  BooleanModelSpec s;
  s.intensity = gamma;
  s.grain = FixedBox{{0.1, 0.05}, 0.0};
  return s;
}

EstimationConfig est(std::uint64_t seed, std::int64_t J, std::int64_t points = 64) {
  EstimationConfig c;
  c.seed = seed;
  c.realizations = J;
  c.points_per_realization = points;
  return c;
}

// Area of the intersection of two discs of radius R at center distance d.
double lens(double R, double d) {
  if (d >= 2.0 * R) return 0.0;
  return 2.0 * R * R * std::acos(d / (2.0 * R)) - 0.5 * d * std::sqrt(4.0 * R * R - d * d);
}

Grain disc_grain(double x, double y, double r) {
  Grain g;
  g.kind = Grain::Kind::ball;
  g.center = Vector{x, y};
  g.radius = r;
  return g;
}

Grain box_grain(double x, double y, double a, double b) {
  Grain g;
  g.kind = Grain::Kind::box;
  g.center = Vector{x, y};
  g.half = {a, b, 0.0};
  return g;
}

}  // namespace

TEST(BooleanModelSpec, Validation) {
  EXPECT_NO_THROW(discs().validate());
  auto s = discs();
  s.intensity = -1.0;
  EXPECT_THROW(s.validate(), ValidationError);
  s = discs();
  s.margin = 0.05;
  EXPECT_THROW(s.validate(), ValidationError);
  s.margin = 0.25;
  EXPECT_NO_THROW(s.validate(0.0));
  EXPECT_THROW(s.validate(0.1), ValidationError);
  EXPECT_DOUBLE_EQ(discs().margin_for(0.03), 0.23);
  EXPECT_TRUE(discs().isotropic());
  EXPECT_FALSE(boxes().isotropic());
  EXPECT_NEAR(boxes().grain_bound(), std::hypot(0.1, 0.05), 1e-15);
}

TEST(Simulate, GermCountHasPoissonMean) {
  const auto spec = discs();
  const double lambda = spec.intensity * spec.window.inflated(spec.margin_for(0.0)).volume();
  const int J = 400;
  double sum = 0.0;
  for (int j = 0; j < J; ++j) sum += static_cast<double>(simulate(spec, 17, static_cast<std::uint64_t>(j)).grains().size());
  EXPECT_NEAR(sum / J, lambda, 4.0 * std::sqrt(lambda / J));
}

TEST(Simulate, DeterministicPerSeedAndIndex) {
  const auto a = simulate(discs(), 3, 5), b = simulate(discs(), 3, 5), c = simulate(discs(), 3, 6);
  ASSERT_EQ(a.grains().size(), b.grains().size());
  for (std::size_t i = 0; i < a.grains().size(); ++i) EXPECT_EQ(a.grains()[i].center, b.grains()[i].center);
  EXPECT_FALSE(a.grains().size() == c.grains().size() && a.grains().front().center == c.grains().front().center);
}

TEST(Realization, ContainsAndShellCount) {
  const Box ext{Vector{-2.0, -2.0}, Vector{3.0, 2.0}};
  const Realization Z(2, {disc_grain(0.0, 0.0, 1.0), disc_grain(1.0, 0.0, 1.0)}, ext, 0.0);
  EXPECT_TRUE(Z.contains(Vector{0.5, 0.8}));
  EXPECT_FALSE(Z.contains(Vector{0.5, 0.9}));
  EXPECT_TRUE(Z.contains(Vector{1.9, 0.0}));
  EXPECT_EQ(Z.shell_count(Vector{0.5, 0.9}, 0.1), 2);
  EXPECT_EQ(Z.shell_count(Vector{-1.05, 0.0}, 0.1), 1);
}

TEST(BoundaryInWindow, TwoOverlappingDiscs) {
  auto spec = discs(1.0, 1.0);
  spec.window = Box{Vector{-2.0, -2.0}, Vector{3.0, 2.0}};
  const Realization Z(2, {disc_grain(0.0, 0.0, 1.0), disc_grain(1.0, 0.0, 1.0)}, spec.window, 0.0);
  double len = 0.0;
  for (const auto& p : boundary_in_window(spec, Z)) len += p.length;
  EXPECT_NEAR(len, 8.0 * kPi / 3.0, 1e-10);
}

TEST(BoundaryInWindow, DiscClippedByWindow) {
  auto spec = discs(1.0, 1.0);
  spec.window = Box{Vector{0.0, -2.0}, Vector{2.0, 2.0}};
  const Realization Z(2, {disc_grain(0.0, 0.0, 1.0)}, Box{Vector{-2.0, -2.0}, Vector{2.0, 2.0}}, 0.0);
  double len = 0.0;
  for (const auto& p : boundary_in_window(spec, Z)) len += p.length;
  EXPECT_NEAR(len, kPi, 1e-10);
}

TEST(BoundaryInWindow, StaircaseOfTwoBoxes) {
  auto spec = boxes(1.0);
  spec.grain = FixedBox{{1.0, 0.5}, 0.0};
  spec.window = Box{Vector{-1.0, -1.0}, Vector{4.0, 2.0}};
  const Realization Z(2, {box_grain(1.0, 0.5, 1.0, 0.5), box_grain(2.0, 1.0, 1.0, 0.5)}, spec.window, 0.0);
  double len = 0.0;
  for (const auto& p : boundary_in_window(spec, Z)) len += p.length;
  EXPECT_NEAR(len, 9.0, 1e-12);
}

TEST(Rose, DeclaredRoseOfBoxes) {
  const auto R = rose(boxes());
  ASSERT_FALSE(R.uniform);
  EXPECT_NEAR(R.mass(), 1.0, 1e-15);
  for (const auto& a : R.atoms) {
    const double expected = std::abs(a.normal[0]) > 0.5 ? 1.0 / 6.0 : 1.0 / 3.0;
    EXPECT_NEAR(a.weight, expected, 1e-15);
  }
  EXPECT_NEAR(rose_integral(R, StructuringElement{Vector{0.0, 1.0}}), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(rose_integral(rose(discs()), StructuringElement{Vector{0.0, 1.0}}), 1.0 / kPi, 1e-12);
}

TEST(Rose, EmpiricalMatchesDeclared) {
  const auto cfg = est(4, 200);
  EXPECT_LT(total_variation(empirical_rose(boxes(), cfg), rose(boxes())), 0.03);
  EXPECT_LT(total_variation(empirical_rose(discs(), cfg), rose(discs())), 0.05);
}

TEST(VolumeFraction, MatchesPoissonFormula) {
  const auto spec = discs();
  const auto p = volume_fraction(spec, est(8, 500));
  EXPECT_NEAR(p.value, 1.0 - std::exp(-5.0 * kPi * 0.01), 4.0 * p.std_err);
  const auto pb = volume_fraction(boxes(), est(8, 500));
  EXPECT_NEAR(pb.value, 1.0 - std::exp(-5.0 * 4.0 * 0.1 * 0.05), 4.0 * pb.std_err);
}

TEST(SpecificPerimeter, MatchesPoissonFormula) {
  const auto P = specific_perimeter(discs(), est(12, 400));
  EXPECT_NEAR(P.value, 5.0 * 2.0 * kPi * 0.1 * std::exp(-5.0 * kPi * 0.01), 4.0 * P.std_err);
  const auto Pb = specific_perimeter(boxes(), est(12, 400));
  EXPECT_NEAR(Pb.value, 5.0 * 4.0 * 0.15 * std::exp(-5.0 * 4.0 * 0.1 * 0.05), 4.0 * Pb.std_err);
}

TEST(SpecificPerimeter, GridAgreesWithExactOnSameRealizations) {
  const auto cfg = est(13, 30);
  const auto exact = specific_perimeter_samples(discs(), cfg, PerimeterMethod::exact);
  const auto grid = specific_perimeter_samples(discs(), cfg, PerimeterMethod::grid, 0.002);
  std::vector<double> diff(exact.size());
  for (std::size_t j = 0; j < exact.size(); ++j) diff[j] = grid[j] - exact[j];
  const auto d = summarize(diff);
  EXPECT_LT(std::abs(d.value), 0.03 * summarize(exact).value + 4.0 * d.std_err);
}

TEST(SpecificPerimeter, LargerWindowShrinksSpread) {
  auto big = discs();
  big.window = Box{Vector{0.0, 0.0}, Vector{3.0, 3.0}};
  const auto small_e = specific_perimeter(discs(), est(14, 100));
  const auto big_e = specific_perimeter(big, est(14, 100));
  EXPECT_LT(big_e.std_err, small_e.std_err);
}

TEST(ContactDistribution, ZeroRadiusAndTrivialQ) {
  const auto cd = contact_distribution(discs(), StructuringElement{Vector{1.0, 0.0}}, {0.0, 0.05}, est(2, 50));
  EXPECT_EQ(cd.points[0].H.value, 0.0);
  const auto trivial = contact_distribution(discs(), StructuringElement{Vector{0.0, 0.0}}, {0.05, 0.1}, est(2, 50));
  for (const auto& p : trivial.points) EXPECT_EQ(p.H.value, 0.0);
}

TEST(ContactDistribution, MatchesDiscModelFormula) {
  const double gamma = 5.0, R = 0.1;
  const StructuringElement Q{Vector{1.0, 0.0}};
  const std::vector<double> rs{0.02, 0.05, 0.1};
  const auto cd = contact_distribution(discs(gamma, R), Q, rs, est(21, 400, 128));
  for (std::size_t k = 0; k < rs.size(); ++k) {
    const double oracle = 1.0 - std::exp(-gamma * (kPi * R * R - lens(R, rs[k])));
    EXPECT_NEAR(cd.points[k].H.value, oracle, 4.0 * cd.points[k].H.std_err) << "r=" << rs[k];
  }
}

TEST(ContactDistribution, RejectsFullCoverage) {
  EXPECT_THROW(contact_distribution(discs(2000.0), StructuringElement{Vector{1.0, 0.0}}, {0.01}, est(1, 20)), ValidationError);
}

TEST(HPrimeCheck, DiscSlopeMatchesBothRightHandSides) {
  const auto rep = hprime_check(discs(), StructuringElement{Vector{0.0, 1.0}}, {}, est(31, 300));
  const double slope = 5.0 * 2.0 * kPi * 0.1 * std::exp(-5.0 * kPi * 0.01) / kPi;
  EXPECT_NEAR(rep.slope.value, slope, 4.0 * rep.slope.std_err);
  EXPECT_TRUE(rep.isotropic);
  EXPECT_LT(std::abs(rep.z_rose), 4.0);
  EXPECT_LT(std::abs(rep.z_mean_width), 4.0);
  EXPECT_NEAR(rep.mean_width, 2.0 / kPi, 1e-12);
}

TEST(HPrimeCheck, BoxSlopeMatchesRose) {
  const auto rep = hprime_check(boxes(), StructuringElement{Vector{0.0, 1.0}}, {}, est(32, 300));
  const double slope = std::exp(-4.0 * 0.1 * 0.05 * 5.0) * 5.0 * 2.0 * 0.1;
  EXPECT_NEAR(rep.slope.value, slope, 4.0 * rep.slope.std_err);
  EXPECT_FALSE(rep.isotropic);
  EXPECT_NEAR(rep.rose_integral, 1.0 / 3.0, 1e-15);
  EXPECT_LT(std::abs(rep.z_rose), 4.0);
}

TEST(Estimation, WorkerCountDoesNotChangeResults) {
  auto c1 = est(5, 40), c3 = c1;
  c3.workers = 3;
  EXPECT_EQ(volume_fraction_samples(discs(), c1), volume_fraction_samples(discs(), c3));
  EXPECT_EQ(specific_perimeter_samples(boxes(), c1), specific_perimeter_samples(boxes(), c3));
}
