#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "perimetry/counterexample.hpp"

using namespace perimetry;

namespace {

constexpr double kPi = std::numbers::pi;

bool brute_lattice_hit(double g, std::array<double, 2> o, std::array<double, 2> c, double T, double a, double b) {
  const auto i0 = static_cast<std::int64_t>(std::floor((c[0] - T - o[0]) / g)) - 1;
  const auto i1 = static_cast<std::int64_t>(std::ceil((c[0] + T - o[0]) / g)) + 1;
  const auto j0 = static_cast<std::int64_t>(std::floor((c[1] - T - o[1]) / g)) - 1;
  const auto j1 = static_cast<std::int64_t>(std::ceil((c[1] + T - o[1]) / g)) + 1;
  for (auto i = i0; i <= i1; ++i)
    for (auto j = j0; j <= j1; ++j) {
      const double x = o[0] + g * static_cast<double>(i), y = o[1] + g * static_cast<double>(j);
      const double d = std::hypot(x, y);
      if (std::hypot(x - c[0], y - c[1]) <= T && d >= a && d <= b) return true;
    }
  return false;
}

std::int64_t brute_annulus_count(double g, double a, double b) {
  const auto K = static_cast<std::int64_t>(std::ceil(b / g)) + 1;
  std::int64_t n = 0;
  for (auto i = -K; i <= K; ++i)
    for (auto j = -K; j <= K; ++j) {
      const double d = std::hypot(g * static_cast<double>(i), g * static_cast<double>(j));
      n += d >= a && d <= b;
    }
  return n;
}

}  // namespace

TEST(LatticeHits, AgreesWithEnumeration) {
  CounterRng rng(101, 0);
  int unknown = 0, decided = 0;
  for (int t = 0; t < 4000; ++t) {
    const double g = std::exp2(-rng.uniform(1.0, 6.0));
    const std::array<double, 2> o{rng.uniform(0.0, g), rng.uniform(0.0, g)};
    const double a = rng.uniform(0.0, 1.0), b = a + rng.uniform(0.0, 0.3);
    const double rc = rng.uniform(0.0, 1.5), phi = rng.uniform(0.0, 2.0 * kPi);
    const std::array<double, 2> c{rc * std::cos(phi), rc * std::sin(phi)};
    const double T = rng.uniform(0.0, 0.4);
    const auto got = detail::lattice_hits(g, o, c, T, a, b);
    if (got == detail::Tri::unknown) {
      ++unknown;
      continue;
    }
    ++decided;
    EXPECT_EQ(got == detail::Tri::yes, brute_lattice_hit(g, o, c, T, a, b))
        << "g=" << g << " c=(" << c[0] << "," << c[1] << ") T=" << T << " a=" << a << " b=" << b;
  }
  EXPECT_LT(unknown, decided / 100);
}

TEST(CounterexampleSet, RangeChecks) {
  EXPECT_THROW(CounterexampleSet(3), ValidationError);
  EXPECT_THROW(CounterexampleSet(21), ValidationError);
  EXPECT_THROW(counterexample(6, CounterexampleConfig{1, 999, 1}), ValidationError);
}

TEST(CounterexampleSet, RingConstraints) {
  const CounterexampleSet set(10);
  double perimeter = 0.0;
  for (const auto& R : set.rings()) {
    const int m = R.m;
    EXPECT_DOUBLE_EQ(R.inner, 1.0 / (m + 1));
    EXPECT_DOUBLE_EQ(R.outer, 1.0 / m);
    EXPECT_DOUBLE_EQ(R.eps, 1.0 / (std::exp2(m) * m));
    EXPECT_LE(R.delta, R.eps / 4.0);
    EXPECT_EQ(std::log2(R.delta), std::round(std::log2(R.delta)));
    // Every point of R_m is within eps of the net: lattice covering radius plus the shrink margin.
    EXPECT_LE(R.delta * std::numbers::sqrt2 / 2.0 + R.margin, R.eps);
    // Discs are disjoint and stay inside the ring.
    EXPECT_LE(2.0 * R.radius, R.delta);
    EXPECT_LE(R.radius, R.margin);
    EXPECT_LE(R.eta, R.radius / std::numbers::sqrt2);
    EXPECT_LE(R.set_area, 0.5 * R.ring_area);
    EXPECT_NEAR(R.ring_area, kPi * (std::pow(m, -2.0) - std::pow(m + 1, -2.0)), 1e-15);
    if (m <= 4) {
      EXPECT_EQ(R.points, brute_annulus_count(R.delta, R.inner + R.margin, R.outer - R.margin)) << "m=" << m;
    }
    perimeter += R.set_perimeter;
  }
  EXPECT_LT(perimeter, 1.0);
  EXPECT_DOUBLE_EQ(set.perimeter(), perimeter);
}

TEST(CounterexampleSet, MembershipAroundNetPoints) {
  const CounterexampleSet set(6);
  CounterRng rng(7, 0);
  for (const auto& R : set.rings()) {
    const double s0 = R.inner + R.margin, s1 = R.outer - R.margin;
    for (int t = 0; t < 500; ++t) {
      // A net point of S_m, then a probe at a random distance from it.
      const double rad = rng.uniform(s0, s1), phi = rng.uniform(0.0, 2.0 * kPi);
      const double px = R.delta * std::round(rad * std::cos(phi) / R.delta);
      const double py = R.delta * std::round(rad * std::sin(phi) / R.delta);
      const double pd = std::hypot(px, py);
      if (pd < s0 || pd > s1) continue;
      const double rho = R.radius * rng.uniform(0.0, 1.8), psi = rng.uniform(0.0, 2.0 * kPi);
      if (std::abs(rho - R.radius) < 1e-9 * R.radius) continue;
      EXPECT_EQ(set.in_A(px + rho * std::cos(psi), py + rho * std::sin(psi)), rho < R.radius) << "m=" << R.m;
    }
  }
  EXPECT_FALSE(set.in_A(0.0, 0.0));
  EXPECT_FALSE(set.in_A(1.2, 0.0));
}

TEST(Counterexample, RowsAndBounds) {
  const auto ce = counterexample(7, CounterexampleConfig{3, 20000, 1});
  ASSERT_EQ(ce.rows.size(), 4u);
  EXPECT_DOUBLE_EQ(ce.qvariation_bound, ce.perimeter);
  for (std::size_t i = 0; i < ce.rows.size(); ++i) {
    const auto& row = ce.rows[i];
    const int m = static_cast<int>(i) + 4;
    EXPECT_EQ(row.m, m);
    EXPECT_DOUBLE_EQ(row.r, std::exp2(-m));
    EXPECT_NEAR(row.analytic_bound, kPi * (std::pow(m, -2.0) - std::pow(m + 1, -2.0)) * std::exp2(m - 1), 1e-12);
    EXPECT_LE(row.ratio_lower, row.ratio_upper);
    // The ring minus A sits inside the excess.
    EXPECT_GE(row.ratio_upper, row.ring_bound - 4.0 * row.std_err);
    EXPECT_GE(row.ring_bound, row.analytic_bound);
  }
}

TEST(Counterexample, WorkerCountDoesNotChangeRows) {
  const auto a = counterexample(6, CounterexampleConfig{9, 8000, 1});
  const auto b = counterexample(6, CounterexampleConfig{9, 8000, 3});
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].ratio_lower, b.rows[i].ratio_lower);
    EXPECT_EQ(a.rows[i].undecided, b.rows[i].undecided);
  }
}
