#pragma once

// A compact planar set A of finite perimeter and a countable compact
// structuring element Q for which G(rQ, 1_A) / r is unbounded as r -> 0,
// truncated to rings m = 1..m_max.
//
//   R_m   open annulus between radii 1/(m+1) and 1/m
//   A_m   lattice net delta_m Z^2 restricted to a slightly shrunk closed
//         annulus S_m; every point of R_m is within eps_m = (2^m m)^{-1}
//   A     {0} u union_m (A_m + B(0, r_m))
//   Q_m   lattice net eta_m Z^2 restricted to B(0, 1/m), eta_m <= r_m / sqrt 2
//   Q     {0} u union_m Q_m
//
// Neither A_m nor Q_m is ever enumerated: membership in A + rQ reduces to
// deciding whether a lattice meets the intersection of a disc and an annulus.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "perimetry/random.hpp"
#include "perimetry/sampling.hpp"
#include "perimetry/vector.hpp"

namespace perimetry {

struct CounterexampleRing {
  int m = 0;
  double inner = 0.0, outer = 0.0;  // R_m = int(B(0, outer) \ B(0, inner))
  double eps = 0.0;                 // covering radius required of A_m
  double margin = 0.0;              // S_m = closed annulus [inner + margin, outer - margin]
  double delta = 0.0;               // A_m lattice spacing
  std::int64_t points = 0;          // #A_m
  double radius = 0.0;              // r_m
  double eta = 0.0;                 // Q_m lattice spacing
  double ring_area = 0.0;           // vol(R_m)
  double set_area = 0.0;            // vol(A_m + B(0, r_m))
  double set_perimeter = 0.0;       // #A_m * 2 pi r_m
};

struct CounterexampleRow {
  int m = 0;
  double r = 0.0;                // 2^{-m}
  double ratio_lower = 0.0;      // certified part of G(rQ, 1_A) / r
  double ratio_upper = 0.0;      // including undecided sample points
  double std_err = 0.0;          // Monte Carlo error of ratio_lower
  double analytic_bound = 0.0;   // vol(R_m) / (2r)
  double ring_bound = 0.0;       // vol(R_m \ A) / r
  std::int64_t samples = 0;
  std::int64_t undecided = 0;
};

struct CounterexampleConfig {
  std::uint64_t seed = 1;
  std::int64_t samples_per_r = 200000;
  int workers = 1;
};

struct Counterexample {
  int m_max = 0;
  std::vector<CounterexampleRing> rings;  // rings[m - 1]
  double perimeter = 0.0;                 // P(A) = sum of set_perimeter
  double qvariation_bound = 0.0;          // circumradius(Q u {0}) * P(A) >= V^{-Q}(1_A)
  std::vector<CounterexampleRow> rows;    // m = 4..m_max
};

namespace detail {

inline double dyadic_floor(double x) { return std::exp2(std::floor(std::log2(x))); }

enum class Tri { no, yes, unknown };

// Whether the lattice o + gZ^2 meets B(c, T) n {a <= |y| <= b}.
inline Tri lattice_hits(double g, const std::array<double, 2>& o, const std::array<double, 2>& c, double T, double a,
                        double b) {
  const double dc = std::hypot(c[0], c[1]);
  auto disc_meets_annulus = [&](double t, double lo, double hi) {
    if (t < 0.0 || lo > hi) return false;
    return std::max(0.0, dc - t) <= hi && dc + t >= lo;
  };
  const double slack = 1e-12 * (1.0 + dc + T);
  if (!disc_meets_annulus(T + slack, a - slack, b + slack)) return Tri::no;
  const double e = g * std::numbers::sqrt2 / 2.0 + slack;
  if (disc_meets_annulus(T - e, a + e, b - e)) {
    // A disc and an annulus that meet have a common point whose closed
    // g/sqrt2-neighbourhood lies in both; it contains a lattice point.
    return Tri::yes;
  }
  // Thin region: enumerate lattice rows crossing the disc.
  const double rows = 2.0 * T / g + 2.0;
  if (rows > 4096.0) return Tri::unknown;
  const auto j0 = static_cast<std::int64_t>(std::ceil((c[1] - T - o[1]) / g));
  const auto j1 = static_cast<std::int64_t>(std::floor((c[1] + T - o[1]) / g));
  bool marginal = false;
  for (std::int64_t j = j0; j <= j1; ++j) {
    const double y = o[1] + g * static_cast<double>(j);
    const double half = std::sqrt(std::max(0.0, T * T - (y - c[1]) * (y - c[1])));
    const double xl = c[0] - half, xr = c[0] + half;
    const double outer2 = b * b - y * y;
    if (outer2 < 0.0) continue;
    const double xo = std::sqrt(outer2);
    const double xi = a * a - y * y > 0.0 ? std::sqrt(a * a - y * y) : 0.0;
    // |x| in [xi, xo], x in [xl, xr].
    for (const auto& [lo, hi] : {std::pair{std::max(xl, xi), std::min(xr, xo)}, std::pair{std::max(xl, -xo), std::min(xr, -xi)}}) {
      if (lo > hi + slack) continue;
      const auto k0 = static_cast<std::int64_t>(std::ceil((lo - o[0]) / g));
      const auto k1 = static_cast<std::int64_t>(std::floor((hi - o[0]) / g));
      if (k0 <= k1) {
        const double p0 = o[0] + g * static_cast<double>(k0), p1 = o[0] + g * static_cast<double>(k1);
        if (p0 >= lo + slack && p1 <= hi - slack) return Tri::yes;
        marginal = true;
      } else if (lo > hi - slack || std::abs(o[0] + g * static_cast<double>(k0) - lo) <= slack ||
                 std::abs(o[0] + g * static_cast<double>(k1) - hi) <= slack) {
        marginal = true;
      }
    }
  }
  return marginal ? Tri::unknown : Tri::no;
}

}  // namespace detail

class CounterexampleSet {
 public:
  explicit CounterexampleSet(int m_max) : m_max_(m_max) {
    if (m_max < 4 || m_max > 20) throw ValidationError("counterexample: m_max must lie in [4, 20]");
    for (int m = 1; m <= m_max; ++m) rings_.push_back(make_ring(m));
  }

  int m_max() const { return m_max_; }
  const std::vector<CounterexampleRing>& rings() const { return rings_; }

  double perimeter() const {
    double s = 0.0;
    for (const auto& R : rings_) s += R.set_perimeter;
    return s;
  }

  /// x in A (the isolated point 0 is ignored: it is a null set).
  bool in_A(double x, double y) const {
    const double d = std::hypot(x, y);
    for (const auto& R : rings_) {
      if (d < R.inner || d > R.outer) continue;
      const double px = R.delta * std::round(x / R.delta), py = R.delta * std::round(y / R.delta);
      const double pd = std::hypot(px, py);
      if (pd >= R.inner + R.margin && pd <= R.outer - R.margin && std::hypot(x - px, y - py) <= R.radius) return true;
    }
    return false;
  }

  /// Tri-state membership of x in (A + rQ) \ A.
  detail::Tri in_excess(double x, double y, double r) const {
    if (in_A(x, y)) return detail::Tri::no;
    const double d = std::hypot(x, y);
    bool unknown = false;
    for (const auto& Ra : rings_) {
      const double s0 = Ra.inner + Ra.margin, s1 = Ra.outer - Ra.margin;
      const double rho = Ra.radius;
      if (d + r + rho < s0 || d - r - rho > s1) continue;
      for (const auto& Rq : rings_) {
        const double T = r / Rq.m;
        const double gq = r * Rq.eta;
        const auto t = pair_test(x, y, Ra, s0, s1, T, gq);
        if (t == detail::Tri::yes) return t;
        unknown = unknown || t == detail::Tri::unknown;
      }
    }
    return unknown ? detail::Tri::unknown : detail::Tri::no;
  }

 private:
  // x in A_a + (r Q_q) + B(0, r_a), with r Q_q = gq Z^2 n B(0, T).
  detail::Tri pair_test(double x, double y, const CounterexampleRing& Ra, double s0, double s1, double T, double gq) const {
    using detail::Tri;
    const double ga = Ra.delta, rho = Ra.radius;
    const std::array<double, 2> zero{0.0, 0.0};
    if (rho >= std::numbers::sqrt2 * gq) {
      // The Q-net plus B(0, rho) covers B(0, T) and lies in B(0, T + rho).
      if (detail::lattice_hits(ga, zero, {x, y}, T, s0, s1) == Tri::yes) return Tri::yes;
      return detail::lattice_hits(ga, zero, {x, y}, T + rho, s0, s1) == Tri::no ? Tri::no : Tri::unknown;
    }
    // Sparse Q-net: both nets are dyadic, so the finer contains the coarser
    // and x must lie within rho of a point p of the finer one.
    const double gf = std::min(ga, gq);
    const auto i0 = static_cast<std::int64_t>(std::ceil((x - rho) / gf));
    const auto i1 = static_cast<std::int64_t>(std::floor((x + rho) / gf));
    const auto j0 = static_cast<std::int64_t>(std::ceil((y - rho) / gf));
    const auto j1 = static_cast<std::int64_t>(std::floor((y + rho) / gf));
    bool unknown = false;
    for (auto i = i0; i <= i1; ++i)
      for (auto j = j0; j <= j1; ++j) {
        const std::array<double, 2> p{gf * static_cast<double>(i), gf * static_cast<double>(j)};
        if (std::hypot(p[0] - x, p[1] - y) > rho) continue;
        // p = a + q with a in A-net (in S), q in Q-net n B(0, T).
        const Tri t = ga <= gq ? detail::lattice_hits(gq, p, p, T, s0, s1) : detail::lattice_hits(ga, zero, p, T, s0, s1);
        if (t == Tri::yes) return t;
        unknown = unknown || t == Tri::unknown;
      }
    return unknown ? Tri::unknown : Tri::no;
  }

  static std::int64_t count_annulus_points(double g, double a, double b) {
    std::int64_t count = 0;
    const auto jmax = static_cast<std::int64_t>(std::floor(b / g));
    for (std::int64_t j = -jmax; j <= jmax; ++j) {
      const double y = g * static_cast<double>(j);
      const double outer2 = b * b - y * y;
      if (outer2 < 0.0) continue;
      const auto kout = static_cast<std::int64_t>(std::floor(std::sqrt(outer2) / g));
      std::int64_t row = 2 * kout + 1;
      const double inner2 = a * a - y * y;
      if (inner2 > 0.0) {
        // exclude |x| < sqrt(inner2)
        const double xi = std::sqrt(inner2);
        auto kin = static_cast<std::int64_t>(std::ceil(xi / g)) - 1;  // |k| <= kin strictly inside
        if (g * static_cast<double>(kin + 1) < xi) ++kin;
        row -= 2 * kin + 1;
      }
      count += row;
    }
    return count;
  }

  static CounterexampleRing make_ring(int m) {
    CounterexampleRing R;
    R.m = m;
    R.inner = 1.0 / (m + 1);
    R.outer = 1.0 / m;
    R.eps = 1.0 / (std::exp2(m) * m);
    R.margin = R.eps / 4.0;
    R.delta = detail::dyadic_floor(R.eps / 4.0);
    R.points = count_annulus_points(R.delta, R.inner + R.margin, R.outer - R.margin);
    R.ring_area = std::numbers::pi * (R.outer * R.outer - R.inner * R.inner);
    const double n = static_cast<double>(R.points);
    const double perimeter_budget = 1.0 / (static_cast<double>(m) * (m + 1));
    R.radius = 0.5 * std::min({R.margin, R.delta / 2.0, std::sqrt(R.ring_area / (2.0 * std::numbers::pi * n)),
                               perimeter_budget / (2.0 * std::numbers::pi * n)});
    R.eta = detail::dyadic_floor(R.radius / std::numbers::sqrt2);
    R.set_area = n * std::numbers::pi * R.radius * R.radius;
    R.set_perimeter = n * 2.0 * std::numbers::pi * R.radius;
    return R;
  }

  int m_max_;
  std::vector<CounterexampleRing> rings_;
};

/// Builds the truncated set and measures G(rQ, 1_A) / r at r = 2^{-m},
/// m = 4..m_max, by radially stratified sampling over B(0, 1 + r).
inline Counterexample counterexample(int m_max, const CounterexampleConfig& cfg = {}) {
  const CounterexampleSet set(m_max);
  Counterexample out;
  out.m_max = m_max;
  out.rings = set.rings();
  out.perimeter = set.perimeter();
  // Q u {0} lies in the unit ball and contains 0, so its circumradius is <= 1.
  out.qvariation_bound = 1.0 * out.perimeter;
  if (cfg.samples_per_r < 1000) throw ValidationError("counterexample: need at least 1000 samples per radius");

  for (int m = 4; m <= m_max; ++m) {
    const double r = std::exp2(-m);
    // Radial strata: the core, every ring R_k, and the shell [1, 1 + r].
    std::vector<double> edges{0.0};
    for (int k = m_max; k >= 1; --k) edges.push_back(1.0 / k);
    edges.push_back(1.0 + r);
    const std::size_t S = edges.size() - 1;
    std::vector<std::int64_t> alloc(S);
    const double total_area = std::numbers::pi * edges.back() * edges.back();
    for (std::size_t s = 0; s < S; ++s) {
      const double area = std::numbers::pi * (edges[s + 1] * edges[s + 1] - edges[s] * edges[s]);
      alloc[s] = std::max<std::int64_t>(64, static_cast<std::int64_t>(
                                                static_cast<double>(cfg.samples_per_r) * (0.5 / static_cast<double>(S) + 0.5 * area / total_area)));
    }
    constexpr std::int64_t kChunk = 4096;
    struct Job {
      std::size_t stratum;
      std::int64_t begin, end;
    };
    std::vector<Job> jobs;
    for (std::size_t s = 0; s < S; ++s)
      for (std::int64_t b = 0; b < alloc[s]; b += kChunk) jobs.push_back({s, b, std::min(alloc[s], b + kChunk)});
    std::vector<std::array<std::int64_t, 2>> counts(jobs.size(), {0, 0});
    const std::uint64_t seed = mix64(cfg.seed ^ mix64(0x4558ULL + static_cast<std::uint64_t>(m)));
    parallel_for(jobs.size(), resolve_workers(cfg.workers), [&](std::size_t ji) {
      const auto& job = jobs[ji];
      const double a = edges[job.stratum], b = edges[job.stratum + 1];
      for (std::int64_t i = job.begin; i < job.end; ++i) {
        CounterRng rng(seed, job.stratum, static_cast<std::uint64_t>(i));
        const double rad = std::sqrt(a * a + rng.uniform() * (b * b - a * a));
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        const auto t = set.in_excess(rad * std::cos(phi), rad * std::sin(phi), r);
        if (t == detail::Tri::yes) ++counts[ji][0];
        if (t == detail::Tri::unknown) ++counts[ji][1];
      }
    });
    std::vector<std::int64_t> yes(S, 0), unk(S, 0);
    for (std::size_t ji = 0; ji < jobs.size(); ++ji) {
      yes[jobs[ji].stratum] += counts[ji][0];
      unk[jobs[ji].stratum] += counts[ji][1];
    }
    CounterexampleRow row;
    row.m = m;
    row.r = r;
    double lower = 0.0, upper = 0.0, var = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double area = std::numbers::pi * (edges[s + 1] * edges[s + 1] - edges[s] * edges[s]);
      const double n = static_cast<double>(alloc[s]);
      const double p = static_cast<double>(yes[s]) / n;
      lower += area * p;
      upper += area * static_cast<double>(yes[s] + unk[s]) / n;
      // Binomial variance, with a one-event floor for empty or full strata.
      var += area * area * std::max(p * (1.0 - p), 1.0 / n) / n;
      row.samples += alloc[s];
      row.undecided += unk[s];
    }
    const auto& Rm = set.rings()[static_cast<std::size_t>(m - 1)];
    row.ratio_lower = lower / r;
    row.ratio_upper = upper / r;
    row.std_err = std::sqrt(var) / r;
    row.analytic_bound = Rm.ring_area / (2.0 * r);
    row.ring_bound = (Rm.ring_area - Rm.set_area) / r;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace perimetry
