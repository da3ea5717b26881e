#pragma once

// Stationary Boolean models (Poisson germs, i.i.d. bounded grains) observed
// through a box window with plus-sampling, and the estimators around the
// contact distribution function H_Q.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "perimetry/exact_union.hpp"
#include "perimetry/geom_core.hpp"
#include "perimetry/gridset.hpp"
#include "perimetry/random.hpp"
#include "perimetry/sampling.hpp"

namespace perimetry {

// ---------------------------------------------------------------------------
// Model specification
// ---------------------------------------------------------------------------

struct FixedDisc {
  double radius = 0.1;  // balls in dimension 3
};

struct DiscRadiusLaw {
  std::vector<double> radii;
  std::vector<double> probabilities;
};

struct FixedBox {
  std::vector<double> half_extents;
  double angle = 0.0;  // rotation in the plane; must be 0 in dimension 3
};

using GrainLaw = std::variant<FixedDisc, DiscRadiusLaw, FixedBox>;

struct BooleanModelSpec {
  int dim = 2;
  double intensity = 1.0;
  GrainLaw grain = FixedDisc{};
  Box window{Vector{0.0, 0.0}, Vector{1.0, 1.0}};
  double margin = 0.0;  // 0: the smallest admissible margin for the requested reach

  /// Largest distance from a germ to a point of its grain.
  double grain_bound() const {
    return std::visit(
        [&](const auto& g) -> double {
          using G = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<G, FixedDisc>) {
            return g.radius;
          } else if constexpr (std::is_same_v<G, DiscRadiusLaw>) {
            return *std::max_element(g.radii.begin(), g.radii.end());
          } else {
            double s = 0.0;
            for (double h : g.half_extents) s += h * h;
            return std::sqrt(s);
          }
        },
        grain);
  }

  /// Typical grain size used to scale default r schedules.
  double grain_scale() const {
    if (const auto* b = std::get_if<FixedBox>(&grain)) return *std::max_element(b->half_extents.begin(), b->half_extents.end());
    return grain_bound();
  }

  bool isotropic() const { return !std::holds_alternative<FixedBox>(grain); }

  /// Margin actually used for a given reach max r|q|.
  double margin_for(double reach) const { return margin > 0.0 ? margin : 2.0 * grain_bound() + reach; }

  void validate(double reach = 0.0) const {
    if (dim != 2 && dim != 3) throw ValidationError("BooleanModelSpec: dim must be 2 or 3");
    if (!(intensity > 0.0) || !std::isfinite(intensity)) throw ValidationError("BooleanModelSpec: intensity must be positive");
    if (window.dim() != dim) throw ValidationError("BooleanModelSpec: window dimension mismatch");
    for (int a = 0; a < dim; ++a)
      if (!(window.hi[a] > window.lo[a])) throw ValidationError("BooleanModelSpec: empty window");
    std::visit(
        [&](const auto& g) {
          using G = std::decay_t<decltype(g)>;
          if constexpr (std::is_same_v<G, FixedDisc>) {
            if (!(g.radius > 0.0)) throw ValidationError("BooleanModelSpec: grain radius must be positive");
          } else if constexpr (std::is_same_v<G, DiscRadiusLaw>) {
            if (g.radii.empty() || g.radii.size() != g.probabilities.size()) {
              throw ValidationError("BooleanModelSpec: radius law needs matching radii and probabilities");
            }
            double s = 0.0;
            for (std::size_t i = 0; i < g.radii.size(); ++i) {
              if (!(g.radii[i] > 0.0) || !(g.probabilities[i] >= 0.0)) {
                throw ValidationError("BooleanModelSpec: radius law needs positive radii and nonnegative probabilities");
              }
              s += g.probabilities[i];
            }
            if (std::abs(s - 1.0) > 1e-9) throw ValidationError("BooleanModelSpec: radius probabilities must sum to 1");
          } else {
            if (static_cast<int>(g.half_extents.size()) != dim) throw ValidationError("BooleanModelSpec: box half extents must have dim entries");
            for (double h : g.half_extents)
              if (!(h > 0.0)) throw ValidationError("BooleanModelSpec: box half extents must be positive");
            if (dim == 3 && g.angle != 0.0) throw ValidationError("BooleanModelSpec: rotated boxes are supported in the plane only");
          }
        },
        grain);
    if (!(reach >= 0.0)) throw ValidationError("BooleanModelSpec: negative reach");
    if (margin > 0.0 && margin < 2.0 * grain_bound() + reach) {
      throw ValidationError("BooleanModelSpec: margin " + std::to_string(margin) + " is below grain diameter bound + max r|q| = " +
                            std::to_string(2.0 * grain_bound() + reach));
    }
  }
};

// ---------------------------------------------------------------------------
// Grains and realizations
// ---------------------------------------------------------------------------

struct Grain {
  enum class Kind { ball, box } kind = Kind::ball;
  Vector center;
  double radius = 0.0;                 // ball
  std::array<double, 3> half{};        // box, local frame
  double cos_a = 1.0, sin_a = 0.0;     // box rotation (plane)

  Vector to_local(const Vector& x) const {
    Vector d = x - center;
    if (kind == Kind::box && center.dim() == 2) return Vector{cos_a * d[0] + sin_a * d[1], -sin_a * d[0] + cos_a * d[1]};
    return d;
  }
  Vector from_local(const Vector& l) const {
    if (kind == Kind::box && center.dim() == 2) return center + Vector{cos_a * l[0] - sin_a * l[1], sin_a * l[0] + cos_a * l[1]};
    return center + l;
  }

  bool contains(const Vector& x) const {
    if (kind == Kind::ball) return (x - center).norm2() <= radius * radius;
    const Vector l = to_local(x);
    for (int a = 0; a < l.dim(); ++a)
      if (std::abs(l[a]) > half[static_cast<std::size_t>(a)]) return false;
    return true;
  }

  double bound() const {
    if (kind == Kind::ball) return radius;
    double s = 0.0;
    for (int a = 0; a < center.dim(); ++a) s += half[static_cast<std::size_t>(a)] * half[static_cast<std::size_t>(a)];
    return std::sqrt(s);
  }

  Box bbox(double pad = 0.0) const { return Box{center, center}.inflated(bound() + pad); }

  // Shell: points outside the grain within rho of it (boxes: within rho along
  // every local axis, a superset).
  bool in_shell(const Vector& x, double rho) const {
    if (kind == Kind::ball) {
      const double d2 = (x - center).norm2();
      return d2 > radius * radius && d2 <= (radius + rho) * (radius + rho);
    }
    const Vector l = to_local(x);
    bool outside = false;
    for (int a = 0; a < l.dim(); ++a) {
      const double h = half[static_cast<std::size_t>(a)];
      if (std::abs(l[a]) > h + rho) return false;
      if (std::abs(l[a]) > h) outside = true;
    }
    return outside;
  }

  double shell_volume(double rho) const {
    const int n = center.dim();
    if (kind == Kind::ball) return unit_ball_volume(n) * (std::pow(radius + rho, n) - std::pow(radius, n));
    double outer = 1.0, inner = 1.0;
    for (int a = 0; a < n; ++a) {
      outer *= 2.0 * (half[static_cast<std::size_t>(a)] + rho);
      inner *= 2.0 * half[static_cast<std::size_t>(a)];
    }
    return outer - inner;
  }

  Vector sample_shell(CounterRng& rng, double rho) const {
    const int n = center.dim();
    if (kind == Kind::ball) {
      const double a = std::pow(radius, n), b = std::pow(radius + rho, n);
      const double rad = std::pow(a + rng.uniform() * (b - a), 1.0 / n);
      Vector dir(n);
      if (n == 2) {
        const double phi = 2.0 * std::numbers::pi * rng.uniform();
        dir = Vector{std::cos(phi), std::sin(phi)};
      } else {
        const double z = 2.0 * rng.uniform() - 1.0, phi = 2.0 * std::numbers::pi * rng.uniform();
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        dir = Vector{s * std::cos(phi), s * std::sin(phi), z};
      }
      return center + rad * dir;
    }
    // Partition of the frame into slabs: slab k has |l_k| in (h_k, h_k + rho],
    // |l_j| <= h_j for j < k and |l_j| <= h_j + rho for j > k.
    std::array<double, 3> vol{};
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
      double v = 2.0 * rho;
      for (int j = 0; j < n; ++j) {
        if (j == k) continue;
        v *= 2.0 * (half[static_cast<std::size_t>(j)] + (j > k ? rho : 0.0));
      }
      vol[static_cast<std::size_t>(k)] = v;
      total += v;
    }
    double u = rng.uniform() * total;
    int k = 0;
    while (k < n - 1 && u >= vol[static_cast<std::size_t>(k)]) u -= vol[static_cast<std::size_t>(k++)];
    Vector l(n);
    for (int j = 0; j < n; ++j) {
      const double h = half[static_cast<std::size_t>(j)];
      if (j == k) {
        const double t = h + rho * rng.uniform();
        l[j] = rng.uniform() < 0.5 ? -t : t;
      } else {
        const double e = h + (j > k ? rho : 0.0);
        l[j] = rng.uniform(-e, e);
      }
    }
    return from_local(l);
  }
};

class Realization {
 public:
  Realization(int dim, std::vector<Grain> grains, Box extended, double pad) : dim_(dim), grains_(std::move(grains)), extended_(extended) {
    double bound = 0.0;
    for (const auto& g : grains_) bound = std::max(bound, g.bound());
    cell_ = std::max(2.0 * (bound + pad), 1e-9);
    for (int a = 0; a < dim_; ++a) {
      cells_[static_cast<std::size_t>(a)] =
          std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil((extended_.hi[a] - extended_.lo[a]) / cell_)), 1, 4096);
    }
    std::int64_t total = 1;
    for (int a = 0; a < dim_; ++a) total *= cells_[static_cast<std::size_t>(a)];
    buckets_.assign(static_cast<std::size_t>(total), {});
    for (std::size_t i = 0; i < grains_.size(); ++i) {
      for_cells(grains_[i].bbox(pad), [&](std::size_t c) { buckets_[c].push_back(static_cast<std::uint32_t>(i)); });
    }
  }

  int dim() const { return dim_; }
  const std::vector<Grain>& grains() const { return grains_; }

  bool contains(const Vector& x) const {
    const auto c = cell_of(x);
    if (c < 0) return false;
    for (auto i : buckets_[static_cast<std::size_t>(c)])
      if (grains_[i].contains(x)) return true;
    return false;
  }

  /// Number of grains whose shell of width rho (rho <= pad) contains x.
  int shell_count(const Vector& x, double rho) const {
    const auto c = cell_of(x);
    if (c < 0) return 0;
    int n = 0;
    for (auto i : buckets_[static_cast<std::size_t>(c)]) n += grains_[i].in_shell(x, rho);
    return n;
  }

  /// Indices of grains whose padded bounding box meets `b`.
  std::vector<std::size_t> near(const Box& b) const {
    std::vector<std::size_t> out;
    for_cells(b, [&](std::size_t c) { out.insert(out.end(), buckets_[c].begin(), buckets_[c].end()); });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::int64_t cell_of(const Vector& x) const {
    std::int64_t idx = 0, stride = 1;
    for (int a = 0; a < dim_; ++a) {
      const auto n = cells_[static_cast<std::size_t>(a)];
      const auto i = static_cast<std::int64_t>(std::floor((x[a] - extended_.lo[a]) / cell_));
      if (i < 0 || i >= n) {
        if (x[a] < extended_.lo[a] - 1e-12 || x[a] > extended_.hi[a] + 1e-12) return -1;
      }
      idx += std::clamp<std::int64_t>(i, 0, n - 1) * stride;
      stride *= n;
    }
    return idx;
  }

  template <class F>
  void for_cells(const Box& b, F&& f) const {
    std::array<std::int64_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      const auto n = cells_[static_cast<std::size_t>(a)];
      lo[static_cast<std::size_t>(a)] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((b.lo[a] - extended_.lo[a]) / cell_)), 0, n - 1);
      hi[static_cast<std::size_t>(a)] = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((b.hi[a] - extended_.lo[a]) / cell_)), 0, n - 1);
    }
    for (auto k = lo[2]; k <= hi[2]; ++k)
      for (auto j = lo[1]; j <= hi[1]; ++j)
        for (auto i = lo[0]; i <= hi[0]; ++i)
          f(static_cast<std::size_t>(i + cells_[0] * (j + cells_[1] * k)));
  }

  int dim_;
  std::vector<Grain> grains_;
  Box extended_;
  double cell_ = 1.0;
  std::array<std::int64_t, 3> cells_{1, 1, 1};
  std::vector<std::vector<std::uint32_t>> buckets_;
};

/// One realization on window + margin, a pure function of (spec, seed,
/// index). `reach` is the largest r|q| the caller will probe.
inline Realization simulate(const BooleanModelSpec& spec, std::uint64_t seed, std::uint64_t index = 0, double reach = 0.0) {
  spec.validate(reach);
  const int n = spec.dim;
  const Box ext = spec.window.inflated(spec.margin_for(reach));
  CounterRng rng(seed, index);
  std::poisson_distribution<long long> count(spec.intensity * ext.volume());
  const long long N = count(rng);
  std::vector<Grain> grains;
  grains.reserve(static_cast<std::size_t>(N));
  for (long long i = 0; i < N; ++i) {
    Grain g;
    g.center = Vector(n);
    for (int a = 0; a < n; ++a) g.center[a] = rng.uniform(ext.lo[a], ext.hi[a]);
    std::visit(
        [&](const auto& law) {
          using G = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<G, FixedDisc>) {
            g.kind = Grain::Kind::ball;
            g.radius = law.radius;
          } else if constexpr (std::is_same_v<G, DiscRadiusLaw>) {
            g.kind = Grain::Kind::ball;
            double u = rng.uniform();
            std::size_t k = 0;
            while (k + 1 < law.radii.size() && u >= law.probabilities[k]) u -= law.probabilities[k++];
            g.radius = law.radii[k];
          } else {
            g.kind = Grain::Kind::box;
            for (int a = 0; a < n; ++a) g.half[static_cast<std::size_t>(a)] = law.half_extents[static_cast<std::size_t>(a)];
            g.cos_a = std::cos(law.angle);
            g.sin_a = std::sin(law.angle);
          }
        },
        spec.grain);
    grains.push_back(std::move(g));
  }
  return Realization(n, std::move(grains), ext, reach);
}

// ---------------------------------------------------------------------------
// Estimation plumbing
// ---------------------------------------------------------------------------

struct EstimationConfig {
  std::uint64_t seed = 1;
  std::int64_t realizations = 1000;
  std::int64_t points_per_realization = 64;
  int workers = 1;
};

/// Mean and standard error of i.i.d. per-realization values.
inline Estimate summarize(const std::vector<double>& v) {
  const auto J = static_cast<double>(v.size());
  if (v.empty()) return Estimate{0.0, 0.0, 0, Estimate::Method::monte_carlo};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= J;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double se = v.size() > 1 ? std::sqrt(ss / (J - 1.0) / J) : std::abs(mean);
  return Estimate{mean, se, static_cast<std::int64_t>(v.size()), Estimate::Method::monte_carlo};
}

namespace detail {

template <class F>
std::vector<double> per_realization(const EstimationConfig& cfg, F&& f) {
  if (cfg.realizations < 2) throw ValidationError("estimation: need at least two realizations");
  std::vector<double> out(static_cast<std::size_t>(cfg.realizations));
  parallel_for(out.size(), resolve_workers(cfg.workers), [&](std::size_t j) { out[j] = f(j); });
  return out;
}

inline Vector uniform_in(const Box& b, CounterRng& rng) {
  Vector x(b.dim());
  for (int a = 0; a < b.dim(); ++a) x[a] = rng.uniform(b.lo[a], b.hi[a]);
  return x;
}

}  // namespace detail

/// Per-realization fractions of uniform window points covered by Z.
inline std::vector<double> volume_fraction_samples(const BooleanModelSpec& spec, const EstimationConfig& cfg) {
  spec.validate();
  if (cfg.points_per_realization < 1) throw ValidationError("volume_fraction: need at least one point per realization");
  return detail::per_realization(cfg, [&](std::size_t j) {
    const auto Z = simulate(spec, cfg.seed, j);
    CounterRng rng(cfg.seed, j, 1);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < cfg.points_per_realization; ++i) hits += Z.contains(detail::uniform_in(spec.window, rng));
    return static_cast<double>(hits) / static_cast<double>(cfg.points_per_realization);
  });
}

inline Estimate volume_fraction(const BooleanModelSpec& spec, const EstimationConfig& cfg) {
  return summarize(volume_fraction_samples(spec, cfg));
}

// ---------------------------------------------------------------------------
// Boundary inside the window (plane, exact)
// ---------------------------------------------------------------------------

struct BoundaryPiece {
  Vector normal_start;  // outer normal (arcs: at the start angle)
  double angle0 = 0.0, angle1 = 0.0;  // arcs: normal angle range; edges: angle0 = angle1
  double length = 0.0;
};

namespace detail {

// Parameter interval of segment p + t d, t in [0, 1], strictly inside the
// convex polygon given by outward half-planes (normal, offset).
inline std::optional<std::pair<double, double>> clip_segment(const Vector& p, const Vector& d,
                                                            const std::vector<std::pair<Vector, double>>& planes) {
  double t0 = 0.0, t1 = 1.0;
  for (const auto& [nrm, off] : planes) {
    const double num = off - dot(nrm, p);
    const double den = dot(nrm, d);
    if (den == 0.0) {
      if (num <= 0.0) return std::nullopt;
      continue;
    }
    const double t = num / den;
    if (den > 0.0) {
      t1 = std::min(t1, t);
    } else {
      t0 = std::max(t0, t);
    }
    if (t0 >= t1) return std::nullopt;
  }
  return std::pair{t0, t1};
}

inline std::vector<std::pair<Vector, double>> box_planes(const Grain& g) {
  std::vector<std::pair<Vector, double>> planes;
  const Vector ex{g.cos_a, g.sin_a}, ey{-g.sin_a, g.cos_a};
  for (const auto& [axis, h] : {std::pair{ex, g.half[0]}, std::pair{ey, g.half[1]}}) {
    planes.emplace_back(axis, dot(axis, g.center) + h);
    planes.emplace_back(-axis, -dot(axis, g.center) + h);
  }
  return planes;
}

inline std::vector<std::pair<Vector, double>> window_planes(const Box& w) {
  return {{Vector{1.0, 0.0}, w.hi[0]}, {Vector{-1.0, 0.0}, -w.lo[0]}, {Vector{0.0, 1.0}, w.hi[1]}, {Vector{0.0, -1.0}, -w.lo[1]}};
}

}  // namespace detail

/// Pieces of the boundary of Z inside the open window: exposed circle arcs
/// for disc grains, exposed edges for box grains (plane only).
inline std::vector<BoundaryPiece> boundary_in_window(const BooleanModelSpec& spec, const Realization& Z) {
  if (spec.dim != 2) throw ValidationError("exact boundary path supports the plane only; use the grid path");
  std::vector<BoundaryPiece> out;
  const auto& G = Z.grains();
  if (spec.isotropic()) {
    std::vector<Disc> discs;
    std::vector<std::vector<std::size_t>> nb(G.size());
    for (std::size_t i = 0; i < G.size(); ++i) {
      discs.push_back({G[i].center[0], G[i].center[1], G[i].radius});
      nb[i] = Z.near(G[i].bbox());
    }
    const auto arcs = clip_arcs(discs, exposed_arcs(discs, &nb), spec.window);
    for (const auto& a : arcs) {
      BoundaryPiece p;
      p.angle0 = a.theta0;
      p.angle1 = a.theta1;
      p.normal_start = Vector{std::cos(a.theta0), std::sin(a.theta0)};
      p.length = discs[a.disc].r * (a.theta1 - a.theta0);
      out.push_back(p);
    }
    return out;
  }
  const auto win = detail::window_planes(spec.window);
  for (std::size_t i = 0; i < G.size(); ++i) {
    const Grain& g = G[i];
    const Vector ex{g.cos_a, g.sin_a}, ey{-g.sin_a, g.cos_a};
    const auto others = Z.near(g.bbox());
    for (const auto& [nrm, h, tangent, hl] :
         {std::tuple{ex, g.half[0], ey, g.half[1]}, std::tuple{-ex, g.half[0], ey, g.half[1]},
          std::tuple{ey, g.half[1], ex, g.half[0]}, std::tuple{-ey, g.half[1], ex, g.half[0]}}) {
      const Vector start = g.center + h * nrm - hl * tangent;
      const Vector d = 2.0 * hl * tangent;
      const auto inside = detail::clip_segment(start, d, win);
      if (!inside) continue;
      std::vector<std::pair<double, double>> covered;
      for (auto k : others) {
        if (k == i) continue;
        if (auto c = detail::clip_segment(start, d, detail::box_planes(G[k]))) covered.push_back(*c);
      }
      std::sort(covered.begin(), covered.end());
      double t = inside->first, exposed = 0.0;
      for (const auto& [a, b] : covered) {
        if (b <= t) continue;
        if (a >= inside->second) break;
        if (a > t) exposed += a - t;
        t = std::max(t, b);
      }
      if (t < inside->second) exposed += inside->second - t;
      if (exposed <= 0.0) continue;
      BoundaryPiece p;
      p.normal_start = nrm;
      p.angle0 = p.angle1 = std::atan2(nrm[1], nrm[0]);
      p.length = exposed * d.norm();
      out.push_back(p);
    }
  }
  return out;
}

enum class PerimeterMethod { exact, grid };

/// Per-realization boundary length inside the window divided by vol(W).
inline std::vector<double> specific_perimeter_samples(const BooleanModelSpec& spec, const EstimationConfig& cfg,
                                                      PerimeterMethod method = PerimeterMethod::exact, double grid_h = 0.0,
                                                      int grid_dirs = 32) {
  spec.validate();
  if (method == PerimeterMethod::exact && spec.dim != 2) {
    throw ValidationError("specific_perimeter: exact path needs n = 2; use the grid path");
  }
  const double h = grid_h > 0.0 ? grid_h : spec.grain_scale() / 40.0;
  const auto dirs = sphere_quadrature(spec.dim, grid_dirs);
  return detail::per_realization(cfg, [&](std::size_t j) {
    const auto Z = simulate(spec, cfg.seed, j);
    if (method == PerimeterMethod::exact) {
      double len = 0.0;
      for (const auto& p : boundary_in_window(spec, Z)) len += p.length;
      return len / spec.window.volume();
    }
    auto G = GridSet::covering(spec.window, h);
    const auto win = G.window();
    for (const auto& g : Z.grains()) {
      Box b = g.bbox();
      bool meets = true;
      for (int a = 0; a < spec.dim; ++a) meets = meets && b.hi[a] >= win.lo[a] && b.lo[a] <= win.hi[a];
      if (meets) G.paint(b, [&](const Vector& x) { return g.contains(x); });
    }
    return perimeter_estimate(G, dirs, false) / win.volume();
  });
}

inline Estimate specific_perimeter(const BooleanModelSpec& spec, const EstimationConfig& cfg,
                                   PerimeterMethod method = PerimeterMethod::exact, double grid_h = 0.0) {
  auto e = summarize(specific_perimeter_samples(spec, cfg, method, grid_h));
  if (method == PerimeterMethod::grid) e.method = Estimate::Method::grid;
  return e;
}

// ---------------------------------------------------------------------------
// Rose of directions
// ---------------------------------------------------------------------------

struct RoseOfDirections {
  int dim = 2;
  bool uniform = true;
  std::vector<SurfaceAtom> atoms;  // probability atoms when not uniform

  double mass() const {
    if (uniform) return 1.0;
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
  }
};

/// Declared rose: uniform for disc grains; face-normal atoms weighted by face
/// area for boxes of fixed orientation.
inline RoseOfDirections rose(const BooleanModelSpec& spec) {
  spec.validate();
  RoseOfDirections R;
  R.dim = spec.dim;
  if (spec.isotropic()) return R;
  const auto& b = std::get<FixedBox>(spec.grain);
  R.uniform = false;
  const int n = spec.dim;
  double total = 0.0;
  for (int a = 0; a < n; ++a) {
    double face = 1.0;
    for (int k = 0; k < n; ++k)
      if (k != a) face *= 2.0 * b.half_extents[static_cast<std::size_t>(k)];
    Vector e = Vector::unit(n, a);
    if (n == 2) {
      const double c = std::cos(b.angle), s = std::sin(b.angle);
      e = Vector{c * e[0] - s * e[1], s * e[0] + c * e[1]};
    }
    R.atoms.push_back({e, face});
    R.atoms.push_back({-e, face});
    total += 2.0 * face;
  }
  for (auto& a : R.atoms) a.weight /= total;
  return R;
}

/// int h(-Q, v)^+ R(dv); for the uniform rose this is b(conv(Q u {0})) / 2.
inline double rose_integral(const RoseOfDirections& R, const StructuringElement& Q) {
  if (Q.dim() != R.dim) throw ValidationError("rose_integral: dimension mismatch");
  if (R.uniform) return 0.5 * mean_width(Q);
  const auto mQ = Q.negated();
  double s = 0.0;
  for (const auto& a : R.atoms) s += a.weight * support_pos(mQ, a.normal);
  return s;
}

/// Boundary-length-weighted normal distribution observed in simulated
/// windows. Disc models are binned into `bins` equal angular sectors
/// (atoms at the sector midpoints); box models keep their face normals.
inline RoseOfDirections empirical_rose(const BooleanModelSpec& spec, const EstimationConfig& cfg, int bins = 16) {
  if (spec.dim != 2) throw ValidationError("empirical_rose: plane only");
  if (bins < 1) throw ValidationError("empirical_rose: need at least one bin");
  const bool iso = spec.isotropic();
  const auto declared = iso ? RoseOfDirections{} : rose(spec);
  const std::size_t slots = iso ? static_cast<std::size_t>(bins) : declared.atoms.size();
  std::vector<std::vector<double>> per(static_cast<std::size_t>(cfg.realizations), std::vector<double>(slots, 0.0));
  const double two_pi = 2.0 * std::numbers::pi;
  detail::per_realization(cfg, [&](std::size_t j) {
    const auto Z = simulate(spec, cfg.seed, j);
    auto& acc = per[j];
    for (const auto& p : boundary_in_window(spec, Z)) {
      if (!iso) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < slots; ++k)
          if (distance(declared.atoms[k].normal, p.normal_start) < distance(declared.atoms[best].normal, p.normal_start)) best = k;
        acc[best] += p.length;
        continue;
      }
      const double r = p.length / (p.angle1 - p.angle0);
      const double w = two_pi / bins;
      for (std::size_t b = 0; b < slots; ++b) {
        const double lo = std::max(p.angle0, static_cast<double>(b) * w);
        const double hi = std::min(p.angle1, (static_cast<double>(b) + 1.0) * w);
        if (hi > lo) acc[b] += r * (hi - lo);
      }
    }
    return 0.0;
  });
  RoseOfDirections R;
  R.dim = 2;
  R.uniform = false;
  std::vector<double> tot(slots, 0.0);
  for (const auto& v : per)
    for (std::size_t k = 0; k < slots; ++k) tot[k] += v[k];
  double sum = 0.0;
  for (double t : tot) sum += t;
  if (sum <= 0.0) throw ValidationError("empirical_rose: no boundary observed");
  for (std::size_t k = 0; k < slots; ++k) {
    Vector nrm = iso ? Vector{std::cos((k + 0.5) * two_pi / bins), std::sin((k + 0.5) * two_pi / bins)} : declared.atoms[k].normal;
    R.atoms.push_back({nrm, tot[k] / sum});
  }
  return R;
}

/// Total variation distance; a uniform rose is compared on the sectors of
/// the other rose (which must then be equal-sector binned).
inline double total_variation(const RoseOfDirections& a, const RoseOfDirections& b) {
  if (a.uniform && b.uniform) return 0.0;
  if (a.uniform || b.uniform) {
    const auto& d = a.uniform ? b : a;
    const double u = 1.0 / static_cast<double>(d.atoms.size());
    double s = 0.0;
    for (const auto& at : d.atoms) s += std::abs(at.weight - u);
    return 0.5 * s;
  }
  double s = 0.0;
  std::vector<bool> used(b.atoms.size(), false);
  for (const auto& x : a.atoms) {
    double w = 0.0;
    for (std::size_t k = 0; k < b.atoms.size(); ++k)
      if (!used[k] && distance(x.normal, b.atoms[k].normal) < 1e-9) {
        w = b.atoms[k].weight;
        used[k] = true;
        break;
      }
    s += std::abs(x.weight - w);
  }
  for (std::size_t k = 0; k < b.atoms.size(); ++k)
    if (!used[k]) s += b.atoms[k].weight;
  return 0.5 * s;
}

// ---------------------------------------------------------------------------
// Contact distribution
// ---------------------------------------------------------------------------

struct ContactPoint {
  double r = 0.0;
  Estimate H;
  Estimate F;  // P(x in Z + (-rQ u {0}))
};

struct ContactDistribution {
  Estimate volume_fraction;
  std::vector<ContactPoint> points;
};

/// H_Q(r) = (F(r) - p) / (1 - p) with F(r) the fraction of window points x
/// for which x + r q lies in Z for some q in Q u {0}. The same points and
/// realizations are used for every r.
inline ContactDistribution contact_distribution(const BooleanModelSpec& spec, const StructuringElement& Q,
                                                const std::vector<double>& r_list, const EstimationConfig& cfg) {
  if (Q.dim() != spec.dim) throw ValidationError("contact_distribution: dimension mismatch");
  double reach = 0.0;
  for (double r : r_list) {
    if (!(r >= 0.0)) throw ValidationError("contact_distribution: r must be nonnegative");
    reach = std::max(reach, r * Q.max_norm());
  }
  spec.validate(reach);
  const std::size_t K = r_list.size();
  const std::size_t J = static_cast<std::size_t>(cfg.realizations);
  std::vector<std::vector<double>> frac(J, std::vector<double>(K + 1, 0.0));
  detail::per_realization(cfg, [&](std::size_t j) {
    const auto Z = simulate(spec, cfg.seed, j, reach);
    CounterRng rng(cfg.seed, j, 2);
    std::vector<std::int64_t> c(K + 1, 0);
    for (std::int64_t i = 0; i < cfg.points_per_realization; ++i) {
      const Vector x = detail::uniform_in(spec.window, rng);
      if (Z.contains(x)) {
        for (auto& v : c) ++v;
        continue;
      }
      for (std::size_t k = 0; k < K; ++k)
        for (const auto& q : Q.points())
          if (q.norm2() > 0.0 && Z.contains(x + r_list[k] * q)) {
            ++c[k + 1];
            break;
          }
    }
    for (std::size_t k = 0; k <= K; ++k) frac[j][k] = static_cast<double>(c[k]) / static_cast<double>(cfg.points_per_realization);
    return 0.0;
  });

  ContactDistribution out;
  std::vector<double> p(J);
  for (std::size_t j = 0; j < J; ++j) p[j] = frac[j][0];
  out.volume_fraction = summarize(p);
  const double pbar = out.volume_fraction.value;
  if (pbar >= 1.0 - 3.0 * out.volume_fraction.std_err) {
    throw ValidationError("contact_distribution: volume fraction indistinguishable from 1; H is undefined");
  }
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> F(J), lin(J);
    for (std::size_t j = 0; j < J; ++j) F[j] = frac[j][k + 1];
    ContactPoint cp;
    cp.r = r_list[k];
    cp.F = summarize(F);
    const double H = (cp.F.value - pbar) / (1.0 - pbar);
    // Delta method for a ratio of means.
    for (std::size_t j = 0; j < J; ++j) lin[j] = (F[j] - p[j]) - H * (1.0 - p[j]);
    const auto L = summarize(lin);
    cp.H = Estimate{H, std::max(L.std_err / (1.0 - pbar), 1.0 / (static_cast<double>(J * static_cast<std::size_t>(cfg.points_per_realization)))),
                    cp.F.samples, Estimate::Method::monte_carlo};
    out.points.push_back(cp);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Right derivative of (1 - p) H_Q at 0
// ---------------------------------------------------------------------------

struct HPrimeReport {
  std::vector<double> r_values;
  std::vector<Estimate> D;      // (1 - p) H_Q(r) = F(r) - p
  Estimate slope;               // fitted a in D = a r + c r^2
  Estimate volume_fraction;
  Estimate specific_perimeter;  // exact boundary path, same realizations
  double rose_integral = 0.0;   // int h(-Q, v)^+ R(dv)
  Estimate rhs_rose;            // P * rose_integral
  bool isotropic = false;
  double mean_width = 0.0;      // b(conv(Q u {0}))
  Estimate rhs_mean_width;      // b P / 2
  double z_rose = 0.0;          // paired z-score of slope - rhs_rose
  double z_mean_width = 0.0;
};

namespace detail {

/// D(r) per realization by sampling thin shells around the grains: every
/// point counted in D lies outside Z within r|q| of some grain, so sampling
/// each grain's shell and dividing by the number of shells covering the point
/// gives an unbiased estimate that concentrates samples where D lives.
inline double shell_increment(const BooleanModelSpec& spec, const Realization& Z, const StructuringElement& Q, double r,
                              std::int64_t per_grain, std::uint64_t seed, std::size_t j) {
  const double rho = r * Q.max_norm();
  if (rho == 0.0) return 0.0;
  const Box& W = spec.window;
  double total = 0.0;
  const auto& G = Z.grains();
  for (std::size_t i = 0; i < G.size(); ++i) {
    const Box b = G[i].bbox(rho);
    bool meets = true;
    for (int a = 0; a < spec.dim; ++a) meets = meets && b.hi[a] >= W.lo[a] && b.lo[a] <= W.hi[a];
    if (!meets) continue;
    // Common random numbers across r: the stream depends on (j, i) only.
    CounterRng rng(seed, j, 0x5e11ULL + i);
    const double vol = G[i].shell_volume(rho);
    double acc = 0.0;
    for (std::int64_t k = 0; k < per_grain; ++k) {
      const Vector x = G[i].sample_shell(rng, rho);
      if (!W.contains(x) || Z.contains(x)) continue;
      bool hit = false;
      for (const auto& q : Q.points())
        if (q.norm2() > 0.0 && Z.contains(x + r * q)) {
          hit = true;
          break;
        }
      if (hit) acc += 1.0 / Z.shell_count(x, rho);
    }
    total += vol * acc / static_cast<double>(per_grain);
  }
  return total / W.volume();
}

}  // namespace detail

inline std::vector<double> default_contact_schedule(const BooleanModelSpec& spec) {
  const double s = spec.grain_scale();
  return {0.02 * s, 0.01 * s, 0.005 * s, 0.0025 * s};
}

inline HPrimeReport hprime_check(const BooleanModelSpec& spec, const StructuringElement& Q, std::vector<double> r_schedule,
                                 const EstimationConfig& cfg, std::int64_t shell_points_per_grain = 64) {
  if (Q.dim() != spec.dim) throw ValidationError("hprime_check: dimension mismatch");
  if (r_schedule.empty()) r_schedule = default_contact_schedule(spec);
  if (r_schedule.size() < 2) throw ValidationError("hprime_check: need at least two radii");
  double reach = 0.0;
  for (double r : r_schedule) {
    if (!(r > 0.0)) throw ValidationError("hprime_check: radii must be positive");
    reach = std::max(reach, r * Q.max_norm());
  }
  spec.validate(reach);
  if (spec.dim != 2) throw ValidationError("hprime_check: the exact perimeter path needs n = 2");

  const std::size_t K = r_schedule.size();
  const auto J = static_cast<std::size_t>(cfg.realizations);
  std::vector<std::vector<double>> D(J, std::vector<double>(K, 0.0));
  std::vector<double> perim(J, 0.0), pfrac(J, 0.0);
  detail::per_realization(cfg, [&](std::size_t j) {
    const auto Z = simulate(spec, cfg.seed, j, reach);
    for (std::size_t k = 0; k < K; ++k) D[j][k] = detail::shell_increment(spec, Z, Q, r_schedule[k], shell_points_per_grain, cfg.seed, j);
    double len = 0.0;
    for (const auto& p : boundary_in_window(spec, Z)) len += p.length;
    perim[j] = len / spec.window.volume();
    CounterRng rng(cfg.seed, j, 3);
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < cfg.points_per_realization; ++i) hits += Z.contains(detail::uniform_in(spec.window, rng));
    pfrac[j] = static_cast<double>(hits) / static_cast<double>(std::max<std::int64_t>(1, cfg.points_per_realization));
    return 0.0;
  });

  // Weighted least squares for D = a r + c r^2 with weights 1/r; the fitted
  // a is a fixed linear combination of the D(r_k).
  double s2 = 0, s3 = 0, s4 = 0;
  for (double r : r_schedule) {
    const double w = 1.0 / r;
    s2 += w * r * r;
    s3 += w * r * r * r;
    s4 += w * r * r * r * r;
  }
  const double det = s2 * s4 - s3 * s3;
  std::vector<double> coef(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double r = r_schedule[k], w = 1.0 / r;
    coef[k] = w * (s4 * r - s3 * r * r) / det;
  }

  HPrimeReport rep;
  rep.r_values = r_schedule;
  std::vector<double> a(J);
  for (std::size_t j = 0; j < J; ++j) {
    a[j] = 0.0;
    for (std::size_t k = 0; k < K; ++k) a[j] += coef[k] * D[j][k];
  }
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> col(J);
    for (std::size_t j = 0; j < J; ++j) col[j] = D[j][k];
    rep.D.push_back(summarize(col));
  }
  rep.slope = summarize(a);
  rep.volume_fraction = summarize(pfrac);
  rep.specific_perimeter = summarize(perim);
  rep.isotropic = spec.isotropic();
  rep.rose_integral = rose_integral(rose(spec), Q);
  rep.mean_width = mean_width(Q);
  auto scaled = [&](double k) {
    return Estimate{k * rep.specific_perimeter.value, k * rep.specific_perimeter.std_err, rep.specific_perimeter.samples,
                    Estimate::Method::monte_carlo};
  };
  auto paired_z = [&](double k) {
    std::vector<double> diff(J);
    for (std::size_t j = 0; j < J; ++j) diff[j] = a[j] - k * perim[j];
    const auto d = summarize(diff);
    return d.std_err > 0.0 ? d.value / d.std_err : 0.0;
  };
  rep.rhs_rose = scaled(rep.rose_integral);
  rep.z_rose = paired_z(rep.rose_integral);
  if (rep.isotropic) {
    rep.rhs_mean_width = scaled(0.5 * rep.mean_width);
    rep.z_mean_width = paired_z(0.5 * rep.mean_width);
  }
  return rep;
}

}  // namespace perimetry
