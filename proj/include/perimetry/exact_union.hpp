#pragma once

// Closed-form volumes of unions that show up as oracles: axis-aligned boxes
// (any dimension, coordinate compression), discs in the plane (boundary
// integral over uncovered arcs) and pairwise ball intersections.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "perimetry/vector.hpp"

namespace perimetry {

// ---------------------------------------------------------------------------
// Axis-aligned boxes
// ---------------------------------------------------------------------------

/// Volume of (union of `extra`) minus (union of `base`), i.e. the volume
/// added to the union of `base` by the boxes in `extra`. Returns nullopt if
/// the compressed grid would exceed `max_cells`.
inline std::optional<double> box_union_excess(const std::vector<Box>& base, const std::vector<Box>& extra,
                                              double max_cells = 2e7) {
  if (extra.empty()) return 0.0;
  const int n = extra.front().dim();
  std::vector<std::vector<double>> cuts(static_cast<std::size_t>(n));
  double cells = 1.0;
  for (int a = 0; a < n; ++a) {
    auto& c = cuts[static_cast<std::size_t>(a)];
    for (const auto* list : {&base, &extra})
      for (const auto& b : *list) {
        c.push_back(b.lo[a]);
        c.push_back(b.hi[a]);
      }
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    cells *= static_cast<double>(c.size() - 1);
  }
  if (cells > max_cells) return std::nullopt;

  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  double total = 0.0;
  Vector mid(n);
  for (;;) {
    double vol = 1.0;
    for (int a = 0; a < n; ++a) {
      const auto& c = cuts[static_cast<std::size_t>(a)];
      const auto i = idx[static_cast<std::size_t>(a)];
      mid[a] = 0.5 * (c[i] + c[i + 1]);
      vol *= c[i + 1] - c[i];
    }
    auto inside = [&](const std::vector<Box>& list) {
      return std::any_of(list.begin(), list.end(), [&](const Box& b) { return b.contains(mid); });
    };
    if (vol > 0.0 && inside(extra) && !inside(base)) total += vol;
    int a = 0;
    for (; a < n; ++a) {
      auto& i = idx[static_cast<std::size_t>(a)];
      if (++i + 1 < cuts[static_cast<std::size_t>(a)].size()) break;
      i = 0;
    }
    if (a == n) break;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Discs in the plane
// ---------------------------------------------------------------------------

struct Disc {
  double x, y, r;
};

struct Arc {
  std::size_t disc;
  double theta0, theta1;  // counter-clockwise, theta0 < theta1, in [0, 2 pi]
};

namespace detail {

inline double wrap_angle(double t) {
  const double two_pi = 2.0 * std::numbers::pi;
  t = std::fmod(t, two_pi);
  return t < 0.0 ? t + two_pi : t;
}

}  // namespace detail

/// Arcs of the circles bounding the union of `discs` that are not covered by
/// another disc. Of two identical discs only the first keeps its boundary.
inline std::vector<Arc> exposed_arcs(const std::vector<Disc>& discs, const std::vector<std::vector<std::size_t>>* neighbors = nullptr) {
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<Arc> arcs;
  std::vector<std::pair<double, double>> cover;
  for (std::size_t i = 0; i < discs.size(); ++i) {
    const Disc& a = discs[i];
    cover.clear();
    bool hidden = false;
    auto visit = [&](std::size_t j) {
      if (j == i || hidden) return;
      const Disc& b = discs[j];
      const double dx = b.x - a.x, dy = b.y - a.y;
      const double d = std::hypot(dx, dy);
      if (d == 0.0 && a.r == b.r) {
        if (j < i) hidden = true;
        return;
      }
      if (d + a.r <= b.r) {
        hidden = true;
        return;
      }
      if (d >= a.r + b.r || d + b.r <= a.r) return;
      const double c = std::clamp((a.r * a.r + d * d - b.r * b.r) / (2.0 * a.r * d), -1.0, 1.0);
      const double alpha = std::acos(c);
      const double phi = std::atan2(dy, dx);
      const double lo = detail::wrap_angle(phi - alpha);
      const double hi = lo + 2.0 * alpha;
      if (hi <= two_pi) {
        cover.emplace_back(lo, hi);
      } else {
        cover.emplace_back(lo, two_pi);
        cover.emplace_back(0.0, hi - two_pi);
      }
    };
    if (neighbors) {
      for (auto j : (*neighbors)[i]) visit(j);
    } else {
      for (std::size_t j = 0; j < discs.size(); ++j) visit(j);
    }
    if (hidden) continue;
    std::sort(cover.begin(), cover.end());
    double t = 0.0;
    for (const auto& [lo, hi] : cover) {
      if (lo > t) arcs.push_back({i, t, lo});
      t = std::max(t, hi);
    }
    if (t < two_pi) arcs.push_back({i, t, two_pi});
  }
  return arcs;
}

/// Area of a union of discs from the boundary integral 1/2 int (x dy - y dx)
/// over the exposed arcs.
inline double disc_union_area(const std::vector<Disc>& discs) {
  double s = 0.0;
  for (const auto& arc : exposed_arcs(discs)) {
    const Disc& d = discs[arc.disc];
    s += d.r * d.r * (arc.theta1 - arc.theta0) + d.x * d.r * (std::sin(arc.theta1) - std::sin(arc.theta0)) -
         d.y * d.r * (std::cos(arc.theta1) - std::cos(arc.theta0));
  }
  return 0.5 * s;
}

/// Splits arcs at the lines bounding the box `w` and keeps the pieces whose
/// midpoints lie in the open box.
inline std::vector<Arc> clip_arcs(const std::vector<Disc>& discs, const std::vector<Arc>& arcs, const Box& w) {
  std::vector<Arc> out;
  std::vector<double> cuts;
  for (const auto& arc : arcs) {
    const Disc& d = discs[arc.disc];
    cuts = {arc.theta0, arc.theta1};
    auto add_axis = [&](double offset, bool vertical) {
      // Circle meets x = offset (vertical) or y = offset.
      const double rel = (offset - (vertical ? d.x : d.y)) / d.r;
      if (rel <= -1.0 || rel >= 1.0) return;
      const double base = vertical ? std::acos(rel) : std::asin(rel);
      for (double t : {base, vertical ? -base : std::numbers::pi - base}) {
        t = detail::wrap_angle(t);
        if (t > arc.theta0 && t < arc.theta1) cuts.push_back(t);
      }
    };
    add_axis(w.lo[0], true);
    add_axis(w.hi[0], true);
    add_axis(w.lo[1], false);
    add_axis(w.hi[1], false);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      if (cuts[k + 1] <= cuts[k]) continue;
      const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
      const double mx = d.x + d.r * std::cos(mid), my = d.y + d.r * std::sin(mid);
      if (mx > w.lo[0] && mx < w.hi[0] && my > w.lo[1] && my < w.hi[1]) out.push_back({arc.disc, cuts[k], cuts[k + 1]});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two balls
// ---------------------------------------------------------------------------

/// Volume of B(c1, r1) n B(c2, r2) at center distance d, n in {1, 2, 3}.
inline double ball_intersection_volume(int n, double r1, double r2, double d) {
  d = std::abs(d);
  if (d >= r1 + r2) return 0.0;
  const double rmin = std::min(r1, r2);
  if (d <= std::abs(r1 - r2)) return unit_ball_volume(n) * std::pow(rmin, n);
  if (n == 1) return r1 + r2 - d;
  if (n == 2) {
    const double a1 = std::acos(std::clamp((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1), -1.0, 1.0));
    const double a2 = std::acos(std::clamp((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2), -1.0, 1.0));
    const double k = std::sqrt(std::max(0.0, (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)));
    return r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k;
  }
  if (n == 3) {
    const double s = r1 + r2 - d;
    return std::numbers::pi * s * s * (d * d + 2.0 * d * r2 - 3.0 * r2 * r2 + 2.0 * d * r1 + 6.0 * r1 * r2 - 3.0 * r1 * r1) /
           (12.0 * d);
  }
  throw ValidationError("ball_intersection_volume: only n in {1, 2, 3}");
}

}  // namespace perimetry
