#pragma once

// Voxel indicator sets in R^n (n <= 3): rasterization, dilation by finite
// structuring elements, transition counting along lattice lines.
//
// Storage: one bit per voxel, packed 64 to a word along axis 0; a "row" is a
// full line along axis 0 and rows are ordered by j + dims[1] * k.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perimetry/geom_core.hpp"
#include "perimetry/random.hpp"
#include "perimetry/shapes.hpp"

namespace perimetry {

inline constexpr std::uint64_t kDefaultVoxelCap = std::uint64_t{1} << 31;

using GridIndex = std::array<std::int64_t, 3>;

class GridSet {
 public:
  GridSet() = default;

  /// Empty grid whose voxel (0,..,0) has its lower corner at `origin`.
  GridSet(Vector origin, double h, GridIndex dims, std::uint64_t cap = kDefaultVoxelCap)
      : origin_(std::move(origin)), h_(h), dims_(dims) {
    const int n = origin_.dim();
    if (n < 1 || n > 3) throw ValidationError("GridSet: only dimensions 1, 2, 3 are supported");
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("GridSet: spacing must be positive");
    for (int a = n; a < 3; ++a) dims_[static_cast<std::size_t>(a)] = 1;
    long double total = 1.0L;
    for (auto d : dims_) {
      if (d < 1) throw ValidationError("GridSet: every dimension needs at least one voxel");
      total *= static_cast<long double>(d);
    }
    if (total > static_cast<long double>(cap)) {
      throw BudgetError("GridSet: grid needs " + std::to_string(static_cast<unsigned long long>(total)) +
                        " voxels but the memory cap allows " + std::to_string(cap) +
                        "; use a coarser spacing or a smaller window");
    }
    words_per_row_ = static_cast<std::size_t>((dims_[0] + 63) / 64);
    words_.assign(words_per_row_ * static_cast<std::size_t>(dims_[1] * dims_[2]), 0);
  }

  /// Grid covering `window` (rounded up to whole voxels).
  static GridSet covering(const Box& window, double h, std::uint64_t cap = kDefaultVoxelCap) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("GridSet: spacing must be positive");
    GridIndex dims{1, 1, 1};
    for (int a = 0; a < window.dim(); ++a) {
      const double cells = std::ceil((window.hi[a] - window.lo[a]) / h - 1e-9);
      if (cells > 4e18) throw BudgetError("GridSet: window too large for spacing");
      dims[static_cast<std::size_t>(a)] = std::max<std::int64_t>(1, static_cast<std::int64_t>(cells));
    }
    return GridSet(window.lo, h, dims, cap);
  }

  int dim() const { return origin_.dim(); }
  double spacing() const { return h_; }
  const Vector& origin() const { return origin_; }
  const GridIndex& dims() const { return dims_; }
  std::size_t rows() const { return static_cast<std::size_t>(dims_[1] * dims_[2]); }
  std::size_t words_per_row() const { return words_per_row_; }

  bool in_range(const GridIndex& ix) const {
    for (std::size_t a = 0; a < 3; ++a)
      if (ix[a] < 0 || ix[a] >= dims_[a]) return false;
    return true;
  }

  bool get(const GridIndex& ix) const {
    if (!in_range(ix)) return false;
    const auto w = row_ptr(row_of(ix))[static_cast<std::size_t>(ix[0]) / 64];
    return (w >> (ix[0] % 64)) & 1U;
  }

  void set(const GridIndex& ix, bool value = true) {
    if (!in_range(ix)) throw ValidationError("GridSet::set: index outside grid");
    auto& w = row_ptr(row_of(ix))[static_cast<std::size_t>(ix[0]) / 64];
    const std::uint64_t bit = std::uint64_t{1} << (ix[0] % 64);
    w = value ? (w | bit) : (w & ~bit);
  }

  Vector center(const GridIndex& ix) const {
    Vector c = origin_;
    for (int a = 0; a < dim(); ++a) c[a] += (static_cast<double>(ix[static_cast<std::size_t>(a)]) + 0.5) * h_;
    return c;
  }

  /// Index of the voxel containing x (may be out of range).
  GridIndex index_of(const Vector& x) const {
    GridIndex ix{0, 0, 0};
    for (int a = 0; a < dim(); ++a) ix[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(std::floor((x[a] - origin_[a]) / h_));
    return ix;
  }

  Box window() const {
    Box b{origin_, origin_};
    for (int a = 0; a < dim(); ++a) b.hi[a] += static_cast<double>(dims_[static_cast<std::size_t>(a)]) * h_;
    return b;
  }

  std::uint64_t count() const {
    std::uint64_t c = 0;
    for (auto w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

  double cell_volume() const { return std::pow(h_, dim()); }
  double volume() const { return static_cast<double>(count()) * cell_volume(); }

  /// Sets every voxel whose center lies in `region` and satisfies `pred`.
  template <class Pred>
  void paint(const Box& region, Pred&& pred) {
    GridIndex lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < 3; ++a) {
      const auto s = static_cast<std::size_t>(a);
      if (a >= dim()) {
        hi[s] = 0;
        continue;
      }
      lo[s] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((region.lo[a] - origin_[a]) / h_ - 0.5)));
      hi[s] = std::min<std::int64_t>(dims_[s] - 1, static_cast<std::int64_t>(std::ceil((region.hi[a] - origin_[a]) / h_ - 0.5)));
      if (hi[s] < lo[s]) return;
    }
    for (std::int64_t k = lo[2]; k <= hi[2]; ++k)
      for (std::int64_t j = lo[1]; j <= hi[1]; ++j)
        for (std::int64_t i = lo[0]; i <= hi[0]; ++i) {
          const GridIndex ix{i, j, k};
          if (pred(center(ix))) set(ix);
        }
  }

  std::vector<GridIndex> voxels() const {
    std::vector<GridIndex> out;
    for (std::int64_t k = 0; k < dims_[2]; ++k)
      for (std::int64_t j = 0; j < dims_[1]; ++j) {
        const auto* row = row_ptr(static_cast<std::size_t>(j + dims_[1] * k));
        for (std::size_t w = 0; w < words_per_row_; ++w) {
          auto bits = row[w];
          while (bits) {
            const int b = std::countr_zero(bits);
            out.push_back({static_cast<std::int64_t>(w * 64 + static_cast<std::size_t>(b)), j, k});
            bits &= bits - 1;
          }
        }
      }
    return out;
  }

  std::uint64_t* row_ptr(std::size_t row) { return words_.data() + row * words_per_row_; }
  const std::uint64_t* row_ptr(std::size_t row) const { return words_.data() + row * words_per_row_; }

  /// Row index for (j, k), or nullopt-equivalent -1 when outside the grid.
  std::int64_t row_index(std::int64_t j, std::int64_t k) const {
    if (j < 0 || j >= dims_[1] || k < 0 || k >= dims_[2]) return -1;
    return j + dims_[1] * k;
  }

  friend bool operator==(const GridSet& a, const GridSet& b) {
    return a.origin_ == b.origin_ && a.h_ == b.h_ && a.dims_ == b.dims_ && a.words_ == b.words_;
  }

 private:
  std::size_t row_of(const GridIndex& ix) const { return static_cast<std::size_t>(ix[1] + dims_[1] * ix[2]); }

  Vector origin_;
  double h_ = 1.0;
  GridIndex dims_{1, 1, 1};
  std::size_t words_per_row_ = 0;
  std::vector<std::uint64_t> words_;
};

namespace detail {

// dst bit (i + shift) |= src bit i, for shift >= 0.
inline void or_shifted_row(std::uint64_t* dst, std::size_t dst_words, const std::uint64_t* src, std::size_t src_words,
                           std::int64_t shift) {
  const auto ws = static_cast<std::size_t>(shift / 64);
  const auto bs = static_cast<unsigned>(shift % 64);
  for (std::size_t i = 0; i < src_words; ++i) {
    const auto w = src[i];
    if (!w) continue;
    if (i + ws < dst_words) dst[i + ws] |= w << bs;
    if (bs && i + ws + 1 < dst_words) dst[i + ws + 1] |= w >> (64 - bs);
  }
}

// out bit i = row bit (i + k), zero outside [0, bits).
inline void shifted_row(const std::uint64_t* row, std::size_t words, std::size_t bits, std::int64_t k,
                        std::vector<std::uint64_t>& out) {
  out.assign(words, 0);
  const std::int64_t wshift = k >= 0 ? k / 64 : -((-k + 63) / 64);
  const std::int64_t bshift = k - 64 * wshift;  // in [0, 64)
  for (std::size_t i = 0; i < words; ++i) {
    const std::int64_t src = static_cast<std::int64_t>(i) + wshift;
    std::uint64_t lo = 0, hi = 0;
    if (src >= 0 && src < static_cast<std::int64_t>(words)) lo = row[static_cast<std::size_t>(src)];
    if (src + 1 >= 0 && src + 1 < static_cast<std::int64_t>(words)) hi = row[static_cast<std::size_t>(src + 1)];
    out[i] = bshift ? (lo >> bshift) | (hi << (64 - bshift)) : lo;
  }
  // Clear padding beyond the row length.
  if (bits % 64) out[words - 1] &= (std::uint64_t{1} << (bits % 64)) - 1;
}

inline std::uint64_t popcount_row(const std::uint64_t* r, std::size_t words) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < words; ++i) c += static_cast<std::uint64_t>(std::popcount(r[i]));
  return c;
}

}  // namespace detail

/// Voxels whose centers lie in A, over bbox(A) padded by `margin`.
inline GridSet rasterize(const Shape& A, double h, double margin, std::uint64_t cap = kDefaultVoxelCap) {
  if (!(margin >= 0.0)) throw ValidationError("rasterize: margin must be nonnegative");
  auto G = GridSet::covering(A.bbox().inflated(margin), h, cap);
  for (const auto& p : A.pieces()) G.paint(piece_bbox(p), [&](const Vector& x) { return piece_contains(p, x); });
  return G;
}

/// Voxels whose centers lie in A, over an explicit window.
inline GridSet rasterize(const Shape& A, double h, const Box& window, std::uint64_t cap = kDefaultVoxelCap) {
  require_same_dim(window.lo, A.bbox().lo, "rasterize");
  auto G = GridSet::covering(window, h, cap);
  for (const auto& p : A.pieces()) G.paint(piece_bbox(p), [&](const Vector& x) { return piece_contains(p, x); });
  return G;
}

/// Voxel offsets round(r q / h) for q in Q u {0}; throws if a nonzero offset
/// is shorter than 4 voxels.
inline std::vector<GridIndex> dilation_offsets(const GridSet& G, const StructuringElement& Q, double r) {
  if (Q.dim() != G.dim()) throw ValidationError("dilate: dimension mismatch between grid and structuring element");
  if (!(r >= 0.0)) throw ValidationError("dilate: r must be nonnegative");
  std::vector<GridIndex> offs{{0, 0, 0}};
  if (r == 0.0) return offs;
  const double h = G.spacing();
  for (const auto& q : Q.points()) {
    if (q.norm() == 0.0) continue;
    if (r * q.norm() / h < 4.0) {
      throw ValidationError("dilate: offset r*|q| = " + std::to_string(r * q.norm()) + " is below 4 voxels (h = " +
                            std::to_string(h) + "); use a finer spacing or a larger r");
    }
    GridIndex o{0, 0, 0};
    for (int a = 0; a < q.dim(); ++a) o[static_cast<std::size_t>(a)] = std::llround(r * q[a] / h);
    if (std::find(offs.begin(), offs.end(), o) == offs.end()) offs.push_back(o);
  }
  return offs;
}

/// Union over q in Q u {0} of G shifted by round(r q / h); the output grid is
/// enlarged to hold every shifted copy.
inline GridSet dilate(const GridSet& G, const StructuringElement& Q, double r, int workers = 1,
                      std::uint64_t cap = kDefaultVoxelCap) {
  const auto offs = dilation_offsets(G, Q, r);
  GridIndex lo{0, 0, 0}, hi{0, 0, 0};
  for (const auto& o : offs)
    for (std::size_t a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], o[a]);
      hi[a] = std::max(hi[a], o[a]);
    }
  Vector origin = G.origin();
  GridIndex dims = G.dims();
  for (int a = 0; a < G.dim(); ++a) {
    const auto s = static_cast<std::size_t>(a);
    origin[a] += static_cast<double>(lo[s]) * G.spacing();
    dims[s] += hi[s] - lo[s];
  }
  GridSet out(origin, G.spacing(), dims, cap);
  const std::size_t out_words = out.words_per_row();
  parallel_for(out.rows(), resolve_workers(workers), [&](std::size_t row) {
    const auto j = static_cast<std::int64_t>(row) % out.dims()[1];
    const auto k = static_cast<std::int64_t>(row) / out.dims()[1];
    auto* dst = out.row_ptr(row);
    for (const auto& o : offs) {
      // Output voxel (i, j, k) receives source voxel (i, j, k) + lo - o.
      const auto src_row = G.row_index(j + lo[1] - o[1], k + lo[2] - o[2]);
      if (src_row < 0) continue;
      detail::or_shifted_row(dst, out_words, G.row_ptr(static_cast<std::size_t>(src_row)), G.words_per_row(), o[0] - lo[0]);
    }
  });
  return out;
}

/// Number of voxels x in G with x + k e_axis not in G (outside counts as 0).
inline std::uint64_t shift_loss(const GridSet& G, int axis, std::int64_t k) {
  if (axis < 0 || axis >= G.dim()) throw ValidationError("shift_loss: axis out of range");
  std::uint64_t total = 0;
  const auto& d = G.dims();
  const std::size_t wpr = G.words_per_row();
  std::vector<std::uint64_t> tmp;
  for (std::int64_t kk = 0; kk < d[2]; ++kk)
    for (std::int64_t j = 0; j < d[1]; ++j) {
      const auto* row = G.row_ptr(static_cast<std::size_t>(G.row_index(j, kk)));
      if (axis == 0) {
        detail::shifted_row(row, wpr, static_cast<std::size_t>(d[0]), k, tmp);
        for (std::size_t w = 0; w < wpr; ++w) total += static_cast<std::uint64_t>(std::popcount(row[w] & ~tmp[w]));
        continue;
      }
      const auto other = axis == 1 ? G.row_index(j + k, kk) : G.row_index(j, kk + k);
      if (other < 0) {
        total += detail::popcount_row(row, wpr);
        continue;
      }
      const auto* nb = G.row_ptr(static_cast<std::size_t>(other));
      for (std::size_t w = 0; w < wpr; ++w) total += static_cast<std::uint64_t>(std::popcount(row[w] & ~nb[w]));
    }
  return total;
}

/// Number of 1 -> 0 transitions stepping along `sign * e_axis`.
inline std::uint64_t directional_exits(const GridSet& G, int axis, int sign) {
  return shift_loss(G, axis, sign >= 0 ? 1 : -1);
}

/// Number of 0 <-> 1 transitions along all lattice lines parallel to `axis`.
/// With `border`, the outside of the grid counts as empty; without, only
/// transitions between two grid voxels are counted.
inline std::uint64_t axis_transitions(const GridSet& G, int axis, bool border = true) {
  std::uint64_t t = directional_exits(G, axis, +1) + directional_exits(G, axis, -1);
  if (border) return t;
  // Remove the transitions against the outside: set voxels on the two end
  // layers perpendicular to `axis`.
  const auto& d = G.dims();
  const auto a = static_cast<std::size_t>(axis);
  std::uint64_t edge = 0;
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t i = 0; i < d[0]; ++i) {
        const GridIndex ix{i, j, k};
        if ((ix[a] == 0 || ix[a] == d[a] - 1) && G.get(ix)) edge += (d[a] == 1) ? 2 : 1;
      }
  return t - edge;
}

/// Transition count times h^{n-1}: the directional variation V_{e_axis}.
inline double directional_variation(const GridSet& G, int axis, bool border = true) {
  return static_cast<double>(axis_transitions(G, axis, border)) * std::pow(G.spacing(), G.dim() - 1);
}

/// Primitive integer direction with components in [-max_step, max_step]
/// closest in angle to u.
inline GridIndex lattice_direction(const Vector& u, int max_step = 10) {
  const int n = u.dim();
  const Vector v = normalized(u);
  GridIndex best{0, 0, 0};
  double best_cos = -2.0;
  const int L = max_step;
  for (int c = (n > 2 ? -L : 0); c <= (n > 2 ? L : 0); ++c)
    for (int b = (n > 1 ? -L : 0); b <= (n > 1 ? L : 0); ++b)
      for (int a = -L; a <= L; ++a) {
        if (a == 0 && b == 0 && c == 0) continue;
        if (std::gcd(std::gcd(std::abs(a), std::abs(b)), std::abs(c)) != 1) continue;
        const std::array<double, 3> w{double(a), double(b), double(c)};
        double d = 0.0, len = 0.0;
        for (int i = 0; i < n; ++i) {
          d += v[i] * w[static_cast<std::size_t>(i)];
          len += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
        }
        const double cosang = d / std::sqrt(len);
        if (cosang > best_cos + 1e-15) {
          best_cos = cosang;
          best = {a, b, c};
        }
      }
  return best;
}

/// Directional variation along u, counted on the lattice lines
/// {x + t w : t in Z} through voxel centers, where w is the primitive lattice
/// direction nearest to u. Samples on such a line are collinear, so a convex
/// set shows a single run on every line. Each line stands for a tube of
/// cross-section h^{n-1} / |w|.
///
/// Larger `max_step` reduces the angular mismatch between u and w but skips
/// chords shorter than |w| h; 0 picks a cap growing with the square root of
/// the smallest grid extent so both errors vanish as h -> 0.
inline double line_variation(const GridSet& G, const Vector& u, bool border = true, int max_step = 0) {
  const int n = G.dim();
  if (u.dim() != n) throw ValidationError("line_variation: dimension mismatch");
  const double len = u.norm();
  if (len == 0.0) return 0.0;
  if (max_step <= 0) {
    std::int64_t m = G.dims()[0];
    for (int a = 1; a < n; ++a) m = std::min(m, G.dims()[static_cast<std::size_t>(a)]);
    max_step = std::clamp(static_cast<int>(std::lround(std::sqrt(static_cast<double>(m)) / 2.5)), 1, 12);
  }
  const GridIndex w = lattice_direction(u, max_step);
  int nonzero = 0, axis = 0;
  for (int a = 0; a < n; ++a)
    if (w[static_cast<std::size_t>(a)] != 0) {
      ++nonzero;
      axis = a;
    }
  if (nonzero == 1) return len * directional_variation(G, axis, border);

  double wlen = 0.0;
  for (auto c : w) wlen += static_cast<double>(c * c);
  wlen = std::sqrt(wlen);
  const auto& d = G.dims();
  auto step = [&](GridIndex x, int sgn) {
    for (std::size_t a = 0; a < 3; ++a) x[a] += sgn * w[a];
    return x;
  };
  std::uint64_t transitions = 0;
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j)
      for (std::int64_t i = 0; i < d[0]; ++i) {
        GridIndex x{i, j, k};
        if (G.in_range(step(x, -1))) continue;  // not the first voxel of its line
        bool prev = G.get(x);
        if (prev && border) ++transitions;
        for (x = step(x, 1); G.in_range(x); x = step(x, 1)) {
          const bool cur = G.get(x);
          transitions += cur != prev;
          prev = cur;
        }
        if (prev && border) ++transitions;
      }
  return len * static_cast<double>(transitions) * std::pow(G.spacing(), n - 1) / wlen;
}

/// (2 kappa_{n-1})^{-1} times the quadrature integral of V_u over the sphere.
inline double perimeter_estimate(const GridSet& G, const SphereQuadrature& dirs, bool border = true) {
  if (dirs.dim != G.dim()) throw ValidationError("perimeter_estimate: direction set dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < dirs.nodes.size(); ++i) s += dirs.weights[i] * line_variation(G, dirs.nodes[i], border);
  return s / (2.0 * unit_ball_volume(G.dim() - 1));
}

// ---------------------------------------------------------------------------
// Grid files: JSON header + raw data, one byte (0/1) per voxel, axis 0
// fastest, then axis 1, then axis 2.
// ---------------------------------------------------------------------------

inline void save_grid(const GridSet& G, const std::string& header_path) {
  const std::string data_path = header_path + ".raw";
  std::string file_name = data_path;
  if (const auto slash = file_name.find_last_of('/'); slash != std::string::npos) file_name = file_name.substr(slash + 1);
  nlohmann::json hdr;
  hdr["format"] = "perimetry-grid";
  hdr["version"] = 1;
  hdr["dim"] = G.dim();
  hdr["dims"] = std::vector<std::int64_t>(G.dims().begin(), G.dims().begin() + G.dim());
  hdr["spacing"] = G.spacing();
  hdr["origin"] = std::vector<double>(G.origin().coords().begin(), G.origin().coords().end());
  hdr["byte_order"] = "little-endian";
  hdr["layout"] = "row-major, axis 0 fastest";
  hdr["encoding"] = "uint8";
  hdr["data"] = file_name;
  std::ofstream h(header_path);
  if (!h) throw ValidationError(header_path + ": cannot write grid header");
  h << hdr.dump(2) << '\n';
  std::ofstream out(data_path, std::ios::binary);
  if (!out) throw ValidationError(data_path + ": cannot write grid data");
  const auto& d = G.dims();
  std::vector<char> row(static_cast<std::size_t>(d[0]));
  for (std::int64_t k = 0; k < d[2]; ++k)
    for (std::int64_t j = 0; j < d[1]; ++j) {
      for (std::int64_t i = 0; i < d[0]; ++i) row[static_cast<std::size_t>(i)] = G.get({i, j, k}) ? 1 : 0;
      out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

inline GridSet load_grid(const std::string& header_path, std::uint64_t cap = kDefaultVoxelCap) {
  std::ifstream h(header_path);
  if (!h) throw ValidationError(header_path + ": cannot open grid header");
  nlohmann::json hdr;
  try {
    h >> hdr;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(header_path + ": invalid grid header: " + e.what());
  }
  try {
    if (hdr.at("format") != "perimetry-grid") throw ValidationError(header_path + ": unknown grid format");
    if (hdr.value("encoding", "uint8") != "uint8") throw ValidationError(header_path + ": unsupported encoding");
    const int n = hdr.at("dim").get<int>();
    const auto dv = hdr.at("dims").get<std::vector<std::int64_t>>();
    const auto ov = hdr.at("origin").get<std::vector<double>>();
    if (static_cast<int>(dv.size()) != n || static_cast<int>(ov.size()) != n) {
      throw ValidationError(header_path + ": dims/origin length does not match dim");
    }
    GridIndex dims{1, 1, 1};
    for (int a = 0; a < n; ++a) dims[static_cast<std::size_t>(a)] = dv[static_cast<std::size_t>(a)];
    GridSet G(Vector::from(ov), hdr.at("spacing").get<double>(), dims, cap);
    std::string data_path = hdr.at("data").get<std::string>();
    if (!data_path.empty() && data_path.front() != '/') {
      if (const auto slash = header_path.find_last_of('/'); slash != std::string::npos) {
        data_path = header_path.substr(0, slash + 1) + data_path;
      }
    }
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw ValidationError(data_path + ": cannot open grid data");
    std::vector<char> row(static_cast<std::size_t>(dims[0]));
    for (std::int64_t k = 0; k < dims[2]; ++k)
      for (std::int64_t j = 0; j < dims[1]; ++j) {
        in.read(row.data(), static_cast<std::streamsize>(row.size()));
        if (!in) throw ValidationError(data_path + ": truncated grid data");
        for (std::int64_t i = 0; i < dims[0]; ++i)
          if (row[static_cast<std::size_t>(i)]) G.set({i, j, k});
      }
    return G;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(header_path + ": invalid grid header: " + e.what());
  }
}

}  // namespace perimetry
