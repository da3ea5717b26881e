#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "perimetry/random.hpp"
#include "perimetry/vector.hpp"

namespace perimetry {

struct Estimate {
  enum class Method { exact, grid, monte_carlo };

  double value = 0.0;
  double std_err = 0.0;
  std::int64_t samples = 0;
  Method method = Method::exact;

  static Estimate exact(double v) { return Estimate{v, 0.0, 0, Method::exact}; }
};

inline const char* method_name(Estimate::Method m) {
  switch (m) {
    case Estimate::Method::exact: return "exact";
    case Estimate::Method::grid: return "grid";
    case Estimate::Method::monte_carlo: return "monte-carlo";
  }
  return "?";
}

enum class SamplingMethod { automatic, exact, grid, monte_carlo };

struct SamplerConfig {
  SamplingMethod method = SamplingMethod::automatic;
  std::uint64_t seed = 1;
  std::int64_t samples = std::int64_t{1} << 20;  // total budget per estimate
  int replicates = 16;
  int workers = 1;
  double grid_h = 0.0;  // 0: derive from r and Q
};

/// Volume of {x in D : pred(x)} by jittered stratified sampling.
///
/// D is cut into M = m^n congruent strata; each of `replicates` independent
/// replicates draws one uniform point per stratum, so every replicate is an
/// unbiased estimate and their spread gives the standard error. Point (s, j)
/// comes from a generator keyed by (seed, key, stratum s, replicate j), and
/// counts are integers reduced in a fixed order, so the result does not
/// depend on the worker count.
template <class Pred>
Estimate stratified_volume(const Box& D, Pred&& pred, const SamplerConfig& cfg, std::uint64_t key) {
  const int n = D.dim();
  const int J = std::max(2, cfg.replicates);
  if (cfg.samples < 2 * J) throw ValidationError("sampler: sample budget must be at least 2 * replicates");
  const double V = D.volume();
  if (V == 0.0) return Estimate{0.0, 0.0, 0, Estimate::Method::monte_carlo};
  const auto per = static_cast<double>(cfg.samples / J);
  auto m = static_cast<std::int64_t>(std::floor(std::pow(per, 1.0 / n) + 1e-9));
  m = std::max<std::int64_t>(1, m);
  std::int64_t M = 1;
  for (int a = 0; a < n; ++a) M *= m;

  constexpr std::int64_t kChunk = 2048;
  const std::size_t chunks = static_cast<std::size_t>((M + kChunk - 1) / kChunk);
  std::vector<std::int64_t> counts(chunks * static_cast<std::size_t>(J), 0);
  const std::uint64_t stream_seed = mix64(cfg.seed ^ mix64(key + 0x9e37ULL));
  std::vector<double> cell(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) cell[static_cast<std::size_t>(a)] = (D.hi[a] - D.lo[a]) / static_cast<double>(m);

  parallel_for(chunks, resolve_workers(cfg.workers), [&](std::size_t c) {
    const std::int64_t s0 = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t s1 = std::min(M, s0 + kChunk);
    Vector x(n);
    for (std::int64_t s = s0; s < s1; ++s) {
      for (int j = 0; j < J; ++j) {
        CounterRng rng(stream_seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(j));
        std::int64_t rest = s;
        for (int a = 0; a < n; ++a) {
          const auto ia = rest % m;
          rest /= m;
          x[a] = D.lo[a] + (static_cast<double>(ia) + rng.uniform()) * cell[static_cast<std::size_t>(a)];
        }
        if (pred(x)) ++counts[c * static_cast<std::size_t>(J) + static_cast<std::size_t>(j)];
      }
    }
  });

  std::vector<double> rep(static_cast<std::size_t>(J), 0.0);
  for (std::size_t c = 0; c < chunks; ++c)
    for (int j = 0; j < J; ++j)
      rep[static_cast<std::size_t>(j)] += static_cast<double>(counts[c * static_cast<std::size_t>(J) + static_cast<std::size_t>(j)]);
  double mean = 0.0;
  for (auto& v : rep) {
    v *= V / static_cast<double>(M);
    mean += v;
  }
  mean /= J;
  double ss = 0.0;
  for (double v : rep) ss += (v - mean) * (v - mean);
  const double total = static_cast<double>(M) * J;
  const double se = std::max(std::sqrt(ss / (J - 1) / J), V / total);
  return Estimate{mean, se, static_cast<std::int64_t>(total), Estimate::Method::monte_carlo};
}

}  // namespace perimetry
