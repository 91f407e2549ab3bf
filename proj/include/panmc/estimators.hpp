#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "panmc/boundary_fn.hpp"
#include "panmc/domain.hpp"
#include "panmc/rng.hpp"
#include "panmc/stats.hpp"
#include "panmc/walk.hpp"

namespace panmc {

/// Seed plus a stream-id base; path i draws from stream stream_base + i.
/// Parallel estimators partition the 64-bit stream space, so distinct bases
/// shifted by kStreamBlock are independent.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream_base = 0;
};

inline constexpr std::uint64_t kStreamBlock = std::uint64_t{1} << 48;

/// Monte Carlo point estimate with a normal-approximation 99% interval.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
  std::pair<double, double> ci99{0.0, 0.0};
  double truncation_fraction = 0.0;
};

inline constexpr double kCi99Z = 2.576;

inline bool ci_overlap(const McEstimate& a, const McEstimate& b) {
  return a.ci99.first <= b.ci99.second && b.ci99.first <= a.ci99.second;
}

enum class EstimatorKind { discounted, killed, duffin, wos };

inline const char* to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::discounted: return "discounted";
    case EstimatorKind::killed: return "killed";
    case EstimatorKind::duffin: return "duffin";
    case EstimatorKind::wos: return "wos";
  }
  return "?";
}

namespace detail {

inline int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Fixed chunk size: results are a deterministic function of (seed, N) alone,
/// independent of the worker count.
inline constexpr std::int64_t kChunkSize = 4096;

/// Deterministic chunked map over path indices. body(i, acc) accumulates into
/// the chunk accumulator; the returned accumulators are merged in chunk order
/// by the caller.
template <class Acc, class Body>
std::vector<Acc> run_chunked(std::int64_t n, int workers, const Body& body) {
  const std::int64_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<Acc> accs(static_cast<size_t>(n_chunks));
  const int nw = std::min<std::int64_t>(resolve_workers(workers), std::max<std::int64_t>(n_chunks, 1));

  auto run_range = [&](std::int64_t chunk) {
    Acc& acc = accs[static_cast<size_t>(chunk)];
    const std::int64_t lo = chunk * kChunkSize;
    const std::int64_t hi = std::min(n, lo + kChunkSize);
    for (std::int64_t i = lo; i < hi; ++i) body(i, acc);
  };

  if (nw <= 1) {
    for (std::int64_t c = 0; c < n_chunks; ++c) run_range(c);
    return accs;
  }

  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      run_range(c);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(nw - 1));
  for (int w = 0; w < nw - 1; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return accs;
}

struct SolveAcc {
  stats::MomentAccumulator moments;
  std::int64_t n_truncated = 0;
};

inline McEstimate finish_estimate(const std::vector<SolveAcc>& accs, std::int64_t n) {
  stats::MomentAccumulator total;
  std::int64_t n_trunc = 0;
  for (const auto& a : accs) {
    total.merge(a.moments);
    n_trunc += a.n_truncated;
  }
  McEstimate e;
  e.mean = total.mean();
  e.std_error = total.std_error();
  e.n_samples = n;
  e.ci99 = {e.mean - kCi99Z * e.std_error, e.mean + kCi99Z * e.std_error};
  e.truncation_fraction = static_cast<double>(n_trunc) / static_cast<double>(n);
  return e;
}

/// One sample of the requested estimator kind. The returned weight is the
/// kind's boundary-measure factor: discount, kill indicator, clamped cosine,
/// or the product of sphere-survival factors.
inline ExitSample sample_exit(EstimatorKind kind, RngStream& rng, const Domain& d, const Vec& x0,
                              const WalkConfig& cfg) {
  switch (kind) {
    case EstimatorKind::discounted:
      return step_path_to_exit(rng, d, x0, cfg);
    case EstimatorKind::killed: {
      ExitSample s = step_path_to_exit(rng, d, x0, cfg);
      if (s.status == PathStatus::exited) {
        if (cfg.mu > 0.0) {
          const double y = exponential_variate(rng, 0.5 * cfg.mu * cfg.mu);
          s.weight = y > *s.exit_time ? 1.0 : 0.0;
        } else {
          s.weight = 1.0;
        }
      }
      return s;
    }
    case EstimatorKind::duffin:
      return duffin_path_to_exit(rng, d, x0, cfg);
    case EstimatorKind::wos:
      return wos_path_to_exit(rng, d, x0, cfg);
  }
  throw std::logic_error("sample_exit: unknown estimator kind");
}

inline McEstimate solve_generic(EstimatorKind kind, const Domain& d, const Vec& x,
                                const BoundaryFn& f, double mu, std::int64_t n,
                                WalkConfig cfg, const RngSpec& rng_spec, int workers) {
  if (n < 2) throw std::invalid_argument("solve: n_samples must be >= 2");
  if (!d.contains(x)) throw std::domain_error("solve: pole not inside the domain");
  cfg.mu = mu;
  cfg.validate();
  auto accs = run_chunked<SolveAcc>(n, workers, [&](std::int64_t i, SolveAcc& acc) {
    RngStream rng(rng_spec.seed, rng_spec.stream_base + static_cast<std::uint64_t>(i));
    const ExitSample s = sample_exit(kind, rng, d, x, cfg);
    double value = 0.0;
    if (s.status == PathStatus::exited) value = s.weight * f(d, s.exit_point);
    if (s.status == PathStatus::truncated) ++acc.n_truncated;
    acc.moments.add(value);
  });
  return finish_estimate(accs, n);
}

}  // namespace detail

/// Dirichlet solve by exponentially discounted exits of the discrete walk.
inline McEstimate solve_discounted(const Domain& d, const Vec& x, const BoundaryFn& f, double mu,
                                   std::int64_t n, const WalkConfig& cfg, const RngSpec& rng,
                                   int workers = 0) {
  return detail::solve_generic(EstimatorKind::discounted, d, x, f, mu, n, cfg, rng, workers);
}

/// Dirichlet solve by exponentially killed walks: a path counts only if an
/// independent exponential clock (rate mu^2/2) outlives its exit time.
/// mu = 0 disables killing and delegates to the discounted solve.
inline McEstimate solve_killed(const Domain& d, const Vec& x, const BoundaryFn& f, double mu,
                               std::int64_t n, const WalkConfig& cfg, const RngSpec& rng,
                               int workers = 0) {
  if (mu == 0.0) return solve_discounted(d, x, f, mu, n, cfg, rng, workers);
  return detail::solve_generic(EstimatorKind::killed, d, x, f, mu, n, cfg, rng, workers);
}

/// Dirichlet solve by the lifted (escaping) walk with cosine boundary weight.
inline McEstimate solve_duffin(const Domain& d, const Vec& x, const BoundaryFn& f, double mu,
                               std::int64_t n, const WalkConfig& cfg, const RngSpec& rng,
                               int workers = 0) {
  if (!(mu > 0.0)) throw std::domain_error("solve_duffin: requires mu > 0");
  return detail::solve_generic(EstimatorKind::duffin, d, x, f, mu, n, cfg, rng, workers);
}

/// Dirichlet solve by walk on spheres with per-jump survival weights.
inline McEstimate solve_wos(const Domain& d, const Vec& x, const BoundaryFn& f, double mu,
                            std::int64_t n, const WalkConfig& cfg, const RngSpec& rng,
                            int workers = 0) {
  return detail::solve_generic(EstimatorKind::wos, d, x, f, mu, n, cfg, rng, workers);
}

/// Empirical boundary measure on a binning: per-bin weighted (killed-measure)
/// and unweighted (exit-measure) masses from the same paths, plus an optional
/// joint exit-time histogram on a geometric time grid.
///
/// Out-of-window boundary exits accumulate in the overflow slot so total mass
/// is conserved; paths that never reach the boundary (strip escapes of the
/// lifted walk, truncations) carry no boundary mass.
struct BoundaryHistogram {
  BoundaryBinning binning;
  std::int64_t n_samples = 0;
  std::vector<std::int64_t> counts;       // size bin_count
  std::vector<double> weighted_sums;      // size bin_count
  std::int64_t overflow_count = 0;
  double overflow_weighted_sum = 0.0;
  double truncation_fraction = 0.0;

  // joint (time x space) exit counts; time_edges has n_time_bins + 1 entries,
  // rows are time bins, columns are space bins plus the overflow column
  std::vector<double> time_edges;
  std::vector<std::int64_t> joint_counts;

  int n_time_bins() const {
    return time_edges.empty() ? 0 : static_cast<int>(time_edges.size()) - 1;
  }

  std::int64_t joint_count(int time_bin, int space_bin_or_overflow) const {
    const int cols = binning.bin_count + 1;
    return joint_counts[static_cast<size_t>(time_bin) * cols + space_bin_or_overflow];
  }

  double unweighted_mass(int bin) const {
    return static_cast<double>(counts[bin]) / static_cast<double>(n_samples);
  }

  double weighted_mass(int bin) const {
    return weighted_sums[bin] / static_cast<double>(n_samples);
  }

  double total_unweighted() const {
    std::int64_t c = overflow_count;
    for (auto v : counts) c += v;
    return static_cast<double>(c) / static_cast<double>(n_samples);
  }

  double total_weighted() const {
    stats::CompensatedSum s;
    for (auto v : weighted_sums) s.add(v);
    s.add(overflow_weighted_sum);
    return s.value() / static_cast<double>(n_samples);
  }
};

namespace detail {

struct HistAcc {
  std::vector<std::int64_t> counts;
  std::vector<stats::CompensatedSum> wsums;
  std::int64_t overflow_count = 0;
  stats::CompensatedSum overflow_wsum;
  std::vector<std::int64_t> joint;
  std::int64_t n_truncated = 0;
  bool init = false;
};

inline std::vector<double> geometric_time_edges(int k, double h, double t_max) {
  std::vector<double> edges(static_cast<size_t>(k) + 1);
  const double ratio = std::log(t_max / h);
  for (int i = 0; i <= k; ++i) edges[static_cast<size_t>(i)] = h * std::exp(ratio * i / k);
  return edges;
}

inline int time_bin_of(const std::vector<double>& edges, double t) {
  // clamp into the grid so every exited path lands in exactly one bin
  const int k = static_cast<int>(edges.size()) - 1;
  if (t <= edges.front()) return 0;
  if (t >= edges.back()) return k - 1;
  int lo = 0, hi = k;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (t >= edges[static_cast<size_t>(mid)])
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace detail

inline BoundaryHistogram measure_histogram(const Domain& d, const Vec& x, double mu,
                                           const BoundaryBinning& binning, std::int64_t n,
                                           WalkConfig cfg, const RngSpec& rng_spec,
                                           EstimatorKind kind, int time_bins = 0,
                                           int workers = 0) {
  if (n < 2) throw std::invalid_argument("measure_histogram: n_samples must be >= 2");
  if (!d.contains(x)) throw std::domain_error("measure_histogram: pole not inside the domain");
  if (time_bins > 0 && kind == EstimatorKind::wos)
    throw std::invalid_argument("measure_histogram: walk-on-spheres paths are time-free; time bins unavailable");
  cfg.mu = mu;
  cfg.validate();

  const int nb = binning.bin_count;
  std::vector<double> time_edges;
  if (time_bins > 0)
    time_edges = detail::geometric_time_edges(time_bins, cfg.step_h,
                                              cfg.step_h * static_cast<double>(cfg.max_steps));

  auto accs = detail::run_chunked<detail::HistAcc>(n, workers, [&](std::int64_t i, detail::HistAcc& acc) {
    if (!acc.init) {
      acc.counts.assign(static_cast<size_t>(nb), 0);
      acc.wsums.assign(static_cast<size_t>(nb), {});
      if (time_bins > 0) acc.joint.assign(static_cast<size_t>(time_bins) * (nb + 1), 0);
      acc.init = true;
    }
    RngStream rng(rng_spec.seed, rng_spec.stream_base + static_cast<std::uint64_t>(i));
    const ExitSample s = detail::sample_exit(kind, rng, d, x, cfg);
    if (s.status == PathStatus::truncated) {
      ++acc.n_truncated;
      return;
    }
    if (s.status != PathStatus::exited) return;  // no boundary mass
    const int idx = bin_index(binning, d, s.exit_point);
    if (idx == kOutOfWindow) {
      ++acc.overflow_count;
      acc.overflow_wsum.add(s.weight);
    } else {
      ++acc.counts[static_cast<size_t>(idx)];
      acc.wsums[static_cast<size_t>(idx)].add(s.weight);
    }
    if (time_bins > 0 && s.exit_time) {
      const int tb = detail::time_bin_of(time_edges, *s.exit_time);
      const int col = idx == kOutOfWindow ? nb : idx;
      ++acc.joint[static_cast<size_t>(tb) * (nb + 1) + col];
    }
  });

  BoundaryHistogram h;
  h.binning = binning;
  h.n_samples = n;
  h.counts.assign(static_cast<size_t>(nb), 0);
  h.weighted_sums.assign(static_cast<size_t>(nb), 0.0);
  h.time_edges = time_edges;
  if (time_bins > 0) h.joint_counts.assign(static_cast<size_t>(time_bins) * (nb + 1), 0);
  std::vector<stats::CompensatedSum> wtot(static_cast<size_t>(nb));
  stats::CompensatedSum overflow_w;
  std::int64_t n_trunc = 0;
  for (const auto& a : accs) {
    if (!a.init) continue;
    n_trunc += a.n_truncated;
    h.overflow_count += a.overflow_count;
    overflow_w.merge(a.overflow_wsum);
    for (int b = 0; b < nb; ++b) {
      h.counts[static_cast<size_t>(b)] += a.counts[static_cast<size_t>(b)];
      wtot[static_cast<size_t>(b)].merge(a.wsums[static_cast<size_t>(b)]);
    }
    for (size_t j = 0; j < a.joint.size(); ++j) h.joint_counts[j] += a.joint[j];
  }
  for (int b = 0; b < nb; ++b) h.weighted_sums[static_cast<size_t>(b)] = wtot[static_cast<size_t>(b)].value();
  h.overflow_weighted_sum = overflow_w.value();
  h.truncation_fraction = static_cast<double>(n_trunc) / static_cast<double>(n);
  return h;
}

/// Per-bin conditional discount estimate: the ratio of killed-measure to
/// exit-measure mass in each bin, with a per-bin standard error. Bins with
/// fewer than kRnMinHits exits are reported missing.
struct RnDerivative {
  std::vector<std::optional<double>> ratio;  // missing when count < kRnMinHits
  std::vector<double> std_error;
  std::vector<std::int64_t> counts;
};

inline constexpr std::int64_t kRnMinHits = 100;

namespace detail {

struct RnAcc {
  std::vector<std::int64_t> counts;
  std::vector<stats::CompensatedSum> wsum;    // [mu][bin]
  std::vector<stats::CompensatedSum> wsumsq;  // [mu][bin]
  bool init = false;
};

}  // namespace detail

/// Ratios for several killing parameters from one shared set of paths; the
/// exit geometry is sampled once and each mu reweights the same exit times,
/// so the returned ratios are pointwise monotone in mu by construction.
inline std::vector<RnDerivative> rn_derivative_multi(const Domain& d, const Vec& x,
                                                     std::span<const double> mus,
                                                     const BoundaryBinning& binning,
                                                     std::int64_t n, WalkConfig cfg,
                                                     const RngSpec& rng_spec, int workers = 0) {
  if (n < 2) throw std::invalid_argument("rn_derivative: n_samples must be >= 2");
  if (!d.contains(x)) throw std::domain_error("rn_derivative: pole not inside the domain");
  for (double m : mus)
    if (!(m >= 0.0)) throw std::domain_error("rn_derivative: mu must be >= 0");
  cfg.mu = 0.0;  // sample raw exits; discounts applied per mu below
  cfg.validate();

  const int nb = binning.bin_count;
  const int nm = static_cast<int>(mus.size());

  auto accs = detail::run_chunked<detail::RnAcc>(n, workers, [&](std::int64_t i, detail::RnAcc& acc) {
    if (!acc.init) {
      acc.counts.assign(static_cast<size_t>(nb), 0);
      acc.wsum.assign(static_cast<size_t>(nm) * nb, {});
      acc.wsumsq.assign(static_cast<size_t>(nm) * nb, {});
      acc.init = true;
    }
    RngStream rng(rng_spec.seed, rng_spec.stream_base + static_cast<std::uint64_t>(i));
    const ExitSample s = step_path_to_exit(rng, d, x, cfg);
    if (s.status != PathStatus::exited) return;
    const int idx = bin_index(binning, d, s.exit_point);
    if (idx == kOutOfWindow) return;
    ++acc.counts[static_cast<size_t>(idx)];
    for (int k = 0; k < nm; ++k) {
      const double w = std::exp(-0.5 * mus[static_cast<size_t>(k)] * mus[static_cast<size_t>(k)] * *s.exit_time);
      acc.wsum[static_cast<size_t>(k) * nb + idx].add(w);
      acc.wsumsq[static_cast<size_t>(k) * nb + idx].add(w * w);
    }
  });

  std::vector<std::int64_t> counts(static_cast<size_t>(nb), 0);
  std::vector<stats::CompensatedSum> wsum(static_cast<size_t>(nm) * nb);
  std::vector<stats::CompensatedSum> wsumsq(static_cast<size_t>(nm) * nb);
  for (const auto& a : accs) {
    if (!a.init) continue;
    for (int b = 0; b < nb; ++b) counts[static_cast<size_t>(b)] += a.counts[static_cast<size_t>(b)];
    for (size_t j = 0; j < wsum.size(); ++j) {
      wsum[j].merge(a.wsum[j]);
      wsumsq[j].merge(a.wsumsq[j]);
    }
  }

  std::vector<RnDerivative> out(static_cast<size_t>(nm));
  for (int k = 0; k < nm; ++k) {
    RnDerivative& r = out[static_cast<size_t>(k)];
    r.ratio.assign(static_cast<size_t>(nb), std::nullopt);
    r.std_error.assign(static_cast<size_t>(nb), 0.0);
    r.counts = counts;
    for (int b = 0; b < nb; ++b) {
      const std::int64_t c = counts[static_cast<size_t>(b)];
      if (c < kRnMinHits) continue;
      const double sw = wsum[static_cast<size_t>(k) * nb + b].value();
      const double sw2 = wsumsq[static_cast<size_t>(k) * nb + b].value();
      const double mean = sw / static_cast<double>(c);
      const double var = c > 1 ? std::max(0.0, (sw2 - c * mean * mean) / static_cast<double>(c - 1)) : 0.0;
      r.ratio[static_cast<size_t>(b)] = mean;
      r.std_error[static_cast<size_t>(b)] = std::sqrt(var / static_cast<double>(c));
    }
  }
  return out;
}

inline RnDerivative rn_derivative(const Domain& d, const Vec& x, double mu,
                                  const BoundaryBinning& binning, std::int64_t n,
                                  const WalkConfig& cfg, const RngSpec& rng_spec,
                                  int workers = 0) {
  const std::array<double, 1> mus{mu};
  return rn_derivative_multi(d, x, mus, binning, n, cfg, rng_spec, workers)[0];
}

/// All four estimators on independent stream blocks plus the pairwise 99%
/// confidence-interval overlap verdicts.
struct CompareReport {
  std::array<EstimatorKind, 4> kinds{EstimatorKind::discounted, EstimatorKind::killed,
                                     EstimatorKind::duffin, EstimatorKind::wos};
  std::array<McEstimate, 4> estimates;
  std::array<std::array<bool, 4>, 4> overlap{};

  bool all_overlap() const {
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (!overlap[static_cast<size_t>(i)][static_cast<size_t>(j)]) return false;
    return true;
  }
};

inline CompareReport compare_estimators(const Domain& d, const Vec& x, const BoundaryFn& f,
                                        double mu, std::int64_t n, const WalkConfig& cfg,
                                        const RngSpec& rng, int workers = 0) {
  if (!(mu > 0.0)) throw std::domain_error("compare_estimators: requires mu > 0");
  CompareReport rep;
  for (int k = 0; k < 4; ++k) {
    RngSpec spec{rng.seed, rng.stream_base + static_cast<std::uint64_t>(k + 1) * kStreamBlock};
    switch (rep.kinds[static_cast<size_t>(k)]) {
      case EstimatorKind::discounted:
        rep.estimates[static_cast<size_t>(k)] = solve_discounted(d, x, f, mu, n, cfg, spec, workers);
        break;
      case EstimatorKind::killed:
        rep.estimates[static_cast<size_t>(k)] = solve_killed(d, x, f, mu, n, cfg, spec, workers);
        break;
      case EstimatorKind::duffin:
        rep.estimates[static_cast<size_t>(k)] = solve_duffin(d, x, f, mu, n, cfg, spec, workers);
        break;
      case EstimatorKind::wos:
        rep.estimates[static_cast<size_t>(k)] = solve_wos(d, x, f, mu, n, cfg, spec, workers);
        break;
    }
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      rep.overlap[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          ci_overlap(rep.estimates[static_cast<size_t>(i)], rep.estimates[static_cast<size_t>(j)]);
  return rep;
}

}  // namespace panmc
