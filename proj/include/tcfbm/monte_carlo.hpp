#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>
#include <type_traits>
#include <vector>

#include "tcfbm/errors.hpp"
#include "tcfbm/numeric_detail.hpp"
#include "tcfbm/tfbm.hpp"

namespace tcfbm {

// Counter-based reproducible stream: the same (seed, stream_id) pair always
// yields the same draw sequence, independent of platform and thread count.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq sequence{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
        0x9e3779b9u};
    engine_.seed(sequence);
  }

  // Uniform draw on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
  }

  double exponential() { return -std::log(uniform()); }

  double gaussian() {
    if (have_cache_) {
      have_cache_ = false;
      return cache_;
    }
    const double r = std::sqrt(2.0 * exponential());
    const double theta = 2.0 * std::numbers::pi * uniform();
    cache_ = r * std::sin(theta);
    have_cache_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double cache_ = 0.0;
  bool have_cache_ = false;
};

struct McEstimate {
  double mean;
  double std_error;
  long n_replicates;
};

// Simulation grid for subordinator paths; dt <= 0 requests the default
// horizon/1000 step.
struct PathConfig {
  double horizon = 0.0;
  double dt = 0.0;
};

namespace detail {

inline PathConfig normalize_path_config(PathConfig cfg, double needed_horizon) {
  if (cfg.horizon <= 0.0) cfg.horizon = needed_horizon;
  if (cfg.dt <= 0.0) cfg.dt = 1e-3 * cfg.horizon;
  if (!(cfg.dt > 0.0 && cfg.horizon > 0.0))
    throw std::domain_error("PathConfig: horizon and dt must be > 0");
  return cfg;
}

}  // namespace detail

// One draw of a totally skewed positive stable variate with Laplace
// transform exp(-scale_t lambda^alpha), by the one-sided Kanter /
// Chambers-Mallows-Stuck construction, evaluated in log space.
inline double sample_stable_increment(double alpha, double scale_t, RngStream& rng) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("sample_stable_increment: alpha must lie in (0,1)");
  if (!(scale_t > 0.0)) throw std::domain_error("sample_stable_increment: scale_t must be > 0");
  const double theta = std::numbers::pi * rng.uniform();
  const double log_e = std::log(rng.exponential());
  const double log_a = std::log(std::sin((1.0 - alpha) * theta)) +
                       alpha / (1.0 - alpha) * std::log(std::sin(alpha * theta)) -
                       1.0 / (1.0 - alpha) * std::log(std::sin(theta));
  return std::pow(scale_t, 1.0 / alpha) *
         std::exp((1.0 - alpha) / alpha * (log_a - log_e));
}

// One tempered increment by exponential tilting: stable proposals accepted
// with probability exp(-a S). Expected acceptance exp(-scale_t a^alpha).
inline double sample_tempered_increment(double alpha, double a, double scale_t,
                                        RngStream& rng) {
  if (!(a > 0.0)) throw std::domain_error("sample_tempered_increment: a must be > 0");
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    const double s = sample_stable_increment(alpha, scale_t, rng);
    if (rng.exponential() > a * s) return s;
  }
  throw SamplerError("sample_tempered_increment: rejection loop stalled");
}

namespace detail {

// One grid increment of the driving subordinator over a step of length dt.
inline double sample_d_increment(const SubordinatorSpec& spec, double dt, RngStream& rng) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, Stable>) {
          return sample_stable_increment(f.alpha, dt, rng);
        } else if constexpr (std::is_same_v<T, TemperedStable>) {
          return sample_tempered_increment(f.alpha, f.a, dt, rng);
        } else if constexpr (std::is_same_v<T, StableMixture>) {
          return std::pow(f.c1, 1.0 / f.alpha1) * sample_stable_increment(f.alpha1, dt, rng) +
                 std::pow(f.c2, 1.0 / f.alpha2) * sample_stable_increment(f.alpha2, dt, rng);
        } else if constexpr (std::is_same_v<T, DeterministicDrift>) {
          return f.mu * dt;
        } else {
          throw SamplerError("sample_D_increments: no generic sampler for custom evaluators");
        }
      },
      spec);
}

}  // namespace detail

struct SubordinatorPath {
  std::vector<double> times;
  std::vector<double> values;
};

// D on the grid {0, dt, 2dt, ...} up to the horizon; D(0) = 0 and the path
// is nondecreasing.
inline SubordinatorPath sample_D_increments(const SubordinatorSpec& spec, PathConfig cfg,
                                            RngStream& rng) {
  cfg = detail::normalize_path_config(cfg, cfg.horizon);
  const auto n = static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt));
  SubordinatorPath path;
  path.times.resize(n + 1);
  path.values.resize(n + 1);
  path.times[0] = 0.0;
  path.values[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    path.times[i] = static_cast<double>(i) * cfg.dt;
    path.values[i] = path.values[i - 1] + detail::sample_d_increment(spec, cfg.dt, rng);
  }
  return path;
}

// One joint draw of (Y(t_1), ..., Y(t_k)) for sorted query times: simulate D
// until it crosses max(times), then invert by linear interpolation between
// the bracketing grid points. The simulated span extends automatically, up
// to 2^10 times the grid implied by the horizon.
inline std::vector<double> inverse_values_at(const SubordinatorSpec& spec,
                                             const std::vector<double>& times, PathConfig cfg,
                                             RngStream& rng) {
  if (times.empty()) return {};
  if (!std::is_sorted(times.begin(), times.end()))
    throw std::domain_error("inverse_values_at: times must be sorted");
  if (!(times.front() >= 0.0)) throw std::domain_error("inverse_values_at: times must be >= 0");
  cfg = detail::normalize_path_config(cfg, std::max(times.back(), 1e-12));
  if (times.back() > cfg.horizon)
    throw std::domain_error("inverse_values_at: max(times) exceeds the horizon");
  const double t_max = times.back();
  const std::size_t step_cap =
      static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt)) << 10;
  std::vector<double> y(times.size());
  double d_prev = 0.0;
  double s_prev = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 1; next < times.size(); ++i) {
    if (i > step_cap)
      throw SamplerError("inverse_values_at: path failed to cross max(times)");
    const double d = d_prev + detail::sample_d_increment(spec, cfg.dt, rng);
    const double s = static_cast<double>(i) * cfg.dt;
    while (next < times.size() && d > times[next]) {
      y[next] = s_prev + cfg.dt * (times[next] - d_prev) / (d - d_prev);
      ++next;
    }
    d_prev = d;
    s_prev = s;
    (void)t_max;
  }
  return y;
}

namespace detail {

// In-place Cholesky of a k x k row-major symmetric matrix; returns false if
// a pivot fails.
inline bool cholesky_in_place(std::vector<double>& a, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * k + j];
      for (std::size_t p = 0; p < j; ++p) sum -= a[i * k + p] * a[j * k + p];
      if (i == j) {
        if (!(sum > 0.0)) return false;
        a[i * k + i] = std::sqrt(sum);
      } else {
        a[i * k + j] = sum / a[j * k + j];
      }
    }
    for (std::size_t j = i + 1; j < k; ++j) a[i * k + j] = 0.0;
  }
  return true;
}

}  // namespace detail

// One joint draw of (Z(t_1), ..., Z(t_k)) at sorted query times: draw Y,
// then a zero-mean Gaussian vector with the fBm covariance at those Y
// values. Tied Y values produce identical Z components.
inline std::vector<double> sample_Z_at(const TfbmModel& model, const std::vector<double>& times,
                                       const PathConfig& cfg, RngStream& rng) {
  const std::vector<double> y = inverse_values_at(model.sub, times, cfg, rng);
  if (y.empty()) return {};
  // Deduplicate ties (y is nondecreasing for sorted times); a leading y = 0
  // pins those components to Z = 0 exactly and stays out of the matrix.
  std::vector<double> uy;
  std::vector<std::size_t> index(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (uy.empty() || y[i] > uy.back()) uy.push_back(y[i]);
    index[i] = uy.size() - 1;
  }
  const std::size_t zero_rows = !uy.empty() && uy.front() == 0.0 ? 1 : 0;
  const std::size_t k = uy.size() - zero_rows;
  std::vector<double> cov(k * k);
  double trace = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      cov[i * k + j] =
          fbm_cov(model.hurst, model.sigma2, uy[i + zero_rows], uy[j + zero_rows]);
    trace += cov[i * k + i];
  }
  std::vector<double> factor = cov;
  if (k > 0 && !detail::cholesky_in_place(factor, k)) {
    factor = cov;
    const double jitter = 1e-12 * trace / static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) factor[i * k + i] += jitter;
    if (!detail::cholesky_in_place(factor, k))
      throw FactorizationError("sample_Z_at: covariance factorization failed");
  }
  std::vector<double> g(k);
  for (auto& gi : g) gi = rng.gaussian();
  std::vector<double> z(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (index[i] < zero_rows) {
      z[i] = 0.0;
      continue;
    }
    const std::size_t row = index[i] - zero_rows;
    double zi = 0.0;
    for (std::size_t j = 0; j <= row; ++j) zi += factor[row * k + j] * g[j];
    z[i] = zi;
  }
  return z;
}

enum class McQuantity {
  var_z,
  cov_z,
  corr_z,
  increment_moment_y,
  abs_increment_moment_z,
  cov_y,
  increment_cov_z
};

// Parameters of one estimated quantity; order carries kappa (Y-increment
// moment) or m (absolute Z-increment moment), v the increment lag offset.
struct McQuery {
  McQuantity quantity;
  double t = 0.0;
  double s = 0.0;
  double v = 0.0;
  double order = 0.0;
};

namespace detail {

struct ReplicateDesign {
  std::vector<double> times;       // sorted query times handed to the samplers
  bool needs_z = false;            // Z draw vs Y-only draw
  int n_components = 1;
  // Maps the sampled vector to the per-replicate statistic components.
  std::function<void(const std::vector<double>&, double*)> components;
  // Smooth function of the component means (plug-in estimator) and its
  // gradient for the delta-method standard error.
  std::function<double(const double*)> statistic;
  std::function<void(const double*, double*)> gradient;
};

inline ReplicateDesign make_design(const McQuery& q) {
  ReplicateDesign d;
  auto require_ts = [&](bool strict_s) {
    if (!(q.t > 0.0)) throw std::domain_error("estimate: need t > 0");
    if (strict_s ? !(q.s > 0.0 && q.s != q.t) : !(q.s >= 0.0))
      throw std::domain_error("estimate: invalid s for this quantity");
  };
  switch (q.quantity) {
    case McQuantity::var_z: {
      if (!(q.t > 0.0)) throw std::domain_error("estimate: need t > 0");
      d.times = {q.t};
      d.needs_z = true;
      d.components = [](const std::vector<double>& x, double* out) { out[0] = x[0] * x[0]; };
      d.statistic = [](const double* m) { return m[0]; };
      d.gradient = [](const double*, double* g) { g[0] = 1.0; };
      return d;
    }
    case McQuantity::cov_z:
    case McQuantity::corr_z: {
      require_ts(q.quantity == McQuantity::corr_z);
      d.times = {std::min(q.t, q.s), std::max(q.t, q.s)};
      d.needs_z = true;
      if (q.quantity == McQuantity::cov_z) {
        d.components = [](const std::vector<double>& x, double* out) { out[0] = x[0] * x[1]; };
        d.statistic = [](const double* m) { return m[0]; };
        d.gradient = [](const double*, double* g) { g[0] = 1.0; };
        return d;
      }
      d.n_components = 3;
      d.components = [](const std::vector<double>& x, double* out) {
        out[0] = x[0] * x[1];
        out[1] = x[0] * x[0];
        out[2] = x[1] * x[1];
      };
      d.statistic = [](const double* m) { return m[0] / std::sqrt(m[1] * m[2]); };
      d.gradient = [](const double* m, double* g) {
        const double root = std::sqrt(m[1] * m[2]);
        const double value = m[0] / root;
        g[0] = 1.0 / root;
        g[1] = -0.5 * value / m[1];
        g[2] = -0.5 * value / m[2];
      };
      return d;
    }
    case McQuantity::cov_y: {
      require_ts(false);
      d.times = {std::min(q.t, q.s), std::max(q.t, q.s)};
      d.n_components = 3;
      d.components = [](const std::vector<double>& x, double* out) {
        out[0] = x[0] * x[1];
        out[1] = x[0];
        out[2] = x[1];
      };
      d.statistic = [](const double* m) { return m[0] - m[1] * m[2]; };
      d.gradient = [](const double* m, double* g) {
        g[0] = 1.0;
        g[1] = -m[2];
        g[2] = -m[1];
      };
      return d;
    }
    case McQuantity::increment_moment_y:
    case McQuantity::abs_increment_moment_z: {
      require_ts(false);
      if (!(q.order > 0.0)) throw std::domain_error("estimate: need order > 0");
      d.times = {std::min(q.t, q.s), std::max(q.t, q.s)};
      d.needs_z = q.quantity == McQuantity::abs_increment_moment_z;
      const double order = q.order;
      d.components = [order](const std::vector<double>& x, double* out) {
        out[0] = std::pow(std::fabs(x[1] - x[0]), order);
      };
      d.statistic = [](const double* m) { return m[0]; };
      d.gradient = [](const double*, double* g) { g[0] = 1.0; };
      return d;
    }
    case McQuantity::increment_cov_z: {
      if (!(q.t > 0.0) || !(q.v >= q.t))
        throw std::domain_error("estimate: need v >= t > 0");
      d.times = {q.t, q.v, q.t + q.v};
      std::sort(d.times.begin(), d.times.end());
      d.needs_z = true;
      const double t = q.t, v = q.v;
      d.components = [t, v](const std::vector<double>& x, double* out) {
        // times were sorted as {t, v, t+v}; Z(0) = 0.
        const double zt = x[0];
        const double zv = t == v ? x[0] : x[1];
        const double ztv = x[2];
        out[0] = zt * (ztv - zv);
      };
      d.statistic = [](const double* m) { return m[0]; };
      d.gradient = [](const double*, double* g) { g[0] = 1.0; };
      return d;
    }
  }
  throw std::domain_error("estimate: unknown quantity");
}

}  // namespace detail

// Monte Carlo estimate over n_replicates independent replicates, replicate i
// drawing from RngStream(seed, i). The reduction runs over a fixed chunk
// grid combined in index order, so the result is bit-identical for a given
// (seed, n_replicates) regardless of thread count.
inline McEstimate estimate(const TfbmModel& model, const McQuery& query, long n_replicates,
                           std::uint64_t seed, PathConfig cfg = {}, unsigned n_threads = 0) {
  if (n_replicates < 100) throw std::domain_error("estimate: need at least 100 replicates");
  const auto design = detail::make_design(query);
  cfg = detail::normalize_path_config(cfg, design.times.back());
  const int nc = design.n_components;

  struct ChunkSums {
    double comp[3] = {0.0, 0.0, 0.0};
    double cross[9] = {0.0};
    long failures = 0;
  };
  const long n_chunks = std::min<long>(n_replicates, 256);
  std::vector<ChunkSums> sums(static_cast<std::size_t>(n_chunks));

  auto run_chunk = [&](long c) {
    ChunkSums& out = sums[static_cast<std::size_t>(c)];
    const long lo = c * n_replicates / n_chunks;
    const long hi = (c + 1) * n_replicates / n_chunks;
    detail::KahanSum comp[3], cross[9];
    double x[3];
    for (long i = lo; i < hi; ++i) {
      RngStream rng(seed, static_cast<std::uint64_t>(i));
      try {
        const std::vector<double> draw =
            design.needs_z ? sample_Z_at(model, design.times, cfg, rng)
                           : inverse_values_at(model.sub, design.times, cfg, rng);
        design.components(draw, x);
      } catch (const SamplerError&) {
        ++out.failures;
        continue;
      } catch (const FactorizationError&) {
        ++out.failures;
        continue;
      }
      for (int a = 0; a < nc; ++a) {
        comp[a].add(x[a]);
        for (int b = 0; b < nc; ++b) cross[a * 3 + b].add(x[a] * x[b]);
      }
    }
    for (int a = 0; a < nc; ++a) {
      out.comp[a] = comp[a].value();
      for (int b = 0; b < nc; ++b) out.cross[a * 3 + b] = cross[a * 3 + b].value();
    }
  };

  unsigned workers = n_threads > 0 ? n_threads : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n_chunks));
  if (workers <= 1) {
    for (long c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    std::atomic<long> next_chunk{0};
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (long c = next_chunk.fetch_add(1); c < n_chunks; c = next_chunk.fetch_add(1))
          run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }

  detail::KahanSum comp_total[3], cross_total[9];
  long failures = 0;
  for (const auto& chunk : sums) {
    failures += chunk.failures;
    for (int a = 0; a < nc; ++a) {
      comp_total[a].add(chunk.comp[a]);
      for (int b = 0; b < nc; ++b) cross_total[a * 3 + b].add(chunk.cross[a * 3 + b]);
    }
  }
  const long n = n_replicates - failures;
  if (failures * 1000 > n_replicates)
    throw SamplerError("estimate: more than 0.1% of replicates failed");
  if (n < 2) throw SamplerError("estimate: not enough successful replicates");

  double mean_c[3], covariance[9];
  for (int a = 0; a < nc; ++a) mean_c[a] = comp_total[a].value() / static_cast<double>(n);
  for (int a = 0; a < nc; ++a) {
    for (int b = 0; b < nc; ++b) {
      covariance[a * 3 + b] =
          (cross_total[a * 3 + b].value() - static_cast<double>(n) * mean_c[a] * mean_c[b]) /
          static_cast<double>(n - 1);
    }
  }
  double grad[3] = {0.0, 0.0, 0.0};
  design.gradient(mean_c, grad);
  double var = 0.0;
  for (int a = 0; a < nc; ++a)
    for (int b = 0; b < nc; ++b) var += grad[a] * covariance[a * 3 + b] * grad[b];
  var = std::max(var, 0.0);
  return McEstimate{design.statistic(mean_c), std::sqrt(var / static_cast<double>(n)), n};
}

namespace detail {

// Iterative radix-2 complex FFT; size must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if ((n & (n - 1)) != 0) throw std::invalid_argument("fft_radix2: size must be a power of 2");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> root(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const auto u = a[i + j];
        const auto v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= root;
      }
    }
  }
}

}  // namespace detail

// Exact-in-law stationary fractional Gaussian noise of length n (a power of
// two) by circulant embedding of the autocovariance.
inline std::vector<double> fgn_path(double hurst, double sigma0_2, std::size_t n,
                                    RngStream& rng) {
  if (n < 2 || (n & (n - 1)) != 0)
    throw std::domain_error("fgn_path: length must be a power of two, >= 2");
  const std::size_t m = 2 * n;
  std::vector<std::complex<double>> c(m);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t lag = std::min(k, m - k);
    c[k] = fgn_autocov(hurst, sigma0_2, static_cast<long>(lag));
  }
  detail::fft_radix2(c);
  double max_eig = 0.0;
  for (const auto& e : c) max_eig = std::max(max_eig, e.real());
  std::vector<std::complex<double>> w(m);
  for (std::size_t k = 0; k <= m / 2; ++k) {
    double eig = c[k].real();
    if (eig < 0.0) {
      if (eig < -1e-8 * max_eig)
        throw FactorizationError("fgn_path: circulant embedding went negative");
      eig = 0.0;
    }
    if (k == 0 || k == m / 2) {
      w[k] = std::sqrt(eig) * rng.gaussian();
    } else {
      const double scale = std::sqrt(0.5 * eig);
      w[k] = std::complex<double>(scale * rng.gaussian(), scale * rng.gaussian());
      w[m - k] = std::conj(w[k]);
    }
  }
  detail::fft_radix2(w);
  std::vector<double> path(n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(m));
  for (std::size_t i = 0; i < n; ++i) path[i] = w[i].real() * norm;
  return path;
}

}  // namespace tcfbm
