#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "levyfpt/contracts.hpp"
#include "levyfpt/model.hpp"
#include "levyfpt/parallel.hpp"

// Path simulation on a uniform time grid. Increments are drawn by the inverse
// transform method: Brownian increments through the normal quantile, tempered
// stable increments through a cached quantile table built by Fourier-inverting
// the time-dt characteristic function (Gil-Pelaez). Path j's random stream is
// a pure function of (seed, j), so parallel runs are reproducible for any
// thread count.

namespace levyfpt {

struct McConfig {
  double dt = 1.0 / 48.0;
  int n_steps = 1440;
  int n_paths = 20000;
  std::uint64_t seed = 20141008;

  void validate() const {
    if (!(dt > 0.0) || n_steps < 1 || n_paths < 1)
      throw ParameterError("McConfig: require dt > 0, n_steps, n_paths >= 1");
  }
};

// ---------------------------------------------------------------------------
// Per-path random stream
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// splitmix64 stream whose state is derived from (seed, path index).
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path)
      : state_(detail::mix64((seed + 0x9E3779B97F4A7C15ULL) ^
                             (path * 0xD1342543DE82EF95ULL +
                              0x632BE59BD9B4E019ULL))) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(state_);
  }

  /// Uniform draw in the open interval (0, 1).
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Normal quantile (Wichura's AS 241, double precision)
// ---------------------------------------------------------------------------

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ParameterError("normal_quantile: p must lie in (0,1)");
  double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) *
                    r + 2.41780725177450611770e-1) * r +
               1.27045825245236838258e0) * r + 3.64784832476320460504e0) * r +
             5.76949722146069140550e0) * r + 4.63033784615654529590e0) * r +
           1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) *
                    r + 1.51986665636164571966e-2) * r +
               1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) *
             r + 1.67638483018380384940e0) * r + 2.05319162663775882187e0) *
              r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) *
                    r + 1.24266094738807843860e-3) * r +
               2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) *
             r + 1.78482653991729133580e0) * r + 5.46378491116411436990e0) *
              r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) *
                    r + 1.84631831751005468180e-5) * r +
               7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) *
             r + 1.36929880922735805310e-1) * r + 5.99832206555887937690e-1) *
              r + 1.0);
  }
  return (q < 0.0) ? -val : val;
}

// ---------------------------------------------------------------------------
// Inverse-CDF table for one (model, dt)
// ---------------------------------------------------------------------------

/// Quantile table for the law of X(dt). The CDF is evaluated pointwise by the
/// Gil-Pelaez inversion
///   F(x) = 1/2 - (1/pi) Int_0^inf Im[exp(-iux) phi_dt(u)] / u du
/// on a sinh-stretched x grid that resolves both the small-time spike and the
/// tempered tails, then inverted by monotone (Fritsch-Carlson) cubics.
class IncrementTable {
 public:
  IncrementTable(const LevyModel& model, double dt, int n_x = 4096,
                 int threads = 0) {
    if (!(dt > 0.0)) throw ParameterError("IncrementTable: dt must be > 0");
    if (n_x < 64) throw ParameterError("IncrementTable: n_x too small");
    build(model, dt, n_x, threads);
  }

  /// Quantile x(p); p outside the tabulated mass is clamped to the grid ends.
  double sample(double p) const {
    if (p <= p_.front()) return x_.front();
    if (p >= p_.back()) return x_.back();
    auto it = std::upper_bound(p_.begin(), p_.end(), p);
    std::size_t i = static_cast<std::size_t>(it - p_.begin()) - 1;
    double h = p_[i + 1] - p_[i];
    double t = (p - p_[i]) / h;
    double a = x_[i], b = x_[i + 1];
    double m0 = slope_[i] * h, m1 = slope_[i + 1] * h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * a + (t3 - 2 * t2 + t) * m0 +
           (-2 * t3 + 3 * t2) * b + (t3 - t2) * m1;
  }

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  std::size_t size() const { return x_.size(); }

 private:
  void build(const LevyModel& model, double dt, int n_x, int threads) {
    double mean = model.mu() * dt;
    double sd = std::sqrt(variance_rate(model) * dt);

    // Small-time scale of the jump part; shapes the sinh grid only.
    double alpha_loc = 1.0;
    if (model.family() == Family::nts) alpha_loc = model.as_nts().alpha;
    if (model.family() == Family::cgmy) alpha_loc = model.as_cgmy().alpha;
    double needle = std::pow(dt, 1.0 / alpha_loc);
    needle = std::min(std::max(needle, 1e-9 * sd), sd);

    // Chernoff bounds for the tabulated range: P(X > x) <= exp(dt k(a) - a x).
    const double log_eps = std::log(1e-13);
    auto iv = exp_moment_interval(model);
    auto chernoff = [&](double bound) {
      double best = kInf;
      for (int j = 1; j <= 64; ++j) {
        double a = bound * j / 64.0;
        double x;
        try {
          x = (-log_eps + dt * cumulant(model, a)) / std::abs(a);
        } catch (const MomentError&) {
          continue;
        }
        best = std::min(best, x);
      }
      return best;
    };
    double hi_bound = std::isfinite(iv.a_max) ? iv.a_max : 100.0 / sd;
    double lo_bound = std::isfinite(iv.a_min) ? iv.a_min : -100.0 / sd;
    double w_hi = std::max(chernoff(hi_bound), 8.0 * sd);
    double w_lo = std::max(chernoff(lo_bound), 8.0 * sd);

    // sinh-stretched grid around the mean.
    double y_hi = std::asinh(w_hi / needle);
    double y_lo = -std::asinh(w_lo / needle);
    x_.resize(n_x);
    for (int i = 0; i < n_x; ++i) {
      double y = y_lo + (y_hi - y_lo) * i / (n_x - 1);
      x_[i] = mean + needle * std::sinh(y);
    }

    // phi_dt on a uniform u grid: truncate at |phi| < 1e-10, resolve the
    // fastest oscillation exp(-iux) across the tabulated range.
    double u_max = 16.0 / std::max(sd, 1e-12);
    while (std::abs(chf(model, dt, cplx{u_max, 0.0})) > 1e-10) {
      u_max *= 2.0;
      if (u_max > 1e9)
        throw QuadratureError("IncrementTable: chf does not decay");
    }
    double span = std::max(w_hi, w_lo);
    double du = 3.14159265358979323846 / (4.0 * span);
    std::size_t n_u = static_cast<std::size_t>(u_max / du) + 1;
    std::vector<cplx> phi(n_u);
    parallel_for(
        n_u,
        [&](std::size_t j) {
          phi[j] = (j == 0) ? cplx{1.0, 0.0}
                            : chf(model, dt, cplx{j * du, 0.0});
        },
        threads);

    // Gil-Pelaez per grid point with a rotation recurrence in u.
    p_.resize(n_x);
    const double inv_pi = 0.31830988618379067154;
    parallel_for(
        static_cast<std::size_t>(n_x),
        [&](std::size_t i) {
          double x = x_[i];
          cplx step = std::polar(1.0, -du * x);
          cplx rot{1.0, 0.0};
          double acc = 0.5 * (mean - x);  // u -> 0 limit, half weight
          for (std::size_t j = 1; j < n_u; ++j) {
            rot *= step;
            if ((j & 1023) == 0) rot = std::polar(1.0, -du * j * x);
            double w = (j + 1 == n_u) ? 0.5 : 1.0;
            acc += w * (rot * phi[j]).imag() / (j * du);
          }
          p_[i] = 0.5 - inv_pi * acc * du;
        },
        threads);

    // Monotonicity: tiny quadrature dips are clamped, larger ones mean the
    // grids were too coarse for this law.
    const double tol = 1e-7;
    for (int i = 0; i < n_x; ++i) {
      p_[i] = std::min(1.0, std::max(0.0, p_[i]));
      if (i > 0) {
        if (p_[i] < p_[i - 1] - tol)
          throw TableError(
              "IncrementTable: CDF non-monotone beyond tolerance; refine the "
              "inversion grid");
        if (p_[i] < p_[i - 1]) p_[i] = p_[i - 1];
      }
    }
    dedupe();
    make_slopes();
  }

  // PCHIP needs strictly increasing p; collapse flat runs (keep first point).
  void dedupe() {
    std::vector<double> xs, ps;
    xs.reserve(x_.size());
    ps.reserve(p_.size());
    for (std::size_t i = 0; i < p_.size(); ++i) {
      if (!ps.empty() && p_[i] <= ps.back()) continue;
      xs.push_back(x_[i]);
      ps.push_back(p_[i]);
    }
    if (ps.size() < 8)
      throw TableError("IncrementTable: degenerate CDF table");
    x_ = std::move(xs);
    p_ = std::move(ps);
  }

  // Fritsch-Carlson monotone slopes for x as a function of p.
  void make_slopes() {
    std::size_t n = p_.size();
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
      d[i] = (x_[i + 1] - x_[i]) / (p_[i + 1] - p_[i]);
    slope_.resize(n);
    slope_[0] = d[0];
    slope_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) {
        slope_[i] = 0.0;
      } else {
        double w1 = 2.0 * (p_[i + 1] - p_[i]) + (p_[i] - p_[i - 1]);
        double w2 = (p_[i + 1] - p_[i]) + 2.0 * (p_[i] - p_[i - 1]);
        slope_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
  }

  std::vector<double> x_, p_, slope_;
};

namespace detail {

// Process cache of increment tables keyed by the model parameters and dt.
inline const IncrementTable& increment_table(const LevyModel& model, double dt,
                                             int threads = 0) {
  using Key = std::tuple<int, double, double, double, double, double, double>;
  auto key_of = [&]() -> Key {
    switch (model.family()) {
      case Family::nig: {
        const auto& p = model.as_nig();
        return {1, dt, p.theta, p.beta, p.gamma, p.mu, 0.0};
      }
      case Family::nts: {
        const auto& p = model.as_nts();
        return {2, dt, p.alpha, p.theta, p.beta, p.gamma, p.mu};
      }
      case Family::cgmy: {
        const auto& p = model.as_cgmy();
        return {3, dt, p.alpha, p.c, p.lambda_plus, p.lambda_minus, p.mu};
      }
      default:
        throw ParameterError("increment_table: BM needs no table");
    }
  };
  static std::map<Key, std::unique_ptr<IncrementTable>> cache;
  static std::mutex mu;
  Key k = key_of();
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it == cache.end())
    it = cache.emplace(k, std::make_unique<IncrementTable>(model, dt, 4096,
                                                           threads))
             .first;
  return *it->second;
}

}  // namespace detail

/// n i.i.d. draws distributed as X(dt), by inverse transform.
inline std::vector<double> sample_increments(const LevyModel& model, double dt,
                                             std::size_t n, PathRng& rng) {
  std::vector<double> out(n);
  if (model.family() == Family::bm) {
    const auto& p = model.as_bm();
    double m = p.mu * dt, s = p.sigma * std::sqrt(dt);
    for (auto& x : out) x = m + s * normal_quantile(rng.uniform01());
    return out;
  }
  const IncrementTable& tab = detail::increment_table(model, dt);
  for (auto& x : out) x = tab.sample(rng.uniform01());
  return out;
}

// ---------------------------------------------------------------------------
// First hitting times
// ---------------------------------------------------------------------------

/// Grid hitting times; censored paths carry the horizon n_steps * dt and
/// hit[j] == 0.
struct HittingSample {
  std::vector<double> times;
  std::vector<std::uint8_t> hit;
  double hit_fraction = 0.0;

  double horizon(const McConfig& cfg) const { return cfg.n_steps * cfg.dt; }
};

/// First grid time at which the cumulative sum crosses l (>= l when l > 0,
/// <= l when l < 0), per path.
inline HittingSample first_hitting_times(const LevyModel& model, double l,
                                         const McConfig& cfg,
                                         int threads = 0) {
  cfg.validate();
  if (l == 0.0) throw ParameterError("first_hitting_times: l must be nonzero");
  bool up = l > 0.0;
  bool is_bm = model.family() == Family::bm;
  const IncrementTable* tab =
      is_bm ? nullptr : &detail::increment_table(model, cfg.dt, threads);
  double bm_m = 0.0, bm_s = 0.0;
  if (is_bm) {
    const auto& p = model.as_bm();
    bm_m = p.mu * cfg.dt;
    bm_s = p.sigma * std::sqrt(cfg.dt);
  }

  HittingSample out;
  out.times.resize(cfg.n_paths);
  out.hit.assign(cfg.n_paths, 0);
  double horizon = cfg.n_steps * cfg.dt;
  parallel_for(
      static_cast<std::size_t>(cfg.n_paths),
      [&](std::size_t j) {
        PathRng rng(cfg.seed, j);
        double x = 0.0;
        int hit_step = 0;
        for (int n = 1; n <= cfg.n_steps; ++n) {
          double u = rng.uniform01();
          x += is_bm ? (bm_m + bm_s * normal_quantile(u)) : tab->sample(u);
          if (up ? (x >= l) : (x <= l)) {
            hit_step = n;
            break;
          }
        }
        if (hit_step > 0) {
          out.times[j] = hit_step * cfg.dt;
          out.hit[j] = 1;
        } else {
          out.times[j] = horizon;
        }
      },
      threads);
  std::size_t hits = 0;
  for (auto h : out.hit) hits += h;
  out.hit_fraction = static_cast<double>(hits) / cfg.n_paths;
  return out;
}

/// Relative histogram over (t_lo, t_hi] with equal bins; censored paths are
/// excluded from the mass. Rows are (bin_left, bin_right, relative_frequency).
struct HistogramRow {
  double left, right, frequency;
};

inline std::vector<HistogramRow> relative_histogram(const HittingSample& s,
                                                    int bins, double t_lo,
                                                    double t_hi) {
  if (bins < 1 || !(t_hi > t_lo))
    throw ParameterError("relative_histogram: bad bin layout");
  std::vector<std::size_t> counts(bins, 0);
  std::size_t total = 0;
  for (std::size_t j = 0; j < s.times.size(); ++j) {
    if (!s.hit[j]) continue;
    double t = s.times[j];
    if (t <= t_lo || t > t_hi) continue;
    int b = std::min<int>(bins - 1,
                          static_cast<int>((t - t_lo) / (t_hi - t_lo) * bins));
    ++counts[b];
    ++total;
  }
  std::vector<HistogramRow> rows(bins);
  double width = (t_hi - t_lo) / bins;
  for (int b = 0; b < bins; ++b) {
    rows[b] = {t_lo + b * width, t_lo + (b + 1) * width,
               total ? static_cast<double>(counts[b]) / total : 0.0};
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Barrier prices by simulation
// ---------------------------------------------------------------------------

struct McPrice {
  double price = 0.0;
  double std_error = 0.0;
};

/// Discounted barrier prices for several contracts sharing one maturity,
/// evaluated on a single path ensemble. The model must already carry the
/// risk-neutral drift. Requires n_steps * dt == T for every spec.
inline std::vector<McPrice> mc_barrier_prices(
    const LevyModel& model, const MarketSpec& mkt,
    std::span<const BarrierSpec> specs, const McConfig& cfg,
    int threads = 0) {
  cfg.validate();
  if (specs.empty()) return {};
  double T = specs.front().maturity;
  for (const auto& s : specs) {
    barrier_log_level(s, mkt.spot);  // validates geometry
    if (std::abs(s.maturity - T) > 1e-12)
      throw ParameterError("mc_barrier_prices: specs must share one maturity");
  }
  if (std::abs(cfg.n_steps * cfg.dt - T) > 1e-9)
    throw ParameterError("mc_barrier_prices: n_steps * dt must equal T");
  double drift_gap =
      std::abs(cumulant(model, 1.0) - (mkt.rate - mkt.dividend));
  if (drift_gap > 1e-8)
    throw MomentError(
        "mc_barrier_prices: model drift is not risk-neutral for this market");

  bool is_bm = model.family() == Family::bm;
  const IncrementTable* tab =
      is_bm ? nullptr : &detail::increment_table(model, cfg.dt, threads);
  double bm_m = 0.0, bm_s = 0.0;
  if (is_bm) {
    const auto& p = model.as_bm();
    bm_m = p.mu * cfg.dt;
    bm_s = p.sigma * std::sqrt(cfg.dt);
  }

  std::size_t k = specs.size();
  std::vector<double> lvl(k);
  for (std::size_t i = 0; i < k; ++i)
    lvl[i] = barrier_log_level(specs[i], mkt.spot);

  struct Acc {
    std::vector<double> sum, sumsq;
  };
  std::size_t n = static_cast<std::size_t>(cfg.n_paths);
  Acc zero{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
  Acc total = parallel_reduce(
      n, 4096, zero,
      [&](std::size_t lo, std::size_t hi) {
        Acc a{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
        for (std::size_t j = lo; j < hi; ++j) {
          PathRng rng(cfg.seed, j);
          double x = 0.0, xmin = 0.0, xmax = 0.0;
          for (int s = 0; s < cfg.n_steps; ++s) {
            double u = rng.uniform01();
            x += is_bm ? (bm_m + bm_s * normal_quantile(u)) : tab->sample(u);
            if (x < xmin) xmin = x;
            if (x > xmax) xmax = x;
          }
          double sT = mkt.spot * std::exp(x);
          for (std::size_t i = 0; i < k; ++i) {
            bool crossed = specs[i].direction == Direction::up
                               ? (xmax >= lvl[i])
                               : (xmin <= lvl[i]);
            bool alive = (specs[i].inout == InOut::knock_in) == crossed;
            double pay =
                alive ? vanilla_payoff(specs[i].kind, sT, specs[i].strike)
                      : 0.0;
            a.sum[i] += pay;
            a.sumsq[i] += pay * pay;
          }
        }
        return a;
      },
      [&](Acc a, const Acc& b) {
        for (std::size_t i = 0; i < k; ++i) {
          a.sum[i] += b.sum[i];
          a.sumsq[i] += b.sumsq[i];
        }
        return a;
      },
      threads);

  double disc = std::exp(-mkt.rate * T);
  std::vector<McPrice> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    double mean = total.sum[i] / n;
    double var = std::max(0.0, total.sumsq[i] / n - mean * mean);
    out[i] = {disc * mean, disc * std::sqrt(var / n)};
  }
  return out;
}

inline McPrice mc_barrier_price(const LevyModel& model, const MarketSpec& mkt,
                                const BarrierSpec& spec, const McConfig& cfg,
                                int threads = 0) {
  return mc_barrier_prices(model, mkt, std::span(&spec, 1), cfg, threads)[0];
}

}  // namespace levyfpt
