#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <variant>

#include "levyfpt/errors.hpp"

namespace levyfpt {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Family { bm, nig, nts, cgmy };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::bm: return "bm";
    case Family::nig: return "nig";
    case Family::nts: return "nts";
    case Family::cgmy: return "cgmy";
  }
  return "?";
}

struct BmParams {
  double mu = 0.0;     // drift per year
  double sigma = 1.0;  // volatility per sqrt(year)
};

struct NigParams {
  double theta = 1.0;
  double beta = 0.0;
  double gamma = 1.0;
  double mu = 0.0;
};

struct NtsParams {
  double alpha = 1.0;  // in (0,2)
  double theta = 1.0;
  double beta = 0.0;
  double gamma = 1.0;
  double mu = 0.0;
};

struct CgmyParams {
  double alpha = 0.5;  // in (0,2), alpha != 1
  double c = 1.0;
  double lambda_plus = 1.0;
  double lambda_minus = 1.0;
  double mu = 0.0;
};

/// Interval [a_min, a_max] on which E[exp(a X(t))] is finite.
/// Brownian motion reports infinite bounds.
struct ExpMomentInterval {
  double a_min = -kInf;
  double a_max = kInf;
};

/// Tagged parameter set for one of the four supported process families.
/// Construction validates the parameter ranges; instances are immutable value
/// types and cheap to copy.
class LevyModel {
 public:
  static LevyModel brownian(double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma))
      throw ParameterError("bm: require sigma > 0 and finite mu");
    return LevyModel(BmParams{mu, sigma});
  }

  static LevyModel nig(double theta, double beta, double gamma, double mu) {
    check_ts(theta, gamma, mu, beta);
    return LevyModel(NigParams{theta, beta, gamma, mu});
  }

  static LevyModel nts(double alpha, double theta, double beta, double gamma,
                       double mu) {
    if (!(alpha > 0.0 && alpha < 2.0))
      throw ParameterError("nts: require alpha in (0,2)");
    check_ts(theta, gamma, mu, beta);
    return LevyModel(NtsParams{alpha, theta, beta, gamma, mu});
  }

  static LevyModel cgmy(double alpha, double c, double lambda_plus,
                        double lambda_minus, double mu) {
    if (!(alpha > 0.0 && alpha < 2.0))
      throw ParameterError("cgmy: require alpha in (0,2)");
    if (alpha == 1.0)
      throw ParameterError(
          "cgmy: alpha = 1 is excluded (Gamma(-1) pole in the characteristic "
          "exponent); use a nearby alpha or the NIG family");
    if (!(c > 0.0 && lambda_plus > 0.0 && lambda_minus > 0.0) ||
        !std::isfinite(mu))
      throw ParameterError("cgmy: require C, lambda_+, lambda_- > 0");
    return LevyModel(CgmyParams{alpha, c, lambda_plus, lambda_minus, mu});
  }

  Family family() const {
    return static_cast<Family>(params_.index());
  }

  const BmParams& as_bm() const { return get<BmParams>("bm"); }
  const NigParams& as_nig() const { return get<NigParams>("nig"); }
  const NtsParams& as_nts() const { return get<NtsParams>("nts"); }
  const CgmyParams& as_cgmy() const { return get<CgmyParams>("cgmy"); }

  template <typename Visitor>
  decltype(auto) visit(Visitor&& v) const {
    return std::visit(std::forward<Visitor>(v), params_);
  }

  /// Location parameter mu; equals E[X(1)] for every family.
  double mu() const {
    return visit([](const auto& p) { return p.mu; });
  }

  /// Same model with the location parameter replaced.
  LevyModel with_mu(double mu) const {
    LevyModel m = *this;
    std::visit([mu](auto& p) { p.mu = mu; }, m.params_);
    return m;
  }

 private:
  template <typename P>
  explicit LevyModel(P p) : params_(p) {}

  static void check_ts(double theta, double gamma, double mu, double beta) {
    if (!(theta > 0.0 && gamma > 0.0) || !std::isfinite(mu) ||
        !std::isfinite(beta))
      throw ParameterError("require theta > 0, gamma > 0 and finite beta, mu");
  }

  template <typename P>
  const P& get(const char* name) const {
    if (const P* p = std::get_if<P>(&params_)) return *p;
    throw ParameterError(std::string("model is not of family ") + name);
  }

  std::variant<BmParams, NigParams, NtsParams, CgmyParams> params_;
};

// ---------------------------------------------------------------------------
// Standard (zero-mean, unit-variance) parameterizations
// ---------------------------------------------------------------------------

/// stdNTS(alpha, theta, beta): mu = 0 and gamma chosen so that E[X(t)] = 0,
/// var X(t) = t. Requires |beta| < sqrt(2 theta / (2 - alpha)).
inline LevyModel standardize_nts(double alpha, double theta, double beta) {
  if (!(alpha > 0.0 && alpha < 2.0) || !(theta > 0.0))
    throw ParameterError("stdNTS: require alpha in (0,2), theta > 0");
  double bmax = std::sqrt(2.0 * theta / (2.0 - alpha));
  if (!(std::abs(beta) < bmax))
    throw ParameterError("stdNTS: require |beta| < sqrt(2 theta/(2-alpha))");
  double gamma = std::sqrt(1.0 - beta * beta * (2.0 - alpha) / (2.0 * theta));
  return LevyModel::nts(alpha, theta, beta, gamma, 0.0);
}

/// stdNIG(theta, beta): the alpha = 1 case of stdNTS.
inline LevyModel standardize_nig(double theta, double beta) {
  if (!(theta > 0.0)) throw ParameterError("stdNIG: require theta > 0");
  if (!(std::abs(beta) < std::sqrt(2.0 * theta)))
    throw ParameterError("stdNIG: require |beta| < sqrt(2 theta)");
  double gamma = std::sqrt(1.0 - beta * beta / (2.0 * theta));
  return LevyModel::nig(theta, beta, gamma, 0.0);
}

/// stdCGMY(alpha, lambda_+, lambda_-): mu = 0 and
/// C = 1 / (Gamma(2-alpha) (lambda_+^{alpha-2} + lambda_-^{alpha-2})).
inline LevyModel standardize_cgmy(double alpha, double lambda_plus,
                                  double lambda_minus) {
  if (!(alpha > 0.0 && alpha < 2.0) || alpha == 1.0)
    throw ParameterError("stdCGMY: require alpha in (0,2), alpha != 1");
  if (!(lambda_plus > 0.0 && lambda_minus > 0.0))
    throw ParameterError("stdCGMY: require lambda_+ > 0, lambda_- > 0");
  double c = 1.0 / (std::tgamma(2.0 - alpha) *
                    (std::pow(lambda_plus, alpha - 2.0) +
                     std::pow(lambda_minus, alpha - 2.0)));
  return LevyModel::cgmy(alpha, c, lambda_plus, lambda_minus, 0.0);
}

// ---------------------------------------------------------------------------
// Levy symbol psi_X and characteristic function
// ---------------------------------------------------------------------------

namespace detail {

// Inner argument of the NTS/NIG fractional power.
inline cplx ts_inner(double theta, double beta, double gamma, cplx z) {
  return theta - kI * beta * z + 0.5 * gamma * gamma * z * z;
}

inline void require_right_half_plane(cplx w, const char* what) {
  if (!(w.real() > 0.0))
    throw DomainError(std::string(what) +
                      ": argument left the analytic strip (Re <= 0)");
}

}  // namespace detail

/// Levy symbol psi_X(z) = log phi_{X(1)}(z), principal branch, defined for z
/// whose imaginary part keeps the argument inside the exponential-moment
/// strip. psi_X(0) = 0 for every family.
inline cplx levy_symbol(const LevyModel& model, cplx z) {
  switch (model.family()) {
    case Family::bm: {
      const auto& p = model.as_bm();
      return kI * p.mu * z - 0.5 * p.sigma * p.sigma * z * z;
    }
    case Family::nig: {
      const auto& p = model.as_nig();
      cplx w = detail::ts_inner(p.theta, p.beta, p.gamma, z);
      detail::require_right_half_plane(w, "nig symbol");
      double sq = std::sqrt(p.theta);
      return kI * (p.mu - p.beta) * z + 2.0 * p.theta -
             2.0 * sq * std::sqrt(w);
    }
    case Family::nts: {
      const auto& p = model.as_nts();
      cplx w = detail::ts_inner(p.theta, p.beta, p.gamma, z);
      detail::require_right_half_plane(w, "nts symbol");
      double c = 2.0 * std::pow(p.theta, 1.0 - 0.5 * p.alpha) / p.alpha;
      return kI * (p.mu - p.beta) * z -
             c * (std::pow(w, 0.5 * p.alpha) - std::pow(p.theta, 0.5 * p.alpha));
    }
    case Family::cgmy: {
      const auto& p = model.as_cgmy();
      cplx wp = p.lambda_plus - kI * z;
      cplx wm = p.lambda_minus + kI * z;
      detail::require_right_half_plane(wp, "cgmy symbol (lambda_+ - iz)");
      detail::require_right_half_plane(wm, "cgmy symbol (lambda_- + iz)");
      double g1 = std::tgamma(1.0 - p.alpha);
      double gm = std::tgamma(-p.alpha);
      double drift =
          p.mu - p.c * g1 * (std::pow(p.lambda_plus, p.alpha - 1.0) -
                             std::pow(p.lambda_minus, p.alpha - 1.0));
      return kI * drift * z +
             p.c * gm *
                 (std::pow(wp, p.alpha) - std::pow(p.lambda_plus, p.alpha) +
                  std::pow(wm, p.alpha) - std::pow(p.lambda_minus, p.alpha));
    }
  }
  throw ParameterError("unknown family");
}

/// d psi_X / dz on the same strip (used by Newton solvers).
inline cplx levy_symbol_derivative(const LevyModel& model, cplx z) {
  switch (model.family()) {
    case Family::bm: {
      const auto& p = model.as_bm();
      return kI * p.mu - p.sigma * p.sigma * z;
    }
    case Family::nig:
    case Family::nts: {
      double alpha, theta, beta, gamma, mu;
      if (model.family() == Family::nig) {
        const auto& p = model.as_nig();
        alpha = 1.0, theta = p.theta, beta = p.beta, gamma = p.gamma, mu = p.mu;
      } else {
        const auto& p = model.as_nts();
        alpha = p.alpha, theta = p.theta, beta = p.beta, gamma = p.gamma,
        mu = p.mu;
      }
      cplx w = detail::ts_inner(theta, beta, gamma, z);
      detail::require_right_half_plane(w, "ts symbol derivative");
      return kI * (mu - beta) - std::pow(theta, 1.0 - 0.5 * alpha) *
                                    std::pow(w, 0.5 * alpha - 1.0) *
                                    (gamma * gamma * z - kI * beta);
    }
    case Family::cgmy: {
      const auto& p = model.as_cgmy();
      cplx wp = p.lambda_plus - kI * z;
      cplx wm = p.lambda_minus + kI * z;
      detail::require_right_half_plane(wp, "cgmy symbol derivative");
      detail::require_right_half_plane(wm, "cgmy symbol derivative");
      double g1 = std::tgamma(1.0 - p.alpha);
      double gm = std::tgamma(-p.alpha);
      double drift =
          p.mu - p.c * g1 * (std::pow(p.lambda_plus, p.alpha - 1.0) -
                             std::pow(p.lambda_minus, p.alpha - 1.0));
      return kI * (drift + p.c * gm * p.alpha *
                               (std::pow(wm, p.alpha - 1.0) -
                                std::pow(wp, p.alpha - 1.0)));
    }
  }
  throw ParameterError("unknown family");
}

/// phi_{X(t)}(z) = exp(t psi_X(z)).
inline cplx chf(const LevyModel& model, double t, cplx z) {
  if (!(t >= 0.0)) throw ParameterError("chf: require t >= 0");
  if (t == 0.0) return cplx{1.0, 0.0};
  return std::exp(t * levy_symbol(model, z));
}

/// Closed interval of finite exponential moments per family.
inline ExpMomentInterval exp_moment_interval(const LevyModel& model) {
  switch (model.family()) {
    case Family::bm:
      return {-kInf, kInf};
    case Family::nig:
    case Family::nts: {
      double theta, beta, gamma;
      if (model.family() == Family::nig) {
        const auto& p = model.as_nig();
        theta = p.theta, beta = p.beta, gamma = p.gamma;
      } else {
        const auto& p = model.as_nts();
        theta = p.theta, beta = p.beta, gamma = p.gamma;
      }
      double s = std::sqrt(beta * beta + 2.0 * gamma * gamma * theta);
      double g2 = gamma * gamma;
      return {(-beta - s) / g2, (-beta + s) / g2};
    }
    case Family::cgmy: {
      const auto& p = model.as_cgmy();
      return {-p.lambda_minus, p.lambda_plus};
    }
  }
  throw ParameterError("unknown family");
}

// ---------------------------------------------------------------------------
// Real cumulant (Laplace) exponent k(a) = psi_X(-ia) = log E[exp(a X(1))]
// ---------------------------------------------------------------------------

/// True when a lies strictly inside the exponential-moment interval.
inline bool in_moment_interior(const LevyModel& model, double a) {
  auto iv = exp_moment_interval(model);
  return a > iv.a_min && a < iv.a_max;
}

/// k(a) = log E[exp(a X(1))] evaluated in real arithmetic. Requires a in the
/// closed moment interval.
inline double cumulant(const LevyModel& model, double a) {
  switch (model.family()) {
    case Family::bm: {
      const auto& p = model.as_bm();
      return p.mu * a + 0.5 * p.sigma * p.sigma * a * a;
    }
    case Family::nig:
    case Family::nts: {
      double alpha, theta, beta, gamma, mu;
      if (model.family() == Family::nig) {
        const auto& p = model.as_nig();
        alpha = 1.0, theta = p.theta, beta = p.beta, gamma = p.gamma, mu = p.mu;
      } else {
        const auto& p = model.as_nts();
        alpha = p.alpha, theta = p.theta, beta = p.beta, gamma = p.gamma,
        mu = p.mu;
      }
      double w = theta - beta * a - 0.5 * gamma * gamma * a * a;
      if (w < 0.0)
        throw MomentError("cumulant: a outside the exponential-moment interval");
      double c = 2.0 * std::pow(theta, 1.0 - 0.5 * alpha) / alpha;
      return (mu - beta) * a -
             c * (std::pow(w, 0.5 * alpha) - std::pow(theta, 0.5 * alpha));
    }
    case Family::cgmy: {
      const auto& p = model.as_cgmy();
      double wp = p.lambda_plus - a;
      double wm = p.lambda_minus + a;
      if (wp < 0.0 || wm < 0.0)
        throw MomentError("cumulant: a outside [-lambda_-, lambda_+]");
      double g1 = std::tgamma(1.0 - p.alpha);
      double gm = std::tgamma(-p.alpha);
      double drift =
          p.mu - p.c * g1 * (std::pow(p.lambda_plus, p.alpha - 1.0) -
                             std::pow(p.lambda_minus, p.alpha - 1.0));
      return drift * a +
             p.c * gm *
                 (std::pow(wp, p.alpha) - std::pow(p.lambda_plus, p.alpha) +
                  std::pow(wm, p.alpha) - std::pow(p.lambda_minus, p.alpha));
    }
  }
  throw ParameterError("unknown family");
}

/// dk/da; infinite at the strip boundary for the tempered families.
inline double cumulant_derivative(const LevyModel& model, double a) {
  switch (model.family()) {
    case Family::bm: {
      const auto& p = model.as_bm();
      return p.mu + p.sigma * p.sigma * a;
    }
    case Family::nig:
    case Family::nts: {
      double alpha, theta, beta, gamma, mu;
      if (model.family() == Family::nig) {
        const auto& p = model.as_nig();
        alpha = 1.0, theta = p.theta, beta = p.beta, gamma = p.gamma, mu = p.mu;
      } else {
        const auto& p = model.as_nts();
        alpha = p.alpha, theta = p.theta, beta = p.beta, gamma = p.gamma,
        mu = p.mu;
      }
      double w = theta - beta * a - 0.5 * gamma * gamma * a * a;
      if (w <= 0.0) return (beta + gamma * gamma * a) >= 0.0 ? kInf : -kInf;
      return (mu - beta) + std::pow(theta, 1.0 - 0.5 * alpha) *
                               std::pow(w, 0.5 * alpha - 1.0) *
                               (beta + gamma * gamma * a);
    }
    case Family::cgmy: {
      const auto& p = model.as_cgmy();
      double wp = p.lambda_plus - a;
      double wm = p.lambda_minus + a;
      if (wp < 0.0 || wm < 0.0)
        throw MomentError(
            "cumulant_derivative: a outside [-lambda_-, lambda_+]");
      double g1 = std::tgamma(1.0 - p.alpha);
      double gm = std::tgamma(-p.alpha);
      double drift =
          p.mu - p.c * g1 * (std::pow(p.lambda_plus, p.alpha - 1.0) -
                             std::pow(p.lambda_minus, p.alpha - 1.0));
      return drift + p.c * gm * p.alpha *
                         (std::pow(wm, p.alpha - 1.0) -
                          std::pow(wp, p.alpha - 1.0));
    }
  }
  throw ParameterError("unknown family");
}

/// Variance of X(1), from the closed-form second cumulant.
inline double variance_rate(const LevyModel& model) {
  switch (model.family()) {
    case Family::bm: {
      const auto& p = model.as_bm();
      return p.sigma * p.sigma;
    }
    case Family::nig: {
      const auto& p = model.as_nig();
      return p.gamma * p.gamma + p.beta * p.beta / (2.0 * p.theta);
    }
    case Family::nts: {
      const auto& p = model.as_nts();
      return p.gamma * p.gamma +
             p.beta * p.beta * (2.0 - p.alpha) / (2.0 * p.theta);
    }
    case Family::cgmy: {
      const auto& p = model.as_cgmy();
      return p.c * std::tgamma(2.0 - p.alpha) *
             (std::pow(p.lambda_plus, p.alpha - 2.0) +
              std::pow(p.lambda_minus, p.alpha - 2.0));
    }
  }
  throw ParameterError("unknown family");
}

// ---------------------------------------------------------------------------
// Risk-neutral drift
// ---------------------------------------------------------------------------

/// Spot, continuously compounded risk-free rate and dividend yield.
struct MarketSpec {
  double spot = 100.0;
  double rate = 0.0;
  double dividend = 0.0;
};

/// The location parameter mu making exp(-(r-d)t) S(0) exp(X(t)) a martingale,
/// i.e. psi_X(-i) = r - d. The cumulant is linear in mu, so
/// mu = (r - d) - k(1)|_{mu=0}. Requires a = 1 strictly inside the moment
/// interval.
inline double risk_neutral_drift(const LevyModel& model, double r, double d) {
  if (model.family() != Family::bm && !in_moment_interior(model, 1.0))
    throw MomentError(
        "risk_neutral_drift: E[exp(X(1))] undefined (a = 1 outside the "
        "exponential-moment interval)");
  return (r - d) - cumulant(model.with_mu(0.0), 1.0);
}

/// Convenience: same model with mu replaced by the risk-neutral drift.
inline LevyModel with_risk_neutral_drift(const LevyModel& model, double r,
                                         double d) {
  return model.with_mu(risk_neutral_drift(model, r, d));
}

inline LevyModel with_risk_neutral_drift(const LevyModel& model,
                                         const MarketSpec& mkt) {
  return with_risk_neutral_drift(model, mkt.rate, mkt.dividend);
}

}  // namespace levyfpt
