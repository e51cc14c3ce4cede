#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "levyfpt/model.hpp"
#include "levyfpt/parallel.hpp"
#include "levyfpt/quadrature.hpp"

// First-passage-time machinery. The characteristic function of the first
// passage time tau(l) of X over the level l is approximated by
//   phi_tau(u) = exp(-l eta(u)),
// where eta(u) solves the martingale condition
//   i u + psi_X(-i eta(u)) = 0
// on the branch with Re(-l eta(u)) <= 0 that is continuous in u with
// eta(0) fixed by the drift rule below.
//
// The root path starts inside the exponential-moment strip but generally
// leaves it as |u| grows, and the inner arguments of the fractional powers
// ((theta - beta eta - gamma^2 eta^2 / 2) for NTS/NIG, (lambda_+/- -/+ eta)
// for CGMY) can wind across the negative real axis. The solvers therefore
// evaluate those powers with an argument that is unwrapped continuously along
// the path instead of the principal branch; for NIG the closed-form quadratic
// root encodes the same two-sheet continuation (its discriminant stays in the
// right half-plane, so the principal square root of the discriminant is
// globally continuous).

namespace levyfpt {

enum class Direction { up, down };

inline Direction direction_of_level(double l) {
  if (l == 0.0) throw ParameterError("level l must be nonzero");
  return l > 0.0 ? Direction::up : Direction::down;
}

inline double direction_sign(Direction d) {
  return d == Direction::up ? 1.0 : -1.0;
}

/// A model together with a nonzero log-level; the sign of the level selects
/// the barrier side as in the hitting-time definition.
struct FptProblem {
  LevyModel model;
  double level = 1.0;

  FptProblem(LevyModel m, double l) : model(std::move(m)), level(l) {
    if (l == 0.0 || !std::isfinite(l))
      throw ParameterError("FptProblem: level must be finite and nonzero");
  }
  Direction direction() const { return direction_of_level(level); }
};

/// Residual tolerance contract of the eta solvers.
struct EtaBranch {
  Direction direction = Direction::up;
  bool closed_form = false;
  double tolerance = 1e-10;
};

namespace detail {

inline constexpr double kEtaResidualTol = 1e-10;
inline constexpr double kBranchSlack = 1e-12;

inline void check_admissible(Direction dir, cplx eta, double tol = kBranchSlack) {
  if (direction_sign(dir) * eta.real() < -tol)
    throw BranchError("eta drifted to the inadmissible branch (Re(-l eta) > 0)");
}

// Unwraps `principal` (in (-pi, pi]) to the 2*pi-translate nearest `ref`.
inline double unwrap_arg(double principal, double ref) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  return principal + two_pi * std::round((ref - principal) / two_pi);
}

// Power w^p evaluated on the sheet selected by the unwrapped argument.
inline cplx branch_pow(cplx w, double p, double arg_cont) {
  double r = std::abs(w);
  if (r == 0.0) throw BranchError("eta path hit a branch point");
  return std::polar(std::pow(r, p), p * arg_cont);
}

// Family-specific martingale condition F(eta) = i u + psi_X(-i eta), with its
// derivative, evaluated with branch-continued fractional powers. `args` holds
// the unwrapped inner argument(s) at the reference point; on success it is
// overwritten with the candidate's unwrapped argument(s).
struct BranchedCondition {
  // ts: NIG (alpha = 1) and NTS share one inner argument; CGMY has two.
  bool is_cgmy = false;
  // ts fields
  double alpha = 1, theta = 0, beta = 0, gamma = 0, c_alpha = 0, theta_pow = 0;
  // cgmy fields
  double lp = 0, lm = 0, cgm = 0, bdrift = 0, lp_pow = 0, lm_pow = 0;
  double mu = 0;

  static BranchedCondition make(const LevyModel& model) {
    BranchedCondition c;
    switch (model.family()) {
      case Family::nig: {
        const auto& p = model.as_nig();
        c.alpha = 1.0, c.theta = p.theta, c.beta = p.beta, c.gamma = p.gamma;
        c.mu = p.mu;
        break;
      }
      case Family::nts: {
        const auto& p = model.as_nts();
        c.alpha = p.alpha, c.theta = p.theta, c.beta = p.beta,
        c.gamma = p.gamma;
        c.mu = p.mu;
        break;
      }
      case Family::cgmy: {
        const auto& p = model.as_cgmy();
        c.is_cgmy = true;
        c.lp = p.lambda_plus, c.lm = p.lambda_minus, c.mu = p.mu;
        c.alpha = p.alpha;
        c.cgm = p.c * std::tgamma(-p.alpha);
        c.bdrift = p.mu - p.c * std::tgamma(1.0 - p.alpha) *
                              (std::pow(c.lp, p.alpha - 1.0) -
                               std::pow(c.lm, p.alpha - 1.0));
        c.lp_pow = std::pow(c.lp, p.alpha);
        c.lm_pow = std::pow(c.lm, p.alpha);
        break;
      }
      case Family::bm:
        throw ParameterError("BranchedCondition: BM has a closed form");
    }
    if (!c.is_cgmy) {
      c.c_alpha = 2.0 * std::pow(c.theta, 1.0 - 0.5 * c.alpha) / c.alpha;
      c.theta_pow = std::pow(c.theta, 0.5 * c.alpha);
    }
    return c;
  }

  // args[0]: arg of the ts inner argument, or of (lambda_+ - eta) for CGMY;
  // args[1]: arg of (lambda_- + eta) for CGMY.
  // Returns false when the candidate winds more than ~3/4 turn away from the
  // reference, which means the continuation step was too large to trust.
  bool eval(cplx iu, cplx eta, double args[2], cplx& F, cplx& dF) const {
    constexpr double max_jump = 2.4;  // < pi
    if (!is_cgmy) {
      cplx w = theta - beta * eta - 0.5 * gamma * gamma * eta * eta;
      if (std::abs(w) == 0.0) return false;
      double a = unwrap_arg(std::arg(w), args[0]);
      if (std::abs(a - args[0]) > max_jump) return false;
      cplx wpow = branch_pow(w, 0.5 * alpha, a);
      F = iu + (mu - beta) * eta - c_alpha * (wpow - theta_pow);
      // d/d eta of w^{alpha/2} = (alpha/2) w^{alpha/2 - 1} w'(eta)
      cplx dw = -beta - gamma * gamma * eta;
      dF = (mu - beta) - c_alpha * 0.5 * alpha * (wpow / w) * dw;
      args[0] = a;
      return true;
    }
    cplx wp = lp - eta;
    cplx wm = lm + eta;
    if (std::abs(wp) == 0.0 || std::abs(wm) == 0.0) return false;
    double ap = unwrap_arg(std::arg(wp), args[0]);
    double am = unwrap_arg(std::arg(wm), args[1]);
    if (std::abs(ap - args[0]) > max_jump || std::abs(am - args[1]) > max_jump)
      return false;
    cplx wppow = branch_pow(wp, alpha, ap);
    cplx wmpow = branch_pow(wm, alpha, am);
    F = iu + bdrift * eta + cgm * (wppow - lp_pow + wmpow - lm_pow);
    dF = bdrift + cgm * alpha * (wmpow / wm - wppow / wp);
    args[0] = ap;
    args[1] = am;
    return true;
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

/// Brownian root eta(u) = (-mu +- sqrt(mu^2 - 2 sigma^2 u i)) / sigma^2 with
/// the + sign for an upper level and the - sign for a lower one. Valid for
/// complex u (the Laplace case u = i r gives the classical real roots).
inline cplx eta_bm(double mu, double sigma, Direction dir, cplx u) {
  if (!(sigma > 0.0)) throw ParameterError("eta_bm: sigma must be > 0");
  double s2 = sigma * sigma;
  cplx disc = std::sqrt(cplx{mu * mu, 0.0} - 2.0 * s2 * u * kI);
  return (dir == Direction::up) ? (-mu + disc) / s2 : (-mu - disc) / s2;
}

/// NIG root from the quadratic form of the martingale condition,
///   A eta^2 + 2 B eta + (4 theta i u - u^2) = 0,
/// A = (mu-beta)^2 + 2 theta gamma^2, B = 2 mu theta + (mu-beta) i u.
/// The + root serves l > 0, the - root l < 0. Re(discriminant) > 0 for every
/// real u, so the principal square root keeps the path continuous.
inline cplx eta_nig(const NigParams& p, Direction dir, cplx u) {
  double mb = p.mu - p.beta;
  double A = mb * mb + 2.0 * p.theta * p.gamma * p.gamma;
  cplx B = 2.0 * p.mu * p.theta + mb * kI * u;
  cplx disc = std::sqrt(B * B + A * (u * u - 4.0 * p.theta * kI * u));
  return (dir == Direction::up) ? (-B + disc) / A : (-B - disc) / A;
}

inline cplx eta_nig(const LevyModel& model, Direction dir, cplx u) {
  return eta_nig(model.as_nig(), dir, u);
}

// ---------------------------------------------------------------------------
// Real root of the Laplace condition k(eta) = r
// ---------------------------------------------------------------------------

namespace detail {

// Root of cumulant(model, eta) = r on the side selected by dir, excluding the
// trivial root eta = 0 unless it is the admissible one. Brackets inside the
// moment strip, then bisects with Newton acceleration.
inline double real_eta_root(const LevyModel& model, Direction dir, double r) {
  double sgn = direction_sign(dir);
  double mean = model.mu();
  bool toward = sgn * mean >= 0.0;
  if (r == 0.0 && toward) return 0.0;

  auto iv = exp_moment_interval(model);
  double bound = (dir == Direction::up) ? iv.a_max : iv.a_min;
  if (!std::isfinite(bound)) bound = sgn * 1e6;  // BM-like: expand instead
  auto f = [&](double a) { return cumulant(model, a) - r; };

  // March geometric-ish samples from 0 toward the strip edge until the sign
  // flips. f just off zero is negative: f(0) = -r <= 0, and for r = 0 the
  // away-drift case starts with k'(0) opposing the barrier.
  const int kSamples = 256;
  double lo = 0.0, hi = 0.0;
  double flo = -r;
  if (r == 0.0) flo = -1.0;  // sign of k just off 0 is sign(mean*sgn) < 0
  bool bracketed = false;
  for (int j = 1; j <= kSamples; ++j) {
    double frac = static_cast<double>(j) / kSamples;
    double a = bound * frac * frac;  // clusters samples near 0
    double fa = f(a);
    if (fa >= 0.0) {
      hi = a;
      bracketed = true;
      break;
    }
    lo = a;
    flo = fa;
  }
  if (!bracketed)
    throw ConvergenceError(
        "fpt_laplace: k(eta) = r has no root inside the moment strip "
        "(barrier side " +
        std::string(dir == Direction::up ? "up" : "down") + ")");

  // Bisection with Newton steps when they stay inside the bracket.
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double fx = f(x);
    if (std::abs(fx) < 1e-14 * std::max(1.0, std::abs(r))) break;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    double dfx = cumulant_derivative(model, x);
    double xn = x - fx / dfx;
    bool inside = std::isfinite(xn) && xn > std::min(lo, hi) &&
                  xn < std::max(lo, hi);
    x = inside ? xn : 0.5 * (lo + hi);
    if (std::abs(hi - lo) < 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Branch rule at u = 0 and the continuation solver
// ---------------------------------------------------------------------------

/// eta(0): zero when the drift-adjusted process reaches the barrier almost
/// surely (sign(l) * E[X(1)] >= 0), otherwise the nonzero real root of
/// k(eta) = 0 on the barrier side; exp(-l eta(0)) is then the total hitting
/// probability.
inline double eta_at_zero(const LevyModel& model, Direction dir) {
  double sgn = direction_sign(dir);
  if (model.family() == Family::bm) {
    const auto& p = model.as_bm();
    if (sgn * p.mu >= 0.0) return 0.0;
    return -2.0 * p.mu / (p.sigma * p.sigma);
  }
  if (sgn * model.mu() >= 0.0) return 0.0;
  return detail::real_eta_root(model, dir, 0.0);
}

/// Tracks the root of the martingale condition along increasing real u by
/// damped Newton continuation with analytic predictors; the fractional-power
/// arguments are unwrapped along the path so the correct sheet is kept after
/// the root leaves the principal branch.
class EtaPath {
 public:
  EtaPath(const LevyModel& model, Direction dir,
          double tol = detail::kEtaResidualTol)
      : model_(model),
        dir_(dir),
        tol_(tol),
        closed_form_(model.family() == Family::bm ||
                     model.family() == Family::nig) {
    eta_ = cplx{eta_at_zero(model, dir), 0.0};
    if (!closed_form_) {
      cond_ = detail::BranchedCondition::make(model);
      init_args(eta_);
      mean_ = model.mu();
      var_ = variance_rate(model);
    }
    u_ = 0.0;
  }

  double u() const { return u_; }
  cplx eta() const { return eta_; }
  double residual() const { return residual_; }

  /// Advances the path to u_next >= current u and returns eta(u_next).
  cplx advance_to(double u_next) {
    if (u_next < u_)
      throw ParameterError("EtaPath: u grid must be nondecreasing");
    if (closed_form_) {
      eta_ = (model_.family() == Family::bm)
                 ? eta_bm(model_.as_bm().mu, model_.as_bm().sigma, dir_, u_next)
                 : eta_nig(model_, dir_, u_next);
      u_ = u_next;
      residual_ = 0.0;
      detail::check_admissible(
          dir_, eta_, std::max(1e-12, 1e-15 * std::abs(eta_)));
      return eta_;
    }
    double du = u_next - u_;
    int guard = 0;
    while (u_ < u_next) {
      double step = std::min(du, u_next - u_);
      if (!try_step(u_ + step)) {
        du = 0.5 * step;
        if (du < 1e-13 * std::max(1.0, u_next) || ++guard > 200)
          throw ConvergenceError(
              "eta continuation stalled near u = " + std::to_string(u_));
      } else {
        if (last_iters_ <= 4) du = std::min(2.0 * du, 2.0 * (step + 1e-300));
      }
    }
    detail::check_admissible(dir_, eta_,
                             std::max(1e-12, 1e-15 * std::abs(eta_)));
    return eta_;
  }

  /// phi_tau(u) for the level l consistent with this path's direction.
  cplx chf(double level) const { return std::exp(-level * eta_); }

 private:
  void init_args(cplx eta0) {
    if (cond_.is_cgmy) {
      args_[0] = std::arg(cplx{cond_.lp, 0.0} - eta0);
      args_[1] = std::arg(cplx{cond_.lm, 0.0} + eta0);
    } else {
      args_[0] = std::arg(cond_.theta - cond_.beta * eta0 -
                          0.5 * cond_.gamma * cond_.gamma * eta0 * eta0);
      args_[1] = 0.0;
    }
  }

  // Predictor: implicit-derivative step, or the local quadratic root when the
  // slope is ill-conditioned (mean ~ 0 near u = 0, the sqrt(u) regime).
  cplx predict(double u_new) const {
    cplx iu{0.0, u_new};
    double sgn = direction_sign(dir_);
    if (u_ == 0.0 && std::abs(eta_) < 1e-14) {
      // roots of (var/2) eta^2 + mean eta + i u = 0
      cplx disc = std::sqrt(cplx{mean_ * mean_, 0.0} - 2.0 * var_ * iu);
      cplx r1 = (-mean_ + disc) / var_;
      return (sgn * r1.real() >= 0.0) ? r1 : (-mean_ - disc) / var_;
    }
    double args[2] = {args_[0], args_[1]};
    cplx F, dF;
    if (cond_.eval(cplx{0.0, u_}, eta_, args, F, dF) && std::abs(dF) > 1e-14)
      return eta_ + (u_new - u_) * (-kI / dF);
    return eta_;
  }

  bool try_step(double u_new) {
    cplx iu{0.0, u_new};
    cplx eta = predict(u_new);
    double args[2];
    cplx F, dF;
    // Reject the predictor if it already winds too far from the reference.
    args[0] = args_[0], args[1] = args_[1];
    if (!cond_.eval(iu, eta, args, F, dF)) return false;
    double fnorm = std::abs(F);
    int it = 0;
    for (; it < 60; ++it) {
      if (fnorm <= tol_scale(u_new)) break;
      if (std::abs(dF) < 1e-300) return false;
      cplx step = -F / dF;
      // Damped update: shrink until the residual decreases and the branch
      // tracking accepts the move.
      double lam = 1.0;
      bool accepted = false;
      for (int h = 0; h < 50; ++h) {
        cplx trial = eta + lam * step;
        double targs[2] = {args_[0], args_[1]};
        cplx Ft, dFt;
        if (cond_.eval(iu, trial, targs, Ft, dFt)) {
          double fn = std::abs(Ft);
          if (fn < fnorm || lam < 1e-6) {
            eta = trial;
            F = Ft;
            dF = dFt;
            fnorm = fn;
            args[0] = targs[0];
            args[1] = targs[1];
            accepted = true;
            break;
          }
        }
        lam *= 0.5;
      }
      if (!accepted) return false;
    }
    if (fnorm > tol_scale(u_new)) return false;
    // Polish once for the tight acceptance tolerances.
    if (std::abs(dF) > 1e-300) {
      cplx trial = eta - F / dF;
      double targs[2] = {args_[0], args_[1]};
      cplx Ft, dFt;
      if (cond_.eval(iu, trial, targs, Ft, dFt) && std::abs(Ft) <= fnorm) {
        eta = trial;
        fnorm = std::abs(Ft);
        args[0] = targs[0];
        args[1] = targs[1];
      }
    }
    eta_ = eta;
    u_ = u_new;
    args_[0] = args[0];
    args_[1] = args[1];
    residual_ = fnorm;
    last_iters_ = it;
    return true;
  }

  double tol_scale(double u) const { return tol_ * 1e-3 * std::max(1.0, u); }

  LevyModel model_;
  Direction dir_;
  double tol_;
  bool closed_form_;
  detail::BranchedCondition cond_{};
  double mean_ = 0.0, var_ = 1.0;
  cplx eta_{0.0, 0.0};
  double u_ = 0.0;
  double args_[2] = {0.0, 0.0};
  double residual_ = 0.0;
  int last_iters_ = 0;
};

/// eta evaluated on an ascending grid of nonnegative u values (Hermitian
/// symmetry gives u < 0: eta(-u) = conj(eta(u))).
inline std::vector<cplx> eta_grid(const LevyModel& model, Direction dir,
                                  std::span<const double> us,
                                  double tol = detail::kEtaResidualTol) {
  std::vector<cplx> out(us.size());
  EtaPath path(model, dir, tol);
  for (std::size_t i = 0; i < us.size(); ++i) {
    if (us[i] < 0.0)
      throw ParameterError("eta_grid: grid must be nonnegative; mirror by "
                           "conjugation");
    out[i] = path.advance_to(us[i]);
  }
  return out;
}

namespace detail {

// One damped Newton solve at fixed u from an explicit starting value, with
// the branch sheet fixed by the start's principal argument. Returns nullopt
// when the iteration fails; the caller falls back to continuation.
inline std::optional<cplx> eta_newton_from(const BranchedCondition& cond,
                                           Direction dir, double u, cplx eta,
                                           double tol) {
  double args[2];
  if (cond.is_cgmy) {
    args[0] = std::arg(cplx{cond.lp, 0.0} - eta);
    args[1] = std::arg(cplx{cond.lm, 0.0} + eta);
  } else {
    args[0] = std::arg(cond.theta - cond.beta * eta -
                       0.5 * cond.gamma * cond.gamma * eta * eta);
    args[1] = 0.0;
  }
  cplx iu{0.0, u}, F, dF;
  if (!cond.eval(iu, eta, args, F, dF)) return std::nullopt;
  double fnorm = std::abs(F);
  for (int it = 0; it < 80 && fnorm > tol; ++it) {
    if (std::abs(dF) < 1e-300) return std::nullopt;
    cplx step = -F / dF;
    double lam = 1.0;
    bool ok = false;
    for (int h = 0; h < 50; ++h) {
      double targs[2] = {args[0], args[1]};
      cplx Ft, dFt;
      if (cond.eval(iu, eta + lam * step, targs, Ft, dFt) &&
          std::abs(Ft) < fnorm) {
        eta += lam * step;
        F = Ft;
        dF = dFt;
        fnorm = std::abs(Ft);
        args[0] = targs[0];
        args[1] = targs[1];
        ok = true;
        break;
      }
      lam *= 0.5;
    }
    if (!ok) return std::nullopt;
  }
  if (fnorm > tol) return std::nullopt;
  if (direction_sign(dir) * eta.real() < -1e-9 * (1.0 + std::abs(eta)))
    return std::nullopt;
  return eta;
}

}  // namespace detail

/// Single-point numeric root for NTS or CGMY: real u is solved by
/// continuation from u = 0 (or by one Newton solve when a warm start from a
/// neighboring point is supplied), and purely imaginary u = i r resolves to
/// the real Laplace root.
inline cplx eta_numeric(const LevyModel& model, Direction dir, cplx u,
                        std::optional<cplx> warm_start = std::nullopt) {
  if (model.family() != Family::nts && model.family() != Family::cgmy)
    throw ParameterError("eta_numeric expects an NTS or CGMY model");
  if (u.imag() != 0.0) {
    if (u.real() != 0.0)
      throw ParameterError(
          "eta_numeric: only real u or purely imaginary u = i r supported");
    double r = u.imag();
    if (r < 0.0) throw ParameterError("eta_numeric: require r >= 0 for u = ir");
    return cplx{detail::real_eta_root(model, dir, r), 0.0};
  }
  double ureal = u.real();
  if (ureal < 0.0) {
    // eta(-u) = conj(eta(u)): solve on the positive axis and conjugate.
    return std::conj(eta_numeric(
        model, dir, cplx{-ureal, 0.0},
        warm_start ? std::optional<cplx>(std::conj(*warm_start))
                   : std::nullopt));
  }
  if (warm_start) {
    auto cond = detail::BranchedCondition::make(model);
    double tol = detail::kEtaResidualTol * 1e-3 * std::max(1.0, ureal);
    if (auto eta = detail::eta_newton_from(cond, dir, ureal, *warm_start, tol))
      return *eta;
  }
  EtaPath path(model, dir);
  return path.advance_to(ureal);
}

// ---------------------------------------------------------------------------
// phi_tau, Laplace transform, density
// ---------------------------------------------------------------------------

/// phi_tau(l)(u) = exp(-l eta(u)) for real u.
inline cplx fpt_chf(const FptProblem& prob, double u) {
  Direction dir = prob.direction();
  double mag = std::abs(u);
  cplx eta;
  switch (prob.model.family()) {
    case Family::bm: {
      const auto& p = prob.model.as_bm();
      eta = eta_bm(p.mu, p.sigma, dir, cplx{mag, 0.0});
      break;
    }
    case Family::nig:
      eta = eta_nig(prob.model, dir, cplx{mag, 0.0});
      break;
    default:
      eta = eta_numeric(prob.model, dir, cplx{mag, 0.0});
  }
  if (u < 0.0) eta = std::conj(eta);
  return std::exp(-prob.level * eta);
}

/// Real root eta(i r) of -r + psi_X(-i eta) = 0 on the admissible side
/// (l eta >= 0): E[exp(-r tau(l))] = exp(-l eta(i r)). Returns eta itself.
inline double fpt_laplace(const FptProblem& prob, double r) {
  if (!(r >= 0.0)) throw ParameterError("fpt_laplace: require r >= 0");
  Direction dir = prob.direction();
  if (prob.model.family() == Family::bm) {
    const auto& p = prob.model.as_bm();
    double disc = std::sqrt(p.mu * p.mu + 2.0 * p.sigma * p.sigma * r);
    double s2 = p.sigma * p.sigma;
    return (dir == Direction::up) ? (-p.mu + disc) / s2 : (-p.mu - disc) / s2;
  }
  double eta = detail::real_eta_root(prob.model, dir, r);
  if (direction_sign(dir) * eta < -detail::kBranchSlack)
    throw BranchError("fpt_laplace: root on the inadmissible side");
  return eta;
}

/// Hitting-time density on a positive, strictly increasing time grid.
struct PdfGrid {
  std::vector<double> t_values;
  std::vector<double> density;
  double total_mass = 0.0;  // trapezoid mass over t_values
};

struct FptPdfOptions {
  QuadratureSpec quad{50.0, 1 << 14, QuadRule::trapezoid};
  double tail_tol = 1e-9;  // require |phi_tau| below this at truncation
  double clip_tol = 1e-8;  // clip density noise in [-clip_tol, 0)
  int threads = 0;
};

/// Fourier inversion of exp(-l eta(u)):
///   f(t) = (1/pi) Int_0^inf Re[exp(-iut) phi_tau(u)] du.
/// The integral is evaluated after substituting u = s^2, which removes the
/// sqrt(u) kink that phi_tau has at u = 0 whenever E[X(1)] = 0, and the
/// truncation is escalated until |phi_tau| falls below tail_tol.
inline PdfGrid fpt_pdf(const FptProblem& prob, std::span<const double> t_grid,
                       const FptPdfOptions& opts = {}) {
  validate(opts.quad);
  if (t_grid.empty()) throw ParameterError("fpt_pdf: empty time grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1])))
      throw ParameterError("fpt_pdf: time grid must be positive increasing");
  }
  double t_max = t_grid.back();
  Direction dir = prob.direction();
  double l = prob.level;

  // s-grid spacing: resolve both the base grid and the oscillation
  // exp(-i s^2 t_max) near the truncation point.
  double s_end = std::sqrt(opts.quad.u_max);
  double ds = s_end / opts.quad.n_points;
  ds = std::min(ds, 0.2 / std::max(1.0, 2.0 * s_end * t_max));

  EtaPath path(prob.model, dir);
  std::vector<double> svals;
  std::vector<cplx> phi;
  svals.push_back(0.0);
  phi.push_back(std::exp(-l * cplx{eta_at_zero(prob.model, dir), 0.0}));

  const double stop_level = std::min(opts.tail_tol, 1e-9);
  int consecutive_small = 0;
  int escalations = 0;
  double s = 0.0;
  for (;;) {
    s += ds;
    cplx eta = path.advance_to(s * s);
    cplx ph = std::exp(-l * eta);
    svals.push_back(s);
    phi.push_back(ph);
    if (std::abs(ph) < stop_level) {
      if (++consecutive_small >= 50) break;
    } else {
      consecutive_small = 0;
    }
    if (s >= s_end) {
      if (std::abs(ph) < opts.tail_tol) break;
      if (++escalations > 8)
        throw QuadratureError(
            "fpt_pdf: |phi_tau| did not decay below tail tolerance; "
            "truncation estimate " +
            std::to_string(std::abs(ph)));
      s_end *= std::sqrt(2.0);
      // The oscillation constraint must hold at the new endpoint; restart
      // with a finer spacing when violated.
      double ds_req = 0.2 / std::max(1.0, 2.0 * s_end * t_max);
      if (ds > ds_req) {
        ds = ds_req;
        path = EtaPath(prob.model, dir);
        svals.assign(1, 0.0);
        phi.assign(1, phi.front());
        s = 0.0;
        consecutive_small = 0;
      }
    }
  }

  // f(t) = (2/pi) Int_0^smax Re[exp(-i s^2 t) phi(s^2)] s ds, trapezoid.
  std::size_t n = svals.size();
  PdfGrid out;
  out.t_values.assign(t_grid.begin(), t_grid.end());
  out.density.resize(t_grid.size());
  const double inv_pi = 0.31830988618379067154;
  parallel_for(
      t_grid.size(),
      [&](std::size_t ti) {
        double t = t_grid[ti];
        double acc = 0.0;
        for (std::size_t j = 1; j < n; ++j) {
          double u = svals[j] * svals[j];
          cplx rot = std::polar(1.0, -u * t);
          double g = (rot * phi[j]).real() * svals[j];
          // trapezoid weight: interior 1, endpoint 1/2; s = 0 term vanishes
          acc += (j + 1 == n) ? 0.5 * g : g;
        }
        out.density[ti] = 2.0 * inv_pi * acc * ds;
      },
      opts.threads);

  for (double& f : out.density) {
    if (f < 0.0) {
      if (f < -opts.clip_tol)
        throw QuadratureError(
            "fpt_pdf: density negative beyond noise tolerance (" +
            std::to_string(f) + ")");
      f = 0.0;
    }
  }
  double mass = 0.0;
  for (std::size_t i = 1; i < out.t_values.size(); ++i)
    mass += 0.5 * (out.density[i] + out.density[i - 1]) *
            (out.t_values[i] - out.t_values[i - 1]);
  out.total_mass = mass;
  if (mass > 1.0 + 1e-6)
    throw QuadratureError("fpt_pdf: total mass " + std::to_string(mass) +
                          " exceeds 1");
  return out;
}

}  // namespace levyfpt
