#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "levyfpt/fpt.hpp"
#include "levyfpt/model.hpp"

namespace levyfpt {

enum class OptionKind { call, put };

inline const char* kind_name(OptionKind k) {
  return k == OptionKind::call ? "call" : "put";
}

inline double vanilla_payoff(OptionKind kind, double spot_at_expiry,
                             double strike) {
  double x = (kind == OptionKind::call) ? spot_at_expiry - strike
                                        : strike - spot_at_expiry;
  return x > 0.0 ? x : 0.0;
}

enum class InOut { knock_in, knock_out };

/// Barrier contract: the sign of log(B/S(0)) must match the stated direction.
struct BarrierSpec {
  OptionKind kind = OptionKind::call;
  Direction direction = Direction::down;
  InOut inout = InOut::knock_in;
  double strike = 100.0;
  double barrier = 90.0;
  double maturity = 1.0;                 // years
  std::optional<double> rho;             // damping; defaulted per kind if unset
};

inline double barrier_log_level(const BarrierSpec& spec, double spot) {
  if (!(spec.strike > 0.0 && spec.barrier > 0.0 && spec.maturity > 0.0))
    throw ParameterError("barrier spec: require K, B, T > 0");
  if (!(spot > 0.0)) throw ParameterError("barrier spec: require S(0) > 0");
  double l = std::log(spec.barrier / spot);
  if (spec.direction == Direction::down && !(l < 0.0))
    throw ParameterError("down barrier requires B < S(0)");
  if (spec.direction == Direction::up && !(l > 0.0))
    throw ParameterError("up barrier requires B > S(0)");
  return l;
}

}  // namespace levyfpt
