#include "dictlearn/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace dictlearn {

TheoremParams TheoremParams::derive(const TheoremConstants& constants, int S, Index K, double gamma, double alpha_min,
                                    double pi_min) {
  if (!(constants.kappa2 >= 2)) throw std::invalid_argument("TheoremParams: kappa^2 must be at least 2");
  if (!(constants.C > 0) || !(constants.n > 0) || !(constants.delta_star > 0))
    throw std::invalid_argument("TheoremParams: C, n and delta_star must be positive");
  if (!(gamma > 0) || !(alpha_min > 0) || !(pi_min > 0) || S < 1 || K < 1)
    throw std::invalid_argument("TheoremParams: gamma, alpha_min, pi_min must be positive and S, K >= 1");

  TheoremParams p;
  p.constants = constants;
  p.S = S;
  p.K = K;
  p.gamma = gamma;
  p.alpha_min = alpha_min;
  p.pi_min = pi_min;
  const double s = static_cast<double>(S);
  p.rho = 2 * constants.kappa2 * s * s / (gamma * gamma * alpha_min * alpha_min * std::pow(pi_min, 1.5));
  p.log_term = std::log(constants.n * static_cast<double>(K) * p.rho / constants.delta_star);
  p.nu = 1 / std::sqrt(p.log_term);
  p.delta_circ = gamma / (constants.C * p.log_term);
  return p;
}

bool TheoremParams::stable_target() const noexcept {
  return constants.delta_star * log_term <= gamma / constants.C;
}

std::string to_string(Regime regime) {
  switch (regime) {
  case Regime::Regime1: return "regime1";
  case Regime::Regime2: return "regime2";
  case Regime::Both: return "both";
  case Regime::None: return "none";
  }
  return "none";
}

ContractionTarget contraction_target(double delta_star, double delta_circ, double delta) {
  if (!(delta >= 0)) throw std::invalid_argument("contraction_target: delta must be non-negative");
  ContractionTarget t;
  t.half_Delta = 0.5 * (delta_star / 2 + std::min(delta_circ, delta));
  t.three_quarter = 0.75 * delta;
  t.three_quarter_valid = delta >= delta_star && delta <= delta_circ;
  return t;
}

ContractionTarget contraction_target(const TheoremParams& params, double delta) {
  return contraction_target(params.constants.delta_star, params.delta_circ, delta);
}

double sample_size_hint(double rho, double delta_star, double K) {
  if (!(rho > 0) || !(delta_star > 0) || !(K >= 1)) throw std::invalid_argument("sample_size_hint: invalid arguments");
  return std::ceil(rho * rho * std::log(K) / (delta_star * delta_star));
}

double sample_size_hint(const TheoremParams& params, Index K) {
  return sample_size_hint(params.rho, params.constants.delta_star, static_cast<double>(K));
}

ConditionCheck make_check(double lhs, double rhs) { return {lhs, rhs, rhs - lhs, lhs <= rhs}; }

} // namespace dictlearn
