#pragma once

#include "dictlearn/metrics.hpp"
#include "dictlearn/sampling.hpp"
#include "dictlearn/signals.hpp"

#include <cstdint>
#include <string>

namespace dictlearn {

/// Universal constants of the contraction theorem. C and n default to the
/// largest admissible values; lowering them is allowed for what-if analysis.
struct TheoremConstants {
  double C = 42.0;
  double n = 130.0;
  double kappa2 = 2.0;
  double delta_star = 1e-2;
};

struct TheoremParams {
  TheoremConstants constants;
  int S = 0;
  Index K = 0;
  double gamma = 1;     // c_min / c_max
  double alpha_min = 1; // min_k <phi_k, psi_k>
  double pi_min = 0;
  double rho = 0;        // 2 kappa^2 S^2 gamma^-2 alpha_min^-2 pi_min^-3/2
  double log_term = 0;   // log(n K rho / delta_star)
  double nu = 0;         // 1 / sqrt(log_term)
  double delta_circ = 0; // gamma / (C log_term)

  static TheoremParams derive(const TheoremConstants& constants, int S, Index K, double gamma, double alpha_min,
                              double pi_min);

  /// delta_star log(n K rho / delta_star) <= gamma / C
  bool stable_target() const noexcept;
};

struct ConditionCheck {
  double lhs = 0;
  double rhs = 0;
  double margin = 0; // rhs - lhs; negative when violated
  bool holds = false;
};

enum class Regime { Regime1, Regime2, Both, None };
std::string to_string(Regime regime);

struct RegimeReport {
  TheoremParams params;
  ConditionCheck generating;  // condition on Phi
  ConditionCheck regime1;     // well-behaved, diagonally dominant Psi
  ConditionCheck regime2;     // delta <= delta_circ
  Regime regime = Regime::None;
  double delta = 0;
  double sample_size_hint = 0;
  bool regime2_alpha_bound = true; // regime 2 => alpha_min >= 1 - delta_circ^2 / 2
};

struct ContractionTarget {
  double half_Delta = 0;        // (delta_star/2 + min(delta_circ, delta)) / 2
  double three_quarter = 0;     // (3/4) delta
  bool three_quarter_valid = false; // delta in [delta_star, delta_circ]
};

ContractionTarget contraction_target(double delta_star, double delta_circ, double delta);
ContractionTarget contraction_target(const TheoremParams& params, double delta);

/// ceil(rho^2 log K / delta_star^2). Returned as a double because desk-scale
/// instances already exceed 1e11.
double sample_size_hint(const TheoremParams& params, Index K);
double sample_size_hint(double rho, double delta_star, double K);

ConditionCheck make_check(double lhs, double rhs);

/// Evaluates the generating-dictionary condition and both regime conditions
/// for an aligned Psi. Nothing is enforced; the report only classifies.
template <typename Scalar>
RegimeReport evaluate_conditions(const Dictionary<Scalar>& phi, const Dictionary<Scalar>& psi, const SupportModel& model,
                                 const CoefficientModel& coeff, const TheoremConstants& constants) {
  const DistanceReport dist = distance_report(psi, phi, model);
  RegimeReport r;
  r.params = TheoremParams::derive(constants, model.S(), phi.K(), coeff.gamma(), dist.alpha_min, model.pi_min());
  r.delta = dist.delta;
  const auto& p = r.params;
  const double bound = dist.alpha_min * p.gamma / (4 * p.constants.C * p.log_term);

  r.generating = make_check(std::max(p.nu * weighted_norm(phi, model), coherence(phi)), bound);
  r.regime1 = make_check(std::max({p.nu * weighted_norm(psi, model), coherence(psi), cross_coherence(psi, phi)}), bound);
  r.regime2 = make_check(dist.delta, p.delta_circ);

  if (!r.generating.holds)
    r.regime = Regime::None;
  else if (r.regime1.holds && r.regime2.holds)
    r.regime = Regime::Both;
  else if (r.regime1.holds)
    r.regime = Regime::Regime1;
  else if (r.regime2.holds)
    r.regime = Regime::Regime2;
  else
    r.regime = Regime::None;

  r.sample_size_hint = sample_size_hint(p, phi.K());
  r.regime2_alpha_bound = !r.regime2.holds || dist.alpha_min >= 1 - p.delta_circ * p.delta_circ / 2 - 1e-12;
  return r;
}

} // namespace dictlearn
