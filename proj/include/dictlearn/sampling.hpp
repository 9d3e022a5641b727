#pragma once

#include "dictlearn/linalg.hpp"
#include "dictlearn/random.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dictlearn {

/// Sorted set of distinct atom indices (0-based).
class Support {
public:
  Support() = default;
  explicit Support(std::vector<Index> indices);

  const std::vector<Index>& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(Index k) const;
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }
  Index operator[](std::size_t i) const { return indices_[i]; }

  friend bool operator==(const Support&, const Support&) = default;

private:
  std::vector<Index> indices_;
};

class UnderflowError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class RejectionCapError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr long kRejectionCap = 1'000'000;
inline constexpr double kUnderflowFloor = 1e-300;

/// Weights p, level S and the cached rejective inclusion probabilities pi.
class SupportModel {
public:
  enum class SumCheck { Strict, Relaxed };

  SupportModel(std::vector<double> p, int S, SumCheck check = SumCheck::Strict);

  Index K() const noexcept { return static_cast<Index>(p_.size()); }
  int S() const noexcept { return S_; }
  const std::vector<double>& p() const noexcept { return p_; }
  const std::vector<double>& pi() const noexcept { return pi_; }
  double pi_min() const;
  double p_max() const;
  VectorXd pi_vector() const { return Eigen::Map<const VectorXd>(pi_.data(), K()); }

private:
  std::vector<double> p_;
  int S_;
  std::vector<double> pi_;
};

enum class SupportProfile { Uniform, LinearDecay, HarmonicCapped };

inline constexpr double kWeightCap = 1.0 / 6.0;

SupportProfile parse_profile(const std::string& name);
std::string to_string(SupportProfile profile);

/// Rescales positive weights to sum to S with every entry <= cap, iterating
/// cap-and-rescale to a fixpoint. Requires weights.size() * cap >= S.
std::vector<double> cap_and_rescale(std::vector<double> weights, int S, double cap = kWeightCap);

/// Weight vector of the given shape, summing to S and capped at `cap`.
std::vector<double> make_profile(SupportProfile profile, Index K, int S, double cap = kWeightCap);

Support poisson_sample(std::span<const double> p, Rng& rng);
Support rejective_sample(const SupportModel& model, Rng& rng);

/// P_B(|I| = m) for m = 0..max_count, by the O(K * max_count) recursion.
std::vector<double> poisson_binomial_pmf(std::span<const double> p, int max_count);

/// Rejective first-order inclusion probabilities; throws UnderflowError if
/// P_B(|I| = S) < 1e-300 (use inclusion_probabilities_log then).
std::vector<double> inclusion_probabilities_exact(std::span<const double> p, int S);

/// Same quantity computed with log-sum-exp throughout.
std::vector<double> inclusion_probabilities_log(std::span<const double> p, int S);

/// P_S({i, j} subset of I).
double pairwise_inclusion_exact(std::span<const double> p, int S, Index i, Index j);

struct Theorem9Report {
  // (a) (1 - ||p||_inf) p_i <= pi_i <= 2 p_i
  bool a_holds = true;
  double a_min_slack = 0;
  // (b) pi_{S-1}(i) <= pi_S(i)
  bool b_holds = true;
  double b_min_slack = 0;
  // (c) P_S({i,j} in I) <= pi_i pi_j
  bool c_holds = true;
  double c_min_slack = 0;
  int violations = 0;

  bool all_hold() const noexcept { return a_holds && b_holds && c_holds; }
};

/// Evaluates the three inclusion-probability inequalities with exact DP values.
/// Violations are reported (with slack < -tol), never thrown.
Theorem9Report verify_theorem9(const SupportModel& model, double tol = 1e-12);

} // namespace dictlearn
