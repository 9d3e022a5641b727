#include "dictlearn/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dictlearn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void check_weights(std::span<const double> p, int S, bool open_interval) {
  if (S < 0 || static_cast<std::size_t>(S) > p.size())
    throw std::invalid_argument("support level S=" + std::to_string(S) + " outside [0, K]");
  for (double v : p) {
    const bool ok = open_interval ? (v > 0 && v < 1) : (v >= 0 && v <= 1);
    if (!ok || !std::isfinite(v)) throw std::invalid_argument("weight outside the admissible interval: " + std::to_string(v));
  }
}

// Appends one Bernoulli(q) item to a truncated Poisson-binomial pmf.
void convolve(std::vector<double>& pmf, double q) {
  for (std::size_t m = pmf.size(); m-- > 1;) pmf[m] = pmf[m] * (1 - q) + pmf[m - 1] * q;
  pmf[0] *= (1 - q);
}

void convolve_log(std::vector<double>& lpmf, double q) {
  const double lq = std::log(q), l1q = std::log1p(-q);
  for (std::size_t m = lpmf.size(); m-- > 1;) lpmf[m] = log_add(lpmf[m] + l1q, lpmf[m - 1] + lq);
  lpmf[0] += l1q;
}

} // namespace

Support::Support(std::vector<Index> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
    throw std::invalid_argument("Support: duplicate index");
  if (!indices_.empty() && indices_.front() < 0) throw std::invalid_argument("Support: negative index");
}

bool Support::contains(Index k) const { return std::binary_search(indices_.begin(), indices_.end(), k); }

SupportModel::SupportModel(std::vector<double> p, int S, SumCheck check) : p_(std::move(p)), S_(S) {
  check_weights(p_, S_, true);
  if (check == SumCheck::Strict) {
    const double sum = std::accumulate(p_.begin(), p_.end(), 0.0);
    if (std::abs(sum - S_) > 1e-9)
      throw std::invalid_argument("SupportModel: weights sum to " + std::to_string(sum) + ", expected S=" +
                                  std::to_string(S_));
  }
  try {
    pi_ = inclusion_probabilities_exact(p_, S_);
  } catch (const UnderflowError&) {
    pi_ = inclusion_probabilities_log(p_, S_);
  }
}

double SupportModel::pi_min() const { return *std::min_element(pi_.begin(), pi_.end()); }
double SupportModel::p_max() const { return *std::max_element(p_.begin(), p_.end()); }

SupportProfile parse_profile(const std::string& name) {
  if (name == "uniform") return SupportProfile::Uniform;
  if (name == "linear-decay") return SupportProfile::LinearDecay;
  if (name == "harmonic-capped") return SupportProfile::HarmonicCapped;
  throw std::invalid_argument("unknown support profile '" + name + "'");
}

std::string to_string(SupportProfile profile) {
  switch (profile) {
  case SupportProfile::Uniform: return "uniform";
  case SupportProfile::LinearDecay: return "linear-decay";
  case SupportProfile::HarmonicCapped: return "harmonic-capped";
  }
  return "unknown";
}

std::vector<double> cap_and_rescale(std::vector<double> weights, int S, double cap) {
  const auto K = weights.size();
  if (S <= 0 || static_cast<double>(K) * cap < S - 1e-12)
    throw std::invalid_argument("cap_and_rescale: K * cap must be at least S");
  for (double w : weights)
    if (!(w > 0)) throw std::invalid_argument("cap_and_rescale: weights must be positive");

  std::vector<bool> capped(K, false);
  for (;;) {
    double free_mass = 0;
    std::size_t n_capped = 0;
    for (std::size_t k = 0; k < K; ++k) {
      if (capped[k])
        ++n_capped;
      else
        free_mass += weights[k];
    }
    const double target = S - cap * static_cast<double>(n_capped);
    if (n_capped == K || free_mass <= 0) break;
    const double scale = target / free_mass;
    bool changed = false;
    for (std::size_t k = 0; k < K; ++k) {
      if (capped[k]) continue;
      weights[k] *= scale;
      if (weights[k] > cap) {
        capped[k] = true;
        changed = true;
      }
    }
    for (std::size_t k = 0; k < K; ++k)
      if (capped[k]) weights[k] = cap;
    if (!changed) break;
  }
  return weights;
}

std::vector<double> make_profile(SupportProfile profile, Index K, int S, double cap) {
  if (K <= 0) throw std::invalid_argument("make_profile: K must be positive");
  std::vector<double> w(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) {
    switch (profile) {
    case SupportProfile::Uniform: w[k] = 1.0; break;
    case SupportProfile::LinearDecay: w[k] = static_cast<double>(K - k); break;
    case SupportProfile::HarmonicCapped: w[k] = 1.0 / static_cast<double>(k + 1); break;
    }
  }
  return cap_and_rescale(std::move(w), S, cap);
}

Support poisson_sample(std::span<const double> p, Rng& rng) {
  std::vector<Index> idx;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (unit_uniform(rng) < p[k]) idx.push_back(static_cast<Index>(k));
  return Support(std::move(idx));
}

Support rejective_sample(const SupportModel& model, Rng& rng) {
  const auto& p = model.p();
  const auto S = static_cast<std::size_t>(model.S());
  std::vector<Index> idx;
  idx.reserve(S + 1);
  for (long attempt = 0; attempt < kRejectionCap; ++attempt) {
    idx.clear();
    for (std::size_t k = 0; k < p.size() && idx.size() <= S; ++k)
      if (unit_uniform(rng) < p[k]) idx.push_back(static_cast<Index>(k));
    if (idx.size() == S) return Support(idx);
  }
  throw RejectionCapError("rejective_sample: exceeded " + std::to_string(kRejectionCap) + " rejections");
}

std::vector<double> poisson_binomial_pmf(std::span<const double> p, int max_count) {
  std::vector<double> pmf(static_cast<std::size_t>(max_count) + 1, 0.0);
  pmf[0] = 1.0;
  for (double q : p) convolve(pmf, q);
  return pmf;
}

std::vector<double> inclusion_probabilities_exact(std::span<const double> p, int S) {
  check_weights(p, S, true);
  const std::size_t K = p.size();
  std::vector<double> pi(K, 0.0);
  if (S == 0) return pi;

  const std::size_t width = static_cast<std::size_t>(S) + 1;
  // prefix[i] covers p[0..i), suffix[i] covers p[i..K)
  std::vector<std::vector<double>> prefix(K + 1, std::vector<double>(width, 0.0));
  std::vector<std::vector<double>> suffix(K + 1, std::vector<double>(width, 0.0));
  prefix[0][0] = 1.0;
  for (std::size_t i = 0; i < K; ++i) {
    prefix[i + 1] = prefix[i];
    convolve(prefix[i + 1], p[i]);
  }
  suffix[K][0] = 1.0;
  for (std::size_t i = K; i-- > 0;) {
    suffix[i] = suffix[i + 1];
    convolve(suffix[i], p[i]);
  }
  const double total = prefix[K][S];
  if (!(total >= kUnderflowFloor))
    throw UnderflowError("inclusion_probabilities_exact: P_B(|I| = S) underflows; recompute in the log domain");

  for (std::size_t i = 0; i < K; ++i) {
    double without_i = 0;
    for (int j = 0; j <= S - 1; ++j) without_i += prefix[i][j] * suffix[i + 1][S - 1 - j];
    pi[i] = p[i] * without_i / total;
  }
  return pi;
}

std::vector<double> inclusion_probabilities_log(std::span<const double> p, int S) {
  check_weights(p, S, true);
  const std::size_t K = p.size();
  std::vector<double> pi(K, 0.0);
  if (S == 0) return pi;

  const std::size_t width = static_cast<std::size_t>(S) + 1;
  std::vector<std::vector<double>> prefix(K + 1, std::vector<double>(width, kNegInf));
  std::vector<std::vector<double>> suffix(K + 1, std::vector<double>(width, kNegInf));
  prefix[0][0] = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    prefix[i + 1] = prefix[i];
    convolve_log(prefix[i + 1], p[i]);
  }
  suffix[K][0] = 0.0;
  for (std::size_t i = K; i-- > 0;) {
    suffix[i] = suffix[i + 1];
    convolve_log(suffix[i], p[i]);
  }
  const double log_total = prefix[K][S];
  for (std::size_t i = 0; i < K; ++i) {
    double log_without = kNegInf;
    for (int j = 0; j <= S - 1; ++j) log_without = log_add(log_without, prefix[i][j] + suffix[i + 1][S - 1 - j]);
    pi[i] = std::exp(std::log(p[i]) + log_without - log_total);
  }
  return pi;
}

double pairwise_inclusion_exact(std::span<const double> p, int S, Index i, Index j) {
  check_weights(p, S, true);
  const auto K = static_cast<Index>(p.size());
  if (i == j || i < 0 || j < 0 || i >= K || j >= K)
    throw std::invalid_argument("pairwise_inclusion_exact: need distinct in-range indices");
  if (S < 2) return 0.0;

  std::vector<double> all(static_cast<std::size_t>(S) + 1, 0.0), rest(static_cast<std::size_t>(S) - 1, 0.0);
  all[0] = 1.0;
  rest[0] = 1.0;
  for (Index k = 0; k < K; ++k) {
    convolve(all, p[k]);
    if (k != i && k != j) convolve(rest, p[k]);
  }
  if (!(all[S] >= kUnderflowFloor))
    throw UnderflowError("pairwise_inclusion_exact: P_B(|I| = S) underflows; recompute in the log domain");
  return p[i] * p[j] * rest[S - 2] / all[S];
}

Theorem9Report verify_theorem9(const SupportModel& model, double tol) {
  Theorem9Report r;
  const auto& p = model.p();
  const auto& pi = model.pi();
  const Index K = model.K();
  const int S = model.S();
  const double p_inf = model.p_max();

  r.a_min_slack = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < K; ++i) {
    const double slack = std::min(pi[i] - (1 - p_inf) * p[i], 2 * p[i] - pi[i]);
    r.a_min_slack = std::min(r.a_min_slack, slack);
    if (slack < -tol) {
      r.a_holds = false;
      ++r.violations;
    }
  }

  const std::vector<double> pi_lower = S >= 1 ? inclusion_probabilities_exact(p, S - 1) : std::vector<double>(K, 0.0);
  r.b_min_slack = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < K; ++i) {
    const double slack = pi[i] - pi_lower[i];
    r.b_min_slack = std::min(r.b_min_slack, slack);
    if (slack < -tol) {
      r.b_holds = false;
      ++r.violations;
    }
  }

  r.c_min_slack = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < K; ++i) {
    for (Index j = i + 1; j < K; ++j) {
      const double slack = pi[i] * pi[j] - pairwise_inclusion_exact(p, S, i, j);
      r.c_min_slack = std::min(r.c_min_slack, slack);
      if (slack < -tol) {
        r.c_holds = false;
        ++r.violations;
      }
    }
  }
  return r;
}

} // namespace dictlearn
