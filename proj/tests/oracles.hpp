#pragma once

// Independent reference computations for the test suites. Nothing here calls
// the library routine it is meant to check.

#include "dictlearn/harness.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using dictlearn::Index;
using dictlearn::MatrixXd;
using dictlearn::Rng;
using dictlearn::VectorXd;

inline MatrixXd gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

inline double svd_opnorm(const MatrixXd& a) {
  Eigen::JacobiSVD<MatrixXd> svd(a);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

/// Square orthonormal dictionary from the QR factor of a Gaussian matrix.
inline dictlearn::Dictionary<double> orthonormal(Index d, Rng& rng) {
  Eigen::HouseholderQR<MatrixXd> qr(gaussian(d, d, rng));
  return dictlearn::Dictionary<double>(MatrixXd(qr.householderQ() * MatrixXd::Identity(d, d)));
}

/// Random weights in (0, 1) summing to S with every entry at most `cap`.
inline std::vector<double> random_weights(Index K, int S, double cap, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  std::vector<double> w(static_cast<std::size_t>(K));
  for (auto& x : w) x = unif(rng);
  return dictlearn::cap_and_rescale(w, S, cap);
}

/// Inclusion probabilities of Poisson sampling conditioned on |I| = S, by
/// summing prod p_i prod (1 - p_j) over every subset of size S.
struct Enumeration {
  std::vector<double> pi;
  MatrixXd pair;
  std::vector<std::pair<std::uint32_t, double>> subsets; // mask, conditional probability
};

inline Enumeration enumerate(const std::vector<double>& p, int S) {
  const auto K = static_cast<int>(p.size());
  Enumeration e;
  e.pi.assign(p.size(), 0.0);
  e.pair = MatrixXd::Zero(K, K);
  double total = 0;
  for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
    if (std::popcount(mask) != S) continue;
    double w = 1;
    for (int k = 0; k < K; ++k) w *= (mask >> k & 1u) ? p[static_cast<std::size_t>(k)] : 1 - p[static_cast<std::size_t>(k)];
    e.subsets.emplace_back(mask, w);
    total += w;
  }
  for (auto& [mask, w] : e.subsets) {
    w /= total;
    for (int i = 0; i < K; ++i) {
      if (!(mask >> i & 1u)) continue;
      e.pi[static_cast<std::size_t>(i)] += w;
      for (int j = 0; j < K; ++j)
        if (j != i && (mask >> j & 1u)) e.pair(i, j) += w;
    }
  }
  return e;
}

/// Size-S index set maximising sum_i |<psi_i, y>| by trying all of them.
inline std::vector<Index> exhaustive_threshold(const MatrixXd& psi, const VectorXd& y, int S) {
  const auto K = static_cast<int>(psi.cols());
  double best = -1;
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
    if (std::popcount(mask) != S) continue;
    double score = 0;
    for (int k = 0; k < K; ++k)
      if (mask >> k & 1u) score += std::abs(psi.col(k).dot(y));
    if (score > best) {
      best = score;
      best_mask = mask;
    }
  }
  std::vector<Index> out;
  for (int k = 0; k < K; ++k)
    if (best_mask >> k & 1u) out.push_back(k);
  return out;
}

inline double binomial_sigma(double q, long draws) { return std::sqrt(q * (1 - q) / static_cast<double>(draws)); }

} // namespace oracle
