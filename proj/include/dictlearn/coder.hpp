#pragma once

#include "dictlearn/linalg.hpp"
#include "dictlearn/parallel.hpp"
#include "dictlearn/sampling.hpp"
#include "dictlearn/signals.hpp"

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

namespace dictlearn {

/// Default rejection factor; the smallest kappa with kappa^2 >= 2.
inline const double kDefaultKappa = std::sqrt(2.0);

/// Coefficient estimates of a batch. Rejected columns are zero and carry an
/// empty support; `selected` keeps what thresholding picked before rejection.
template <typename Scalar> struct SparseCode {
  SparseMatrix<Scalar> Xhat;
  std::vector<Support> supports;
  std::vector<Support> selected;
  Index rejected_count = 0;

  Index size() const noexcept { return Xhat.cols(); }
};

/// Indices of the S largest |<psi_k, y>|, ascending. Ties go to the lower index.
template <typename Scalar, typename DerivedY>
Support threshold_select(const Dictionary<Scalar>& dict, const Eigen::MatrixBase<DerivedY>& y, int S) {
  if (S < 0 || S > dict.K()) throw std::invalid_argument("threshold_select: S outside [0, K]");
  const Vector<Scalar> corr = (dict.atoms().transpose() * y).cwiseAbs();
  std::vector<Index> order(static_cast<std::size_t>(dict.K()));
  std::iota(order.begin(), order.end(), Index{0});
  std::nth_element(order.begin(), order.begin() + S, order.end(), [&](Index a, Index b) {
    return corr[a] > corr[b] || (corr[a] == corr[b] && a < b);
  });
  order.resize(static_cast<std::size_t>(S));
  return Support(std::move(order));
}

template <typename Scalar> struct SignalCode {
  Support support;
  Vector<Scalar> coefficients; // length |support|
  Support selected;
  bool rejected = false;
};

namespace detail {

template <typename Scalar, typename DerivedY>
SignalCode<Scalar> fit_on_support(const Dictionary<Scalar>& dict, const Eigen::MatrixBase<DerivedY>& y, Support selected,
                                  double kappa) {
  SignalCode<Scalar> out;
  out.selected = std::move(selected);
  if (out.selected.empty()) return out;
  Matrix<Scalar> sub(dict.d(), static_cast<Index>(out.selected.size()));
  for (std::size_t s = 0; s < out.selected.size(); ++s) sub.col(static_cast<Index>(s)) = dict.atom(out.selected[s]);
  try {
    Vector<Scalar> x = least_squares_solve(sub, y);
    if (!(x.norm() < Scalar(kappa) * y.norm())) {
      out.rejected = true;
      return out;
    }
    out.support = out.selected;
    out.coefficients = std::move(x);
  } catch (const RankDeficientError&) {
    out.rejected = true;
  }
  return out;
}

} // namespace detail

/// Thresholding plus least-squares fit on the selected atoms. Estimates with
/// ||x|| >= kappa ||y||, or a rank-deficient sub-dictionary, are rejected.
template <typename Scalar, typename DerivedY>
SignalCode<Scalar> code_signal(const Dictionary<Scalar>& dict, const Eigen::MatrixBase<DerivedY>& y, int S,
                               double kappa = kDefaultKappa) {
  if (!(kappa > 1)) throw std::invalid_argument("code_signal: kappa must exceed 1");
  return detail::fit_on_support(dict, y, threshold_select(dict, y, S), kappa);
}

/// Column-wise code_signal over Y.
template <typename Scalar>
SparseCode<Scalar> code_batch(const Dictionary<Scalar>& dict, const Matrix<Scalar>& Y, int S,
                              double kappa = kDefaultKappa) {
  if (!(kappa > 1)) throw std::invalid_argument("code_batch: kappa must exceed 1");
  if (Y.rows() != dict.d()) throw DimensionError("code_batch: signal dimension differs from dictionary");
  if (S < 0 || S > dict.K()) throw std::invalid_argument("code_batch: S outside [0, K]");
  const auto N = static_cast<std::size_t>(Y.cols());
  std::vector<SignalCode<Scalar>> codes(N);

  parallel_for(N, [&](std::size_t begin, std::size_t end) {
    constexpr std::size_t kBlock = 512;
    for (std::size_t b = begin; b < end; b += kBlock) {
      const auto len = static_cast<Index>(std::min(kBlock, end - b));
      const Matrix<Scalar> corr = (dict.atoms().transpose() * Y.middleCols(static_cast<Index>(b), len)).cwiseAbs();
      std::vector<Index> order(static_cast<std::size_t>(dict.K()));
      for (Index j = 0; j < len; ++j) {
        std::iota(order.begin(), order.end(), Index{0});
        auto c = corr.col(j);
        std::nth_element(order.begin(), order.begin() + S, order.end(),
                         [&](Index a, Index bb) { return c[a] > c[bb] || (c[a] == c[bb] && a < bb); });
        Support selected(std::vector<Index>(order.begin(), order.begin() + S));
        codes[b + static_cast<std::size_t>(j)] =
            detail::fit_on_support(dict, Y.col(static_cast<Index>(b) + j), std::move(selected), kappa);
      }
    }
  });

  SparseCode<Scalar> code;
  code.supports.reserve(N);
  code.selected.reserve(N);
  std::vector<Eigen::Triplet<Scalar, Index>> triplets;
  triplets.reserve(N * static_cast<std::size_t>(S));
  for (std::size_t n = 0; n < N; ++n) {
    auto& c = codes[n];
    if (c.rejected) ++code.rejected_count;
    for (std::size_t s = 0; s < c.support.size(); ++s)
      triplets.emplace_back(c.support[s], static_cast<Index>(n), c.coefficients[static_cast<Index>(s)]);
    code.supports.push_back(std::move(c.support));
    code.selected.push_back(std::move(c.selected));
  }
  code.Xhat.resize(dict.K(), Y.cols());
  code.Xhat.setFromTriplets(triplets.begin(), triplets.end());
  return code;
}

/// Fraction of signals whose thresholded support equals the true one.
template <typename Scalar> double recovery_rate(const SparseCode<Scalar>& code, const std::vector<Support>& truth) {
  if (truth.size() != code.selected.size()) throw DimensionError("recovery_rate: batch size mismatch");
  if (truth.empty()) return 1.0;
  std::size_t hits = 0;
  for (std::size_t n = 0; n < truth.size(); ++n) hits += code.selected[n] == truth[n] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

template <typename Scalar> struct BatchCoding {
  SparseCode<Scalar> code;
  double recovery_rate = 0;
};

template <typename Scalar>
BatchCoding<Scalar> code_batch(const Dictionary<Scalar>& dict, const SignalBatch<Scalar>& batch, int S,
                               double kappa = kDefaultKappa) {
  BatchCoding<Scalar> out{code_batch(dict, batch.Y, S, kappa), 0.0};
  out.recovery_rate = recovery_rate(out.code, batch.supports);
  return out;
}

/// ||Psi_{I^c}^T y||_inf < min_{i in I} |<psi_i, y>|: the condition under
/// which thresholding provably returns I.
template <typename Scalar, typename DerivedY>
bool thresholding_succeeds(const Dictionary<Scalar>& dict, const Eigen::MatrixBase<DerivedY>& y, const Support& support) {
  const Vector<Scalar> corr = (dict.atoms().transpose() * y).cwiseAbs();
  Scalar inside = std::numeric_limits<Scalar>::infinity(), outside = 0;
  for (Index k = 0; k < dict.K(); ++k) {
    if (support.contains(k))
      inside = std::min(inside, corr[k]);
    else
      outside = std::max(outside, corr[k]);
  }
  return outside < inside;
}

} // namespace dictlearn
