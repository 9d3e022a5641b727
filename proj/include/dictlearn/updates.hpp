#pragma once

#include "dictlearn/coder.hpp"
#include "dictlearn/linalg.hpp"
#include "dictlearn/signals.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>
#include <string>
#include <vector>

namespace dictlearn {

enum class UpdateKind { MOD, ODL };

inline UpdateKind parse_update_kind(const std::string& name) {
  if (name == "MOD" || name == "mod") return UpdateKind::MOD;
  if (name == "ODL" || name == "odl") return UpdateKind::ODL;
  throw std::invalid_argument("unknown update kind '" + name + "'");
}

inline std::string to_string(UpdateKind kind) { return kind == UpdateKind::MOD ? "MOD" : "ODL"; }

/// Xhat has zero rows: the listed atoms were never selected in the batch.
class AtomStarvationError : public RankDeficientError {
public:
  explicit AtomStarvationError(std::vector<Index> atoms)
      : RankDeficientError(describe(atoms)), atoms_(std::move(atoms)) {}
  const std::vector<Index>& atoms() const noexcept { return atoms_; }

private:
  static std::string describe(const std::vector<Index>& atoms) {
    std::ostringstream os;
    os << "atom starvation: " << atoms.size() << " atom(s) never selected (";
    for (std::size_t i = 0; i < atoms.size() && i < 8; ++i) os << (i ? ", " : "") << atoms[i];
    if (atoms.size() > 8) os << ", ...";
    os << ")";
    return os.str();
  }
  std::vector<Index> atoms_;
};

/// Spectrum summary of Xhat Xhat^T; the ratio is the rank margin.
struct GramSpectrum {
  double min_eig = 0;
  double max_eig = 0;
  double ratio() const noexcept { return max_eig > 0 ? min_eig / max_eig : 0.0; }
};

template <typename Scalar> Matrix<Scalar> coefficient_gram(const SparseMatrix<Scalar>& xhat) {
  return Matrix<Scalar>(xhat * xhat.transpose());
}

template <typename Scalar> GramSpectrum gram_spectrum(const Matrix<Scalar>& gram) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(gram, Eigen::EigenvaluesOnly);
  return {static_cast<double>(eig.eigenvalues().minCoeff()), static_cast<double>(eig.eigenvalues().maxCoeff())};
}

/// Condition number above which MOD switches from Cholesky on Xhat Xhat^T to
/// a QR least-squares solve on Xhat^T.
inline constexpr double kNormalEquationsMaxCond = 1e6;

/// Un-normalised MOD update Y Xhat^+ = Y Xhat^T (Xhat Xhat^T)^{-1}.
template <typename Scalar> Matrix<Scalar> mod_update(const Matrix<Scalar>& Y, const SparseCode<Scalar>& code) {
  if (Y.cols() != code.Xhat.cols()) throw DimensionError("mod_update: Y and Xhat have different batch sizes");
  const Matrix<Scalar> gram = coefficient_gram(code.Xhat);

  std::vector<Index> starved;
  for (Index k = 0; k < gram.rows(); ++k)
    if (gram(k, k) == Scalar(0)) starved.push_back(k);
  if (!starved.empty()) throw AtomStarvationError(std::move(starved));

  const GramSpectrum spec = gram_spectrum(gram);
  if (!(spec.min_eig > kRankTol * spec.max_eig))
    throw RankDeficientError("mod_update: Xhat does not have full row rank");

  if (spec.max_eig / spec.min_eig > kNormalEquationsMaxCond) {
    const Matrix<Scalar> xt = Matrix<Scalar>(code.Xhat.transpose());
    return least_squares_solve(xt, Y.transpose()).transpose();
  }
  const Matrix<Scalar> yx = Y * code.Xhat.transpose();
  return gram.llt().solve(yx.transpose()).transpose();
}

/// Un-normalised ODL update Y Xhat^T - Psi Xhat Xhat^T + Psi diag(Xhat Xhat^T).
/// The 1/N factor of the analysis is omitted; normalisation absorbs it.
template <typename Scalar>
Matrix<Scalar> odl_update(const Dictionary<Scalar>& psi, const Matrix<Scalar>& Y, const SparseCode<Scalar>& code) {
  if (Y.cols() != code.Xhat.cols()) throw DimensionError("odl_update: Y and Xhat have different batch sizes");
  if (Y.rows() != psi.d() || code.Xhat.rows() != psi.K()) throw DimensionError("odl_update: dimension mismatch");
  Matrix<Scalar> gram = coefficient_gram(code.Xhat);
  gram.diagonal().setZero();
  Matrix<Scalar> raw = Y * code.Xhat.transpose();
  raw.noalias() -= psi.atoms() * gram;
  return raw;
}

inline constexpr double kZeroColumnNorm = 1e-12;

/// Normalises columns; columns with norm < 1e-12 are replaced by the
/// corresponding atom of `previous` (their indices go to `replaced`). With a
/// reference, each atom is signed so that <phi_k, psi_k> >= 0.
template <typename Scalar>
Dictionary<Scalar> normalize_and_align(Matrix<Scalar> raw, const Dictionary<Scalar>& previous,
                                       const Dictionary<Scalar>* reference = nullptr,
                                       std::vector<Index>* replaced = nullptr) {
  if (raw.rows() != previous.d() || raw.cols() != previous.K())
    throw DimensionError("normalize_and_align: raw and previous differ in shape");
  if (reference && (reference->d() != raw.rows() || reference->K() != raw.cols()))
    throw DimensionError("normalize_and_align: reference differs in shape");
  if (replaced) replaced->clear();
  for (Index k = 0; k < raw.cols(); ++k) {
    const Scalar n = raw.col(k).norm();
    if (!(static_cast<double>(n) >= kZeroColumnNorm) || !std::isfinite(static_cast<double>(n))) {
      raw.col(k) = previous.atom(k);
      if (replaced) replaced->push_back(k);
    } else {
      raw.col(k) /= n;
    }
    if (reference && reference->atom(k).dot(raw.col(k)) < Scalar(0)) raw.col(k) = -raw.col(k);
  }
  return Dictionary<Scalar>(std::move(raw));
}

struct IterationDiagnostics {
  Index rejected_count = 0;
  double recovery_rate = 0;
  GramSpectrum gram;
  std::vector<Index> replaced_atoms;
};

template <typename Scalar> struct IterationResult {
  Dictionary<Scalar> dictionary;
  SparseCode<Scalar> code;
  IterationDiagnostics diagnostics;
};

/// One alternating step: thresholding code, dictionary update, normalisation.
template <typename Scalar>
IterationResult<Scalar> run_iteration(const Dictionary<Scalar>& psi, const SignalBatch<Scalar>& batch, int S,
                                      double kappa, UpdateKind kind, const Dictionary<Scalar>* reference = nullptr) {
  auto coding = code_batch(psi, batch, S, kappa);
  IterationResult<Scalar> out;
  out.diagnostics.rejected_count = coding.code.rejected_count;
  out.diagnostics.recovery_rate = coding.recovery_rate;
  out.diagnostics.gram = gram_spectrum(coefficient_gram(coding.code.Xhat));

  Matrix<Scalar> raw = kind == UpdateKind::MOD ? mod_update(batch.Y, coding.code) : odl_update(psi, batch.Y, coding.code);
  out.dictionary = normalize_and_align(std::move(raw), psi, reference, &out.diagnostics.replaced_atoms);
  out.code = std::move(coding.code);
  return out;
}

} // namespace dictlearn
