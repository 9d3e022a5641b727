#pragma once

#include "dictlearn/coder.hpp"
#include "dictlearn/linalg.hpp"
#include "dictlearn/sampling.hpp"
#include "dictlearn/signals.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dictlearn {

class AlignmentError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// max_{i != j} |<psi_i, psi_j>|
template <typename Scalar> double coherence(const Dictionary<Scalar>& dict) {
  Matrix<Scalar> gram = dict.atoms().transpose() * dict.atoms();
  gram.diagonal().setZero();
  return dict.K() > 1 ? static_cast<double>(gram.cwiseAbs().maxCoeff()) : 0.0;
}

/// max_{i != j} |<psi_i, phi_j>|
template <typename Scalar> double cross_coherence(const Dictionary<Scalar>& psi, const Dictionary<Scalar>& phi) {
  if (psi.d() != phi.d() || psi.K() != phi.K()) throw DimensionError("cross_coherence: shape mismatch");
  Matrix<Scalar> cross = psi.atoms().transpose() * phi.atoms();
  cross.diagonal().setZero();
  return psi.K() > 1 ? static_cast<double>(cross.cwiseAbs().maxCoeff()) : 0.0;
}

/// ||Phi D_sqrt(pi)||
template <typename Scalar> double weighted_norm(const Dictionary<Scalar>& dict, const SupportModel& model) {
  return static_cast<double>(op_norm_estimate(scale_columns(dict.atoms(), DiagonalWeights<Scalar>::sqrt_of(model.pi_vector()))));
}

struct DistanceReport {
  double eps = 0;             // ||Psi - Phi||_{2,1}
  double delta = 0;           // max(weighted_opnorm, eps)
  double weighted_opnorm = 0; // ||(Psi - Phi) D_sqrt(pi)||
  VectorXd alpha;             // <phi_k, psi_k>
  double alpha_min = 1;
  VectorXd atom_errors;       // ||psi_k - phi_k||
};

/// Distances of a sign-aligned estimate Psi to the generating Phi.
/// Throws AlignmentError if some <phi_k, psi_k> < 0.
template <typename Scalar>
DistanceReport distance_report(const Dictionary<Scalar>& psi, const Dictionary<Scalar>& phi, const SupportModel& model) {
  if (psi.d() != phi.d() || psi.K() != phi.K() || model.K() != phi.K())
    throw DimensionError("distance_report: shape mismatch");
  DistanceReport r;
  const Matrix<Scalar> z = psi.atoms() - phi.atoms();
  r.alpha = (phi.atoms().cwiseProduct(psi.atoms())).colwise().sum().transpose().template cast<double>();
  if ((r.alpha.array() < 0).any()) throw AlignmentError("distance_report: estimate is not sign-aligned to the reference");
  r.alpha_min = r.alpha.minCoeff();
  r.atom_errors = z.colwise().norm().transpose().template cast<double>();
  r.eps = r.atom_errors.maxCoeff();
  if (z.isZero(0))
    r.weighted_opnorm = 0;
  else
    r.weighted_opnorm = static_cast<double>(op_norm_estimate(scale_columns(z, DiagonalWeights<Scalar>::sqrt_of(model.pi_vector()))));
  r.delta = std::max(r.weighted_opnorm, r.eps);

  const double identity_gap = std::abs(r.eps * r.eps - (2 - 2 * r.alpha_min));
  if (identity_gap > std::max(1e-9, 10 * unit_norm_tol<Scalar>()))
    throw std::logic_error("distance_report: eps^2 = 2 - 2 alpha_min violated");
  return r;
}

/// Empirical second-moment matrices of the coefficient estimates.
namespace detail {

template <typename Scalar> double symmetric_op_norm(const Matrix<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(m, Eigen::EigenvaluesOnly);
  return static_cast<double>(eig.eigenvalues().cwiseAbs().maxCoeff());
}

/// Exact spectral norm through the eigenvalues of the smaller Gram matrix.
inline double dense_op_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return std::sqrt(m.rows() <= m.cols() ? symmetric_op_norm<double>(m * m.transpose())
                                        : symmetric_op_norm<double>(m.transpose() * m));
}

} // namespace detail

struct DiagnosticMatrices {
  MatrixXd A; // (1/N) X Xhat^T
  MatrixXd B; // (1/N) Xhat Xhat^T
  MatrixXd T; // D_{sqrt(pi) alpha}^{-1} B D_{sqrt(pi) alpha beta}^{-1}
  double t_dev = 0;           // ||T - I||
  double a_dev = 0;           // ||Phi A D_{sqrt(pi) alpha beta}^{-1} - Phi D_sqrt(pi)||
  double b_offdiag_ratio = 0; // ||B - diag(B)||_F / ||diag(B)||_F
};

template <typename Scalar>
DiagnosticMatrices diagnostic_matrices(const SparseCode<Scalar>& code, const SignalBatch<Scalar>& batch,
                                       const Dictionary<Scalar>& phi, const DistanceReport& report,
                                       const SupportModel& model, const CoefficientModel& coeff) {
  const Index K = phi.K();
  if (code.Xhat.rows() != K || batch.X.rows() != K || code.Xhat.cols() != batch.X.cols() || report.alpha.size() != K)
    throw DimensionError("diagnostic_matrices: shape mismatch");
  if ((report.alpha.array() == 0).any()) throw std::domain_error("diagnostic_matrices: alpha_k = 0, T undefined");
  const double inv_n = 1.0 / static_cast<double>(std::max<Index>(batch.X.cols(), 1));
  const double beta = beta_of(coeff);

  DiagnosticMatrices m;
  m.A = MatrixXd((batch.X * code.Xhat.transpose()).template cast<double>()) * inv_n;
  m.B = MatrixXd((code.Xhat * code.Xhat.transpose()).template cast<double>()) * inv_n;
  const VectorXd sqrt_pi = model.pi_vector().cwiseSqrt();
  const VectorXd left = sqrt_pi.cwiseProduct(report.alpha);
  const VectorXd right = left * beta;
  m.T = left.cwiseInverse().asDiagonal() * m.B * right.cwiseInverse().asDiagonal();
  // T is symmetric since its two scalings differ only by beta.
  m.t_dev = detail::symmetric_op_norm<double>(m.T - MatrixXd::Identity(K, K));

  const MatrixXd phid = phi.atoms().template cast<double>();
  m.a_dev = detail::dense_op_norm(phid * m.A * right.cwiseInverse().asDiagonal() - phid * sqrt_pi.asDiagonal());

  const double diag_norm = m.B.diagonal().norm();
  MatrixXd off = m.B;
  off.diagonal().setZero();
  m.b_offdiag_ratio = diag_norm > 0 ? off.norm() / diag_norm : 0.0;
  return m;
}

namespace detail {

template <typename Scalar> Matrix<Scalar> columns(const Matrix<Scalar>& a, const Support& support) {
  Matrix<Scalar> out(a.rows(), static_cast<Index>(support.size()));
  for (std::size_t s = 0; s < support.size(); ++s) out.col(static_cast<Index>(s)) = a.col(support[s]);
  return out;
}

} // namespace detail

/// Monte Carlo estimate of P(||Psi_I^T Psi_I - Id|| > theta) over rejective supports.
template <typename Scalar>
double conditioning_rate(const Dictionary<Scalar>& dict, const SupportModel& model, Index draws, double theta, Rng& rng) {
  if (!(theta > 0 && theta < 1)) throw std::invalid_argument("conditioning_rate: theta must lie in (0, 1)");
  if (model.K() != dict.K()) throw DimensionError("conditioning_rate: model K differs from dictionary K");
  if (draws <= 0) return 0.0;
  Index bad = 0;
  for (Index t = 0; t < draws; ++t) {
    const Matrix<Scalar> sub = detail::columns(dict.atoms(), rejective_sample(model, rng));
    Matrix<Scalar> g = sub.transpose() * sub;
    g.diagonal().array() -= Scalar(1);
    if (detail::symmetric_op_norm(g) > theta) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(draws);
}

/// Monte Carlo estimate of P(||Z_I|| > bound), Z = Psi - Phi.
template <typename Scalar>
double z_norm_rate(const Dictionary<Scalar>& psi, const Dictionary<Scalar>& phi, const SupportModel& model, Index draws,
                   double bound, Rng& rng) {
  if (psi.d() != phi.d() || psi.K() != phi.K() || model.K() != phi.K()) throw DimensionError("z_norm_rate: shape mismatch");
  if (draws <= 0) return 0.0;
  const Matrix<Scalar> z = psi.atoms() - phi.atoms();
  Index bad = 0;
  for (Index t = 0; t < draws; ++t) {
    const Matrix<Scalar> sub = detail::columns(z, rejective_sample(model, rng));
    const double norm = std::sqrt(std::max(0.0, detail::symmetric_op_norm(Matrix<Scalar>(sub.transpose() * sub))));
    if (norm > bound) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(draws);
}

/// Greedy atom matching for an externally supplied estimate: repeatedly pairs
/// the (psi, phi) atoms with the largest |inner product|, then permutes and
/// signs psi to follow phi's indexing. Not permutation-optimal; the distances
/// above assume the correspondence is known, so use only when it is not.
template <typename Scalar>
Dictionary<Scalar> greedy_match(const Dictionary<Scalar>& psi, const Dictionary<Scalar>& phi) {
  if (psi.d() != phi.d() || psi.K() != phi.K()) throw DimensionError("greedy_match: shape mismatch");
  const Index K = phi.K();
  Matrix<Scalar> score = (psi.atoms().transpose() * phi.atoms()).cwiseAbs();
  Matrix<Scalar> out(psi.d(), K);
  for (Index step = 0; step < K; ++step) {
    Index i = 0, j = 0;
    score.maxCoeff(&i, &j);
    const Scalar sign = psi.atom(i).dot(phi.atom(j)) < Scalar(0) ? Scalar(-1) : Scalar(1);
    out.col(j) = sign * psi.atom(i);
    score.row(i).setConstant(Scalar(-1));
    score.col(j).setConstant(Scalar(-1));
  }
  return Dictionary<Scalar>(std::move(out));
}

} // namespace dictlearn
