#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace dictlearn {

template <typename Scalar> using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar> using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;

/// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankTol = 1e-12;
inline constexpr double kOpNormTol = 1e-10;
inline constexpr int kOpNormMaxIter = 10000;

class RankDeficientError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NonConvergenceError : public std::runtime_error {
public:
  NonConvergenceError(const std::string& what, double best_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate) {}
  double best_estimate() const noexcept { return best_estimate_; }

private:
  double best_estimate_;
};

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Strictly positive diagonal D_w, stored as its diagonal.
template <typename Scalar> class DiagonalWeights {
public:
  DiagonalWeights() = default;
  explicit DiagonalWeights(Vector<Scalar> values) : values_(std::move(values)) {
    for (Index k = 0; k < values_.size(); ++k) {
      if (!(values_[k] > Scalar(0)) || !std::isfinite(static_cast<double>(values_[k])))
        throw std::invalid_argument("DiagonalWeights: entries must be positive and finite");
    }
  }

  static DiagonalWeights sqrt_of(const Eigen::Ref<const VectorXd>& v) {
    return DiagonalWeights(v.cwiseSqrt().template cast<Scalar>());
  }

  const Vector<Scalar>& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }
  auto asDiagonal() const { return values_.asDiagonal(); }

private:
  Vector<Scalar> values_;
};

/// Maximal l2 norm of a column, ||A||_{2,1}.
template <typename Derived> typename Derived::RealScalar norm_2_1(const Eigen::MatrixBase<Derived>& a) {
  if (a.cols() == 0) return 0;
  return a.colwise().norm().maxCoeff();
}

/// Maximal l2 norm of a row, ||A||_{inf,2}.
template <typename Derived> typename Derived::RealScalar norm_inf_2(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() == 0) return 0;
  return a.rowwise().norm().maxCoeff();
}

/// Largest singular value by power iteration on A^T A from a fixed-seed
/// random start. Throws NonConvergenceError (with the last estimate) when the
/// relative change has not dropped below `tol` after `max_iter` sweeps.
template <typename Derived>
typename Derived::RealScalar op_norm(const Eigen::MatrixBase<Derived>& a, double tol = kOpNormTol,
                                     int max_iter = kOpNormMaxIter) {
  using Real = typename Derived::RealScalar;
  if (!(tol > 0)) throw std::invalid_argument("op_norm: tol must be positive");
  if (a.size() == 0) return Real(0);

  // Work on the smaller Gram side; singular values are shared.
  const bool use_rows = a.rows() < a.cols();
  const Index n = use_rows ? a.rows() : a.cols();

  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal;
  Vector<Real> v(n);
  for (Index i = 0; i < n; ++i) v[i] = Real(normal(rng));
  v.normalize();

  Vector<Real> w;
  Real estimate = 0;
  for (int it = 0; it < max_iter; ++it) {
    if (use_rows)
      w.noalias() = a * (a.adjoint() * v);
    else
      w.noalias() = a.adjoint() * (a * v);
    const Real lambda = w.norm();
    if (lambda == Real(0)) {
      // v landed in the null space; a nonzero matrix always has a column to restart from.
      if (a.isZero(0)) return Real(0);
      v.setZero();
      v[it % n] = 1;
      continue;
    }
    const Real next = std::sqrt(lambda);
    v = w / lambda;
    if (it > 0 && std::abs(next - estimate) <= Real(tol) * next) return next;
    estimate = next;
  }
  throw NonConvergenceError("op_norm: power iteration did not converge", static_cast<double>(estimate));
}

/// op_norm that falls back to the best estimate instead of throwing.
template <typename Derived> typename Derived::RealScalar op_norm_estimate(const Eigen::MatrixBase<Derived>& a) {
  try {
    return op_norm(a);
  } catch (const NonConvergenceError& e) {
    return static_cast<typename Derived::RealScalar>(e.best_estimate());
  }
}

/// Minimum-norm least-squares solution X of A X = B (X = A^+ B).
/// Throws RankDeficientError when sigma_min(A) < rank_tol * sigma_max(A).
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> least_squares_solve(const Eigen::MatrixBase<DerivedA>& a,
                                                       const Eigen::MatrixBase<DerivedB>& b,
                                                       double rank_tol = kRankTol) {
  using Scalar = typename DerivedA::Scalar;
  if (a.rows() != b.rows())
    throw DimensionError("least_squares_solve: A has " + std::to_string(a.rows()) + " rows, B has " +
                         std::to_string(b.rows()));
  Eigen::CompleteOrthogonalDecomposition<Matrix<Scalar>> cod(a.rows(), a.cols());
  cod.setThreshold(rank_tol);
  cod.compute(a);
  if (cod.rank() < std::min(a.rows(), a.cols()))
    throw RankDeficientError("least_squares_solve: matrix has numerical rank " + std::to_string(cod.rank()) +
                             " < " + std::to_string(std::min(a.rows(), a.cols())));
  return cod.solve(b);
}

/// A * D_w.
template <typename Derived, typename Scalar>
Matrix<typename Derived::Scalar> scale_columns(const Eigen::MatrixBase<Derived>& a, const DiagonalWeights<Scalar>& w) {
  if (a.cols() != w.size())
    throw DimensionError("scale_columns: " + std::to_string(a.cols()) + " columns vs " + std::to_string(w.size()) +
                         " weights");
  return a * w.values().template cast<typename Derived::Scalar>().asDiagonal();
}

/// D_w * A.
template <typename Derived, typename Scalar>
Matrix<typename Derived::Scalar> scale_rows(const Eigen::MatrixBase<Derived>& a, const DiagonalWeights<Scalar>& w) {
  if (a.rows() != w.size())
    throw DimensionError("scale_rows: " + std::to_string(a.rows()) + " rows vs " + std::to_string(w.size()) +
                         " weights");
  return w.values().template cast<typename Derived::Scalar>().asDiagonal() * a;
}

} // namespace dictlearn
