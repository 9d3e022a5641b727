#include "oracles.hpp"

#include <doctest.h>

using namespace dictlearn;

TEST_SUITE("linalg") {

TEST_CASE("op_norm on closed-form cases") {
  CHECK(op_norm(MatrixXd::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-12));
  MatrixXd d = MatrixXd::Zero(2, 2);
  d.diagonal() << 3, 1;
  CHECK(op_norm(d) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(op_norm(MatrixXd::Zero(4, 2)) == 0.0);
  CHECK(op_norm(MatrixXd(0, 3)) == 0.0);
}

TEST_CASE("op_norm matches a Jacobi SVD") {
  Rng rng(11);
  for (auto [r, c] : {std::pair<Index, Index>{4, 6}, {6, 4}, {1, 5}, {9, 9}}) {
    const MatrixXd a = oracle::gaussian(r, c, rng);
    CHECK(op_norm(a) == doctest::Approx(oracle::svd_opnorm(a)).epsilon(1e-8));
  }
}

TEST_CASE("op_norm reports non-convergence with its best estimate") {
  // Two nearly equal top singular values slow the power iteration down.
  MatrixXd a = MatrixXd::Zero(3, 3);
  a.diagonal() << 1.0, 1.0 - 1e-7, 0.5;
  try {
    (void)op_norm(a, 1e-16, 3);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.best_estimate() > 0.5);
    CHECK(e.best_estimate() <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS((void)op_norm(a, 0.0), std::invalid_argument);
}

TEST_CASE("op_norm is scale-equivariant and bounded by the Frobenius norm") {
  Rng rng(12);
  for (int t = 0; t < 20; ++t) {
    const MatrixXd a = oracle::gaussian(5, 7, rng);
    const double n = op_norm(a);
    CHECK(op_norm(MatrixXd(-2.5 * a)) == doctest::Approx(2.5 * n).epsilon(1e-8));
    CHECK(n <= a.norm() + 1e-12);
    CHECK(n >= a.colwise().norm().maxCoeff() - 1e-10);
  }
}

TEST_CASE("norm_2_1 and norm_inf_2") {
  CHECK(norm_2_1(MatrixXd::Identity(3, 3)) == 1.0);
  MatrixXd col(2, 1);
  col << 3, 4;
  CHECK(norm_2_1(col) == doctest::Approx(5.0));
  CHECK(norm_inf_2(MatrixXd::Identity(3, 3)) == 1.0);
  MatrixXd row(1, 3);
  row << 0, 2, 0;
  CHECK(norm_inf_2(row) == doctest::Approx(2.0));

  Rng rng(13);
  const MatrixXd a = oracle::gaussian(5, 7, rng);
  double col_max = 0, row_max = 0;
  for (Index j = 0; j < 7; ++j) {
    double s = 0;
    for (Index i = 0; i < 5; ++i) s += a(i, j) * a(i, j);
    col_max = std::max(col_max, std::sqrt(s));
  }
  for (Index i = 0; i < 5; ++i) {
    double s = 0;
    for (Index j = 0; j < 7; ++j) s += a(i, j) * a(i, j);
    row_max = std::max(row_max, std::sqrt(s));
  }
  CHECK(norm_2_1(a) == doctest::Approx(col_max).epsilon(1e-14));
  CHECK(norm_inf_2(a) == doctest::Approx(row_max).epsilon(1e-14));
}

TEST_CASE("least_squares_solve") {
  const MatrixXd b = (MatrixXd(3, 2) << 1, 2, 3, 4, 5, 6).finished();
  CHECK(least_squares_solve(MatrixXd::Identity(3, 3), b).isApprox(b, 1e-14));

  MatrixXd d = MatrixXd::Zero(2, 2);
  d.diagonal() << 2, 4;
  const VectorXd x = least_squares_solve(d, VectorXd((VectorXd(2) << 2, 8).finished()));
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));

  Rng rng(14);
  const MatrixXd a = oracle::gaussian(6, 3, rng);
  const MatrixXd x0 = oracle::gaussian(3, 2, rng);
  CHECK((least_squares_solve(a, a * x0) - x0).cwiseAbs().maxCoeff() < 1e-10);

  // Residual of an overdetermined fit is orthogonal to range(A).
  const VectorXd y = oracle::gaussian(6, 1, rng).col(0);
  const VectorXd r = y - a * least_squares_solve(a, y);
  CHECK((a.transpose() * r).norm() < 1e-12);
}

TEST_CASE("least_squares_solve rejects rank-deficient and mismatched input") {
  MatrixXd a(4, 2);
  a.col(0) << 1, 2, 3, 4;
  a.col(1) = a.col(0);
  CHECK_THROWS_AS((void)least_squares_solve(a, VectorXd::Ones(4)), RankDeficientError);
  CHECK_THROWS_AS((void)least_squares_solve(MatrixXd::Identity(3, 3), VectorXd::Ones(4)), DimensionError);
}

TEST_CASE("scale_columns and scale_rows") {
  const DiagonalWeights<double> ones(VectorXd::Ones(3));
  Rng rng(15);
  const MatrixXd a = oracle::gaussian(3, 3, rng);
  CHECK(scale_columns(a, ones) == a);

  const DiagonalWeights<double> w23(VectorXd((VectorXd(2) << 2, 3).finished()));
  MatrixXd expected = MatrixXd::Zero(2, 2);
  expected.diagonal() << 2, 3;
  CHECK(scale_columns(MatrixXd::Identity(2, 2), w23) == expected);

  const MatrixXd b = oracle::gaussian(4, 5, rng);
  VectorXd cw(5), rw(4);
  cw << 0.5, 1, 2, 3, 4;
  rw << 1, 0.25, 7, 2;
  const MatrixXd sc = scale_columns(b, DiagonalWeights<double>(cw));
  const MatrixXd sr = scale_rows(b, DiagonalWeights<double>(rw));
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 5; ++j) {
      CHECK(sc(i, j) == doctest::Approx(b(i, j) * cw[j]));
      CHECK(sr(i, j) == doctest::Approx(b(i, j) * rw[i]));
    }
  CHECK_THROWS_AS((void)scale_columns(b, DiagonalWeights<double>(rw)), DimensionError);
  CHECK_THROWS_AS((void)scale_rows(b, DiagonalWeights<double>(cw)), DimensionError);
}

TEST_CASE("DiagonalWeights validates entries") {
  CHECK_THROWS_AS(DiagonalWeights<double>(VectorXd::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(DiagonalWeights<double>(VectorXd::Constant(2, -1)), std::invalid_argument);
  CHECK_THROWS_AS(DiagonalWeights<double>(VectorXd::Constant(2, std::numeric_limits<double>::infinity())),
                  std::invalid_argument);
  const auto w = DiagonalWeights<double>::sqrt_of(VectorXd::Constant(3, 0.25));
  CHECK(w.values().isApprox(VectorXd::Constant(3, 0.5)));
}

TEST_CASE("float instantiation") {
  Eigen::MatrixXf a = Eigen::MatrixXf::Identity(3, 3) * 2.0f;
  CHECK(op_norm(a) == doctest::Approx(2.0f).epsilon(1e-5));
  CHECK(norm_2_1(a) == doctest::Approx(2.0f));
}

} // TEST_SUITE
