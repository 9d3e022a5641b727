#pragma once

#include "dictlearn/linalg.hpp"
#include "dictlearn/parallel.hpp"
#include "dictlearn/random.hpp"
#include "dictlearn/sampling.hpp"

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

namespace dictlearn {

template <typename Scalar> using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Index>;

template <typename Scalar> constexpr double unit_norm_tol() {
  return std::max(1e-12, 1e3 * static_cast<double>(std::numeric_limits<Scalar>::epsilon()));
}

/// d x K matrix whose columns (atoms) have unit l2 norm.
template <typename Scalar> class Dictionary {
public:
  Dictionary() = default;

  /// Takes ownership of already normalised atoms; throws if any column is off the unit sphere.
  explicit Dictionary(Matrix<Scalar> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.rows() < 1 || atoms_.cols() < 1) throw DimensionError("Dictionary: empty atom matrix");
    if (!atoms_.allFinite()) throw std::invalid_argument("Dictionary: non-finite entry");
    for (Index k = 0; k < atoms_.cols(); ++k) {
      const double n = static_cast<double>(atoms_.col(k).norm());
      if (std::abs(n - 1.0) > unit_norm_tol<Scalar>())
        throw std::invalid_argument("Dictionary: atom " + std::to_string(k) + " has norm " + std::to_string(n));
    }
  }

  /// Normalises every column; zero columns are rejected.
  static Dictionary normalized(Matrix<Scalar> raw) {
    for (Index k = 0; k < raw.cols(); ++k) {
      const Scalar n = raw.col(k).norm();
      if (!(n > Scalar(0))) throw std::invalid_argument("Dictionary::normalized: zero column " + std::to_string(k));
      raw.col(k) /= n;
    }
    return Dictionary(std::move(raw));
  }

  const Matrix<Scalar>& atoms() const noexcept { return atoms_; }
  Index d() const noexcept { return atoms_.rows(); }
  Index K() const noexcept { return atoms_.cols(); }
  auto atom(Index k) const { return atoms_.col(k); }

  template <typename Other> Dictionary<Other> cast() const {
    return Dictionary<Other>::normalized(atoms_.template cast<Other>());
  }

private:
  Matrix<Scalar> atoms_;
};

enum class DictionaryKind { RandomUnitSphere, Identity, DctOvercomplete };

inline DictionaryKind parse_dictionary_kind(const std::string& name) {
  if (name == "random-unit-sphere") return DictionaryKind::RandomUnitSphere;
  if (name == "identity") return DictionaryKind::Identity;
  if (name == "dct-like-overcomplete") return DictionaryKind::DctOvercomplete;
  throw std::invalid_argument("unknown dictionary kind '" + name + "'");
}

inline std::string to_string(DictionaryKind kind) {
  switch (kind) {
  case DictionaryKind::RandomUnitSphere: return "random-unit-sphere";
  case DictionaryKind::Identity: return "identity";
  case DictionaryKind::DctOvercomplete: return "dct-like-overcomplete";
  }
  return "unknown";
}

template <typename Scalar = double>
Dictionary<Scalar> generate_dictionary(Index d, Index K, DictionaryKind kind, Rng& rng) {
  if (d < 1 || K < 1) throw DimensionError("generate_dictionary: d and K must be positive");
  Matrix<Scalar> atoms(d, K);
  switch (kind) {
  case DictionaryKind::Identity:
    if (d != K) throw DimensionError("generate_dictionary: identity needs d == K");
    atoms.setIdentity();
    break;
  case DictionaryKind::RandomUnitSphere: {
    std::normal_distribution<double> normal;
    for (Index k = 0; k < K; ++k)
      for (Index i = 0; i < d; ++i) atoms(i, k) = Scalar(normal(rng));
    break;
  }
  case DictionaryKind::DctOvercomplete:
    if (K < d) throw DimensionError("generate_dictionary: overcomplete kind needs K >= d");
    for (Index k = 0; k < K; ++k)
      for (Index i = 0; i < d; ++i)
        atoms(i, k) = Scalar(std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) * static_cast<double>(k) /
                                      static_cast<double>(K)));
    break;
  }
  return Dictionary<Scalar>::normalized(std::move(atoms));
}

/// Distribution of the coefficient magnitudes c_i.
struct CoefficientModel {
  enum class Distribution { UniformInterval, Constant };

  double c_min = 1.0;
  double c_max = 1.0;
  Distribution distribution = Distribution::UniformInterval;

  static CoefficientModel uniform(double lo, double hi) {
    CoefficientModel m{lo, hi, Distribution::UniformInterval};
    m.validate();
    return m;
  }
  static CoefficientModel constant(double c) {
    CoefficientModel m{c, c, Distribution::Constant};
    m.validate();
    return m;
  }

  void validate() const {
    if (!(c_min > 0) || !(c_min <= c_max) || !(c_max <= 1))
      throw std::invalid_argument("CoefficientModel: need 0 < c_min <= c_max <= 1");
    if (distribution == Distribution::Constant && c_min != c_max)
      throw std::invalid_argument("CoefficientModel: constant distribution needs c_min == c_max");
  }

  double gamma() const noexcept { return c_min / c_max; }
};

/// E[c^2] of the coefficient distribution.
inline double beta_of(const CoefficientModel& coeff) {
  coeff.validate();
  if (coeff.distribution == CoefficientModel::Distribution::Constant) return coeff.c_min * coeff.c_min;
  const double a = coeff.c_min, b = coeff.c_max;
  return (a * a + a * b + b * b) / 3.0;
}

/// Training signals Y = Phi X with the ground truth that produced them.
template <typename Scalar> struct SignalBatch {
  Matrix<Scalar> Y;
  SparseMatrix<Scalar> X;
  std::vector<Support> supports;

  Index size() const noexcept { return Y.cols(); }
};

/// Draws N signals y = Phi_I x_I, x = 1_I . c . sigma, with an independent
/// rejective support, coefficients and Rademacher signs per signal. The
/// per-signal generators are derived from one draw of `rng`, so the batch
/// does not depend on the worker count.
template <typename Scalar>
SignalBatch<Scalar> generate_batch(const Dictionary<Scalar>& dict, const SupportModel& model,
                                   const CoefficientModel& coeff, Index N, Rng& rng) {
  if (model.K() != dict.K()) throw DimensionError("generate_batch: model K differs from dictionary K");
  coeff.validate();
  const std::uint64_t stream = rng();
  const auto S = static_cast<std::size_t>(model.S());
  const auto n_signals = static_cast<std::size_t>(N);

  SignalBatch<Scalar> batch;
  batch.Y.resize(dict.d(), N);
  batch.supports.resize(n_signals);
  std::vector<Scalar> values(n_signals * S);

  parallel_for(n_signals, [&](std::size_t begin, std::size_t end) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t n = begin; n < end; ++n) {
      Rng local(derive_seed(stream, n));
      Support support = rejective_sample(model, local);
      auto y = batch.Y.col(static_cast<Index>(n));
      y.setZero();
      for (std::size_t s = 0; s < S; ++s) {
        const double c = coeff.distribution == CoefficientModel::Distribution::Constant
                             ? coeff.c_min
                             : coeff.c_min + (coeff.c_max - coeff.c_min) * unif(local);
        const double sign = unif(local) < 0.5 ? -1.0 : 1.0;
        const Scalar x = Scalar(c * sign);
        values[n * S + s] = x;
        y += x * dict.atom(support[s]);
      }
      batch.supports[n] = std::move(support);
    }
  });

  std::vector<Eigen::Triplet<Scalar, Index>> triplets;
  triplets.reserve(n_signals * S);
  for (std::size_t n = 0; n < n_signals; ++n)
    for (std::size_t s = 0; s < S; ++s)
      triplets.emplace_back(batch.supports[n][s], static_cast<Index>(n), values[n * S + s]);
  batch.X.resize(dict.K(), N);
  batch.X.setFromTriplets(triplets.begin(), triplets.end());
  return batch;
}

/// One signal per row, comma separated (debug export).
template <typename Scalar> void write_batch_csv(const SignalBatch<Scalar>& batch, std::ostream& out) {
  const auto old_precision = out.precision(17);
  for (Index n = 0; n < batch.Y.cols(); ++n) {
    for (Index i = 0; i < batch.Y.rows(); ++i) {
      if (i) out << ',';
      out << batch.Y(i, n);
    }
    out << '\n';
  }
  out.precision(old_precision);
}

} // namespace dictlearn
