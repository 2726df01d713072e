#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "conducta/error.hpp"

namespace conducta {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Squared-exponential kernel hyperparameters. noise_var is the Gaussian
/// likelihood variance added to the diagonal of the training covariance.
template <typename Scalar = double>
struct Hyperparams {
  Scalar lengthscale = 1;
  Scalar signal_var = 1;
  Scalar noise_var = 0;

  bool valid() const {
    return std::isfinite(lengthscale) && lengthscale > 0 && std::isfinite(signal_var) && signal_var > 0 &&
           std::isfinite(noise_var) && noise_var >= 0;
  }

  void validate() const {
    if (!valid()) {
      throw InputError("hyperparameters need lengthscale > 0, signal_var > 0, noise_var >= 0 (all finite)");
    }
  }
};

/// k(x1, x2) = signal_var * exp(-|x1 - x2|^2 / (2 lengthscale^2)).
template <typename Scalar, typename A, typename B>
Scalar kernel(const Eigen::MatrixBase<A>& x1, const Eigen::MatrixBase<B>& x2, const Hyperparams<Scalar>& hp) {
  const Scalar sq = (x1 - x2).squaredNorm();
  return hp.signal_var * std::exp(-sq / (Scalar(2) * hp.lengthscale * hp.lengthscale));
}

/// Cross-covariance between the rows of x1 and the rows of x2.
template <typename Scalar>
Matrix<Scalar> kernel_matrix(const Matrix<Scalar>& x1, const Matrix<Scalar>& x2, const Hyperparams<Scalar>& hp) {
  if (x1.cols() != x2.cols()) throw InputError("kernel inputs have different dimensions");
  Matrix<Scalar> k(x1.rows(), x2.rows());
  for (Eigen::Index i = 0; i < x1.rows(); ++i)
    for (Eigen::Index j = 0; j < x2.rows(); ++j) k(i, j) = kernel(x1.row(i), x2.row(j), hp);
  return k;
}

/// Cholesky factor of a symmetric matrix with bounded diagonal jitter.
template <typename Scalar>
struct JitteredCholesky {
  Eigen::LLT<Matrix<Scalar>> llt;
  Scalar jitter = 0;  // absolute amount added to the diagonal
};

/// Factors `a`, retrying with jitter 1e-10 * scale, escalated tenfold up to
/// 1e-4 * scale. With try_without_jitter = false the first attempt already
/// carries the minimum jitter. A factor whose smallest pivot is at rounding
/// level relative to `scale` counts as a failure. Throws NumericalError with
/// the smallest eigenvalue of `a` when every attempt fails.
template <typename Scalar>
JitteredCholesky<Scalar> cholesky_with_jitter(const Matrix<Scalar>& a, Scalar scale, bool try_without_jitter = true) {
  const Eigen::Index n = a.rows();
  if (!(scale > 0) || !std::isfinite(scale)) scale = 1;
  const Scalar pivot_floor = Scalar(10) * std::numeric_limits<Scalar>::epsilon() * scale;
  auto attempt = [&](Scalar jitter, JitteredCholesky<Scalar>& out) {
    Matrix<Scalar> shifted = a;
    shifted.diagonal().array() += jitter;
    out.llt.compute(shifted);
    out.jitter = jitter;
    if (out.llt.info() != Eigen::Success) return false;
    const Matrix<Scalar>& l = out.llt.matrixLLT();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar d = l(i, i);
      if (!(d * d > pivot_floor) || !std::isfinite(d)) return false;
    }
    return true;
  };
  JitteredCholesky<Scalar> out;
  if (try_without_jitter && attempt(Scalar(0), out)) return out;
  for (Scalar rel = Scalar(1e-10); rel <= Scalar(1.0000001e-4); rel *= Scalar(10)) {
    if (attempt(rel * scale, out)) return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(a, Eigen::EigenvaluesOnly);
  std::ostringstream msg;
  msg.precision(6);
  msg << "Cholesky factorization failed after jitter up to 1e-4 x " << scale
      << "; smallest eigenvalue estimate " << (eig.info() == Eigen::Success ? eig.eigenvalues().minCoeff() : Scalar(NAN));
  throw NumericalError(msg.str());
}

template <typename Scalar = double>
struct Prediction {
  Vector<Scalar> mean;
  Matrix<Scalar> cov;
  Vector<Scalar> variance;  // diag(cov), negatives from rounding clamped to 0
};

struct FitOptions {
  /// Fit on (y - mean) / sd and map predictions back. Off by default.
  bool standardize = false;
};

/// Zero-mean GP regression with a squared-exponential kernel, factored once
/// at fit time: K + noise_var I = L L^T and alpha = (L L^T)^{-1} y.
template <typename Scalar = double>
class GaussianProcess {
 public:
  static GaussianProcess fit(Matrix<Scalar> x, Vector<Scalar> y, const Hyperparams<Scalar>& hp,
                             FitOptions options = {}) {
    hp.validate();
    if (x.rows() == 0) throw InputError("GP fit needs at least one training point");
    if (x.rows() != y.size()) throw InputError("GP fit: input and target counts differ");
    if (!x.allFinite() || !y.allFinite()) throw InputError("GP fit: non-finite training data");

    GaussianProcess gp;
    gp.x_ = std::move(x);
    gp.y_ = std::move(y);
    gp.hp_ = hp;
    if (options.standardize) {
      gp.offset_ = gp.y_.mean();
      const Scalar var = (gp.y_.array() - gp.offset_).square().mean();
      gp.scale_ = var > 0 ? std::sqrt(var) : Scalar(1);
    }
    Matrix<Scalar> k = kernel_matrix(gp.x_, gp.x_, hp);
    k.diagonal().array() += hp.noise_var;
    auto chol = cholesky_with_jitter<Scalar>(k, k.diagonal().mean());
    gp.llt_ = std::move(chol.llt);
    gp.jitter_ = chol.jitter;
    gp.alpha_ = gp.llt_.solve(gp.targets());
    return gp;
  }

  const Hyperparams<Scalar>& hyperparams() const noexcept { return hp_; }
  const Matrix<Scalar>& inputs() const noexcept { return x_; }
  const Vector<Scalar>& targets_raw() const noexcept { return y_; }
  const Vector<Scalar>& alpha() const noexcept { return alpha_; }
  Scalar jitter() const noexcept { return jitter_; }
  Eigen::Index size() const noexcept { return x_.rows(); }
  Eigen::Index dim() const noexcept { return x_.cols(); }

  /// Lower-triangular L with L L^T = K + (noise_var + jitter) I.
  Matrix<Scalar> cholesky_factor() const { return llt_.matrixL(); }

  /// Latent posterior at the rows of xstar: mean K*^T alpha and covariance
  /// K** - V^T V with V = L^{-1} K*. With full_covariance = false only the
  /// marginal variances are formed and `cov` is left empty.
  Prediction<Scalar> predict(const Matrix<Scalar>& xstar, bool full_covariance = true) const {
    if (xstar.cols() != x_.cols()) {
      throw InputError("prediction inputs have " + std::to_string(xstar.cols()) + " columns, model expects " +
                       std::to_string(x_.cols()));
    }
    const Matrix<Scalar> kstar = kernel_matrix(x_, xstar, hp_);
    const Matrix<Scalar> v = llt_.matrixL().solve(kstar);
    Prediction<Scalar> out;
    out.mean = (kstar.transpose() * alpha_).array() * scale_ + offset_;
    if (!full_covariance) {
      out.variance = ((hp_.signal_var - v.colwise().squaredNorm().transpose().array()) * scale_ * scale_)
                         .cwiseMax(Scalar(0));
      return out;
    }
    out.cov = kernel_matrix(xstar, xstar, hp_);
    out.cov.noalias() -= v.transpose() * v;
    out.cov = Scalar(0.5) * (out.cov + out.cov.transpose());
    out.cov *= scale_ * scale_;
    out.variance = out.cov.diagonal().cwiseMax(Scalar(0));
    return out;
  }

  /// log N(y | 0, K + noise_var I) = -1/2 y^T alpha - sum log L_ii - N/2 log 2pi.
  Scalar log_marginal_likelihood() const {
    const Matrix<Scalar>& l = llt_.matrixLLT();
    const Scalar n = static_cast<Scalar>(x_.rows());
    return Scalar(-0.5) * targets().dot(alpha_) - l.diagonal().array().log().sum() -
           Scalar(0.5) * n * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) - n * std::log(scale_);
  }

  /// `count` joint draws from N(mean, cov + jitter I) at the rows of xstar,
  /// one per column. Reproducible from `seed`.
  Matrix<Scalar> sample_posterior_functions(const Matrix<Scalar>& xstar, std::size_t count,
                                            std::uint64_t seed) const {
    if (count == 0) throw InputError("sample count must be at least 1");
    const auto pred = predict(xstar);
    const Scalar scale = hp_.signal_var * scale_ * scale_;
    const auto chol = cholesky_with_jitter<Scalar>(pred.cov, scale, false);
    const Matrix<Scalar> l = chol.llt.matrixL();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix<Scalar> z(xstar.rows(), static_cast<Eigen::Index>(count));
    for (Eigen::Index c = 0; c < z.cols(); ++c)
      for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) = static_cast<Scalar>(normal(rng));
    Matrix<Scalar> draws = l * z;
    draws.colwise() += pred.mean;
    return draws;
  }

 private:
  Vector<Scalar> targets() const { return (y_.array() - offset_) / scale_; }

  Matrix<Scalar> x_;
  Vector<Scalar> y_;
  Hyperparams<Scalar> hp_;
  Eigen::LLT<Matrix<Scalar>> llt_;
  Vector<Scalar> alpha_;
  Scalar jitter_ = 0;
  Scalar offset_ = 0;
  Scalar scale_ = 1;
};

using GpModel = GaussianProcess<double>;

}  // namespace conducta
