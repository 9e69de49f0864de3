#pragma once

#include <span>

#include "condwalk/types.hpp"

namespace condwalk {

inline constexpr double kLog2Pi = 1.8378770664093454836;

/// Cholesky-backed view of an SPD matrix for repeated density evaluations.
struct SpdFactor {
  Matrix matrix;
  Eigen::LLT<Matrix> llt;
  double log_det = 0.0;

  SpdFactor() = default;
  explicit SpdFactor(Matrix m);

  /// log of the multivariate normal density n(x; mean, matrix).
  double gaussian_log_density(const Vector& x, const Vector& mean) const;
  /// Gaussian mode value ((2*pi)^d det)^(-1/2) in log form.
  double gaussian_log_mode() const;
  Vector solve(const Vector& b) const { return llt.solve(b); }
  Vector sample(const Vector& mean, class RngStream& rng) const;
};

/// Unique symmetric positive-definite square root (eigendecomposition route).
Matrix spd_sqrt(const Matrix& m);

/// Inverse through the SPD factorization.
Matrix spd_inverse(const Matrix& m);

double gaussian_log_density(const Vector& x, const Vector& mean, const Matrix& cov);

/// Standard normal density n_d(x; 0, I) in log form.
double standard_normal_log_density(const Vector& x);

/// Order-insensitive pairwise summation.
double pairwise_sum(std::span<const double> values);

double log_sum_exp(std::span<const double> values);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

/// Mean and standard error via pairwise reduction.
MeanSe mean_and_se(std::span<const double> values);

}  // namespace condwalk
