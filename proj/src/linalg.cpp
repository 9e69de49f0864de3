#include "condwalk/linalg.hpp"

#include <cmath>
#include <limits>

#include "condwalk/rng.hpp"

namespace condwalk {

SpdFactor::SpdFactor(Matrix m) : matrix(std::move(m)), llt(matrix) {
  if (llt.info() != Eigen::Success)
    throw DomainError("matrix is not symmetric positive-definite");
  log_det = 0.0;
  const auto& l = llt.matrixL();
  for (int i = 0; i < matrix.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
}

double SpdFactor::gaussian_log_density(const Vector& x, const Vector& mean) const {
  Vector z = llt.matrixL().solve(x - mean);
  return -0.5 * (matrix.rows() * kLog2Pi + log_det + z.squaredNorm());
}

double SpdFactor::gaussian_log_mode() const {
  return -0.5 * (matrix.rows() * kLog2Pi + log_det);
}

Vector SpdFactor::sample(const Vector& mean, RngStream& rng) const {
  return mean + llt.matrixL() * rng.normal_vector(static_cast<int>(matrix.rows()));
}

Matrix spd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
  Vector lambda = es.eigenvalues();
  if (lambda.minCoeff() <= 0.0)
    throw DomainError("matrix is not positive-definite, no SPD square root");
  return es.eigenvectors() * lambda.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

Matrix spd_inverse(const Matrix& m) {
  SpdFactor f(m);
  return f.llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

double gaussian_log_density(const Vector& x, const Vector& mean, const Matrix& cov) {
  return SpdFactor(cov).gaussian_log_density(x, mean);
}

double standard_normal_log_density(const Vector& x) {
  return -0.5 * (x.size() * kLog2Pi + x.squaredNorm());
}

namespace {

double pairwise_sum_impl(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum_impl(v.first(half)) + pairwise_sum_impl(v.subspan(half));
}

}  // namespace

double pairwise_sum(std::span<const double> values) { return pairwise_sum_impl(values); }

double log_sum_exp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values)
    if (v > m) m = v;
  if (!std::isfinite(m)) return m;
  std::vector<double> shifted(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) shifted[i] = std::exp(values[i] - m);
  return m + std::log(pairwise_sum(shifted));
}

MeanSe mean_and_se(std::span<const double> values) {
  MeanSe out;
  out.count = values.size();
  if (values.empty()) return out;
  out.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - out.mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / static_cast<double>(values.size() - 1);
  out.se = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

}  // namespace condwalk
