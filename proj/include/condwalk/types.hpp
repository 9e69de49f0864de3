#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace condwalk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a tilt parameter or target mean leaves the admissible region.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative routine fails to reach its tolerance.
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed user input (JSON specs, CLI options, file paths).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric order-3 tensor stored densely; entries addressed by (i,j,l).
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int dim) : dim_(dim), data_(dim * dim * dim, 0.0) {}

  int dim() const { return dim_; }
  double operator()(int i, int j, int l) const { return data_[(i * dim_ + j) * dim_ + l]; }
  double& operator()(int i, int j, int l) { return data_[(i * dim_ + j) * dim_ + l]; }

  bool is_zero() const {
    for (double v : data_)
      if (v != 0.0) return false;
    return true;
  }

  /// Pushforward along a linear map: out^{jlm} = sum A_{ja} A_{lb} A_{mc} in^{abc}.
  Tensor3 transform(const Matrix& a) const {
    const int s = static_cast<int>(a.rows());
    Tensor3 out(s);
    for (int j = 0; j < s; ++j)
      for (int l = 0; l < s; ++l)
        for (int m = 0; m < s; ++m) {
          double acc = 0.0;
          for (int p = 0; p < dim_; ++p)
            for (int q = 0; q < dim_; ++q)
              for (int r = 0; r < dim_; ++r)
                acc += a(j, p) * a(l, q) * a(m, r) * (*this)(p, q, r);
          out(j, l, m) = acc;
        }
    return out;
  }

 private:
  int dim_ = 0;
  std::vector<double> data_;
};

/// Symmetric order-4 tensor stored densely.
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int dim) : dim_(dim), data_(static_cast<size_t>(dim) * dim * dim * dim, 0.0) {}

  int dim() const { return dim_; }
  double operator()(int i, int j, int l, int m) const {
    return data_[((static_cast<size_t>(i) * dim_ + j) * dim_ + l) * dim_ + m];
  }
  double& operator()(int i, int j, int l, int m) {
    return data_[((static_cast<size_t>(i) * dim_ + j) * dim_ + l) * dim_ + m];
  }

  Tensor4 transform(const Matrix& a) const {
    const int s = static_cast<int>(a.rows());
    Tensor4 out(s);
    for (int j = 0; j < s; ++j)
      for (int l = 0; l < s; ++l)
        for (int m = 0; m < s; ++m)
          for (int q = 0; q < s; ++q) {
            double acc = 0.0;
            for (int p1 = 0; p1 < dim_; ++p1)
              for (int p2 = 0; p2 < dim_; ++p2)
                for (int p3 = 0; p3 < dim_; ++p3)
                  for (int p4 = 0; p4 < dim_; ++p4)
                    acc += a(j, p1) * a(l, p2) * a(m, p3) * a(q, p4) * (*this)(p1, p2, p3, p4);
            out(j, l, m, q) = acc;
          }
    return out;
  }

 private:
  int dim_ = 0;
  std::vector<double> data_;
};

}  // namespace condwalk
