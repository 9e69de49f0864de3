#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "condwalk/linalg.hpp"
#include "condwalk/rng.hpp"
#include "condwalk/types.hpp"

namespace condwalk {

/// A light-tailed base law with an analytic cumulant generating function
/// K(t) = log E exp<t, X>, its derivatives up to order four, a density and a
/// sampler. Instances are immutable and safe to share across workers.
///
/// Built-in families override the cumulant accessors with exact formulas.
/// The base-class fallbacks differentiate K numerically (central differences,
/// step h_j = eps^(1/6) * (1 + |t_j|)) and are meant for user extensions only:
/// order-3/4 difference quotients lose precision quickly.
class CumulantModel {
 public:
  virtual ~CumulantModel() = default;

  virtual int dim() const = 0;
  virtual std::string describe() const = 0;

  /// Returns a human-readable description of the violated constraint when t
  /// lies outside the open tilt domain, nullopt when t is strictly inside.
  virtual std::optional<std::string> tilt_violation(const Vector& t) const = 0;
  bool tilt_in_domain(const Vector& t) const { return !tilt_violation(t).has_value(); }

  /// K(t); callers must keep t inside the tilt domain (see log_mgf below for
  /// the checked entry point).
  virtual double log_mgf_unchecked(const Vector& t) const = 0;

  virtual Vector mean(const Vector& t) const;
  virtual Matrix covariance(const Vector& t) const;
  virtual Tensor3 third_cumulant(const Vector& t) const;
  virtual Tensor4 fourth_cumulant(const Vector& t) const;

  virtual double base_log_density(const Vector& x) const = 0;
  virtual Vector base_sample(RngStream& rng) const = 0;

  /// Exact sampler for the tilted law pi^alpha with tilt t when the family
  /// supports one. The fallback runs acceptance-rejection against the base
  /// density, which requires sup_x <t, x> to be finite on the support.
  virtual Vector tilted_sample(const Vector& t, RngStream& rng) const;

  /// sup over the support of <t, x>, when finite and known.
  virtual std::optional<double> support_tilt_bound(const Vector& t) const {
    (void)t;
    return std::nullopt;
  }

  /// Exact check that alpha lies strictly inside the attainable-mean region,
  /// when the family knows its region. Unknown regions return true and leave
  /// detection to the Newton solver.
  virtual bool mean_attainable(const Vector& alpha) const {
    (void)alpha;
    return true;
  }

  Vector base_mean() const { return mean(Vector::Zero(dim())); }
};

using ModelPtr = std::shared_ptr<const CumulantModel>;

// Checked operations; domain violations raise DomainError carrying the
// violated constraint.
double log_mgf(const CumulantModel& model, const Vector& t);
Vector mean_map(const CumulantModel& model, const Vector& t);
Matrix covariance_map(const CumulantModel& model, const Vector& t);
Tensor3 third_cumulant(const CumulantModel& model, const Vector& t);
Tensor4 fourth_cumulant(const CumulantModel& model, const Vector& t);
double base_density(const CumulantModel& model, const Vector& x);
Vector base_sample(const CumulantModel& model, RngStream& rng);

/// Multivariate Gaussian N(mean, cov). All cumulants above order two vanish.
class GaussianModel : public CumulantModel {
 public:
  GaussianModel(Vector mean, Matrix cov);

  int dim() const override { return static_cast<int>(mean_.size()); }
  std::string describe() const override;
  std::optional<std::string> tilt_violation(const Vector&) const override { return std::nullopt; }
  double log_mgf_unchecked(const Vector& t) const override;
  Vector mean(const Vector& t) const override { return mean_ + cov_.matrix * t; }
  Matrix covariance(const Vector&) const override { return cov_.matrix; }
  Tensor3 third_cumulant(const Vector&) const override { return Tensor3(dim()); }
  Tensor4 fourth_cumulant(const Vector&) const override { return Tensor4(dim()); }
  double base_log_density(const Vector& x) const override;
  Vector base_sample(RngStream& rng) const override;
  Vector tilted_sample(const Vector& t, RngStream& rng) const override;
  bool mean_attainable(const Vector&) const override { return true; }

  const Vector& mean_vector() const { return mean_; }
  const Matrix& covariance_matrix() const { return cov_.matrix; }

 private:
  Vector mean_;
  SpdFactor cov_;
};

/// Scalar component of a product model. Families: gaussian(mu, sigma),
/// exponential(rate), gamma(shape, rate); each carries its own open tilt
/// interval and exact cumulant derivatives.
struct ScalarFamily {
  enum class Kind { Gaussian, Exponential, Gamma };
  Kind kind = Kind::Gaussian;
  double p1 = 0.0;  // mu        | rate | shape
  double p2 = 1.0;  // sigma     | -    | rate

  double tilt_upper() const;  // open upper bound of the tilt interval
  double log_mgf(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  double d3(double t) const;
  double d4(double t) const;
  double log_density(double x) const;
  double sample(RngStream& rng) const;
  double tilted_sample(double t, RngStream& rng) const;
  // open interval of attainable means
  double mean_lower() const;
  double mean_upper() const;
  std::string name() const;
};

/// Independent product of scalar families; cumulant tensors are diagonal.
class ProductModel : public CumulantModel {
 public:
  explicit ProductModel(std::vector<ScalarFamily> components);

  int dim() const override { return static_cast<int>(components_.size()); }
  std::string describe() const override;
  std::optional<std::string> tilt_violation(const Vector& t) const override;
  double log_mgf_unchecked(const Vector& t) const override;
  Vector mean(const Vector& t) const override;
  Matrix covariance(const Vector& t) const override;
  Tensor3 third_cumulant(const Vector& t) const override;
  Tensor4 fourth_cumulant(const Vector& t) const override;
  double base_log_density(const Vector& x) const override;
  Vector base_sample(RngStream& rng) const override;
  Vector tilted_sample(const Vector& t, RngStream& rng) const override;
  std::optional<double> support_tilt_bound(const Vector& t) const override;
  bool mean_attainable(const Vector& alpha) const override;

  const std::vector<ScalarFamily>& components() const { return components_; }

 private:
  std::vector<ScalarFamily> components_;
};

/// Law of U = A X for a base model X and an s x d matrix A of full row rank.
/// Cumulants are exact pullbacks, K_U(t) = K_X(A^t t); the density of U has
/// no closed form in general, so base_log_density is unavailable unless the
/// base is Gaussian (in which case pushforward_model returns a GaussianModel
/// instead of this class).
class LinearPushforwardModel : public CumulantModel {
 public:
  LinearPushforwardModel(ModelPtr base, Matrix a);

  int dim() const override { return static_cast<int>(a_.rows()); }
  std::string describe() const override;
  std::optional<std::string> tilt_violation(const Vector& t) const override;
  double log_mgf_unchecked(const Vector& t) const override;
  Vector mean(const Vector& t) const override;
  Matrix covariance(const Vector& t) const override;
  Tensor3 third_cumulant(const Vector& t) const override;
  Tensor4 fourth_cumulant(const Vector& t) const override;
  double base_log_density(const Vector& x) const override;
  Vector base_sample(RngStream& rng) const override;
  Vector tilted_sample(const Vector& t, RngStream& rng) const override;

  const Matrix& map() const { return a_; }
  const ModelPtr& base() const { return base_; }

 private:
  ModelPtr base_;
  Matrix a_;
};

/// The conditioning statistic u: R^d -> R^s.
struct UMapSpec {
  enum class Kind { Identity, Linear, Custom };
  Kind kind = Kind::Identity;
  Matrix matrix;  // Linear
  std::function<Vector(const Vector&)> evaluator;  // Custom
  ModelPtr u_model;  // required for Custom
  int output_dim = 0;

  static UMapSpec identity();
  static UMapSpec linear(Matrix a);
  static UMapSpec custom(std::function<Vector(const Vector&)> u, int s, ModelPtr u_model);

  Vector apply(const Vector& x) const;
};

/// Model of U = u(X): the input model for Identity, the exact pullback for
/// Linear, the user-supplied model for Custom (errors without one).
ModelPtr pushforward_model(const ModelPtr& model, const UMapSpec& umap);

// Convenience constructors.
ModelPtr make_standard_gaussian(int dim);
ModelPtr make_gaussian(Vector mean, Matrix cov);
ModelPtr make_exponential(double rate);
ModelPtr make_gamma(double shape, double rate);
ModelPtr make_product(std::vector<ScalarFamily> components);

}  // namespace condwalk
