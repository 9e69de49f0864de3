#include "condwalk/model.hpp"

#include <cmath>
#include <sstream>

namespace condwalk {

namespace {

double fd_step(double t) {
  static const double base = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 6.0);
  return base * (1.0 + std::abs(t));
}

}  // namespace

// ---------------------------------------------------------------------------
// Checked free functions

double log_mgf(const CumulantModel& model, const Vector& t) {
  if (auto violation = model.tilt_violation(t))
    throw DomainError("tilt out of domain: " + *violation);
  return model.log_mgf_unchecked(t);
}

Vector mean_map(const CumulantModel& model, const Vector& t) {
  if (auto violation = model.tilt_violation(t))
    throw DomainError("tilt out of domain: " + *violation);
  return model.mean(t);
}

Matrix covariance_map(const CumulantModel& model, const Vector& t) {
  if (auto violation = model.tilt_violation(t))
    throw DomainError("tilt out of domain: " + *violation);
  return model.covariance(t);
}

Tensor3 third_cumulant(const CumulantModel& model, const Vector& t) {
  if (auto violation = model.tilt_violation(t))
    throw DomainError("tilt out of domain: " + *violation);
  return model.third_cumulant(t);
}

Tensor4 fourth_cumulant(const CumulantModel& model, const Vector& t) {
  if (auto violation = model.tilt_violation(t))
    throw DomainError("tilt out of domain: " + *violation);
  return model.fourth_cumulant(t);
}

double base_density(const CumulantModel& model, const Vector& x) {
  return std::exp(model.base_log_density(x));
}

Vector base_sample(const CumulantModel& model, RngStream& rng) { return model.base_sample(rng); }

// ---------------------------------------------------------------------------
// Finite-difference fallbacks on K

Vector CumulantModel::mean(const Vector& t) const {
  const int d = dim();
  Vector g(d);
  for (int j = 0; j < d; ++j) {
    const double h = fd_step(t(j));
    Vector tp = t, tm = t;
    tp(j) += h;
    tm(j) -= h;
    g(j) = (log_mgf_unchecked(tp) - log_mgf_unchecked(tm)) / (2.0 * h);
  }
  return g;
}

Matrix CumulantModel::covariance(const Vector& t) const {
  const int d = dim();
  Matrix h(d, d);
  const double k0 = log_mgf_unchecked(t);
  for (int j = 0; j < d; ++j) {
    const double hj = fd_step(t(j));
    for (int l = j; l < d; ++l) {
      const double hl = fd_step(t(l));
      if (j == l) {
        Vector tp = t, tm = t;
        tp(j) += hj;
        tm(j) -= hj;
        h(j, j) = (log_mgf_unchecked(tp) - 2.0 * k0 + log_mgf_unchecked(tm)) / (hj * hj);
      } else {
        Vector tpp = t, tpm = t, tmp = t, tmm = t;
        tpp(j) += hj; tpp(l) += hl;
        tpm(j) += hj; tpm(l) -= hl;
        tmp(j) -= hj; tmp(l) += hl;
        tmm(j) -= hj; tmm(l) -= hl;
        h(j, l) = (log_mgf_unchecked(tpp) - log_mgf_unchecked(tpm) - log_mgf_unchecked(tmp) +
                   log_mgf_unchecked(tmm)) /
                  (4.0 * hj * hl);
        h(l, j) = h(j, l);
      }
    }
  }
  return h;
}

Tensor3 CumulantModel::third_cumulant(const Vector& t) const {
  // Central difference of the Hessian along each coordinate; symmetrized.
  const int d = dim();
  Tensor3 out(d);
  for (int m = 0; m < d; ++m) {
    const double h = fd_step(t(m));
    Vector tp = t, tm = t;
    tp(m) += h;
    tm(m) -= h;
    Matrix diff = (covariance(tp) - covariance(tm)) / (2.0 * h);
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l) out(j, l, m) = diff(j, l);
  }
  // enforce exact index symmetry
  Tensor3 sym(d);
  for (int j = 0; j < d; ++j)
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m)
        sym(j, l, m) = (out(j, l, m) + out(j, m, l) + out(l, j, m) + out(l, m, j) +
                        out(m, j, l) + out(m, l, j)) /
                       6.0;
  return sym;
}

Tensor4 CumulantModel::fourth_cumulant(const Vector& t) const {
  const int d = dim();
  Tensor4 out(d);
  for (int q = 0; q < d; ++q) {
    const double h = fd_step(t(q));
    Vector tp = t, tm = t;
    tp(q) += h;
    tm(q) -= h;
    Tensor3 cp = third_cumulant(tp);
    Tensor3 cm = third_cumulant(tm);
    for (int j = 0; j < d; ++j)
      for (int l = 0; l < d; ++l)
        for (int m = 0; m < d; ++m) out(j, l, m, q) = (cp(j, l, m) - cm(j, l, m)) / (2.0 * h);
  }
  Tensor4 sym(d);
  for (int j = 0; j < d; ++j)
    for (int l = 0; l < d; ++l)
      for (int m = 0; m < d; ++m)
        for (int q = 0; q < d; ++q) {
          // average over the 4 cyclic placements of the outermost index; the
          // inner tensor is already symmetric
          sym(j, l, m, q) =
              (out(j, l, m, q) + out(q, j, l, m) + out(m, q, j, l) + out(l, m, q, j)) / 4.0;
        }
  return sym;
}

Vector CumulantModel::tilted_sample(const Vector& t, RngStream& rng) const {
  auto bound = support_tilt_bound(t);
  if (!bound)
    throw DomainError("no sampler available: <t,x> is unbounded on the support and "
                      "the family has no exact tilted sampler");
  const double log_phi = log_mgf_unchecked(t);
  (void)log_phi;
  for (int tries = 0; tries < 1 << 22; ++tries) {
    Vector x = base_sample(rng);
    const double log_accept = t.dot(x) - *bound;
    if (std::log(rng.uniform()) < log_accept) return x;
  }
  throw SolveError("tilted rejection sampler starved");
}

// ---------------------------------------------------------------------------
// GaussianModel

GaussianModel::GaussianModel(Vector mean, Matrix cov) : mean_(std::move(mean)) {
  if (cov.rows() != cov.cols() || cov.rows() != mean_.size())
    throw ConfigError("gaussian model: covariance shape does not match mean");
  cov_ = SpdFactor(std::move(cov));
}

std::string GaussianModel::describe() const {
  std::ostringstream os;
  os << "gaussian(d=" << dim() << ")";
  return os.str();
}

double GaussianModel::log_mgf_unchecked(const Vector& t) const {
  return mean_.dot(t) + 0.5 * t.dot(cov_.matrix * t);
}

double GaussianModel::base_log_density(const Vector& x) const {
  return cov_.gaussian_log_density(x, mean_);
}

Vector GaussianModel::base_sample(RngStream& rng) const { return cov_.sample(mean_, rng); }

Vector GaussianModel::tilted_sample(const Vector& t, RngStream& rng) const {
  // exponential tilt of a Gaussian is a mean shift
  return cov_.sample(mean_ + cov_.matrix * t, rng);
}

// ---------------------------------------------------------------------------
// ScalarFamily

double ScalarFamily::tilt_upper() const {
  switch (kind) {
    case Kind::Gaussian: return std::numeric_limits<double>::infinity();
    case Kind::Exponential: return p1;
    case Kind::Gamma: return p2;
  }
  return 0.0;
}

double ScalarFamily::log_mgf(double t) const {
  switch (kind) {
    case Kind::Gaussian: return p1 * t + 0.5 * p2 * p2 * t * t;
    case Kind::Exponential: return std::log(p1) - std::log(p1 - t);
    case Kind::Gamma: return p1 * (std::log(p2) - std::log(p2 - t));
  }
  return 0.0;
}

double ScalarFamily::d1(double t) const {
  switch (kind) {
    case Kind::Gaussian: return p1 + p2 * p2 * t;
    case Kind::Exponential: return 1.0 / (p1 - t);
    case Kind::Gamma: return p1 / (p2 - t);
  }
  return 0.0;
}

double ScalarFamily::d2(double t) const {
  switch (kind) {
    case Kind::Gaussian: return p2 * p2;
    case Kind::Exponential: { const double r = p1 - t; return 1.0 / (r * r); }
    case Kind::Gamma: { const double r = p2 - t; return p1 / (r * r); }
  }
  return 0.0;
}

double ScalarFamily::d3(double t) const {
  switch (kind) {
    case Kind::Gaussian: return 0.0;
    case Kind::Exponential: { const double r = p1 - t; return 2.0 / (r * r * r); }
    case Kind::Gamma: { const double r = p2 - t; return 2.0 * p1 / (r * r * r); }
  }
  return 0.0;
}

double ScalarFamily::d4(double t) const {
  switch (kind) {
    case Kind::Gaussian: return 0.0;
    case Kind::Exponential: { const double r = p1 - t; return 6.0 / (r * r * r * r); }
    case Kind::Gamma: { const double r = p2 - t; return 6.0 * p1 / (r * r * r * r); }
  }
  return 0.0;
}

double ScalarFamily::log_density(double x) const {
  switch (kind) {
    case Kind::Gaussian: {
      const double z = (x - p1) / p2;
      return -0.5 * (kLog2Pi + z * z) - std::log(p2);
    }
    case Kind::Exponential:
      if (x < 0.0) return -std::numeric_limits<double>::infinity();
      return std::log(p1) - p1 * x;
    case Kind::Gamma:
      if (x <= 0.0) return -std::numeric_limits<double>::infinity();
      return p1 * std::log(p2) + (p1 - 1.0) * std::log(x) - p2 * x - std::lgamma(p1);
  }
  return 0.0;
}

double ScalarFamily::sample(RngStream& rng) const {
  switch (kind) {
    case Kind::Gaussian: return p1 + p2 * rng.normal();
    case Kind::Exponential: return rng.exponential(p1);
    case Kind::Gamma: return rng.gamma(p1, p2);
  }
  return 0.0;
}

double ScalarFamily::tilted_sample(double t, RngStream& rng) const {
  // tilt maps exponential(r) -> exponential(r - t), gamma(k, r) -> gamma(k, r - t)
  switch (kind) {
    case Kind::Gaussian: return p1 + p2 * p2 * t + p2 * rng.normal();
    case Kind::Exponential: return rng.exponential(p1 - t);
    case Kind::Gamma: return rng.gamma(p1, p2 - t);
  }
  return 0.0;
}

double ScalarFamily::mean_lower() const {
  return kind == Kind::Gaussian ? -std::numeric_limits<double>::infinity() : 0.0;
}

double ScalarFamily::mean_upper() const { return std::numeric_limits<double>::infinity(); }

std::string ScalarFamily::name() const {
  switch (kind) {
    case Kind::Gaussian: return "gaussian";
    case Kind::Exponential: return "exponential";
    case Kind::Gamma: return "gamma";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// ProductModel

ProductModel::ProductModel(std::vector<ScalarFamily> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ConfigError("product model needs at least one component");
}

std::string ProductModel::describe() const {
  std::ostringstream os;
  os << "product(";
  for (size_t i = 0; i < components_.size(); ++i)
    os << (i ? "," : "") << components_[i].name();
  os << ")";
  return os.str();
}

std::optional<std::string> ProductModel::tilt_violation(const Vector& t) const {
  for (size_t j = 0; j < components_.size(); ++j) {
    const double upper = components_[j].tilt_upper();
    if (t(static_cast<int>(j)) >= upper) {
      std::ostringstream os;
      os << "coordinate " << j << ": t = " << t(static_cast<int>(j)) << " must be < " << upper;
      return os.str();
    }
  }
  return std::nullopt;
}

double ProductModel::log_mgf_unchecked(const Vector& t) const {
  double s = 0.0;
  for (size_t j = 0; j < components_.size(); ++j)
    s += components_[j].log_mgf(t(static_cast<int>(j)));
  return s;
}

Vector ProductModel::mean(const Vector& t) const {
  Vector m(dim());
  for (int j = 0; j < dim(); ++j) m(j) = components_[j].d1(t(j));
  return m;
}

Matrix ProductModel::covariance(const Vector& t) const {
  Matrix k = Matrix::Zero(dim(), dim());
  for (int j = 0; j < dim(); ++j) k(j, j) = components_[j].d2(t(j));
  return k;
}

Tensor3 ProductModel::third_cumulant(const Vector& t) const {
  Tensor3 c(dim());
  for (int j = 0; j < dim(); ++j) c(j, j, j) = components_[j].d3(t(j));
  return c;
}

Tensor4 ProductModel::fourth_cumulant(const Vector& t) const {
  Tensor4 c(dim());
  for (int j = 0; j < dim(); ++j) c(j, j, j, j) = components_[j].d4(t(j));
  return c;
}

double ProductModel::base_log_density(const Vector& x) const {
  double s = 0.0;
  for (int j = 0; j < dim(); ++j) s += components_[j].log_density(x(j));
  return s;
}

Vector ProductModel::base_sample(RngStream& rng) const {
  Vector x(dim());
  for (int j = 0; j < dim(); ++j) x(j) = components_[j].sample(rng);
  return x;
}

Vector ProductModel::tilted_sample(const Vector& t, RngStream& rng) const {
  Vector x(dim());
  for (int j = 0; j < dim(); ++j) x(j) = components_[j].tilted_sample(t(j), rng);
  return x;
}

std::optional<double> ProductModel::support_tilt_bound(const Vector& t) const {
  // finite only when every positive-support coordinate has t <= 0 and every
  // gaussian coordinate contributes an unbounded term with t != 0
  double bound = 0.0;
  for (int j = 0; j < dim(); ++j) {
    if (components_[j].kind == ScalarFamily::Kind::Gaussian) {
      if (t(j) != 0.0) return std::nullopt;
    } else {
      if (t(j) > 0.0) return std::nullopt;  // support [0, inf), sup at infinity
      // sup over [0, inf) of t*x with t <= 0 is 0 at x = 0
    }
  }
  return bound;
}

bool ProductModel::mean_attainable(const Vector& alpha) const {
  for (int j = 0; j < dim(); ++j)
    if (alpha(j) <= components_[j].mean_lower() || alpha(j) >= components_[j].mean_upper())
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// LinearPushforwardModel

LinearPushforwardModel::LinearPushforwardModel(ModelPtr base, Matrix a)
    : base_(std::move(base)), a_(std::move(a)) {
  if (a_.cols() != base_->dim())
    throw ConfigError("pushforward matrix has " + std::to_string(a_.cols()) +
                      " columns, base dimension is " + std::to_string(base_->dim()));
  if (a_.rows() > a_.cols()) throw ConfigError("pushforward matrix must have s <= d");
  Eigen::ColPivHouseholderQR<Matrix> qr(a_.transpose());
  if (qr.rank() < a_.rows())
    throw ConfigError("pushforward matrix is rank-deficient; U would be degenerate");
}

std::string LinearPushforwardModel::describe() const {
  return "pushforward(" + base_->describe() + ", s=" + std::to_string(dim()) + ")";
}

std::optional<std::string> LinearPushforwardModel::tilt_violation(const Vector& t) const {
  return base_->tilt_violation(a_.transpose() * t);
}

double LinearPushforwardModel::log_mgf_unchecked(const Vector& t) const {
  return base_->log_mgf_unchecked(a_.transpose() * t);
}

Vector LinearPushforwardModel::mean(const Vector& t) const {
  return a_ * base_->mean(a_.transpose() * t);
}

Matrix LinearPushforwardModel::covariance(const Vector& t) const {
  return a_ * base_->covariance(a_.transpose() * t) * a_.transpose();
}

Tensor3 LinearPushforwardModel::third_cumulant(const Vector& t) const {
  return base_->third_cumulant(a_.transpose() * t).transform(a_);
}

Tensor4 LinearPushforwardModel::fourth_cumulant(const Vector& t) const {
  return base_->fourth_cumulant(a_.transpose() * t).transform(a_);
}

double LinearPushforwardModel::base_log_density(const Vector&) const {
  throw DomainError("pushforward of a non-gaussian base has no closed-form density");
}

Vector LinearPushforwardModel::base_sample(RngStream& rng) const {
  return a_ * base_->base_sample(rng);
}

Vector LinearPushforwardModel::tilted_sample(const Vector& t, RngStream& rng) const {
  // tilting U by t equals tilting X by A^t t and pushing forward
  return a_ * base_->tilted_sample(a_.transpose() * t, rng);
}

// ---------------------------------------------------------------------------
// UMapSpec / pushforward_model

UMapSpec UMapSpec::identity() { return UMapSpec{}; }

UMapSpec UMapSpec::linear(Matrix a) {
  UMapSpec u;
  u.kind = Kind::Linear;
  u.output_dim = static_cast<int>(a.rows());
  u.matrix = std::move(a);
  return u;
}

UMapSpec UMapSpec::custom(std::function<Vector(const Vector&)> u, int s, ModelPtr u_model) {
  UMapSpec spec;
  spec.kind = Kind::Custom;
  spec.evaluator = std::move(u);
  spec.output_dim = s;
  spec.u_model = std::move(u_model);
  return spec;
}

Vector UMapSpec::apply(const Vector& x) const {
  switch (kind) {
    case Kind::Identity: return x;
    case Kind::Linear: return matrix * x;
    case Kind::Custom: return evaluator(x);
  }
  return x;
}

ModelPtr pushforward_model(const ModelPtr& model, const UMapSpec& umap) {
  switch (umap.kind) {
    case UMapSpec::Kind::Identity:
      return model;
    case UMapSpec::Kind::Linear: {
      if (auto gauss = std::dynamic_pointer_cast<const GaussianModel>(model)) {
        // exact: AX ~ N(A mu, A Sigma A^t)
        return std::make_shared<GaussianModel>(
            umap.matrix * gauss->mean_vector(),
            umap.matrix * gauss->covariance_matrix() * umap.matrix.transpose());
      }
      return std::make_shared<LinearPushforwardModel>(model, umap.matrix);
    }
    case UMapSpec::Kind::Custom:
      if (!umap.u_model)
        throw ConfigError("U-model required: nonlinear u needs an explicit model for u(X)");
      return umap.u_model;
  }
  throw ConfigError("invalid umap kind");
}

// ---------------------------------------------------------------------------

ModelPtr make_standard_gaussian(int dim) {
  return std::make_shared<GaussianModel>(Vector::Zero(dim), Matrix::Identity(dim, dim));
}

ModelPtr make_gaussian(Vector mean, Matrix cov) {
  return std::make_shared<GaussianModel>(std::move(mean), std::move(cov));
}

ModelPtr make_exponential(double rate) {
  return make_product({ScalarFamily{ScalarFamily::Kind::Exponential, rate, 0.0}});
}

ModelPtr make_gamma(double shape, double rate) {
  return make_product({ScalarFamily{ScalarFamily::Kind::Gamma, shape, rate}});
}

ModelPtr make_product(std::vector<ScalarFamily> components) {
  return std::make_shared<ProductModel>(std::move(components));
}

}  // namespace condwalk
