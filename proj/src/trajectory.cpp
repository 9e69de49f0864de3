#include "condwalk/trajectory.hpp"

#include <cmath>
#include <sstream>

namespace condwalk {

namespace {

void validate_run_lengths(ConditioningSpec& spec) {
  if (spec.n < 2) throw ConfigError("conditioning spec: n must be >= 2");
  if (spec.k < 1 || spec.k >= spec.n)
    throw ConfigError("conditioning spec: k must satisfy 1 <= k <= n-1");
  const double log_n = std::log(static_cast<double>(spec.n));
  if (spec.n - spec.k < 3)
    spec.warnings.push_back("n-k = " + std::to_string(spec.n - spec.k) +
                            " < 3: the recursion is at the edge of its validity range");
  else if (spec.n - spec.k < log_n * log_n)
    spec.warnings.push_back("n-k = " + std::to_string(spec.n - spec.k) +
                            " < (log n)^2: expect reduced accuracy");
}

}  // namespace

ConditioningSpec ConditioningSpec::sum(ModelPtr model, int n, int k, Vector target) {
  ConditioningSpec spec;
  spec.mode = Mode::Sum;
  spec.model = std::move(model);
  spec.n = n;
  spec.k = k;
  spec.target = std::move(target);
  spec.umap = UMapSpec::identity();
  spec.u_model = spec.model;
  spec.s = spec.model->dim();
  if (spec.target.size() != spec.s)
    throw ConfigError("conditioning spec: target dimension does not match model");
  validate_run_lengths(spec);
  if (!spec.u_model->mean_attainable(spec.initial_mean()))
    throw DomainError("conditioning spec: target/n lies outside the attainable mean region");
  return spec;
}

ConditioningSpec ConditioningSpec::function_u(ModelPtr model, UMapSpec umap, int n, int k,
                                              Vector target) {
  ConditioningSpec spec;
  spec.mode = Mode::FunctionU;
  spec.model = std::move(model);
  spec.umap = std::move(umap);
  spec.n = n;
  spec.k = k;
  spec.target = std::move(target);
  spec.u_model = pushforward_model(spec.model, spec.umap);
  spec.s = spec.u_model->dim();
  if (spec.target.size() != spec.s)
    throw ConfigError("conditioning spec: target dimension does not match u output");
  validate_run_lengths(spec);
  if (!spec.u_model->mean_attainable(spec.initial_mean()))
    throw DomainError("conditioning spec: target/n lies outside the attainable mean region");
  return spec;
}

Vector step_target(const ConditioningSpec& spec, const Vector& partial, int i,
                   const EvalConfig& eval) {
  if (i < 0 || i > spec.k - 1) throw ConfigError("step_target: index out of range");
  Vector m_i;
  if (eval.compat_mi && spec.mode == ConditioningSpec::Mode::Sum) {
    // literal variant kept for comparison: n/(n-1) (a - s_{1,i}/n)
    const double n = spec.n;
    m_i = (n / (n - 1.0)) * (spec.target / n - partial / n);
  } else {
    m_i = (spec.target - partial) / static_cast<double>(spec.n - i);
  }
  if (!spec.u_model->mean_attainable(m_i)) {
    std::ostringstream os;
    os << "conditioning drifted out of domain at step " << i
       << ": remaining mean is not attainable";
    throw DomainError(os.str());
  }
  return m_i;
}

StepKernel build_step_kernel_unnormalized(const ConditioningSpec& spec, const Vector& partial,
                                          int i, std::optional<Vector> warm_t,
                                          const EvalConfig& eval) {
  StepKernel kernel;
  kernel.i = i;
  kernel.m = step_target(spec, partial, i, eval);

  TiltSolution tilt = solve_tilt(*spec.u_model, kernel.m, 1e-10, 100, std::move(warm_t));
  kernel.t = std::move(tilt.t);
  kernel.log_phi = tilt.log_phi;
  kernel.kappa = std::move(tilt.kappa);
  kernel.tilt_iterations = tilt.iterations;
  kernel.c3 = spec.u_model->third_cumulant(kernel.t);

  const int s = spec.s;
  kernel.gamma = Vector::Zero(s);
  for (int p = 0; p < s; ++p) {
    double acc = 0.0;
    for (int j = 0; j < s; ++j) acc += kernel.c3(j, j, p);
    kernel.gamma(p) = acc;
  }

  const double b = static_cast<double>(spec.n - i - 1);
  SpdFactor kappa_factor(kernel.kappa);
  // kappa^{-2} gamma = kappa^{-1} (kappa^{-1} gamma)
  Vector correction = kappa_factor.solve(kappa_factor.solve(kernel.gamma));
  kernel.alpha_vec = kernel.t + correction / (2.0 * b);
  kernel.beta_mat = b * kernel.kappa;
  kernel.gauss_mean = kernel.beta_mat * kernel.alpha_vec + kernel.m;
  kernel.beta_factor = SpdFactor(kernel.beta_mat);
  return kernel;
}

bool has_analytic_normalization(const ConditioningSpec& spec) {
  return std::dynamic_pointer_cast<const GaussianModel>(spec.u_model) != nullptr &&
         spec.umap.kind != UMapSpec::Kind::Custom;
}

Normalization normalize_step(const ConditioningSpec& spec, const StepKernel& kernel, int budget,
                             RngStream& rng) {
  if (has_analytic_normalization(spec)) {
    // Gaussian-Gaussian convolution: C^{-1} = n_s(c; mean_U, beta + Sigma_U)
    auto gauss = std::dynamic_pointer_cast<const GaussianModel>(spec.u_model);
    SpdFactor conv(kernel.beta_mat + gauss->covariance_matrix());
    const double log_c_inv = conv.gaussian_log_density(kernel.gauss_mean, gauss->mean_vector());
    return {-log_c_inv, 0.0};
  }

  if (budget < 1000) throw ConfigError("normalize_step: Monte-Carlo budget must be >= 1000");

  // Importance sampling: C^{-1} = E_q [ n_s(w(Y); c, beta) p(Y)/q(Y) ] with
  // q = pi^{m_i} when a tilted sampler exists (weight exp(K(t) - <t, w>)),
  // otherwise q = p itself (unit weight).
  bool tilted_proposal = true;
  Vector t_x;  // tilt in X-space
  switch (spec.umap.kind) {
    case UMapSpec::Kind::Identity: t_x = kernel.t; break;
    case UMapSpec::Kind::Linear: t_x = spec.umap.matrix.transpose() * kernel.t; break;
    case UMapSpec::Kind::Custom: tilted_proposal = false; break;
  }

  std::vector<double> log_weights(static_cast<std::size_t>(budget));
  for (int b = 0; b < budget; ++b) {
    Vector y = tilted_proposal ? spec.model->tilted_sample(t_x, rng)
                               : spec.model->base_sample(rng);
    const Vector w = spec.statistic(y);
    double lw = kernel.beta_factor.gaussian_log_density(w, kernel.gauss_mean);
    if (tilted_proposal) lw += kernel.log_phi - kernel.t.dot(w);
    log_weights[static_cast<std::size_t>(b)] = lw;
  }

  const double lse = log_sum_exp(log_weights);
  if (!std::isfinite(lse)) throw SolveError("normalization failed: zero effective sample size");
  const double log_mean = lse - std::log(static_cast<double>(budget));

  // delta method: se(log C) = sd(W) / (sqrt(B) mean(W)), computed on shifted
  // weights for stability
  std::vector<double> shifted(log_weights.size());
  for (std::size_t j = 0; j < log_weights.size(); ++j)
    shifted[j] = std::exp(log_weights[j] - lse);
  MeanSe stats = mean_and_se(shifted);
  const double se = stats.mean > 0.0 ? stats.se / stats.mean : 0.0;

  return {-log_mean, se};
}

StepKernel build_step_kernel(const ConditioningSpec& spec, const Vector& partial, int i,
                             std::optional<Vector> warm_t, const EvalConfig& eval) {
  StepKernel kernel = build_step_kernel_unnormalized(spec, partial, i, std::move(warm_t), eval);
  RngStream norm_rng =
      RngStream::substream(eval.norm_seed, static_cast<std::uint64_t>(kernel.i));
  Normalization norm = normalize_step(spec, kernel, eval.norm_budget, norm_rng);
  kernel.log_c = norm.log_c;
  kernel.log_c_se = norm.se;
  return kernel;
}

double step_log_density_unnormalized(const StepKernel& kernel, const ConditioningSpec& spec,
                                     const Vector& y) {
  const double base = spec.model->base_log_density(y);
  if (!std::isfinite(base)) return base;
  return kernel.beta_factor.gaussian_log_density(spec.statistic(y), kernel.gauss_mean) + base;
}

double step_log_density(const StepKernel& kernel, const ConditioningSpec& spec, const Vector& y) {
  if (!kernel.log_c)
    throw ConfigError("step_log_density: kernel has no normalizing constant; call normalize_step");
  return *kernel.log_c + step_log_density_unnormalized(kernel, spec, y);
}

TrajectoryDensity trajectory_log_density(const ConditioningSpec& spec,
                                         const std::vector<Vector>& steps,
                                         const EvalConfig& eval) {
  if (static_cast<int>(steps.size()) != spec.k)
    throw ConfigError("trajectory_log_density: expected " + std::to_string(spec.k) + " steps");
  for (const Vector& y : steps)
    if (y.size() != spec.model->dim())
      throw ConfigError("trajectory_log_density: step dimension does not match model");

  TrajectoryDensity out;
  out.per_step.reserve(steps.size());
  Vector partial = Vector::Zero(spec.s);
  std::optional<Vector> warm;
  double se_sq = 0.0;

  for (int i = 0; i < spec.k; ++i) {
    StepKernel kernel;
    try {
      kernel = build_step_kernel(spec, partial, i, warm, eval);
    } catch (const std::exception& e) {
      throw SolveError("trajectory evaluation failed at step " + std::to_string(i) + ": " +
                       e.what());
    }
    out.per_step.push_back(step_log_density(kernel, spec, steps[static_cast<std::size_t>(i)]));
    se_sq += kernel.log_c_se * kernel.log_c_se;
    partial += spec.statistic(steps[static_cast<std::size_t>(i)]);
    warm = kernel.t;
  }

  out.log_g = pairwise_sum(out.per_step);
  out.normalization_se = std::sqrt(se_sq);
  return out;
}

double exact_gaussian_conditional_log_density(const ConditioningSpec& spec,
                                              const std::vector<Vector>& steps) {
  auto gauss = std::dynamic_pointer_cast<const GaussianModel>(spec.model);
  if (!gauss || spec.mode != ConditioningSpec::Mode::Sum)
    throw ConfigError("exact conditional density is only available for Gaussian models in sum mode");
  if (static_cast<int>(steps.size()) != spec.k)
    throw ConfigError("exact_gaussian_conditional_log_density: expected " +
                      std::to_string(spec.k) + " steps");

  const Matrix& sigma = gauss->covariance_matrix();
  Vector remaining = spec.target;
  std::vector<double> logs;
  logs.reserve(steps.size());
  for (int i = 0; i < spec.k; ++i) {
    const double m = static_cast<double>(spec.n - i);
    const Vector cond_mean = remaining / m;
    const Matrix cond_cov = ((m - 1.0) / m) * sigma;
    logs.push_back(
        gaussian_log_density(steps[static_cast<std::size_t>(i)], cond_mean, cond_cov));
    remaining -= steps[static_cast<std::size_t>(i)];
  }
  return pairwise_sum(logs);
}

}  // namespace condwalk
