#pragma once

#include <optional>

#include "condwalk/tilt.hpp"

namespace condwalk {

/// Conditioning problem: the first k steps of an n-step i.i.d. walk given
/// S_{1,n} = target (sum mode) or U_{1,n} = target (function mode).
struct ConditioningSpec {
  enum class Mode { Sum, FunctionU };

  Mode mode = Mode::Sum;
  int n = 0;
  int k = 0;
  Vector target;  // n*a for sum mode, u_{1,n} for function mode
  ModelPtr model;
  UMapSpec umap;     // identity in sum mode
  ModelPtr u_model;  // equals model in sum mode, pushforward otherwise
  int s = 0;         // dimension of the conditioning statistic
  std::vector<std::string> warnings;

  static ConditioningSpec sum(ModelPtr model, int n, int k, Vector target);
  static ConditioningSpec function_u(ModelPtr model, UMapSpec umap, int n, int k, Vector target);

  Vector statistic(const Vector& y) const { return umap.apply(y); }
  Vector initial_mean() const { return target / static_cast<double>(n); }
};

/// Evaluation knobs shared by the density and sampling paths.
struct EvalConfig {
  int norm_budget = 10000;          // Monte-Carlo budget per normalizing constant
  std::uint64_t norm_seed = 0x5bd1e995u;  // fixed so evaluation is deterministic
  bool compat_mi = false;           // use the n/(n-1) step-target variant in sum mode
};

/// Per-step ingredients of the recursion at step i (0-based): the step target
/// mean m_i, its tilt, the tilted cumulants, and the Gaussian correction
/// kernel n_s(w; beta*alpha + m_i, beta) with beta = (n-i-1) kappa and
/// alpha = t_i + kappa^{-2} gamma / (2(n-i-1)).
struct StepKernel {
  int i = 0;
  Vector m;       // step target mean
  Vector t;       // tilt solving m(t) = m_i
  double log_phi = 0.0;
  Matrix kappa;
  Tensor3 c3;
  Vector gamma;      // gamma_p = sum_j c3^{j,j,p}
  Vector alpha_vec;
  Matrix beta_mat;
  Vector gauss_mean;  // beta*alpha + m_i
  SpdFactor beta_factor;
  std::optional<double> log_c;  // log normalizing constant
  double log_c_se = 0.0;        // Monte-Carlo standard error (0 when analytic)
  int tilt_iterations = 0;
};

/// m_i = (target - partial) / (n - i); with compat_mi set (sum mode) the
/// i-independent variant n/(n-1) (a - s_{1,i}/n) is used instead.
Vector step_target(const ConditioningSpec& spec, const Vector& partial, int i,
                   const EvalConfig& eval = {});

/// Assemble the kernel without its normalizing constant (enough for
/// acceptance-rejection and MCMC, which only need the unnormalized form).
StepKernel build_step_kernel_unnormalized(const ConditioningSpec& spec, const Vector& partial,
                                          int i, std::optional<Vector> warm_t = std::nullopt,
                                          const EvalConfig& eval = {});

/// Kernel with log C_i computed (analytic when available, otherwise
/// Monte-Carlo with the deterministic per-step stream from `eval`).
StepKernel build_step_kernel(const ConditioningSpec& spec, const Vector& partial, int i,
                             std::optional<Vector> warm_t = std::nullopt,
                             const EvalConfig& eval = {});

struct Normalization {
  double log_c;
  double se;
};

/// C_i^{-1} = integral of n_s(w(y); gauss_mean, beta) p_X(y) dy. Closed form
/// for a Gaussian model with identity/linear u; otherwise importance sampling
/// with proposal pi^{m_i} (or the base law when no tilted sampler exists).
Normalization normalize_step(const ConditioningSpec& spec, const StepKernel& kernel, int budget,
                             RngStream& rng);

/// Whether the normalizing constant has a closed form for this spec.
bool has_analytic_normalization(const ConditioningSpec& spec);

/// log g(y | past) = log C_i + log n_s(w(y); gauss_mean, beta) + log p_X(y).
double step_log_density(const StepKernel& kernel, const ConditioningSpec& spec, const Vector& y);

/// Unnormalized variant (drops log C_i); what the samplers target.
double step_log_density_unnormalized(const StepKernel& kernel, const ConditioningSpec& spec,
                                     const Vector& y);

struct TrajectoryDensity {
  double log_g;
  std::vector<double> per_step;
  double normalization_se = 0.0;  // combined se of the Monte-Carlo log C_i's
};

/// log g(y_1^k): rebuilds the kernels along the trajectory (warm-starting each
/// tilt solve at the previous step's tilt) and sums the per-step logs.
/// Evaluation is deterministic: Monte-Carlo normalizations draw from fixed
/// per-step substreams of eval.norm_seed.
TrajectoryDensity trajectory_log_density(const ConditioningSpec& spec,
                                         const std::vector<Vector>& steps,
                                         const EvalConfig& eval = {});

/// Exact log p(X_1^k = y_1^k | S_{1,n} = target) for a Gaussian model in sum
/// mode, via sequential conditioning: given the remaining sum r over n-i
/// terms, X_{i+1} ~ N(r/(n-i), ((n-i-1)/(n-i)) Sigma).
double exact_gaussian_conditional_log_density(const ConditioningSpec& spec,
                                              const std::vector<Vector>& steps);

}  // namespace condwalk
