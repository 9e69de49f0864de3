#pragma once

#include "condwalk/trajectory.hpp"

namespace condwalk {

struct McmcConfig {
  int chain_length = 400;
  int burn_in = 200;
  double proposal_scale = 0.0;  // 0 -> default 2.38 / sqrt(s)
};

struct SamplerConfig {
  enum class Method { Auto, AcceptReject, Mcmc };
  Method method = Method::Auto;
  int ar_max_tries = 10000;
  McmcConfig mcmc;
  std::uint64_t seed = 0;
  bool with_log_density = true;  // accumulate log g (needs normalizing constants)
  int workers = 1;
  int max_restarts = 100;  // per-trajectory restarts after domain drift
};

/// Raised when acceptance-rejection exhausts its tries; carries the observed
/// acceptance-rate estimate, the operational signal of a large-deviation
/// conditioning point.
class ArStarvedError : public SolveError {
 public:
  ArStarvedError(int tries, double rate)
      : SolveError("AR starved after " + std::to_string(tries) +
                   " tries (acceptance rate about " + std::to_string(rate) + ")"),
        rate_estimate(rate) {}
  double rate_estimate;
};

struct ArDraw {
  Vector y;
  int tries;
};

/// Acceptance-rejection for one step: propose y ~ p_X and accept with
/// probability n_s(w(y); c, beta) / sup n_s, the sup being the Gaussian mode
/// value. Accepted draws are exactly distributed as the step density.
ArDraw sample_step_ar(const StepKernel& kernel, const ConditioningSpec& spec, RngStream& rng,
                      int max_tries = 10000);

struct McmcDraw {
  Vector y;
  double acceptance_ratio;
};

/// Random-walk Metropolis targeting the unnormalized step density, started at
/// the tilted mean with proposal covariance proposal_scale^2 * kappa (mapped
/// to X-space for function mode). Returns the state after burn_in +
/// chain_length updates; no normalizing constant needed.
McmcDraw sample_step_mcmc(const StepKernel& kernel, const ConditioningSpec& spec, RngStream& rng,
                          const McmcConfig& cfg);

struct Trajectory {
  std::vector<Vector> steps;
  Vector partial;  // consumed statistic sum_{j<=k} w(y_j)
  std::optional<double> log_g;
  std::vector<double> per_step;
  bool used_mcmc = false;
  long total_ar_tries = 0;
  double mean_mcmc_acceptance = 0.0;
  int restarts = 0;
};

/// Draw one trajectory from g: k recursive kernel steps, acceptance-rejection
/// first and, in Auto mode, per-trajectory fallback to MCMC on starvation.
Trajectory sample_trajectory(const ConditioningSpec& spec, const SamplerConfig& cfg,
                             RngStream& rng, const EvalConfig& eval = {});

/// Deterministic batch: trajectory j draws from substream (seed, j), so the
/// result depends only on (seed, count), not on the worker count.
std::vector<Trajectory> sample_batch(const ConditioningSpec& spec, const SamplerConfig& cfg,
                                     int count, const EvalConfig& eval = {});

}  // namespace condwalk
