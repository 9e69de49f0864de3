#include "condwalk/sampler.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace condwalk {

ArDraw sample_step_ar(const StepKernel& kernel, const ConditioningSpec& spec, RngStream& rng,
                      int max_tries) {
  if (max_tries < 1) throw ConfigError("sample_step_ar: max_tries must be >= 1");
  const double log_mode = kernel.beta_factor.gaussian_log_mode();
  for (int tries = 1; tries <= max_tries; ++tries) {
    Vector y = spec.model->base_sample(rng);
    const double log_accept =
        kernel.beta_factor.gaussian_log_density(spec.statistic(y), kernel.gauss_mean) - log_mode;
    if (std::log(rng.uniform()) < log_accept) return {std::move(y), tries};
  }
  throw ArStarvedError(max_tries, 1.0 / static_cast<double>(max_tries));
}

McmcDraw sample_step_mcmc(const StepKernel& kernel, const ConditioningSpec& spec, RngStream& rng,
                          const McmcConfig& cfg) {
  if (cfg.chain_length <= cfg.burn_in || cfg.burn_in < 0)
    throw ConfigError("sample_step_mcmc: need chain_length > burn_in >= 0");

  // Proposal lives in X-space. For identity/linear u the tilted X-law is the
  // A^t t tilt of the base model, whose covariance sets the step scale; for a
  // custom u fall back to the untilted base covariance.
  Vector t_x;
  Vector init;
  Matrix prop_cov;
  switch (spec.umap.kind) {
    case UMapSpec::Kind::Identity:
      t_x = kernel.t;
      init = kernel.m;
      prop_cov = kernel.kappa;
      break;
    case UMapSpec::Kind::Linear:
      t_x = spec.umap.matrix.transpose() * kernel.t;
      init = spec.model->mean(t_x);
      prop_cov = spec.model->covariance(t_x);
      break;
    case UMapSpec::Kind::Custom:
      init = spec.model->base_mean();
      prop_cov = spec.model->covariance(Vector::Zero(spec.model->dim()));
      break;
  }

  const double scale =
      cfg.proposal_scale > 0.0 ? cfg.proposal_scale : 2.38 / std::sqrt(static_cast<double>(spec.s));
  SpdFactor proposal(scale * scale * prop_cov);

  Vector state = init;
  double state_log = step_log_density_unnormalized(kernel, spec, state);
  // A support-boundary initializer (log density -inf) would poison the chain;
  // nudge by proposals until the density is finite.
  for (int attempt = 0; attempt < 1000 && !std::isfinite(state_log); ++attempt) {
    state = proposal.sample(init, rng);
    state_log = step_log_density_unnormalized(kernel, spec, state);
  }
  if (!std::isfinite(state_log))
    throw SolveError("sample_step_mcmc: could not find a starting point with positive density");

  const int total = cfg.burn_in + cfg.chain_length;
  int accepted = 0;
  for (int it = 0; it < total; ++it) {
    Vector cand = proposal.sample(state, rng);
    const double cand_log = step_log_density_unnormalized(kernel, spec, cand);
    if (std::log(rng.uniform()) < cand_log - state_log) {
      state = std::move(cand);
      state_log = cand_log;
      ++accepted;
    }
  }
  return {std::move(state), static_cast<double>(accepted) / static_cast<double>(total)};
}

namespace {

Trajectory sample_trajectory_once(const ConditioningSpec& spec, const SamplerConfig& cfg,
                                  RngStream& rng, const EvalConfig& eval) {
  Trajectory out;
  out.steps.reserve(static_cast<std::size_t>(spec.k));
  out.partial = Vector::Zero(spec.s);

  bool mcmc_mode = cfg.method == SamplerConfig::Method::Mcmc;
  double mcmc_ratio_sum = 0.0;
  int mcmc_steps = 0;
  std::optional<Vector> warm;

  for (int i = 0; i < spec.k; ++i) {
    StepKernel kernel;
    try {
      kernel = cfg.with_log_density
                   ? build_step_kernel(spec, out.partial, i, warm, eval)
                   : build_step_kernel_unnormalized(spec, out.partial, i, warm, eval);
    } catch (const std::exception& e) {
      throw SolveError("sampling failed at step " + std::to_string(i) + ": " + e.what());
    }

    Vector y;
    if (!mcmc_mode) {
      try {
        ArDraw draw = sample_step_ar(kernel, spec, rng, cfg.ar_max_tries);
        out.total_ar_tries += draw.tries;
        y = std::move(draw.y);
      } catch (const ArStarvedError&) {
        if (cfg.method == SamplerConfig::Method::AcceptReject) throw;
        // large-deviation regime detected: finish this trajectory with MCMC
        mcmc_mode = true;
      }
    }
    if (mcmc_mode) {
      McmcDraw draw = sample_step_mcmc(kernel, spec, rng, cfg.mcmc);
      mcmc_ratio_sum += draw.acceptance_ratio;
      ++mcmc_steps;
      out.used_mcmc = true;
      y = std::move(draw.y);
    }

    if (cfg.with_log_density)
      out.per_step.push_back(step_log_density(kernel, spec, y));
    out.partial += spec.statistic(y);
    warm = kernel.t;
    out.steps.push_back(std::move(y));
  }

  if (cfg.with_log_density) out.log_g = pairwise_sum(out.per_step);
  if (mcmc_steps > 0) out.mean_mcmc_acceptance = mcmc_ratio_sum / mcmc_steps;
  return out;
}

}  // namespace

Trajectory sample_trajectory(const ConditioningSpec& spec, const SamplerConfig& cfg,
                             RngStream& rng, const EvalConfig& eval) {
  // Domain drift (the remaining mean leaving the attainable region) aborts a
  // trajectory; retry on the same stream so batches stay deterministic.
  int restarts = 0;
  for (;;) {
    try {
      Trajectory out = sample_trajectory_once(spec, cfg, rng, eval);
      out.restarts = restarts;
      return out;
    } catch (const ArStarvedError&) {
      throw;
    } catch (const SolveError&) {
      if (++restarts > cfg.max_restarts) throw;
    }
  }
}

std::vector<Trajectory> sample_batch(const ConditioningSpec& spec, const SamplerConfig& cfg,
                                     int count, const EvalConfig& eval) {
  if (count < 0) throw ConfigError("sample_batch: count must be nonnegative");
  std::vector<Trajectory> out(static_cast<std::size_t>(count));
  const int workers = std::max(1, cfg.workers);

  auto run = [&](int worker) {
    for (int j = worker; j < count; j += workers) {
      RngStream stream = RngStream::substream(cfg.seed, static_cast<std::uint64_t>(j));
      out[static_cast<std::size_t>(j)] = sample_trajectory(spec, cfg, stream, eval);
    }
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mutex;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          run(w);
        } catch (const std::exception& e) {
          std::scoped_lock lock(error_mutex);
          failed = true;
          error = e.what();
        }
      });
    for (auto& th : pool) th.join();
    if (failed) throw SolveError("sample_batch: " + error);
  }
  return out;
}

}  // namespace condwalk
