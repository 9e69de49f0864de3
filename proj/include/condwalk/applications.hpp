#pragma once

#include "condwalk/sampler.hpp"

namespace condwalk {

/// Box / half-space event on the running mean U_{1,n}/n: one threshold and
/// direction per coordinate of the statistic.
struct EventSpec {
  enum class Direction { Greater, Less };
  Vector threshold;
  std::vector<Direction> directions;

  bool contains(const Vector& mean) const;
};

struct ISEstimate {
  double p_hat = 0.0;
  double se = 0.0;
  int budget = 0;
  double max_weight = 0.0;
  double ess = 0.0;  // effective sample size of the weights
  int hits = 0;      // draws landing in the event
  bool proposal_mismatch = false;  // ESS < 10
  Vector dominating_point;         // conditioning point used for g
};

/// Importance-sampling estimate of P[U_{1,n}/n in event]. The proposal runs g
/// over k steps conditioned at the event's dominating point, then completes
/// steps k+1..n with i.i.d. draws tilted at the remaining mean (recomputed
/// once at step k). Weights are p_X over the proposal times the indicator.
ISEstimate is_rare_event_estimate(const ModelPtr& model, const UMapSpec& umap,
                                  const EventSpec& event, int n, int k, int budget,
                                  const SamplerConfig& sampler_cfg, const EvalConfig& eval = {});

/// Dominating point: componentwise projection of the untilted mean onto the
/// event region (the nearest boundary point for one-sided events).
Vector event_dominating_point(const CumulantModel& model_u, const EventSpec& event);

struct AbcResult {
  std::vector<std::vector<Vector>> accepted;  // first k steps of accepted walks
  double acceptance_rate = 0.0;
  long proposals = 0;
  double h = 0.0;  // tolerance actually used
};

/// Brute-force conditional oracle: draw i.i.d. n-step walks from p_X and keep
/// those with ||U_{1,n}/n - target/n||_inf <= h, returning their first k
/// steps. h <= 0 requests auto-tuning from a pilot run so that the expected
/// acceptance count is at least 200.
AbcResult abc_conditional_oracle(const ConditioningSpec& spec, double h, long proposal_budget,
                                 std::uint64_t seed, int workers = 1);

/// Estimated total-variation distance between two samples: quantile bins on
/// the pooled sample per marginal (first `marginals` coordinates), reporting
/// the largest (1/2) sum |f_a - f_b| over the examined marginals.
double tv_distance_estimate(const Matrix& sample_a, const Matrix& sample_b, int bins = 20,
                            int marginals = 2);

/// First-step coordinates of a batch (row per trajectory) for histogram use.
Matrix first_step_matrix(const std::vector<Trajectory>& batch);
Matrix first_step_matrix(const std::vector<std::vector<Vector>>& walks);

}  // namespace condwalk
