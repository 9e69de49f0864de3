#pragma once

#include "condwalk/trajectory.hpp"

namespace condwalk {

struct KRuleConfig {
  int L = 1000;         // Monte-Carlo sample count
  double delta = 0.05;  // acceptance level for the relative accuracy
  std::vector<int> k_grid;
  std::uint64_t seed = 0;
  std::optional<double> clip_quantile;  // winsorize A/B above this quantile (default off)
};

struct KRuleReport {
  int k = 0;
  double ere = 0.0;
  double vre = 0.0;      // clamped at 0
  double vre_raw = 0.0;  // unclamped value, kept for diagnostics
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool accepted = false;
  double a_hat = 0.0;
  double a_se = 0.0;
  double b_hat = 0.0;
  double b_se = 0.0;
  // diagnostics
  double log_d = 0.0;            // log D for this spec (k-independent)
  double mean_log_n = 0.0;       // mean of log N over the L trajectories
  double logdet_sigma0 = 0.0;    // log |Sigma(t_0)|
  double mean_logdet_sigmak = 0.0;
  double e1_diagnostic = 0.0;    // epsilon^2 (n-k) with epsilon = (log n)^{-3}
  int n_failed = 0;              // trajectories whose recursion left the domain
};

/// Saddlepoint log-density of the sample mean of n draws from model_U at u:
/// (s/2) log n + n K(t) - n <t,u> - (1/2) log|Sigma(t)| - (s/2) log 2 pi with
/// m(t) = u. Exact for Gaussian U.
double saddlepoint_log_density(const CumulantModel& model_u, int n, const Vector& u);

struct JensenRatio {
  double log_n;  // (n-k) (<t_k, m_k> - K(t_k))
  double log_d;  // n (<t_0, m_0> - K(t_0))
  double logdet_sigma0;
  double logdet_sigmak;
};

/// log N and log D from the consumed statistic of a k-step trajectory, using
/// pi^m(m)/p(m) = exp(<t, m> - K(t)).
JensenRatio jensen_log_ratio(const ConditioningSpec& spec, const Vector& consumed);

/// Monte-Carlo relative-error statistics for run length k: draws L
/// trajectories of k i.i.d. steps under p_X, evaluates
///   A = (n/(n-k))^{s-2} (g/p_X)^3 (N/D)^2 |Sigma(t_0)|/|Sigma(t_k)|
///   B = (n/(n-k))^{(s-2)/2} (g/p_X)^2 (N/D) (|Sigma(t_0)|/|Sigma(t_k)|)^{1/2}
/// in log space, and reports ERE = 1 - B_hat, VRE = max(A_hat - B_hat^2, 0)
/// and the two-sigma interval. Trajectories that drift out of the attainable
/// region carry zero g-mass and contribute A = B = 0.
KRuleReport relative_error_stats(const ConditioningSpec& spec, int k, const KRuleConfig& cfg,
                                 const EvalConfig& eval = {});

struct KSelection {
  std::optional<int> k_star;  // largest accepted k; absent when none accepted
  std::vector<KRuleReport> reports;
};

/// Sweep the grid (ascending) and accept k while delta lies in CI(k).
KSelection select_k(const ConditioningSpec& spec, const KRuleConfig& cfg,
                    const EvalConfig& eval = {});

}  // namespace condwalk
