#include "condwalk/krule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace condwalk {

double saddlepoint_log_density(const CumulantModel& model_u, int n, const Vector& u) {
  const int s = model_u.dim();
  TiltSolution tilt = solve_tilt(model_u, u);
  SpdFactor sigma(tilt.kappa);
  return 0.5 * s * std::log(static_cast<double>(n)) + n * tilt.log_phi - n * tilt.t.dot(u) -
         0.5 * sigma.log_det - 0.5 * s * kLog2Pi;
}

namespace {

double logdet_spd(const Matrix& m) { return SpdFactor(m).log_det; }

struct TiltSummary {
  double log_ratio;  // <t, m> - K(t), the per-draw log pi^m(m)/p(m)
  double logdet;
  Vector t;
};

TiltSummary tilt_summary(const CumulantModel& model_u, const Vector& m,
                         std::optional<Vector> warm = std::nullopt) {
  TiltSolution tilt = solve_tilt(model_u, m, 1e-10, 100, std::move(warm));
  return {tilt.t.dot(m) - tilt.log_phi, logdet_spd(tilt.kappa), tilt.t};
}

}  // namespace

JensenRatio jensen_log_ratio(const ConditioningSpec& spec, const Vector& consumed) {
  const Vector m0 = spec.initial_mean();
  const Vector mk = (spec.target - consumed) / static_cast<double>(spec.n - spec.k);
  if (!spec.u_model->mean_attainable(mk))
    throw DomainError("jensen_log_ratio: remaining mean is not attainable");
  TiltSummary s0 = tilt_summary(*spec.u_model, m0);
  TiltSummary sk = tilt_summary(*spec.u_model, mk, s0.t);
  JensenRatio out;
  out.log_d = spec.n * s0.log_ratio;
  out.log_n = (spec.n - spec.k) * sk.log_ratio;
  out.logdet_sigma0 = s0.logdet;
  out.logdet_sigmak = sk.logdet;
  return out;
}

KRuleReport relative_error_stats(const ConditioningSpec& spec, int k, const KRuleConfig& cfg,
                                 const EvalConfig& eval) {
  if (cfg.L < 100) throw ConfigError("relative_error_stats: L must be >= 100");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
    throw ConfigError("relative_error_stats: delta must lie in (0,1)");
  if (k < 1 || k >= spec.n)
    throw ConfigError("relative_error_stats: k must satisfy 1 <= k <= n-1");

  // restated spec at this k (same model, n, target)
  ConditioningSpec spec_k =
      spec.mode == ConditioningSpec::Mode::Sum
          ? ConditioningSpec::sum(spec.model, spec.n, k, spec.target)
          : ConditioningSpec::function_u(spec.model, spec.umap, spec.n, k, spec.target);

  KRuleReport report;
  report.k = k;
  const double n = spec.n;
  const double s_dim = spec.s;
  const double log_prefactor = std::log(n / (n - k));

  TiltSummary s0 = tilt_summary(*spec.u_model, spec.initial_mean());
  report.log_d = n * s0.log_ratio;
  report.logdet_sigma0 = s0.logdet;

  std::vector<double> log_a, log_b, log_n_vals, logdet_k_vals;
  log_a.reserve(static_cast<std::size_t>(cfg.L));
  log_b.reserve(static_cast<std::size_t>(cfg.L));

  for (int l = 0; l < cfg.L; ++l) {
    RngStream rng = RngStream::substream(cfg.seed, static_cast<std::uint64_t>(l));
    std::vector<Vector> steps;
    steps.reserve(static_cast<std::size_t>(k));
    double log_p = 0.0;
    Vector consumed = Vector::Zero(spec.s);
    for (int i = 0; i < k; ++i) {
      Vector y = spec.model->base_sample(rng);
      log_p += spec.model->base_log_density(y);
      consumed += spec_k.statistic(y);
      steps.push_back(std::move(y));
    }

    double log_ratio_g;  // log g - log p_X
    double log_n_term;
    double logdet_k;
    try {
      const Vector mk = (spec.target - consumed) / static_cast<double>(n - k);
      if (!spec.u_model->mean_attainable(mk)) throw DomainError("remaining mean unattainable");
      TiltSummary sk = tilt_summary(*spec.u_model, mk, s0.t);
      log_n_term = (n - k) * sk.log_ratio;
      logdet_k = sk.logdet;
      TrajectoryDensity dens = trajectory_log_density(spec_k, steps, eval);
      log_ratio_g = dens.log_g - log_p;
    } catch (const std::exception&) {
      // the approximating density has no mass here: A = B = 0
      ++report.n_failed;
      log_a.push_back(-std::numeric_limits<double>::infinity());
      log_b.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }

    const double log_nd = log_n_term - report.log_d;
    const double log_det_ratio = report.logdet_sigma0 - logdet_k;
    log_a.push_back((s_dim - 2.0) * log_prefactor + 3.0 * log_ratio_g + 2.0 * log_nd +
                    log_det_ratio);
    log_b.push_back(0.5 * (s_dim - 2.0) * log_prefactor + 2.0 * log_ratio_g + log_nd +
                    0.5 * log_det_ratio);
    log_n_vals.push_back(log_n_term);
    logdet_k_vals.push_back(logdet_k);
  }

  if (cfg.clip_quantile) {
    auto winsorize = [&](std::vector<double>& v) {
      std::vector<double> sorted = v;
      std::sort(sorted.begin(), sorted.end());
      const auto pos = static_cast<std::size_t>(*cfg.clip_quantile * (sorted.size() - 1));
      const double cap = sorted[pos];
      for (double& x : v) x = std::min(x, cap);
    };
    winsorize(log_a);
    winsorize(log_b);
  }

  // means and standard errors of exp(log_a), exp(log_b) via a stable shift
  auto reduce = [&](const std::vector<double>& logs, double& mean, double& se, int index_of_max) {
    double m = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(m)) {  // every trajectory failed
      mean = 0.0;
      se = 0.0;
      return;
    }
    std::vector<double> scaled(logs.size());
    for (std::size_t j = 0; j < logs.size(); ++j) scaled[j] = std::exp(logs[j] - m);
    MeanSe stats = mean_and_se(scaled);
    mean = std::exp(m) * stats.mean;
    se = std::exp(m) * stats.se;
    if (!std::isfinite(mean))
      throw SolveError("relative_error_stats: overflow on trajectory " +
                       std::to_string(index_of_max));
  };

  const int argmax_a = static_cast<int>(
      std::distance(log_a.begin(), std::max_element(log_a.begin(), log_a.end())));
  reduce(log_a, report.a_hat, report.a_se, argmax_a);
  const int argmax_b = static_cast<int>(
      std::distance(log_b.begin(), std::max_element(log_b.begin(), log_b.end())));
  reduce(log_b, report.b_hat, report.b_se, argmax_b);

  report.ere = 1.0 - report.b_hat;
  report.vre_raw = report.a_hat - report.b_hat * report.b_hat;
  report.vre = std::max(report.vre_raw, 0.0);
  const double half_width = 2.0 * std::sqrt(report.vre);
  report.ci_lo = report.ere - half_width;
  report.ci_hi = report.ere + half_width;
  report.accepted = cfg.delta >= report.ci_lo && cfg.delta <= report.ci_hi;

  if (!log_n_vals.empty()) {
    report.mean_log_n = pairwise_sum(log_n_vals) / static_cast<double>(log_n_vals.size());
    report.mean_logdet_sigmak =
        pairwise_sum(logdet_k_vals) / static_cast<double>(logdet_k_vals.size());
  }
  const double eps = std::pow(std::log(n), -3.0);
  report.e1_diagnostic = eps * eps * (n - k);
  return report;
}

KSelection select_k(const ConditioningSpec& spec, const KRuleConfig& cfg, const EvalConfig& eval) {
  if (cfg.k_grid.empty()) throw ConfigError("select_k: empty k grid");
  std::vector<int> grid = cfg.k_grid;
  std::sort(grid.begin(), grid.end());

  KSelection out;
  for (int k : grid) {
    KRuleReport report = relative_error_stats(spec, k, cfg, eval);
    if (report.accepted) out.k_star = k;
    out.reports.push_back(std::move(report));
  }
  return out;
}

}  // namespace condwalk
