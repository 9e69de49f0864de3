#include "condwalk/applications.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace condwalk {

bool EventSpec::contains(const Vector& mean) const {
  for (int j = 0; j < mean.size(); ++j) {
    const bool ok = directions[static_cast<std::size_t>(j)] == Direction::Greater
                        ? mean(j) > threshold(j)
                        : mean(j) < threshold(j);
    if (!ok) return false;
  }
  return true;
}

Vector event_dominating_point(const CumulantModel& model_u, const EventSpec& event) {
  const Vector mu = model_u.base_mean();
  Vector point = mu;
  for (int j = 0; j < mu.size(); ++j) {
    if (event.directions[static_cast<std::size_t>(j)] == EventSpec::Direction::Greater)
      point(j) = std::max(mu(j), event.threshold(j));
    else
      point(j) = std::min(mu(j), event.threshold(j));
  }
  return point;
}

ISEstimate is_rare_event_estimate(const ModelPtr& model, const UMapSpec& umap,
                                  const EventSpec& event, int n, int k, int budget,
                                  const SamplerConfig& sampler_cfg, const EvalConfig& eval) {
  if (budget < 2) throw ConfigError("is_rare_event_estimate: budget must be >= 2");
  ModelPtr model_u = pushforward_model(model, umap);
  const int s = model_u->dim();
  if (event.threshold.size() != s ||
      static_cast<int>(event.directions.size()) != s)
    throw ConfigError("is_rare_event_estimate: event dimension does not match statistic");

  const Vector u_star = event_dominating_point(*model_u, event);
  ConditioningSpec spec = umap.kind == UMapSpec::Kind::Identity
                              ? ConditioningSpec::sum(model, n, k, n * u_star)
                              : ConditioningSpec::function_u(model, umap, n, k, n * u_star);

  SamplerConfig cfg = sampler_cfg;
  cfg.with_log_density = true;  // weights need log g
  const int workers = std::max(1, cfg.workers);

  std::vector<double> weights(static_cast<std::size_t>(budget), 0.0);
  std::atomic<int> hits{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mutex;

  auto run = [&](int worker) {
    for (int j = worker; j < budget; j += workers) {
      RngStream rng = RngStream::substream(cfg.seed, static_cast<std::uint64_t>(j));
      Trajectory traj = sample_trajectory(spec, cfg, rng, eval);

      // completion tilt at the remaining mean, computed once at step k
      const Vector m_k = (spec.target - traj.partial) / static_cast<double>(n - k);
      if (!spec.u_model->mean_attainable(m_k)) continue;  // zero weight
      TiltSolution tilt = solve_tilt(*spec.u_model, m_k);
      Vector t_x;
      switch (umap.kind) {
        case UMapSpec::Kind::Identity: t_x = tilt.t; break;
        case UMapSpec::Kind::Linear: t_x = umap.matrix.transpose() * tilt.t; break;
        case UMapSpec::Kind::Custom:
          throw ConfigError("is_rare_event_estimate: custom u has no completion sampler");
      }

      // log weight = sum_{head} log p_X - log g + sum_{tail} (K(t) - <t, w>)
      double log_w = -*traj.log_g;
      for (const Vector& y : traj.steps) log_w += model->base_log_density(y);
      Vector total = traj.partial;
      for (int step = k; step < n; ++step) {
        const Vector y = model->tilted_sample(t_x, rng);
        const Vector w = spec.statistic(y);
        log_w += tilt.log_phi - tilt.t.dot(w);
        total += w;
      }
      if (!event.contains(total / static_cast<double>(n))) continue;
      hits.fetch_add(1, std::memory_order_relaxed);
      weights[static_cast<std::size_t>(j)] = std::exp(log_w);
    }
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
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
    if (failed) throw SolveError("is_rare_event_estimate: " + error);
  }

  ISEstimate out;
  out.budget = budget;
  out.hits = hits.load();
  out.dominating_point = u_star;
  MeanSe stats = mean_and_se(weights);
  out.p_hat = stats.mean;
  out.se = stats.se;
  out.max_weight = *std::max_element(weights.begin(), weights.end());
  std::vector<double> squares(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j) squares[j] = weights[j] * weights[j];
  const double sum_w = pairwise_sum(weights);
  const double sum_sq = pairwise_sum(squares);
  out.ess = sum_sq > 0.0 ? sum_w * sum_w / sum_sq : 0.0;
  out.proposal_mismatch = out.ess < 10.0;
  return out;
}

namespace {

double abc_auto_tolerance(const ConditioningSpec& spec, long proposal_budget, std::uint64_t seed) {
  // pilot run: pick h as the distance quantile giving >= 200 expected accepts
  const long pilot = std::min<long>(proposal_budget, 100000);
  const Vector m0 = spec.initial_mean();
  std::vector<double> distances;
  distances.reserve(static_cast<std::size_t>(pilot));
  RngStream rng = RngStream::substream(seed, 0xabc0);
  for (long j = 0; j < pilot; ++j) {
    Vector total = Vector::Zero(spec.s);
    for (int i = 0; i < spec.n; ++i) total += spec.statistic(spec.model->base_sample(rng));
    distances.push_back((total / static_cast<double>(spec.n) - m0).lpNorm<Eigen::Infinity>());
  }
  std::sort(distances.begin(), distances.end());
  const double target_rate = 200.0 / static_cast<double>(proposal_budget);
  const auto pos = std::min<std::size_t>(
      distances.size() - 1,
      static_cast<std::size_t>(std::ceil(target_rate * static_cast<double>(distances.size()))));
  return std::max(distances[pos], 1e-12);
}

}  // namespace

AbcResult abc_conditional_oracle(const ConditioningSpec& spec, double h, long proposal_budget,
                                 std::uint64_t seed, int workers) {
  if (proposal_budget < 1) throw ConfigError("abc_conditional_oracle: empty proposal budget");
  AbcResult out;
  out.h = h > 0.0 ? h : abc_auto_tolerance(spec, proposal_budget, seed);
  out.proposals = proposal_budget;

  const Vector m0 = spec.initial_mean();
  const int n_workers = std::max(1, workers);
  std::vector<std::vector<std::vector<Vector>>> per_worker(
      static_cast<std::size_t>(n_workers));

  auto run = [&](int worker) {
    auto& local = per_worker[static_cast<std::size_t>(worker)];
    RngStream rng = RngStream::substream(seed, static_cast<std::uint64_t>(worker) + 1);
    const long lo = proposal_budget * worker / n_workers;
    const long hi = proposal_budget * (worker + 1) / n_workers;
    std::vector<Vector> walk(static_cast<std::size_t>(spec.k));
    for (long j = lo; j < hi; ++j) {
      Vector total = Vector::Zero(spec.s);
      for (int i = 0; i < spec.n; ++i) {
        Vector y = spec.model->base_sample(rng);
        total += spec.statistic(y);
        if (i < spec.k) walk[static_cast<std::size_t>(i)] = std::move(y);
      }
      if ((total / static_cast<double>(spec.n) - m0).lpNorm<Eigen::Infinity>() <= out.h)
        local.push_back(walk);
    }
  };

  if (n_workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }

  for (auto& local : per_worker)
    for (auto& walk : local) out.accepted.push_back(std::move(walk));
  out.acceptance_rate =
      static_cast<double>(out.accepted.size()) / static_cast<double>(proposal_budget);
  if (out.accepted.empty())
    throw SolveError("abc_conditional_oracle: no acceptances; increase h or the budget");
  return out;
}

double tv_distance_estimate(const Matrix& sample_a, const Matrix& sample_b, int bins,
                            int marginals) {
  if (sample_a.cols() != sample_b.cols())
    throw ConfigError("tv_distance_estimate: samples have different dimensions");
  if (bins < 2) throw ConfigError("tv_distance_estimate: need at least 2 bins");
  const long min_rows = std::min(sample_a.rows(), sample_b.rows());
  if (min_rows < 30L * bins)
    throw ConfigError("tv_distance_estimate: samples too small for " + std::to_string(bins) +
                      " bins (need >= " + std::to_string(30L * bins) + " points)");

  const int n_marginals = std::min<int>(marginals, static_cast<int>(sample_a.cols()));
  double worst = 0.0;
  for (int col = 0; col < n_marginals; ++col) {
    std::vector<double> pooled;
    pooled.reserve(static_cast<std::size_t>(sample_a.rows() + sample_b.rows()));
    for (long r = 0; r < sample_a.rows(); ++r) pooled.push_back(sample_a(r, col));
    for (long r = 0; r < sample_b.rows(); ++r) pooled.push_back(sample_b(r, col));
    std::sort(pooled.begin(), pooled.end());

    std::vector<double> edges(static_cast<std::size_t>(bins) - 1);
    for (int e = 1; e < bins; ++e)
      edges[static_cast<std::size_t>(e - 1)] =
          pooled[static_cast<std::size_t>(static_cast<double>(pooled.size()) * e / bins)];

    auto histogram = [&](const Matrix& sample) {
      std::vector<double> freq(static_cast<std::size_t>(bins), 0.0);
      for (long r = 0; r < sample.rows(); ++r) {
        const double v = sample(r, col);
        const auto bin = static_cast<std::size_t>(
            std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
        freq[bin] += 1.0;
      }
      for (double& f : freq) f /= static_cast<double>(sample.rows());
      return freq;
    };

    const auto fa = histogram(sample_a);
    const auto fb = histogram(sample_b);
    double tv = 0.0;
    for (int b = 0; b < bins; ++b)
      tv += std::abs(fa[static_cast<std::size_t>(b)] - fb[static_cast<std::size_t>(b)]);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

Matrix first_step_matrix(const std::vector<Trajectory>& batch) {
  if (batch.empty()) return Matrix(0, 0);
  const int d = static_cast<int>(batch.front().steps.front().size());
  Matrix out(static_cast<long>(batch.size()), d);
  for (std::size_t r = 0; r < batch.size(); ++r)
    out.row(static_cast<long>(r)) = batch[r].steps.front().transpose();
  return out;
}

Matrix first_step_matrix(const std::vector<std::vector<Vector>>& walks) {
  if (walks.empty()) return Matrix(0, 0);
  const int d = static_cast<int>(walks.front().front().size());
  Matrix out(static_cast<long>(walks.size()), d);
  for (std::size_t r = 0; r < walks.size(); ++r)
    out.row(static_cast<long>(r)) = walks[r].front().transpose();
  return out;
}

}  // namespace condwalk
