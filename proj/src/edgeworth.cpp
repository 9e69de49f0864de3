#include "condwalk/edgeworth.hpp"

#include <array>
#include <cmath>

namespace condwalk {

CumulantSet CumulantSet::from(Matrix kappa, Tensor3 c3, Tensor4 c4) {
  CumulantSet cum;
  cum.kappa_inv = spd_inverse(kappa);
  cum.kappa = std::move(kappa);
  cum.c3 = std::move(c3);
  cum.c4 = std::move(c4);
  return cum;
}

CumulantSet CumulantSet::at_tilt(const CumulantModel& model, const Vector& t) {
  return from(covariance_map(model, t), third_cumulant(model, t), fourth_cumulant(model, t));
}

CumulantSet standardize(const CumulantSet& cum) {
  const Matrix root_inv = spd_inverse(spd_sqrt(cum.kappa));
  CumulantSet out;
  out.kappa = Matrix::Identity(cum.dim(), cum.dim());
  out.kappa_inv = out.kappa;
  out.c3 = cum.c3.transform(root_inv);
  out.c4 = cum.c4.transform(root_inv);
  return out;
}

namespace {

struct PartitionTerms {
  // one entry per partition: list of index-pairs, list of singleton indices
  std::vector<std::pair<std::vector<std::pair<int, int>>, std::vector<int>>> partitions;
};

// Enumerate all partitions of positions {0..k-1} into unordered pairs plus
// singletons. Taking the first unused position and either leaving it single
// or pairing it with each later position generates each partition once.
void enumerate_partitions(std::vector<int>& positions, std::vector<std::pair<int, int>>& pairs,
                          std::vector<int>& singles, PartitionTerms& out) {
  if (positions.empty()) {
    out.partitions.emplace_back(pairs, singles);
    return;
  }
  const int first = positions.front();
  std::vector<int> rest(positions.begin() + 1, positions.end());

  singles.push_back(first);
  enumerate_partitions(rest, pairs, singles, out);
  singles.pop_back();

  for (std::size_t j = 0; j < rest.size(); ++j) {
    std::vector<int> remaining;
    remaining.reserve(rest.size() - 1);
    for (std::size_t l = 0; l < rest.size(); ++l)
      if (l != j) remaining.push_back(rest[l]);
    pairs.emplace_back(first, rest[j]);
    enumerate_partitions(remaining, pairs, singles, out);
    pairs.pop_back();
  }
}

const PartitionTerms& partitions_for(int order) {
  static const auto cache = [] {
    std::array<PartitionTerms, 7> table;
    for (int k = 1; k <= 6; ++k) {
      std::vector<int> positions(k);
      for (int i = 0; i < k; ++i) positions[i] = i;
      std::vector<std::pair<int, int>> pairs;
      std::vector<int> singles;
      enumerate_partitions(positions, pairs, singles, table[k]);
    }
    return table;
  }();
  return cache[order];
}

}  // namespace

int permutation_bracket_terms(int order, int pairs) {
  int count = 0;
  for (const auto& [pr, sg] : partitions_for(order).partitions)
    if (static_cast<int>(pr.size()) == pairs) ++count;
  return count;
}

double hermite_tensor(int order, std::span<const int> indices, const Vector& x,
                      const CumulantSet& cum) {
  if (order != 3 && order != 4 && order != 6)
    throw ConfigError("hermite_tensor: unsupported order " + std::to_string(order));
  if (static_cast<int>(indices.size()) != order)
    throw ConfigError("hermite_tensor: index tuple size does not match order");
  for (int idx : indices)
    if (idx < 0 || idx >= cum.dim()) throw ConfigError("hermite_tensor: index out of range");

  const Vector x_low = cum.kappa_inv * x;  // lowered coordinates x_j
  double value = 0.0;
  for (const auto& [pairs, singles] : partitions_for(order).partitions) {
    double term = (pairs.size() % 2 == 0) ? 1.0 : -1.0;
    for (const auto& [a, b] : pairs) term *= cum.kappa_inv(indices[a], indices[b]);
    for (int s : singles) term *= x_low(indices[s]);
    value += term;
  }
  return value;
}

double q3(const CumulantSet& cum, const Vector& x) {
  if (cum.c3.is_zero()) return 0.0;
  const int d = cum.dim();
  double acc = 0.0;
  int idx[3];
  for (idx[0] = 0; idx[0] < d; ++idx[0])
    for (idx[1] = 0; idx[1] < d; ++idx[1])
      for (idx[2] = 0; idx[2] < d; ++idx[2])
        acc += cum.c3(idx[0], idx[1], idx[2]) * hermite_tensor(3, idx, x, cum);
  return acc / 6.0;
}

double q4(const CumulantSet& cum, const Vector& x) {
  const int d = cum.dim();
  double acc4 = 0.0;
  {
    int idx[4];
    for (idx[0] = 0; idx[0] < d; ++idx[0])
      for (idx[1] = 0; idx[1] < d; ++idx[1])
        for (idx[2] = 0; idx[2] < d; ++idx[2])
          for (idx[3] = 0; idx[3] < d; ++idx[3]) {
            const double c = cum.c4(idx[0], idx[1], idx[2], idx[3]);
            if (c != 0.0) acc4 += c * hermite_tensor(4, idx, x, cum);
          }
  }
  double acc6 = 0.0;
  if (!cum.c3.is_zero()) {
    int idx[6];
    for (idx[0] = 0; idx[0] < d; ++idx[0])
      for (idx[1] = 0; idx[1] < d; ++idx[1])
        for (idx[2] = 0; idx[2] < d; ++idx[2]) {
          const double c_a = cum.c3(idx[0], idx[1], idx[2]);
          if (c_a == 0.0) continue;
          for (idx[3] = 0; idx[3] < d; ++idx[3])
            for (idx[4] = 0; idx[4] < d; ++idx[4])
              for (idx[5] = 0; idx[5] < d; ++idx[5]) {
                const double c_b = cum.c3(idx[3], idx[4], idx[5]);
                if (c_b != 0.0) acc6 += c_a * c_b * hermite_tensor(6, idx, x, cum);
              }
        }
  }
  return acc4 / 24.0 + acc6 / 72.0;
}

EdgeworthValue edgeworth_log_density(const CumulantSet& cum, int n, const Vector& x,
                                     double floor) {
  if (n < 2) throw ConfigError("edgeworth_log_density: n must be >= 2");
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double factor = 1.0 + q3(cum, x) / sqrt_n + q4(cum, x) / n;
  const double log_normal = gaussian_log_density(x, Vector::Zero(cum.dim()), cum.kappa);
  EdgeworthValue out;
  out.factor = factor;
  out.clamped = factor <= floor;
  out.log_density = log_normal + std::log(out.clamped ? floor : factor);
  return out;
}

DeltaDiagnostics delta_diagnostics(const CumulantSet& cum) {
  const int d = cum.dim();
  DeltaDiagnostics out{0.0, 0.0, 0.0};
  for (int j = 0; j < d; ++j)
    for (int m = 0; m < d; ++m) out.delta1 += cum.kappa(j, m);
  out.delta1 /= 8.0;
  for (int j = 0; j < d; ++j)
    for (int m = 0; m < d; ++m)
      for (int q = 0; q < d; ++q) out.delta2 += cum.c3(j, j, m) * cum.c3(m, q, q);
  out.delta2 *= 15.0 / 72.0;
  out.delta = out.delta1 - out.delta2;
  return out;
}

}  // namespace condwalk
