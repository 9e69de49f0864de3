#pragma once

#include <span>

#include "condwalk/model.hpp"

namespace condwalk {

/// Cumulants of one summand: covariance kappa (upper indices), its inverse
/// (lowered indices), and the order-3/4 cumulant tensors.
struct CumulantSet {
  Matrix kappa;
  Matrix kappa_inv;
  Tensor3 c3;
  Tensor4 c4;

  static CumulantSet from(Matrix kappa, Tensor3 c3, Tensor4 c4);
  /// Cumulants of the tilted law of a model at tilt t.
  static CumulantSet at_tilt(const CumulantModel& model, const Vector& t);
  int dim() const { return static_cast<int>(kappa.rows()); }
};

/// Transport to the standardized variable kappa^{-1/2} X: covariance becomes
/// the identity, tensors contract with the SPD inverse root on every slot.
CumulantSet standardize(const CumulantSet& cum);

/// Tensor Hermite polynomial h_{i1...ik}(x) generated by partial derivatives
/// of the Gaussian density. The permutation brackets [3], [6], [15], [45] are
/// expanded by enumerating partitions of the index tuple into kappa-pairs and
/// x-singletons with sign (-1)^{#pairs}; one code path covers orders 3 to 6.
/// Indices are 0-based; supported orders are 3, 4 and 6.
double hermite_tensor(int order, std::span<const int> indices, const Vector& x,
                      const CumulantSet& cum);

/// Number of terms in the bracket expansion for `order` indices grouped into
/// `pairs` kappa-pairs (exposed for the bracket-count check).
int permutation_bracket_terms(int order, int pairs);

/// Q3(x): Einstein contraction of the third cumulants against h_{jlm}.
double q3(const CumulantSet& cum, const Vector& x);
/// Q4(x): order-4 contraction with weights 1/24 and 1/72.
double q4(const CumulantSet& cum, const Vector& x);

struct EdgeworthValue {
  double log_density;
  bool clamped;   // the bracket 1 + Q3/sqrt(n) + Q4/n fell below the floor
  double factor;  // unclamped bracket value
};

/// Order-4 Edgeworth log-density for the standardized sum of n summands with
/// cumulants `cum` (callers standardize first; see `standardize`). The
/// polynomial bracket can go negative in the tails, in which case the value
/// is clamped to `floor` and flagged rather than failing.
EdgeworthValue edgeworth_log_density(const CumulantSet& cum, int n, const Vector& x,
                                     double floor = 1e-12);

struct DeltaDiagnostics {
  double delta1;
  double delta2;
  double delta;
};

/// delta1 = (1/8) sum_{j,m} kappa^{j,m};
/// delta2 = (15/72) sum_{j,m,q} kappa^{j,j,m} kappa^{m,q,q}; delta = d1 - d2.
DeltaDiagnostics delta_diagnostics(const CumulantSet& cum);

}  // namespace condwalk
