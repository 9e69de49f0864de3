#pragma once

#include <optional>

#include "condwalk/model.hpp"

namespace condwalk {

/// Solved tilt point: t with m(t) = alpha, plus the quantities every caller
/// needs alongside it.
struct TiltSolution {
  Vector alpha;
  Vector t;
  double log_phi = 0.0;  // K(t)
  Matrix kappa;          // covariance of the tilted law
  double residual = 0.0;  // ||m(t) - alpha||
  int iterations = 0;
};

/// Damped Newton for m(t) = alpha: t <- t + kappa(t)^{-1} (alpha - m(t)),
/// halving the step while it exits the tilt domain or increases the residual.
/// Steepness of K makes the solution unique for attainable alpha.
TiltSolution solve_tilt(const CumulantModel& model, const Vector& alpha, double tol = 1e-10,
                        int max_iter = 100, std::optional<Vector> warm_start = std::nullopt);

/// log pi^alpha(x) = <t, x> - K(t) + log p_X(x).
double tilted_log_density(const CumulantModel& model, const TiltSolution& tilt, const Vector& x);

/// Draw from the tilted law pi^alpha.
Vector tilted_sample(const CumulantModel& model, const TiltSolution& tilt, RngStream& rng);

}  // namespace condwalk
