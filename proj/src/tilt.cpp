#include "condwalk/tilt.hpp"

#include <cmath>
#include <sstream>

namespace condwalk {

TiltSolution solve_tilt(const CumulantModel& model, const Vector& alpha, double tol, int max_iter,
                        std::optional<Vector> warm_start) {
  if (tol <= 0.0) throw ConfigError("solve_tilt: tol must be positive");
  if (alpha.size() != model.dim())
    throw ConfigError("solve_tilt: alpha dimension does not match model");
  if (!model.mean_attainable(alpha)) {
    std::ostringstream os;
    os << "tilt solve failed: alpha is outside the attainable mean region of "
       << model.describe();
    throw SolveError(os.str());
  }

  Vector t = warm_start && warm_start->size() == model.dim() ? *warm_start
                                                             : Vector::Zero(model.dim());
  if (!model.tilt_in_domain(t)) t = Vector::Zero(model.dim());

  Vector m = model.mean(t);
  double residual = (m - alpha).norm();
  int iterations = 0;

  while (residual > tol) {
    if (iterations >= max_iter) {
      std::ostringstream os;
      os << "tilt solve failed: no convergence in " << max_iter
         << " iterations, last residual " << residual;
      throw SolveError(os.str());
    }
    Matrix kappa = model.covariance(t);
    Eigen::LLT<Matrix> llt(kappa);
    if (llt.info() != Eigen::Success)
      throw SolveError("tilt solve failed: covariance lost positive-definiteness");
    Vector step = llt.solve(alpha - m);

    double lambda = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving) {
      Vector cand = t + lambda * step;
      if (model.tilt_in_domain(cand)) {
        Vector m_cand = model.mean(cand);
        double r_cand = (m_cand - alpha).norm();
        if (r_cand < residual) {
          t = std::move(cand);
          m = std::move(m_cand);
          residual = r_cand;
          moved = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    ++iterations;
    if (!moved) {
      std::ostringstream os;
      os << "tilt solve failed: step size underflow at residual " << residual
         << " (alpha may lie outside the attainable mean region)";
      throw SolveError(os.str());
    }
  }

  TiltSolution out;
  out.alpha = alpha;
  out.t = std::move(t);
  out.log_phi = model.log_mgf_unchecked(out.t);
  out.kappa = model.covariance(out.t);
  out.residual = residual;
  out.iterations = iterations;
  return out;
}

double tilted_log_density(const CumulantModel& model, const TiltSolution& tilt, const Vector& x) {
  return tilt.t.dot(x) - tilt.log_phi + model.base_log_density(x);
}

Vector tilted_sample(const CumulantModel& model, const TiltSolution& tilt, RngStream& rng) {
  return model.tilted_sample(tilt.t, rng);
}

}  // namespace condwalk
