#include "microcavity/least_squares.hpp"

#include <cmath>
#include <limits>

namespace microcavity::analysis {

Eigen::MatrixXd LeastSquaresResult::covariance() const {
  const Eigen::Index n = residuals.size();
  const Eigen::Index p = parameters.size();
  if (n <= p) return {};
  const double s2 = residuals.squaredNorm() / static_cast<double>(n - p);
  const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
  return s2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
}

LeastSquaresResult levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd initial,
                                       Eigen::Index n_residuals,
                                       const LeastSquaresOptions& options) {
  LeastSquaresResult out;
  out.parameters = std::move(initial);
  out.residuals.resize(n_residuals);
  out.jacobian.resize(n_residuals, out.parameters.size());
  f(out.parameters, out.residuals, &out.jacobian);
  out.cost = 0.5 * out.residuals.squaredNorm();

  Eigen::VectorXd trial_residuals(n_residuals);
  Eigen::MatrixXd jtj = out.jacobian.transpose() * out.jacobian;
  double mu = 1e-3 * jtj.diagonal().maxCoeff();
  if (!(mu > 0.0)) mu = 1e-3;

  for (int it = 1; it <= options.max_iterations; ++it) {
    out.iterations = it;
    const Eigen::VectorXd gradient = out.jacobian.transpose() * out.residuals;
    Eigen::VectorXd scale = jtj.diagonal();
    for (Eigen::Index k = 0; k < scale.size(); ++k) scale[k] = std::max(scale[k], 1e-300);

    bool accepted = false;
    Eigen::VectorXd step;
    double trial_cost = 0.0;
    while (mu < 1e30) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal() += mu * scale;
      step = damped.ldlt().solve(-gradient);
      const Eigen::VectorXd trial = out.parameters + step;
      f(trial, trial_residuals, nullptr);
      trial_cost = 0.5 * trial_residuals.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < out.cost) {
        accepted = true;
        break;
      }
      mu *= 10.0;
    }
    if (!accepted) {
      // No damping lowers the cost: a minimum at working precision.
      out.converged = true;
      return out;
    }

    const double decrease = (out.cost - trial_cost) / std::max(out.cost, 1e-300);
    out.parameters += step;
    f(out.parameters, out.residuals, &out.jacobian);
    out.cost = 0.5 * out.residuals.squaredNorm();
    jtj = out.jacobian.transpose() * out.jacobian;
    mu = std::max(mu / 10.0, 1e-20);

    const bool small_step =
        step.norm() <= options.step_tolerance * (out.parameters.norm() + options.step_tolerance);
    if (decrease < options.relative_cost_tolerance || small_step) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace microcavity::analysis
