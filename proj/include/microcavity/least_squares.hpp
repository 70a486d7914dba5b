#pragma once

#include <Eigen/Dense>
#include <functional>

namespace microcavity::analysis {

/// Fills residuals r(p) = model(p) - data and, when `jacobian` is non-null,
/// the Jacobian dr/dp (rows = residuals, cols = parameters).
using ResidualFunction =
    std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& residuals,
                       Eigen::MatrixXd* jacobian)>;

struct LeastSquaresOptions {
  int max_iterations = 200;
  double relative_cost_tolerance = 1e-10;
  double step_tolerance = 1e-14;
};

struct LeastSquaresResult {
  Eigen::VectorXd parameters;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;  // 0.5 * |r|^2
  int iterations = 0;
  bool converged = false;

  /// s^2 (J^T J)^-1 with s^2 = |r|^2 / (n - p). Empty when n <= p.
  Eigen::MatrixXd covariance() const;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) with Marquardt diagonal
/// scaling. Converges when an accepted step lowers the cost by less than
/// relative_cost_tolerance, when the step becomes negligible, or when no
/// damping level can lower the cost any further.
LeastSquaresResult levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd initial,
                                       Eigen::Index n_residuals,
                                       const LeastSquaresOptions& options = {});

}  // namespace microcavity::analysis
