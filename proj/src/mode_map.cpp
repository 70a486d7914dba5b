#include <algorithm>
#include <cmath>

#include "microcavity/analysis.hpp"
#include "microcavity/errors.hpp"

namespace microcavity::analysis {
namespace {

constexpr const char* kModule = "analysis";
constexpr double kFourLn2 = 2.772588722239781;  // 4 ln 2

}  // namespace

void validate(const ModeMap& map) {
  detail::require(map.x_um.size() >= 8 && map.y_um.size() >= 8, kModule,
                  "mode map must be at least 8x8");
  detail::require(map.signal.size() == map.x_um.size() * map.y_um.size(), kModule,
                  "mode map signal size does not match its grid");
  for (const auto* axis : {&map.x_um, &map.y_um}) {
    for (std::size_t i = 1; i < axis->size(); ++i) {
      detail::require((*axis)[i] > (*axis)[i - 1], kModule,
                      "mode map grid must be strictly ascending");
    }
  }
}

double gaussian_2d_model(const Gaussian2DFit& p, double x_um, double y_um) {
  const double dx = (x_um - p.center_x_um) / p.fwhm_x_um;
  const double dy = (y_um - p.center_y_um) / p.fwhm_y_um;
  return p.baseline + p.amplitude * std::exp(-kFourLn2 * (dx * dx + dy * dy));
}

Gaussian2DFit fit_gaussian_2d(const ModeMap& map, double poor_threshold,
                              const LeastSquaresOptions& options) {
  validate(map);
  const std::size_t nx = map.x_um.size(), ny = map.y_um.size();
  const auto [min_it, max_it] = std::minmax_element(map.signal.begin(), map.signal.end());
  const double vmin = *min_it, vmax = *max_it;
  detail::require(vmax - vmin > 1e-12 * std::max(std::abs(vmax), 1.0), kModule,
                  "mode map is flat");
  const auto at_max = static_cast<std::size_t>(
      std::count(map.signal.begin(), map.signal.end(), vmax));
  detail::require(at_max <= std::max<std::size_t>(4, map.signal.size() / 100), kModule,
                  "mode map is saturated");

  // Seeds: peak pixel, half-maximum area as an equivalent disc.
  const auto peak = static_cast<std::size_t>(max_it - map.signal.begin());
  const double dx = (map.x_um.back() - map.x_um.front()) / static_cast<double>(nx - 1);
  const double dy = (map.y_um.back() - map.y_um.front()) / static_cast<double>(ny - 1);
  const double half = vmin + 0.5 * (vmax - vmin);
  const auto above = static_cast<double>(std::count_if(
      map.signal.begin(), map.signal.end(), [&](double v) { return v >= half; }));
  const double fwhm0 = std::max(2.0 * std::sqrt(above * dx * dy / kPi), 2.0 * std::max(dx, dy));

  Eigen::VectorXd p(6);
  p << vmax - vmin, map.x_um[peak % nx], map.y_um[peak / nx], fwhm0, fwhm0, vmin;

  const auto n = static_cast<Eigen::Index>(map.signal.size());
  auto residual = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double a = q[0], x0 = q[1], y0 = q[2], fx = q[3], fy = q[4], b = q[5];
    for (std::size_t iy = 0; iy < ny; ++iy) {
      for (std::size_t ix = 0; ix < nx; ++ix) {
        const auto i = static_cast<Eigen::Index>(iy * nx + ix);
        const double ux = map.x_um[ix] - x0, uy = map.y_um[iy] - y0;
        const double e = std::exp(-kFourLn2 * (ux * ux / (fx * fx) + uy * uy / (fy * fy)));
        r[i] = b + a * e - map.signal[static_cast<std::size_t>(i)];
        if (jac) {
          (*jac)(i, 0) = e;
          (*jac)(i, 1) = a * e * 2.0 * kFourLn2 * ux / (fx * fx);
          (*jac)(i, 2) = a * e * 2.0 * kFourLn2 * uy / (fy * fy);
          (*jac)(i, 3) = a * e * 2.0 * kFourLn2 * ux * ux / (fx * fx * fx);
          (*jac)(i, 4) = a * e * 2.0 * kFourLn2 * uy * uy / (fy * fy * fy);
          (*jac)(i, 5) = 1.0;
        }
      }
    }
  };

  const auto result = levenberg_marquardt(residual, p, n, options);
  if (!result.converged) {
    throw ConvergenceError(kModule, "2D Gaussian fit did not converge within " +
                                        std::to_string(options.max_iterations) + " iterations");
  }

  Gaussian2DFit fit;
  fit.amplitude = result.parameters[0];
  fit.center_x_um = result.parameters[1];
  fit.center_y_um = result.parameters[2];
  fit.fwhm_x_um = std::abs(result.parameters[3]);
  fit.fwhm_y_um = std::abs(result.parameters[4]);
  fit.baseline = result.parameters[5];
  fit.iterations = result.iterations;
  fit.residual_rms = std::sqrt(result.residuals.squaredNorm() / static_cast<double>(n));
  fit.relative_residual = fit.residual_rms / std::abs(fit.amplitude);
  fit.poor_fit = !(fit.relative_residual <= poor_threshold);
  if (!(fit.fwhm_x_um > 0.0 && fit.fwhm_y_um > 0.0)) {
    throw ConvergenceError(kModule, "2D Gaussian fit collapsed to zero width");
  }
  return fit;
}

}  // namespace microcavity::analysis
