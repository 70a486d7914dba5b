#include <algorithm>
#include <cmath>
#include <numeric>

#include "microcavity/analysis.hpp"
#include "microcavity/errors.hpp"

namespace microcavity::analysis {
namespace {

constexpr const char* kModule = "analysis";

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  double m = *mid;
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
  return m;
}

// Interpolated position where the signal crosses `level` walking away from
// index `peak` in direction `dir` (+1 / -1). Falls back to the trace end.
double half_level_crossing(const ScanTrace& trace, const std::vector<double>& s, std::size_t peak,
                           double level, int dir) {
  std::size_t i = peak;
  while (true) {
    if ((dir < 0 && i == 0) || (dir > 0 && i + 1 == s.size())) return trace.displacement[i];
    const std::size_t j = dir > 0 ? i + 1 : i - 1;
    if (s[j] < level) {
      const double f = (s[i] - level) / (s[i] - s[j]);
      return trace.displacement[i] + f * (trace.displacement[j] - trace.displacement[i]);
    }
    i = j;
  }
}

PeakFit run_fit(const ScanTrace& trace, std::vector<PeakGuess> peaks, double baseline,
                const LeastSquaresOptions& options) {
  const auto n = static_cast<Eigen::Index>(trace.displacement.size());
  const auto k = static_cast<Eigen::Index>(peaks.size());
  Eigen::VectorXd p(1 + 3 * k);
  p[0] = baseline;
  for (Eigen::Index j = 0; j < k; ++j) {
    p[1 + 3 * j] = peaks[j].amplitude;
    p[2 + 3 * j] = peaks[j].center;
    p[3 + 3 * j] = peaks[j].fwhm;
  }

  auto residual = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = trace.displacement[i];
      double model = q[0];
      if (jac) (*jac)(i, 0) = 1.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        const double a = q[1 + 3 * j], c = q[2 + 3 * j], g = q[3 + 3 * j];
        const double u = 2.0 * (x - c) / g;
        const double d = 1.0 + u * u;
        model += a / d;
        if (jac) {
          (*jac)(i, 1 + 3 * j) = 1.0 / d;
          (*jac)(i, 2 + 3 * j) = a * 4.0 * u / (g * d * d);
          (*jac)(i, 3 + 3 * j) = a * 2.0 * u * u / (g * d * d);
        }
      }
      r[i] = model - trace.signal[i];
    }
  };

  const auto result = levenberg_marquardt(residual, p, n, options);
  if (!result.converged) {
    throw ConvergenceError(kModule, "Lorentzian fit did not converge within " +
                                        std::to_string(options.max_iterations) + " iterations");
  }

  const Eigen::MatrixXd cov = result.covariance();
  std::vector<std::size_t> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.parameters[2 + 3 * static_cast<Eigen::Index>(a)] <
           result.parameters[2 + 3 * static_cast<Eigen::Index>(b)];
  });

  PeakFit fit;
  fit.baseline = result.parameters[0];
  fit.iterations = result.iterations;
  fit.residual_rms = std::sqrt(result.residuals.squaredNorm() / static_cast<double>(n));
  auto stderr_of = [&](Eigen::Index idx) {
    return cov.size() > 0 ? std::sqrt(std::max(0.0, cov(idx, idx))) : 0.0;
  };
  fit.standard_errors.push_back(stderr_of(0));
  for (std::size_t j : order) {
    const auto b = static_cast<Eigen::Index>(1 + 3 * j);
    fit.amplitudes.push_back(result.parameters[b]);
    fit.centers.push_back(result.parameters[b + 1]);
    fit.fwhms.push_back(std::abs(result.parameters[b + 2]));
    for (Eigen::Index o = 0; o < 3; ++o) fit.standard_errors.push_back(stderr_of(b + o));
  }

  const double lo = trace.displacement.front(), hi = trace.displacement.back();
  for (std::size_t j = 0; j < fit.centers.size(); ++j) {
    if (fit.centers[j] < lo || fit.centers[j] > hi || !(fit.fwhms[j] > 0.0)) {
      throw ConvergenceError(kModule, "Lorentzian fit left the scan range");
    }
  }
  return fit;
}

}  // namespace

void validate(const ScanTrace& trace) {
  detail::require(trace.displacement.size() == trace.signal.size(), kModule,
                  "scan trace columns differ in length");
  detail::require(trace.displacement.size() >= 16, kModule, "scan trace needs >= 16 samples");
  for (std::size_t i = 1; i < trace.displacement.size(); ++i) {
    detail::require(trace.displacement[i] > trace.displacement[i - 1], kModule,
                    "scan displacement must be strictly ascending");
  }
}

std::size_t PeakFit::dominant() const {
  detail::require(!amplitudes.empty(), kModule, "fit has no peaks");
  return static_cast<std::size_t>(std::max_element(amplitudes.begin(), amplitudes.end()) -
                                  amplitudes.begin());
}

double lorentzian_model(std::span<const PeakGuess> peaks, double baseline, double x) {
  double y = baseline;
  for (const auto& p : peaks) {
    const double u = 2.0 * (x - p.center) / p.fwhm;
    y += p.amplitude / (1.0 + u * u);
  }
  return y;
}

std::vector<PeakGuess> seed_peaks(const ScanTrace& trace, int n_peaks) {
  validate(trace);
  detail::require(n_peaks >= 1, kModule, "at least one peak must be requested");
  const std::size_t n = trace.signal.size();
  detail::require(n >= 8 * static_cast<std::size_t>(n_peaks), kModule,
                  "scan trace needs >= 8 samples per requested peak");

  // 5-point moving average for seeding only.
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(n - 1, i + 2);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += trace.signal[j];
    s[i] = sum / static_cast<double>(hi - lo + 1);
  }

  const double base = median(s);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(s[i] - base);
  const double threshold = base + 3.0 * median(dev);

  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (s[i] > s[i - 1] && s[i] >= s[i + 1] && s[i] > threshold) candidates.push_back(i);
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

  struct Extent { double lo, hi; };
  std::vector<Extent> taken;
  std::vector<PeakGuess> guesses;
  const double dx = (trace.displacement.back() - trace.displacement.front()) /
                    static_cast<double>(n - 1);
  for (std::size_t i : candidates) {
    const double x = trace.displacement[i];
    const bool shadowed = std::any_of(taken.begin(), taken.end(), [&](const Extent& e) {
      return x >= e.lo && x <= e.hi;
    });
    if (shadowed) continue;
    const double level = base + 0.5 * (s[i] - base);
    const double left = half_level_crossing(trace, s, i, level, -1);
    const double right = half_level_crossing(trace, s, i, level, +1);
    taken.push_back({left, right});
    guesses.push_back({x, std::max(right - left, 2.0 * dx), s[i] - base});
    if (guesses.size() == static_cast<std::size_t>(n_peaks)) break;
  }
  if (guesses.size() < static_cast<std::size_t>(n_peaks)) {
    throw ValidationError(kModule, "found " + std::to_string(guesses.size()) +
                                       " detectable peaks, " + std::to_string(n_peaks) +
                                       " requested");
  }
  return guesses;
}

PeakFit fit_peaks_lorentzian(const ScanTrace& trace, int n_peaks,
                             const LeastSquaresOptions& options) {
  auto guesses = seed_peaks(trace, n_peaks);
  std::vector<double> copy = trace.signal;
  return run_fit(trace, std::move(guesses), median(std::move(copy)), options);
}

PeakFit fit_peaks_lorentzian(const ScanTrace& trace, std::span<const PeakGuess> initial,
                             double initial_baseline, const LeastSquaresOptions& options) {
  validate(trace);
  detail::require(!initial.empty(), kModule, "at least one initial peak is required");
  detail::require(trace.signal.size() >= 8 * initial.size(), kModule,
                  "scan trace needs >= 8 samples per requested peak");
  for (const auto& g : initial) {
    detail::require(g.fwhm > 0.0, kModule, "initial FWHM must be positive");
  }
  return run_fit(trace, {initial.begin(), initial.end()}, initial_baseline, options);
}

double finesse_from_scan(const PeakFit& fit, double wavelength_nm,
                         double piezo_scale_nm_per_unit) {
  detail::require(std::isfinite(piezo_scale_nm_per_unit) && piezo_scale_nm_per_unit > 0.0,
                  kModule, "a positive piezo calibration scale (nm per unit) is required");
  const double fwhm_nm = fit.fwhms[fit.dominant()] * piezo_scale_nm_per_unit;
  return cavity::finesse_from_linewidth(fwhm_nm, wavelength_nm);
}

}  // namespace microcavity::analysis
