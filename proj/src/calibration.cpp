#include <algorithm>
#include <cmath>
#include <set>

#include "microcavity/analysis.hpp"
#include "microcavity/errors.hpp"

namespace microcavity::analysis {
namespace {

constexpr const char* kModule = "analysis";

// Least-squares line length = scale * raw + offset for order m.
CalibrationCandidate regress(int m, const std::vector<std::vector<double>>& positions,
                             std::span<const double> wavelengths) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t k = 0; k < positions[i].size(); ++k) {
      const double x = positions[i][k];
      const double y = (m + static_cast<double>(k)) * wavelengths[i] / 2.0;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
  }
  const double nn = static_cast<double>(n);
  const double mx = sx / nn, my = sy / nn;
  const double var = sxx / nn - mx * mx;
  const double cov = sxy / nn - mx * my;
  CalibrationCandidate c;
  c.m = m;
  c.scale_nm_per_unit = cov / var;
  c.offset_nm = my - c.scale_nm_per_unit * mx;

  double ss = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t k = 0; k < positions[i].size(); ++k) {
      const double y = (m + static_cast<double>(k)) * wavelengths[i] / 2.0;
      const double r = y - (c.scale_nm_per_unit * positions[i][k] + c.offset_nm);
      ss += r * r;
    }
  }
  c.residual_nm = std::sqrt(ss / nn);
  return c;
}

}  // namespace

LengthCalibration calibrate_length(const std::vector<std::vector<double>>& positions_raw,
                                   std::span<const double> wavelengths_nm,
                                   const CalibrationOptions& options) {
  detail::require(positions_raw.size() == wavelengths_nm.size(), kModule,
                  "one position list per wavelength is required");
  detail::require(std::set<double>(wavelengths_nm.begin(), wavelengths_nm.end()).size() >= 2,
                  kModule, "at least two distinct wavelengths are required");
  for (double wl : wavelengths_nm) {
    detail::require(wl > 0.0, kModule, "wavelengths must be positive");
  }
  detail::require(options.m_min >= 1 && options.m_max <= 200 && options.m_min <= options.m_max,
                  kModule, "order search interval must lie within [1, 200]");
  detail::require(options.ambiguity_ratio >= 1.0, kModule, "ambiguity ratio must be >= 1");

  std::vector<double> all;
  for (const auto& list : positions_raw) {
    detail::require(!list.empty(), kModule, "every wavelength needs at least one resonance");
    all.insert(all.end(), list.begin(), list.end());
  }
  const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
  detail::require(*hi > *lo, kModule, "degenerate resonance positions (all equal)");

  LengthCalibration out;
  for (int m = options.m_min; m <= options.m_max; ++m) {
    out.candidates.push_back(regress(m, positions_raw, wavelengths_nm));
  }

  // Stable ordering by residual keeps the smaller m first on exact ties.
  std::vector<CalibrationCandidate> ranked = out.candidates;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.residual_nm < b.residual_nm; });
  const auto& best = ranked.front();
  out.m = best.m;
  out.piezo_scale_nm_per_unit = best.scale_nm_per_unit;
  out.offset_nm = best.offset_nm;
  out.residual_nm = best.residual_nm;
  out.length_um = cavity::resonance_length_um(best.m, wavelengths_nm[0]);

  if (ranked.size() > 1) {
    const auto& second = ranked[1];
    out.runner_up_m = second.m;
    out.runner_up_residual_nm = second.residual_nm;
    const bool close = second.residual_nm < options.ambiguity_ratio * best.residual_nm ||
                       second.residual_nm == best.residual_nm;
    out.ambiguous = close;
  }
  if (best.residual_nm > options.residual_threshold_nm) out.ambiguous = true;
  return out;
}

}  // namespace microcavity::analysis
