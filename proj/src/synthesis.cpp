#include <algorithm>
#include <cmath>
#include <random>

#include "microcavity/analysis.hpp"
#include "microcavity/errors.hpp"

namespace microcavity::analysis {
namespace {

constexpr const char* kModule = "analysis";

// Uniform disc quadrature: equal-area rings, 16 azimuths each.
constexpr int kDiscRings = 8;
constexpr int kDiscAzimuths = 16;

}  // namespace

ScanTrace synthesize_scan_trace(const ScanSynthesis& spec) {
  detail::require(spec.samples >= 64, kModule, "scan synthesis needs >= 64 samples");
  detail::require(spec.scan_to_nm > spec.scan_from_nm, kModule, "scan range is empty");
  detail::require(spec.noise_sigma >= 0.0, kModule, "noise sigma must be non-negative");
  detail::require(!spec.modes.empty(), kModule, "at least one mode is required");
  const auto& g = spec.geometry;
  detail::require(g.wavelength_nm > 0.0, kModule, "wavelength must be positive");

  const double finesse = cavity::finesse_from_reflectivities(spec.mirror1.R, spec.mirror2.R);
  const double fsr_nm = g.wavelength_nm / 2.0;
  std::vector<double> offsets;
  double strongest = 0.0;
  for (const auto& mode : spec.modes) {
    detail::require(mode.weight >= 0.0, kModule, "mode weight must be non-negative");
    offsets.push_back(mode.mode.order() == 0
                          ? 0.0
                          : cavity::transverse_mode_spacing_nm(g.optical_length_um,
                                                               g.radius_of_curvature_um,
                                                               g.wavelength_nm,
                                                               mode.mode.order()));
    strongest = std::max(strongest, mode.weight);
  }

  ScanTrace trace;
  trace.displacement = linspace(spec.scan_from_nm, spec.scan_to_nm,
                                static_cast<std::size_t>(spec.samples));
  trace.signal.resize(trace.displacement.size());
  trace.noise_sigma = spec.noise_sigma * strongest * spec.peak_transmission;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < trace.displacement.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < spec.modes.size(); ++k) {
      s += spec.modes[k].weight * cavity::airy_transmission(trace.displacement[i] - offsets[k],
                                                            finesse, fsr_nm,
                                                            spec.peak_transmission);
    }
    if (trace.noise_sigma > 0.0) s += trace.noise_sigma * noise(rng);
    trace.signal[i] = s;
  }
  return trace;
}

ModeMap synthesize_mode_map(const MapSynthesis& spec) {
  detail::require(spec.step_um > 0.0, kModule, "map step must be positive");
  detail::require(spec.w_um > 0.0, kModule, "mode width must be positive");
  detail::require(spec.extent_um >= spec.w_um, kModule, "map extent must cover the mode");
  detail::require(spec.bead_diameter_um >= 0.0, kModule, "bead diameter must be non-negative");
  detail::require(spec.noise_sigma >= 0.0, kModule, "noise sigma must be non-negative");

  const auto half = static_cast<std::size_t>(std::floor(0.5 * spec.extent_um / spec.step_um + 1e-9));
  std::vector<double> axis(2 * half + 1);
  for (std::size_t i = 0; i < axis.size(); ++i) {
    axis[i] = (static_cast<double>(i) - static_cast<double>(half)) * spec.step_um;
  }

  std::vector<std::pair<double, double>> disc;
  if (spec.bead_diameter_um > 0.0) {
    const double radius = 0.5 * spec.bead_diameter_um;
    for (int ring = 0; ring < kDiscRings; ++ring) {
      const double r = radius * std::sqrt((ring + 0.5) / kDiscRings);
      for (int k = 0; k < kDiscAzimuths; ++k) {
        const double phi = 2.0 * kPi * (k + 0.5 * (ring % 2)) / kDiscAzimuths;
        disc.emplace_back(r * std::cos(phi), r * std::sin(phi));
      }
    }
  } else {
    disc.emplace_back(0.0, 0.0);
  }

  ModeMap map{axis, axis, std::vector<double>(axis.size() * axis.size())};
  for (std::size_t iy = 0; iy < axis.size(); ++iy) {
    for (std::size_t ix = 0; ix < axis.size(); ++ix) {
      double sum = 0.0;
      for (const auto& [ox, oy] : disc) {
        sum += cavity::hermite_gauss_intensity(spec.mode, spec.w_um, axis[ix] + ox, axis[iy] + oy);
      }
      map.signal[iy * axis.size() + ix] = sum / static_cast<double>(disc.size());
    }
  }

  if (spec.noise_sigma > 0.0) {
    const double peak = *std::max_element(map.signal.begin(), map.signal.end());
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma * peak);
    for (auto& v : map.signal) v += noise(rng);
  }
  return map;
}

std::vector<std::vector<double>> synthesize_calibration_positions(
    const CalibrationSynthesis& spec) {
  detail::require(spec.m >= 1, kModule, "order must be >= 1");
  detail::require(spec.orders_per_wavelength >= 1, kModule, "need >= 1 order per wavelength");
  detail::require(spec.scale_nm_per_unit != 0.0, kModule, "piezo scale must be non-zero");
  detail::require(spec.noise_fraction >= 0.0, kModule, "noise must be non-negative");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::vector<double>> out;
  for (double wl : spec.wavelengths_nm) {
    detail::require(wl > 0.0, kModule, "wavelengths must be positive");
    const double spacing_raw = wl / 2.0 / spec.scale_nm_per_unit;
    std::vector<double> list;
    for (int k = 0; k < spec.orders_per_wavelength; ++k) {
      const double length_nm = (spec.m + k) * wl / 2.0;
      double raw = (length_nm - spec.offset_nm) / spec.scale_nm_per_unit;
      if (spec.noise_fraction > 0.0) raw += spec.noise_fraction * spacing_raw * noise(rng);
      list.push_back(raw);
    }
    out.push_back(std::move(list));
  }
  return out;
}

}  // namespace microcavity::analysis
