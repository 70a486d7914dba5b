#include "microcavity/cavity.hpp"

#include <cmath>

#include "microcavity/errors.hpp"

namespace microcavity::cavity {
namespace {

constexpr const char* kModule = "cavity";

void require_positive(double v, const char* what) {
  detail::require(std::isfinite(v) && v > 0.0, kModule, std::string(what) + " must be positive");
}

}  // namespace

MirrorSpec MirrorSpec::fixed(double R, double T, double phase_rad) {
  detail::require(R > 0.0 && R <= 1.0, kModule, "mirror reflectance must lie in (0, 1]");
  detail::require(T >= 0.0 && R + T <= 1.0 + 1e-12, kModule,
                  "mirror transmittance must lie in [0, 1 - R]");
  return MirrorSpec{Kind::fixed, R, T, phase_rad, std::nullopt};
}

MirrorSpec MirrorSpec::from_stack(const optics::LayerStack& stack, double wavelength_nm) {
  const auto resp = optics::stack_response(stack, wavelength_nm, 0.0, optics::Polarization::s);
  return MirrorSpec{Kind::stack, resp.R, resp.T, std::arg(resp.r), stack};
}

CavityGeometry CavityGeometry::on_resonance(int m, double wavelength_nm, double radius_um) {
  return CavityGeometry{resonance_length_um(m, wavelength_nm), m, radius_um, wavelength_nm};
}

double finesse_from_reflectivities(double R1, double R2) {
  detail::require(R1 > 0.0 && R1 < 1.0 && R2 > 0.0 && R2 < 1.0, kModule,
                  "reflectivities must lie in (0, 1); R = 1 gives infinite finesse");
  const double x = std::sqrt(R1 * R2);
  return kPi * std::sqrt(x) / (1.0 - x);
}

double reflectivity_from_finesse(double finesse, double R2) {
  require_positive(finesse, "finesse");
  detail::require(R2 > 0.0 && R2 < 1.0, kModule, "R2 must lie in (0, 1)");
  // F s^2 + pi s - F = 0 with s = (R1 R2)^(1/4).
  const double s = (-kPi + std::sqrt(kPi * kPi + 4.0 * finesse * finesse)) / (2.0 * finesse);
  const double R1 = s * s * s * s / R2;
  detail::require(R1 < 1.0, kModule, "finesse not reachable with the given R2");
  return R1;
}

double finesse_from_linewidth(double linewidth_nm, double wavelength_nm) {
  require_positive(linewidth_nm, "linewidth");
  require_positive(wavelength_nm, "wavelength");
  return wavelength_nm / (2.0 * linewidth_nm);
}

double linewidth_from_finesse(double finesse, double wavelength_nm) {
  require_positive(finesse, "finesse");
  require_positive(wavelength_nm, "wavelength");
  return wavelength_nm / (2.0 * finesse);
}

FreeSpectralRange free_spectral_range(double length_um, double wavelength_nm) {
  require_positive(length_um, "cavity length");
  require_positive(wavelength_nm, "wavelength");
  const double length_m = length_um * 1e-6;
  return {kSpeedOfLight / (2.0 * length_m) * 1e-12,
          wavelength_nm * wavelength_nm / (2.0 * length_um * 1e3)};
}

double resonance_length_um(int m, double wavelength_nm) {
  detail::require(m >= 1, kModule, "longitudinal order must be >= 1");
  require_positive(wavelength_nm, "wavelength");
  return m * wavelength_nm / 2.0 * 1e-3;
}

double physical_gap_um(double optical_length_um, double penetration_length_um) {
  return optical_length_um - penetration_length_um;
}

double airy_transmission(double x, double finesse, double fsr, double peak_transmission) {
  require_positive(finesse, "finesse");
  require_positive(fsr, "FSR");
  detail::require(peak_transmission > 0.0 && peak_transmission <= 1.0, kModule,
                  "peak transmission must lie in (0, 1]");
  const double k = 2.0 * finesse / kPi;
  const double s = std::sin(kPi * x / fsr);
  return peak_transmission / (1.0 + k * k * s * s);
}

double airy_fwhm(double finesse, double fsr) {
  require_positive(finesse, "finesse");
  require_positive(fsr, "FSR");
  const double arg = kPi / (2.0 * finesse);
  // Below F = pi/2 the transmission never halves.
  detail::require(arg <= 1.0, kModule, "Airy function has no half-maximum for F < pi/2");
  return 2.0 * fsr / kPi * std::asin(arg);
}

double cavity_transmission(double wavelength_nm, double length_um, double finesse,
                           double peak_transmission) {
  require_positive(wavelength_nm, "wavelength");
  return airy_transmission(length_um * 1e3, finesse, wavelength_nm / 2.0, peak_transmission);
}

double plane_wave_peak_transmission(const MirrorSpec& m1, const MirrorSpec& m2) {
  const double x = 1.0 - std::sqrt(m1.R * m2.R);
  detail::require(x > 0.0, kModule, "plane-wave transmission undefined for R1 R2 = 1");
  return m1.T * m2.T / (x * x);
}

void check_stable(double length_um, double radius_um) {
  detail::require(length_um > 0.0 && radius_um > 0.0 && length_um < radius_um, kModule,
                  "unstable plano-concave geometry: need 0 < L < r1");
}

double transverse_mode_spacing_nm(double length_um, double radius_um, double wavelength_nm,
                                  int delta_order) {
  check_stable(length_um, radius_um);
  require_positive(wavelength_nm, "wavelength");
  return wavelength_nm / (2.0 * kPi) * delta_order * std::sqrt(length_um / radius_um);
}

double radius_from_splitting_um(double splitting_nm, double length_um, double wavelength_nm) {
  require_positive(splitting_nm, "splitting");
  require_positive(length_um, "cavity length");
  require_positive(wavelength_nm, "wavelength");
  const double ratio = wavelength_nm / (2.0 * kPi * splitting_nm);
  return length_um * ratio * ratio;
}

ModeShape gaussian_waist(double length_um, double radius_um, double wavelength_nm) {
  check_stable(length_um, radius_um);
  require_positive(wavelength_nm, "wavelength");
  const double lambda_um = wavelength_nm * 1e-3;
  const double w0_sq = lambda_um / kPi * std::sqrt(length_um * (radius_um - length_um));
  const double w0 = std::sqrt(w0_sq);
  return {w0, w0 * kFwhmPerWaist};
}

ModeShape mode_shape_from_fwhm(double fwhm_um) {
  require_positive(fwhm_um, "FWHM");
  return {fwhm_um / kFwhmPerWaist, fwhm_um};
}

ModeVolume mode_volume(double waist_um, double length_um, double wavelength_nm,
                       double extra_length_um) {
  require_positive(waist_um, "waist");
  require_positive(length_um, "cavity length");
  require_positive(wavelength_nm, "wavelength");
  detail::require(extra_length_um >= 0.0, kModule, "extra length must be non-negative");
  const double v = kPi * waist_um * waist_um * (length_um + extra_length_um) / 4.0;
  const double lambda_um = wavelength_nm * 1e-3;
  return {v, v / (lambda_um * lambda_um * lambda_um)};
}

double quality_factor(double finesse, int m) {
  require_positive(finesse, "finesse");
  detail::require(m >= 1, kModule, "longitudinal order must be >= 1");
  return finesse * m;
}

double hermite(int k, double x) {
  detail::require(k >= 0, kModule, "Hermite index must be non-negative");
  double h_prev = 1.0;
  if (k == 0) return h_prev;
  double h = 2.0 * x;
  for (int i = 1; i < k; ++i) {
    const double next = 2.0 * x * h - 2.0 * i * h_prev;
    h_prev = h;
    h = next;
  }
  return h;
}

double hermite_gauss_intensity(const TransverseMode& mode, double w_um, double x_um,
                               double y_um) {
  require_positive(w_um, "mode width");
  detail::require(mode.p >= 0 && mode.n >= 0, kModule, "mode indices must be non-negative");
  const double u = std::sqrt(2.0) * x_um / w_um;
  const double v = std::sqrt(2.0) * y_um / w_um;
  const double field = hermite(mode.p, u) * hermite(mode.n, v);
  return field * field * std::exp(-2.0 * (x_um * x_um + y_um * y_um) / (w_um * w_um));
}

}  // namespace microcavity::cavity

namespace microcavity::cavity {

CavityReport make_cavity_report(double R1, double R2, int m, double wavelength_nm,
                                double radius_um) {
  CavityReport r;
  r.finesse = finesse_from_reflectivities(R1, R2);
  r.length_um = resonance_length_um(m, wavelength_nm);
  r.order_m = m;
  r.radius_um = radius_um;
  const auto fsr = free_spectral_range(r.length_um, wavelength_nm);
  r.fsr_nm = fsr.wavelength_nm;
  r.fsr_thz = fsr.frequency_thz;
  const auto shape = gaussian_waist(r.length_um, radius_um, wavelength_nm);
  r.waist_um = shape.waist_um;
  r.fwhm_um = shape.fwhm_um;
  const auto volume = mode_volume(shape.waist_um, r.length_um, wavelength_nm);
  r.mode_volume_um3 = volume.volume_um3;
  r.mode_volume_lambda3 = volume.volume_lambda3;
  r.q_factor = quality_factor(r.finesse, m);
  return r;
}

}  // namespace microcavity::cavity
