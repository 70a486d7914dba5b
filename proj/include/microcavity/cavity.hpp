#pragma once

#include <optional>

#include "microcavity/optics.hpp"

namespace microcavity::cavity {

/// Reflectance/transmittance/phase of one cavity mirror. `fixed` mirrors
/// (the gold micromirror) carry scalar values; `stack` mirrors are derived
/// from a LayerStack at a given wavelength.
struct MirrorSpec {
  enum class Kind { fixed, stack };

  Kind kind = Kind::fixed;
  double R = 0.0;
  double T = 0.0;
  double reflection_phase_rad = kPi;
  std::optional<optics::LayerStack> source;

  static MirrorSpec fixed(double R, double T = 0.0, double phase_rad = kPi);
  static MirrorSpec from_stack(const optics::LayerStack& stack, double wavelength_nm);

  double loss() const noexcept { return 1.0 - R - T; }
};

inline constexpr double kGoldReflectance = 0.97;

/// Plano-concave resonator: planar DBR plus a concave mirror of radius r1.
struct CavityGeometry {
  double optical_length_um = 0.0;
  int longitudinal_order = 0;
  double radius_of_curvature_um = 0.0;
  double wavelength_nm = 0.0;

  /// Resonant geometry L = m lambda / 2.
  static CavityGeometry on_resonance(int m, double wavelength_nm, double radius_um);
};

/// TEM_pn Hermite-Gauss mode.
struct TransverseMode {
  int p = 0;
  int n = 0;

  int order() const noexcept { return p + n; }
};

struct ModeShape {
  double waist_um = 0.0;  // 1/e field half-width at the planar mirror
  double fwhm_um = 0.0;   // intensity FWHM
};

struct ModeVolume {
  double volume_um3 = 0.0;
  double volume_lambda3 = 0.0;
};

struct FreeSpectralRange {
  double frequency_thz = 0.0;
  double wavelength_nm = 0.0;
};

// Finesse relations.
double finesse_from_reflectivities(double R1, double R2);
/// Inverse of finesse_from_reflectivities for R1 given F and R2.
double reflectivity_from_finesse(double finesse, double R2);
/// F = lambda / (2 dL), dL being the FWHM of a resonance in cavity length.
double finesse_from_linewidth(double linewidth_nm, double wavelength_nm);
/// Length linewidth dL = lambda / (2F).
double linewidth_from_finesse(double finesse, double wavelength_nm);

FreeSpectralRange free_spectral_range(double length_um, double wavelength_nm);
double resonance_length_um(int m, double wavelength_nm);
double physical_gap_um(double optical_length_um, double penetration_length_um);

/// Airy transmission T_peak / (1 + (2F/pi)^2 sin^2(pi x / FSR)) of a scan
/// variable x (length or frequency detuning) in the same units as FSR.
double airy_transmission(double x, double finesse, double fsr, double peak_transmission = 1.0);

/// Analytic full width at half maximum of the Airy function, same units as FSR.
double airy_fwhm(double finesse, double fsr);

/// Transmission at `wavelength_nm` of a cavity of fixed optical length,
/// equal to airy_transmission(L, F, lambda/2).
double cavity_transmission(double wavelength_nm, double length_um, double finesse,
                           double peak_transmission = 1.0);

/// Plane-wave on-resonance transmittance T1 T2 / (1 - sqrt(R1 R2))^2.
double plane_wave_peak_transmission(const MirrorSpec& m1, const MirrorSpec& m2);

// Transverse-mode structure.
double transverse_mode_spacing_nm(double length_um, double radius_um, double wavelength_nm,
                                  int delta_order);
double radius_from_splitting_um(double splitting_nm, double length_um, double wavelength_nm);

/// Throws ValidationError for L <= 0 or L >= r1 (unstable plano-concave cavity).
void check_stable(double length_um, double radius_um);

ModeShape gaussian_waist(double length_um, double radius_um, double wavelength_nm);
ModeShape mode_shape_from_fwhm(double fwhm_um);

/// V = pi w0^2 (L + extra) / 4. `extra_length_um` lets callers add the DBR
/// penetration length; it defaults to zero.
ModeVolume mode_volume(double waist_um, double length_um, double wavelength_nm,
                       double extra_length_um = 0.0);

double quality_factor(double finesse, int m);

/// Unnormalized TEM_pn intensity with the TEM00 peak equal to 1.
double hermite_gauss_intensity(const TransverseMode& mode, double w_um, double x_um, double y_um);

/// Physicists' Hermite polynomial H_k(x).
double hermite(int k, double x);

}  // namespace microcavity::cavity

namespace microcavity::cavity {

/// Summary of a resonant plano-concave cavity built from two mirror
/// reflectivities, the order m, the wavelength and the mirror radius.
struct CavityReport {
  double finesse = 0.0;
  double fsr_nm = 0.0;
  double fsr_thz = 0.0;
  double length_um = 0.0;
  int order_m = 0;
  double radius_um = 0.0;
  double waist_um = 0.0;
  double fwhm_um = 0.0;
  double mode_volume_um3 = 0.0;
  double mode_volume_lambda3 = 0.0;
  double q_factor = 0.0;
};

CavityReport make_cavity_report(double R1, double R2, int m, double wavelength_nm,
                                double radius_um);

}  // namespace microcavity::cavity
