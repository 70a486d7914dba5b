#pragma once

#include <span>
#include <variant>
#include <vector>

#include "microcavity/cavity.hpp"
#include "microcavity/optics.hpp"
#include "microcavity/spectrum.hpp"

namespace microcavity::coupling {

enum class LineShape { lorentzian, gaussian };

struct EmissionBand {
  double center_nm = 0.0;
  double fwhm_nm = 0.0;
  double weight = 0.0;  // fraction of total emitted power
  LineShape shape = LineShape::gaussian;
};

/// Emitter spectrum: the 0-0 zero-phonon line plus Stokes-shifted vibronic
/// bands. Band weights are areas and sum to one together with the ZPL.
struct EmitterModel {
  EmissionBand zpl{0.0, 0.0, 0.0, LineShape::lorentzian};
  std::vector<EmissionBand> vibronic;

  double zpl_weight() const noexcept { return zpl.weight; }
};

void validate(const EmitterModel& emitter);

/// Synthetic room-temperature DBT-like model: ZPL at 785 nm carrying 30 % of
/// the emission and three Gaussian Stokes bands out to ~860 nm.
EmitterModel default_dbt_emitter();

/// Area-normalized spectral density (1/nm) of the model at one wavelength.
double emission_density(const EmitterModel& emitter, double wavelength_nm);

/// Model sampled on a grid.
Spectrum emission_spectrum(const EmitterModel& emitter, std::span<const double> wavelengths_nm);

/// Wavelength interval holding the model: every band center +- 6 FWHM.
optics::WavelengthInterval emission_support(const EmitterModel& emitter);

struct PurcellReport {
  double purcell_max = 0.0;
  double solid_angle_fraction = 0.0;
  double spectral_overlap = 0.0;
  double effective_enhancement = 0.0;
  double branching_ratio_after = 0.0;
};

/// Closed-cavity narrow-line Purcell factor 3 Q / (4 pi^2 V/lambda^3).
double purcell_max(double q_factor, double volume_lambda3);

/// theta = lambda / (pi w0); fraction = theta^2 / 4.
double far_field_half_angle(double waist_um, double wavelength_nm);
double solid_angle_fraction(double waist_um, double wavelength_nm);

/// Resonance of a Fabry-Perot line in the wavelength domain; the line is
/// periodic with period fsr_nm and has finesse fsr_nm / fwhm_nm.
struct CavityLine {
  double resonance_nm = 0.0;
  double fwhm_nm = 0.0;
  double fsr_nm = 0.0;

  double finesse() const noexcept { return fsr_nm / fwhm_nm; }
  /// Airy transmission with unit peak at detuning (lambda - resonance).
  double transmission(double wavelength_nm) const;

  static CavityLine from_cavity(double finesse, double length_um, double resonance_nm);
};

struct OverlapResult {
  double value = 0.0;
  bool outside_support = false;
};

/// Fraction of an emission spectrum transmitted by the cavity line,
/// integral(S T) / (T_peak integral(S)).
OverlapResult spectral_overlap(const Spectrum& emission, const CavityLine& line);
OverlapResult spectral_overlap(const EmitterModel& emitter, const CavityLine& line);

double effective_enhancement(double purcell, double solid_fraction, double overlap);

/// Fraction of emission in the 0-0 channel after its rate is multiplied by
/// `enhancement`: E a0 / (E a0 + 1 - a0).
double branching_ratio(double alpha0, double enhancement);
double required_enhancement(double alpha0, double alpha_target);

/// Total 0-0 rate relative to free space when a cavity channel of strength
/// `effective` adds to the unmodified emission: 1 + effective.
double zero_phonon_rate_enhancement(double effective);

PurcellReport purcell_report(double q_factor, double volume_lambda3, double waist_um,
                             double wavelength_nm, double overlap, double alpha0);

struct ModeCoupling {
  int order = 0;        // n + p of the transverse mode
  double weight = 1.0;  // relative peak transmission
};

struct FilterOptions {
  double finesse = 200.0;
  double length_um = 0.0;      // snapped to the nearest order resonant at resonance_nm
  double resonance_nm = 0.0;   // TEM00 resonance wavelength
  double peak_transmission = 1.0;
  double radius_um = 0.0;      // needed when modes of order > 0 are listed
  std::vector<ModeCoupling> modes{{0, 1.0}};
  std::variant<double, Spectrum> background = 0.0;
};

/// Optical length of the longitudinal order nearest to `length_um` that is
/// exactly resonant at `resonance_nm`.
double snapped_length_um(double length_um, double resonance_nm);

/// Summed Airy transmission of all listed transverse modes at one wavelength.
double mode_comb_transmission(const FilterOptions& options, double wavelength_nm);

/// S_out = S T_cavity + S B. Background spectra are resampled onto the
/// emission grid by linear interpolation.
Spectrum filtered_spectrum(const Spectrum& emission, const FilterOptions& options);

/// Scalar leak background minimizing || measured - filtered(B) ||^2.
double fit_leak_background(const Spectrum& measured, const Spectrum& emission,
                           FilterOptions options);

struct BfpOptions {
  double mirror_reflectance = cavity::kGoldReflectance;
  double wavelength_step_nm = 0.25;
};

struct RadialProfile {
  std::vector<double> angle_rad;
  std::vector<double> intensity;
};

/// Back-focal-plane radial profile of emission through the planar mirror.
/// Off resonance the profile is the emission-weighted unpolarized stack
/// transmittance per angle; on resonance a Gaussian lobe of 1/e^2 half-width
/// lambda/(pi w0) is added, weighted by the emission fraction the cavity
/// transmits.
RadialProfile bfp_radial_profile(const EmitterModel& emitter, const optics::LayerStack& stack,
                                 bool cavity_on, const cavity::CavityGeometry& geometry,
                                 std::span<const double> angles_rad,
                                 const BfpOptions& options = {});

}  // namespace microcavity::coupling
