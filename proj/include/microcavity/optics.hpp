#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "microcavity/constants.hpp"
#include "microcavity/spectrum.hpp"

namespace microcavity::optics {

struct Layer {
  double refractive_index = 1.0;
  double thickness_nm = 0.0;
};

/// Planar multilayer. layers.front() touches the ambient medium (the side
/// light arrives from), layers.back() touches the substrate.
struct LayerStack {
  std::vector<Layer> layers;
  double ambient_index = material::kAir;
  double substrate_index = material::kFusedSilicaSubstrate;
};

enum class Polarization { s, p };

struct StackResponse {
  double wavelength_nm = 0.0;
  double angle_rad = 0.0;
  Polarization polarization = Polarization::s;
  std::complex<double> r;  // reflection amplitude
  std::complex<double> t;  // transmission amplitude of the tangential field
  double R = 0.0;          // power reflectance
  double T = 0.0;          // power transmittance, admittance-corrected
};

struct WavelengthInterval {
  double min_nm = 0.0;
  double max_nm = 0.0;

  double width() const noexcept { return max_nm - min_nm; }
  double center() const noexcept { return 0.5 * (min_nm + max_nm); }
  bool contains(double wavelength_nm) const noexcept {
    return wavelength_nm >= min_nm && wavelength_nm <= max_nm;
  }
};

struct PenetrationLength {
  double length_um = 0.0;
  bool reliable = false;  // false when evaluated outside the high-reflectance band
};

void validate(const LayerStack& stack);

/// Alternating high/low quarter-wave bilayers for `center_wavelength_nm`.
/// With `low_index_on_top` each bilayer is (low, high) counted from the
/// ambient side, so the low-index material forms the top interface.
LayerStack quarter_wave_stack(double n_high, double n_low, int n_bilayers,
                              double center_wavelength_nm, bool low_index_on_top,
                              double ambient_index = material::kAir,
                              double substrate_index = material::kFusedSilicaSubstrate);

/// Characteristic-matrix (Abeles) response. `angle_rad` is measured in the
/// ambient medium; layer angles follow Snell's law with complex cosines so
/// evanescent layers are handled.
StackResponse stack_response(const LayerStack& stack, double wavelength_nm, double angle_rad,
                             Polarization polarization);

/// R(lambda) on an ascending grid. Each point is independent, so the result
/// is identical whatever order the points are evaluated in.
Spectrum reflectivity_spectrum(const LayerStack& stack, std::span<const double> wavelengths_nm,
                               double angle_rad, Polarization polarization);

/// Mean of s and p power transmittance.
double unpolarized_transmittance(const LayerStack& stack, double wavelength_nm, double angle_rad);

/// Widest contiguous interval inside `search_range` where R >= threshold at
/// normal incidence (or at `angle_rad`). Empty optional when no sample
/// reaches the threshold.
std::optional<WavelengthInterval> stopband(const LayerStack& stack, double threshold,
                                           WavelengthInterval search_range,
                                           double angle_rad = 0.0,
                                           Polarization polarization = Polarization::s);

/// Band gap of the infinite periodic structure built from the stack's
/// repeating bilayer: the interval where |cos(K*period)| > 1 at normal
/// incidence. Independent of the number of periods. Requires a stack whose
/// layers alternate between two materials.
std::optional<WavelengthInterval> bragg_band_gap(const LayerStack& stack,
                                                 WavelengthInterval search_range);

/// Reflection phase arg(r) at normal incidence.
double reflection_phase(const LayerStack& stack, double wavelength_nm);

/// Delay length -(c/2) d(phi)/d(omega) of an arbitrary reflection phase
/// function of wavelength, by central difference with relative step in omega.
double phase_delay_length_um(const std::function<std::complex<double>(double)>& reflection,
                             double wavelength_nm, double relative_step = 1e-4);

/// Effective penetration length of the stack's reflection phase.
/// `reliable` is set when R at the wavelength reaches `band_threshold`.
PenetrationLength group_delay_length(const LayerStack& stack, double wavelength_nm,
                                     double relative_step = 1e-4, double band_threshold = 0.99);

}  // namespace microcavity::optics
