#include "microcavity/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "microcavity/errors.hpp"

namespace microcavity::coupling {
namespace {

constexpr const char* kModule = "coupling";

double band_density(const EmissionBand& band, double wavelength_nm) {
  const double d = wavelength_nm - band.center_nm;
  if (band.shape == LineShape::lorentzian) {
    const double hw = 0.5 * band.fwhm_nm;
    return band.weight / kPi * hw / (d * d + hw * hw);
  }
  const double sigma = band.fwhm_nm / (2.0 * kFwhmPerWaist);
  return band.weight / (sigma * std::sqrt(2.0 * kPi)) * std::exp(-0.5 * d * d / (sigma * sigma));
}

void validate_band(const EmissionBand& band) {
  detail::require(band.center_nm > 0.0, kModule, "band center must be positive");
  detail::require(band.fwhm_nm > 0.0, kModule, "band width must be positive");
  detail::require(band.weight >= 0.0, kModule, "band weight must be non-negative");
}

void validate_line(const CavityLine& line) {
  detail::require(line.fwhm_nm > 0.0, kModule, "cavity linewidth must be positive");
  detail::require(line.fsr_nm > line.fwhm_nm, kModule, "cavity FSR must exceed its linewidth");
  detail::require(line.resonance_nm > 0.0, kModule, "resonance wavelength must be positive");
}

// Grid resolving both the emitter bands and every cavity resonance inside
// the support.
std::vector<double> overlap_grid(const EmitterModel& emitter, const CavityLine& line,
                                 const optics::WavelengthInterval& support) {
  double narrowest = emitter.zpl.fwhm_nm;
  for (const auto& band : emitter.vibronic) narrowest = std::min(narrowest, band.fwhm_nm);
  std::vector<double> grid = linear_grid(support.min_nm, support.max_nm, narrowest / 20.0);

  const double fine = line.fwhm_nm / 20.0;
  const double half_span = 50.0 * line.fwhm_nm;
  const double k_lo = std::floor((support.min_nm - line.resonance_nm) / line.fsr_nm);
  const double k_hi = std::ceil((support.max_nm - line.resonance_nm) / line.fsr_nm);
  for (double k = k_lo; k <= k_hi; k += 1.0) {
    const double center = line.resonance_nm + k * line.fsr_nm;
    const double lo = std::max(support.min_nm, center - half_span);
    const double hi = std::min(support.max_nm, center + half_span);
    if (hi <= lo) continue;
    const auto local = linear_grid(lo, hi, fine);
    grid.insert(grid.end(), local.begin(), local.end());
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace

void validate(const EmitterModel& emitter) {
  validate_band(emitter.zpl);
  detail::require(emitter.zpl.weight > 0.0 && emitter.zpl.weight < 1.0, kModule,
                  "ZPL weight must lie in (0, 1)");
  double total = emitter.zpl.weight;
  for (const auto& band : emitter.vibronic) {
    validate_band(band);
    total += band.weight;
  }
  detail::require(std::abs(total - 1.0) <= 1e-9, kModule,
                  "ZPL and vibronic weights must sum to 1");
}

EmitterModel default_dbt_emitter() {
  EmitterModel m;
  m.zpl = {785.0, 3.0, 0.30, LineShape::lorentzian};
  m.vibronic = {
      {797.0, 10.0, 0.25, LineShape::gaussian},
      {818.0, 16.0, 0.25, LineShape::gaussian},
      {845.0, 22.0, 0.20, LineShape::gaussian},
  };
  return m;
}

double emission_density(const EmitterModel& emitter, double wavelength_nm) {
  double s = band_density(emitter.zpl, wavelength_nm);
  for (const auto& band : emitter.vibronic) s += band_density(band, wavelength_nm);
  return s;
}

Spectrum emission_spectrum(const EmitterModel& emitter, std::span<const double> wavelengths_nm) {
  validate(emitter);
  Spectrum out{{wavelengths_nm.begin(), wavelengths_nm.end()},
               std::vector<double>(wavelengths_nm.size())};
  validate(out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.value[i] = emission_density(emitter, out.wavelength_nm[i]);
  }
  return out;
}

optics::WavelengthInterval emission_support(const EmitterModel& emitter) {
  optics::WavelengthInterval s{emitter.zpl.center_nm - 6.0 * emitter.zpl.fwhm_nm,
                               emitter.zpl.center_nm + 6.0 * emitter.zpl.fwhm_nm};
  for (const auto& band : emitter.vibronic) {
    s.min_nm = std::min(s.min_nm, band.center_nm - 6.0 * band.fwhm_nm);
    s.max_nm = std::max(s.max_nm, band.center_nm + 6.0 * band.fwhm_nm);
  }
  s.min_nm = std::max(s.min_nm, 1.0);
  return s;
}

double purcell_max(double q_factor, double volume_lambda3) {
  detail::require(q_factor > 0.0, kModule, "Q must be positive");
  detail::require(volume_lambda3 > 0.0, kModule, "mode volume must be positive");
  return 3.0 * q_factor / (4.0 * kPi * kPi * volume_lambda3);
}

double far_field_half_angle(double waist_um, double wavelength_nm) {
  detail::require(waist_um > 0.0, kModule, "waist must be positive");
  detail::require(wavelength_nm > 0.0, kModule, "wavelength must be positive");
  return wavelength_nm * 1e-3 / (kPi * waist_um);
}

double solid_angle_fraction(double waist_um, double wavelength_nm) {
  const double theta = far_field_half_angle(waist_um, wavelength_nm);
  return theta * theta / 4.0;
}

double CavityLine::transmission(double wavelength_nm) const {
  const double k = 2.0 * finesse() / kPi;
  const double s = std::sin(kPi * (wavelength_nm - resonance_nm) / fsr_nm);
  return 1.0 / (1.0 + k * k * s * s);
}

CavityLine CavityLine::from_cavity(double finesse, double length_um, double resonance_nm) {
  const auto fsr = cavity::free_spectral_range(length_um, resonance_nm);
  detail::require(finesse > 0.0, kModule, "finesse must be positive");
  return {resonance_nm, fsr.wavelength_nm / finesse, fsr.wavelength_nm};
}

OverlapResult spectral_overlap(const Spectrum& emission, const CavityLine& line) {
  validate(emission);
  validate_line(line);
  if (line.resonance_nm < emission.wavelength_nm.front() ||
      line.resonance_nm > emission.wavelength_nm.back()) {
    return {0.0, true};
  }
  std::vector<double> weighted(emission.size());
  for (std::size_t i = 0; i < emission.size(); ++i) {
    weighted[i] = emission.value[i] * line.transmission(emission.wavelength_nm[i]);
  }
  const double total = integrate(emission);
  detail::require(total > 0.0, kModule, "emission spectrum carries no power");
  return {integrate(emission.wavelength_nm, weighted) / total, false};
}

OverlapResult spectral_overlap(const EmitterModel& emitter, const CavityLine& line) {
  validate(emitter);
  validate_line(line);
  const auto support = emission_support(emitter);
  if (!support.contains(line.resonance_nm)) return {0.0, true};
  const auto grid = overlap_grid(emitter, line, support);
  return spectral_overlap(emission_spectrum(emitter, grid), line);
}

double effective_enhancement(double purcell, double solid_fraction, double overlap) {
  detail::require(purcell >= 0.0 && solid_fraction >= 0.0 && overlap >= 0.0, kModule,
                  "enhancement factors must be non-negative");
  return purcell * solid_fraction * overlap;
}

double branching_ratio(double alpha0, double enhancement) {
  detail::require(alpha0 > 0.0 && alpha0 < 1.0, kModule, "alpha0 must lie in (0, 1)");
  detail::require(enhancement >= 0.0, kModule, "enhancement must be non-negative");
  const double zpl = enhancement * alpha0;
  return zpl / (zpl + (1.0 - alpha0));
}

double required_enhancement(double alpha0, double alpha_target) {
  detail::require(alpha0 > 0.0 && alpha0 < 1.0, kModule, "alpha0 must lie in (0, 1)");
  detail::require(alpha_target > alpha0 && alpha_target < 1.0, kModule,
                  "target branching ratio must lie in (alpha0, 1)");
  return alpha_target * (1.0 - alpha0) / (alpha0 * (1.0 - alpha_target));
}

double zero_phonon_rate_enhancement(double effective) {
  detail::require(effective >= 0.0, kModule, "effective enhancement must be non-negative");
  return 1.0 + effective;
}

PurcellReport purcell_report(double q_factor, double volume_lambda3, double waist_um,
                             double wavelength_nm, double overlap, double alpha0) {
  detail::require(overlap >= 0.0 && overlap <= 1.0, kModule, "overlap must lie in [0, 1]");
  PurcellReport r;
  r.purcell_max = purcell_max(q_factor, volume_lambda3);
  r.solid_angle_fraction = solid_angle_fraction(waist_um, wavelength_nm);
  r.spectral_overlap = overlap;
  r.effective_enhancement =
      effective_enhancement(r.purcell_max, r.solid_angle_fraction, r.spectral_overlap);
  r.branching_ratio_after =
      branching_ratio(alpha0, zero_phonon_rate_enhancement(r.effective_enhancement));
  return r;
}

double snapped_length_um(double length_um, double resonance_nm) {
  detail::require(length_um > 0.0, kModule, "cavity length must be positive");
  detail::require(resonance_nm > 0.0, kModule, "resonance wavelength must be positive");
  const int m = std::max(1, static_cast<int>(std::lround(2.0 * length_um * 1e3 / resonance_nm)));
  return cavity::resonance_length_um(m, resonance_nm);
}

double mode_comb_transmission(const FilterOptions& options, double wavelength_nm) {
  const double length_um = snapped_length_um(options.length_um, options.resonance_nm);
  const double length_nm = length_um * 1e3;
  double t = 0.0;
  for (const auto& mode : options.modes) {
    const double shift = mode.order == 0 ? 0.0
                                         : cavity::transverse_mode_spacing_nm(
                                               length_um, options.radius_um, wavelength_nm,
                                               mode.order);
    t += mode.weight * cavity::airy_transmission(length_nm - shift, options.finesse,
                                                 wavelength_nm / 2.0, options.peak_transmission);
  }
  return t;
}

Spectrum filtered_spectrum(const Spectrum& emission, const FilterOptions& options) {
  validate(emission);
  detail::require(options.finesse > 0.0, kModule, "finesse must be positive");
  detail::require(!options.modes.empty(), kModule, "at least one cavity mode is required");
  for (const auto& mode : options.modes) {
    detail::require(mode.order >= 0 && mode.weight >= 0.0, kModule,
                    "mode order and weight must be non-negative");
    if (mode.order > 0) {
      detail::require(options.radius_um > 0.0, kModule,
                      "transverse modes need the mirror radius of curvature");
    }
  }

  const Spectrum* background_spectrum = std::get_if<Spectrum>(&options.background);
  if (background_spectrum != nullptr) {
    validate(*background_spectrum);
    detail::require(background_spectrum->wavelength_nm.front() <= emission.wavelength_nm.back() &&
                        background_spectrum->wavelength_nm.back() >=
                            emission.wavelength_nm.front(),
                    kModule, "background and emission grids do not overlap");
  } else {
    detail::require(std::get<double>(options.background) >= 0.0, kModule,
                    "background must be non-negative");
  }

  Spectrum out{emission.wavelength_nm, std::vector<double>(emission.size())};
  for (std::size_t i = 0; i < emission.size(); ++i) {
    const double wl = emission.wavelength_nm[i];
    const double b = background_spectrum != nullptr ? interpolate(*background_spectrum, wl)
                                                    : std::get<double>(options.background);
    out.value[i] = emission.value[i] * (mode_comb_transmission(options, wl) + b);
  }
  return out;
}

double fit_leak_background(const Spectrum& measured, const Spectrum& emission,
                           FilterOptions options) {
  validate(measured);
  options.background = 0.0;
  const Spectrum cavity_only = filtered_spectrum(emission, options);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < emission.size(); ++i) {
    const double s = emission.value[i];
    num += s * (interpolate(measured, emission.wavelength_nm[i]) - cavity_only.value[i]);
    den += s * s;
  }
  detail::require(den > 0.0, kModule, "emission spectrum carries no power");
  return std::max(0.0, num / den);
}

RadialProfile bfp_radial_profile(const EmitterModel& emitter, const optics::LayerStack& stack,
                                 bool cavity_on, const cavity::CavityGeometry& geometry,
                                 std::span<const double> angles_rad, const BfpOptions& options) {
  validate(emitter);
  optics::validate(stack);
  detail::require(options.wavelength_step_nm > 0.0, kModule, "wavelength step must be positive");
  for (double a : angles_rad) {
    detail::require(a >= 0.0 && a < kPi / 2.0, kModule, "angles must lie in [0, pi/2)");
  }

  const auto support = emission_support(emitter);
  const auto grid = linear_grid(support.min_nm, support.max_nm, options.wavelength_step_nm);
  const Spectrum emission = emission_spectrum(emitter, grid);
  const double total = integrate(emission);

  RadialProfile out{{angles_rad.begin(), angles_rad.end()},
                    std::vector<double>(angles_rad.size())};
  std::vector<double> weighted(grid.size());
  for (std::size_t k = 0; k < angles_rad.size(); ++k) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      weighted[i] = emission.value[i] * optics::unpolarized_transmittance(stack, grid[i],
                                                                          angles_rad[k]);
    }
    out.intensity[k] = integrate(grid, weighted) / total;
  }

  if (cavity_on) {
    const double lambda = geometry.wavelength_nm;
    const auto shape = cavity::gaussian_waist(geometry.optical_length_um,
                                              geometry.radius_of_curvature_um, lambda);
    const double stack_R = optics::stack_response(stack, lambda, 0.0, optics::Polarization::s).R;
    const double finesse = cavity::finesse_from_reflectivities(options.mirror_reflectance,
                                                               stack_R);
    const auto line = CavityLine::from_cavity(finesse, geometry.optical_length_um, lambda);
    const double lobe = spectral_overlap(emitter, line).value;
    const double theta0 = far_field_half_angle(shape.waist_um, lambda);
    for (std::size_t k = 0; k < angles_rad.size(); ++k) {
      const double a = angles_rad[k] / theta0;
      out.intensity[k] += lobe * std::exp(-2.0 * a * a);
    }
  }
  return out;
}

}  // namespace microcavity::coupling
