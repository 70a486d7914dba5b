#include "microcavity/optics.hpp"

#include <algorithm>
#include <cmath>

#include "microcavity/errors.hpp"

namespace microcavity::optics {
namespace {

using cplx = std::complex<double>;
constexpr const char* kModule = "optics-core";

struct Matrix2 {
  cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

  Matrix2 operator*(const Matrix2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

// Cosine of the propagation angle inside a medium of index n for a wave whose
// tangential wavenumber (in units of k0) is `kx`.
cplx medium_cosine(double n, double kx) {
  const double s = kx / n;
  return std::sqrt(cplx(1.0 - s * s, 0.0));
}

// Tilted optical admittance in units of the free-space admittance.
cplx tilted_admittance(double n, cplx cos_theta, Polarization pol) {
  return pol == Polarization::s ? n * cos_theta : n / cos_theta;
}

Matrix2 layer_matrix(const Layer& layer, double wavelength_nm, double kx, Polarization pol) {
  const cplx cos_t = medium_cosine(layer.refractive_index, kx);
  const cplx eta = tilted_admittance(layer.refractive_index, cos_t, pol);
  const cplx delta = 2.0 * kPi * layer.refractive_index * layer.thickness_nm * cos_t / wavelength_nm;
  const cplx i{0.0, 1.0};
  return {std::cos(delta), i * std::sin(delta) / eta, i * eta * std::sin(delta), std::cos(delta)};
}

Matrix2 stack_matrix(std::span<const Layer> layers, double wavelength_nm, double kx,
                     Polarization pol) {
  Matrix2 m;
  for (const auto& layer : layers) m = m * layer_matrix(layer, wavelength_nm, kx, pol);
  return m;
}

void check_wavelength(double wavelength_nm) {
  detail::require(std::isfinite(wavelength_nm) && wavelength_nm > 0.0, kModule,
                  "wavelength must be positive");
}

void check_range(const WavelengthInterval& range) {
  detail::require(range.min_nm > 0.0 && range.max_nm > range.min_nm, kModule,
                  "search range must be a positive, non-empty wavelength interval");
}

// Bisection for the crossing of `f` between a point known inside (f >= 0)
// and one known outside (f < 0).
template <class F>
double refine_edge(F&& f, double inside, double outside) {
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (inside + outside);
    if (f(mid) >= 0.0) {
      inside = mid;
    } else {
      outside = mid;
    }
    if (std::abs(inside - outside) < 1e-9) break;
  }
  return 0.5 * (inside + outside);
}

// Widest run of samples where f >= 0, with edges refined by bisection.
template <class F>
std::optional<WavelengthInterval> widest_region(F&& f, const WavelengthInterval& range,
                                                std::size_t samples) {
  const double step = range.width() / static_cast<double>(samples - 1);
  std::vector<char> inside(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    inside[i] = f(range.min_nm + step * static_cast<double>(i)) >= 0.0;
  }
  std::size_t best_lo = 0, best_hi = 0;
  bool found = false;
  for (std::size_t i = 0; i < samples;) {
    if (!inside[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < samples && inside[j + 1]) ++j;
    if (!found || (j - i) > (best_hi - best_lo)) {
      best_lo = i;
      best_hi = j;
      found = true;
    }
    i = j + 1;
  }
  if (!found) return std::nullopt;
  auto at = [&](std::size_t k) { return range.min_nm + step * static_cast<double>(k); };
  WavelengthInterval out{at(best_lo), at(best_hi)};
  if (best_lo > 0) out.min_nm = refine_edge(f, at(best_lo), at(best_lo - 1));
  if (best_hi + 1 < samples) out.max_nm = refine_edge(f, at(best_hi), at(best_hi + 1));
  return out;
}

}  // namespace

void validate(const LayerStack& stack) {
  detail::require(stack.ambient_index >= 1.0, kModule, "ambient index must be >= 1");
  detail::require(stack.substrate_index >= 1.0, kModule, "substrate index must be >= 1");
  for (const auto& layer : stack.layers) {
    detail::require(layer.refractive_index >= 1.0, kModule, "layer index must be >= 1");
    detail::require(layer.thickness_nm > 0.0, kModule, "layer thickness must be > 0");
  }
}

LayerStack quarter_wave_stack(double n_high, double n_low, int n_bilayers,
                              double center_wavelength_nm, bool low_index_on_top,
                              double ambient_index, double substrate_index) {
  detail::require(n_low >= 1.0, kModule, "low index must be >= 1");
  detail::require(n_high > n_low, kModule, "high index must exceed low index");
  detail::require(n_bilayers >= 0, kModule, "bilayer count must be non-negative");
  check_wavelength(center_wavelength_nm);

  const Layer high{n_high, center_wavelength_nm / (4.0 * n_high)};
  const Layer low{n_low, center_wavelength_nm / (4.0 * n_low)};
  LayerStack stack{{}, ambient_index, substrate_index};
  stack.layers.reserve(2 * static_cast<std::size_t>(n_bilayers));
  for (int i = 0; i < n_bilayers; ++i) {
    stack.layers.push_back(low_index_on_top ? low : high);
    stack.layers.push_back(low_index_on_top ? high : low);
  }
  validate(stack);
  return stack;
}

StackResponse stack_response(const LayerStack& stack, double wavelength_nm, double angle_rad,
                             Polarization polarization) {
  validate(stack);
  check_wavelength(wavelength_nm);
  detail::require(angle_rad >= 0.0 && angle_rad < kPi / 2.0, kModule,
                  "angle of incidence must lie in [0, pi/2)");

  const double kx = stack.ambient_index * std::sin(angle_rad);
  const cplx eta0 = tilted_admittance(stack.ambient_index,
                                      medium_cosine(stack.ambient_index, kx), polarization);
  const cplx eta_s = tilted_admittance(stack.substrate_index,
                                       medium_cosine(stack.substrate_index, kx), polarization);

  const Matrix2 m = stack_matrix(stack.layers, wavelength_nm, kx, polarization);
  const cplx B = m.a + m.b * eta_s;
  const cplx C = m.c + m.d * eta_s;
  const cplx denom = eta0 * B + C;

  StackResponse out;
  out.wavelength_nm = wavelength_nm;
  out.angle_rad = angle_rad;
  out.polarization = polarization;
  out.r = (eta0 * B - C) / denom;
  out.t = 2.0 * eta0 / denom;
  out.R = std::norm(out.r);
  out.T = 4.0 * eta0.real() * eta_s.real() / std::norm(denom);
  return out;
}

Spectrum reflectivity_spectrum(const LayerStack& stack, std::span<const double> wavelengths_nm,
                               double angle_rad, Polarization polarization) {
  Spectrum out{{wavelengths_nm.begin(), wavelengths_nm.end()},
               std::vector<double>(wavelengths_nm.size())};
  validate(out);
  std::transform(out.wavelength_nm.begin(), out.wavelength_nm.end(), out.value.begin(),
                 [&](double wl) { return stack_response(stack, wl, angle_rad, polarization).R; });
  return out;
}

double unpolarized_transmittance(const LayerStack& stack, double wavelength_nm,
                                 double angle_rad) {
  return 0.5 * (stack_response(stack, wavelength_nm, angle_rad, Polarization::s).T +
                stack_response(stack, wavelength_nm, angle_rad, Polarization::p).T);
}

std::optional<WavelengthInterval> stopband(const LayerStack& stack, double threshold,
                                           WavelengthInterval search_range, double angle_rad,
                                           Polarization polarization) {
  detail::require(threshold > 0.0 && threshold < 1.0, kModule,
                  "stopband threshold must lie in (0, 1)");
  check_range(search_range);
  validate(stack);
  auto excess = [&](double wl) {
    return stack_response(stack, wl, angle_rad, polarization).R - threshold;
  };
  // ~0.1 nm sampling over typical optical ranges, never fewer than 2000 points.
  const auto samples = std::max<std::size_t>(
      2000, static_cast<std::size_t>(search_range.width() / 0.1) + 1);
  return widest_region(excess, search_range, samples);
}

std::optional<WavelengthInterval> bragg_band_gap(const LayerStack& stack,
                                                 WavelengthInterval search_range) {
  validate(stack);
  check_range(search_range);
  const auto& layers = stack.layers;
  detail::require(layers.size() >= 2 && layers.size() % 2 == 0, kModule,
                  "band gap needs a stack of whole bilayers");
  for (std::size_t i = 2; i < layers.size(); ++i) {
    detail::require(layers[i].refractive_index == layers[i % 2].refractive_index &&
                        layers[i].thickness_nm == layers[i % 2].thickness_nm,
                    kModule, "band gap needs a periodic bilayer stack");
  }
  const std::span<const Layer> cell(layers.data(), 2);
  auto excess = [&](double wl) {
    const Matrix2 m = stack_matrix(cell, wl, 0.0, Polarization::s);
    return std::abs(0.5 * (m.a + m.d).real()) - 1.0;
  };
  const auto samples = std::max<std::size_t>(
      2000, static_cast<std::size_t>(search_range.width() / 0.1) + 1);
  return widest_region(excess, search_range, samples);
}

double reflection_phase(const LayerStack& stack, double wavelength_nm) {
  return std::arg(stack_response(stack, wavelength_nm, 0.0, Polarization::s).r);
}

double phase_delay_length_um(const std::function<std::complex<double>(double)>& reflection,
                             double wavelength_nm, double relative_step) {
  check_wavelength(wavelength_nm);
  detail::require(relative_step > 0.0 && relative_step < 0.1, kModule,
                  "relative step must lie in (0, 0.1)");
  // omega * (1 +- h) maps to lambda / (1 +- h).
  const cplx r_plus = reflection(wavelength_nm / (1.0 + relative_step));
  const cplx r_minus = reflection(wavelength_nm / (1.0 - relative_step));
  const double dphi = std::arg(r_plus * std::conj(r_minus));
  // L = -(c/2) dphi/domega with domega = 2 h omega, omega = 2 pi c / lambda.
  const double length_nm = -dphi * wavelength_nm / (8.0 * kPi * relative_step);
  return length_nm * 1e-3;
}

PenetrationLength group_delay_length(const LayerStack& stack, double wavelength_nm,
                                     double relative_step, double band_threshold) {
  validate(stack);
  auto reflection = [&](double wl) {
    return stack_response(stack, wl, 0.0, Polarization::s).r;
  };
  PenetrationLength out;
  out.length_um = phase_delay_length_um(reflection, wavelength_nm, relative_step);
  out.reliable = stack_response(stack, wavelength_nm, 0.0, Polarization::s).R >= band_threshold &&
                 out.length_um > 0.0;
  return out;
}

}  // namespace microcavity::optics
