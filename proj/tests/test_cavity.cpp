#include <cmath>
#include <random>

#include <doctest.h>

#include "microcavity/cavity.hpp"
#include "microcavity/errors.hpp"

using namespace microcavity;
using namespace microcavity::cavity;

namespace {

// Full width of T >= T_peak / 2 around x = 0 by bisection on the Airy function.
double numeric_airy_fwhm(double finesse, double fsr) {
  double lo = 0.0;
  double hi = fsr / 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (airy_transmission(mid, finesse, fsr) >= 0.5 ? lo : hi) = mid;
  }
  return 2.0 * lo;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("cavity") {

TEST_CASE("finesse from mirror reflectivities") {
  CHECK(finesse_from_reflectivities(0.97, 0.999) == doctest::Approx(199.8).epsilon(1e-3));
  // pi (R1 R2)^(1/4) / (1 - sqrt(R1 R2)) with R1 = R2 = 0.04.
  CHECK(finesse_from_reflectivities(0.04, 0.04) == doctest::Approx(kPi * 0.2 / 0.96));
  const double f = finesse_from_reflectivities(0.9, 0.9);
  CHECK(rel(f, 1.0 / numeric_airy_fwhm(f, 1.0)) < 0.01);
  CHECK(reflectivity_from_finesse(finesse_from_reflectivities(0.97, 0.999), 0.999) ==
        doctest::Approx(0.97).epsilon(1e-12));
  CHECK_THROWS_AS(finesse_from_reflectivities(1.0, 0.9), ValidationError);
  CHECK_THROWS_AS(finesse_from_reflectivities(0.0, 0.9), ValidationError);
}

TEST_CASE("finesse from numeric Airy linewidth over R1 R2 in [0.81, 0.9999]") {
  for (double product : {0.81, 0.9, 0.95, 0.99, 0.999, 0.9999}) {
    const double r = std::sqrt(product);
    const double f = finesse_from_reflectivities(r, r);
    CAPTURE(product);
    CHECK(rel(f, 1.0 / numeric_airy_fwhm(f, 1.0)) < 0.01);
  }
}

TEST_CASE("finesse from length linewidth") {
  CHECK(finesse_from_linewidth(1.95, 780.0) == doctest::Approx(200.0));
  CHECK(finesse_from_linewidth(390.0, 780.0) == doctest::Approx(1.0));
  const double fsr = 780.0 / 2.0;
  CHECK(rel(finesse_from_linewidth(numeric_airy_fwhm(300.0, fsr), 780.0), 300.0) < 0.01);
  CHECK(linewidth_from_finesse(200.0, 780.0) == doctest::Approx(1.95));
  CHECK_THROWS_AS(finesse_from_linewidth(0.0, 780.0), ValidationError);
}

TEST_CASE("free spectral range") {
  const auto fsr = free_spectral_range(2.75, 780.0);
  CHECK(fsr.wavelength_nm == doctest::Approx(110.6).epsilon(1e-3));
  CHECK(rel(fsr.wavelength_nm, 100.0) < 0.15);
  CHECK(fsr.frequency_thz == doctest::Approx(54.5).epsilon(1e-3));
  const auto twice = free_spectral_range(5.5, 780.0);
  CHECK(twice.wavelength_nm == fsr.wavelength_nm / 2.0);
  CHECK(twice.frequency_thz == fsr.frequency_thz / 2.0);
  CHECK_THROWS_AS(free_spectral_range(0.0, 780.0), ValidationError);
}

TEST_CASE("resonance length and physical gap") {
  CHECK(resonance_length_um(7, 785.0) == doctest::Approx(2.7475));
  CHECK(resonance_length_um(2, 640.0) == doctest::Approx(0.640));
  CHECK(physical_gap_um(resonance_length_um(7, 785.0), 0.5) == doctest::Approx(2.25).epsilon(0.01));
  CHECK_THROWS_AS(resonance_length_um(0, 785.0), ValidationError);
}

TEST_CASE("Airy transmission") {
  CHECK(airy_transmission(0.0, 200.0, 392.5, 0.2) == doctest::Approx(0.2));
  CHECK(rel(numeric_airy_fwhm(200.0, 392.5), 392.5 / 200.0) < 0.005);
  for (double x : {0.3, 1.7, 12.0}) {
    for (int k : {-3, 1, 5}) {
      CHECK(airy_transmission(x + k * 392.5, 200.0, 392.5) ==
            doctest::Approx(airy_transmission(x, 200.0, 392.5)).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(airy_transmission(0.0, 0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(airy_transmission(0.0, 10.0, 1.0, 1.5), ValidationError);
}

TEST_CASE("Airy FWHM times finesse equals FSR for F in [20, 1e5]") {
  for (double f = 20.0; f <= 1e5 * 1.0001; f *= 1.5) {
    CAPTURE(f);
    CHECK(rel(numeric_airy_fwhm(f, 1.0) * f, 1.0) < 0.005);
    CHECK(rel(airy_fwhm(f, 1.0), numeric_airy_fwhm(f, 1.0)) < 1e-9);
  }
}

TEST_CASE("plane-wave peak transmission is reported, not applied") {
  const double t = plane_wave_peak_transmission(MirrorSpec::fixed(0.97, 0.01),
                                                MirrorSpec::fixed(0.999, 0.001));
  CHECK(t > 0.0);
  CHECK(t <= 1.0);
  CHECK(cavity_transmission(785.0, resonance_length_um(7, 785.0), 200.0) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(MirrorSpec::fixed(0.9, 0.2), ValidationError);
}

TEST_CASE("transverse mode spacing and radius inversion") {
  CHECK(transverse_mode_spacing_nm(2.7475, 1400.0, 785.0, 1) == doctest::Approx(5.5).epsilon(0.01));
  CHECK(transverse_mode_spacing_nm(2.7475, 1400.0, 785.0, 0) == 0.0);
  // Closed form L (lambda / (2 pi dL))^2; lands 1.3 % above the quoted 1.4 mm.
  const double r = radius_from_splitting_um(5.50, 2.7475, 785.0);
  CHECK(r == doctest::Approx(2.7475 * std::pow(785.0 / (2.0 * kPi * 5.50), 2)).epsilon(1e-12));
  CHECK(rel(r, 1400.0) < 0.015);
  CHECK(radius_from_splitting_um(785.0 / (2.0 * kPi), 3.0, 785.0) == doctest::Approx(3.0));

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> length(0.5, 50.0);
  std::uniform_real_distribution<double> factor(1.01, 1000.0);
  std::uniform_real_distribution<double> wavelength(400.0, 1600.0);
  for (int i = 0; i < 100; ++i) {
    const double L = length(rng);
    const double r1 = L * factor(rng);
    const double wl = wavelength(rng);
    const double dl = transverse_mode_spacing_nm(L, r1, wl, 1);
    CHECK(rel(radius_from_splitting_um(dl, L, wl), r1) < 1e-9);
  }
  CHECK_THROWS_AS(radius_from_splitting_um(0.0, 2.7, 785.0), ValidationError);
}

TEST_CASE("unstable geometries are rejected with one message") {
  std::string first;
  auto message = [](auto&& f) {
    try {
      f();
    } catch (const ValidationError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string a = message([] { check_stable(10.0, 10.0); });
  const std::string b = message([] { gaussian_waist(20.0, 10.0, 785.0); });
  const std::string c = message([] { transverse_mode_spacing_nm(20.0, 10.0, 785.0, 1); });
  const std::string d = message([] { make_cavity_report(0.97, 0.999, 7, 785.0, 2.0); });
  CHECK_FALSE(a.empty());
  CHECK(a == b);
  CHECK(a == c);
  CHECK(a == d);
}

TEST_CASE("Gaussian waist") {
  const auto shape = gaussian_waist(2.7475, 1400.0, 785.0);
  CHECK(shape.waist_um == doctest::Approx(3.92).epsilon(0.01));
  CHECK(shape.fwhm_um == doctest::Approx(4.6).epsilon(0.01));
  CHECK(rel(shape.fwhm_um, 3.7) < 0.30);
  CHECK(shape.fwhm_um == doctest::Approx(shape.waist_um * std::sqrt(2.0 * std::log(2.0))));
  CHECK(gaussian_waist(2.73, 100.0, 780.0).waist_um == doctest::Approx(2.0).epsilon(0.01));
  CHECK(gaussian_waist(100.0 - 1e-9, 100.0, 780.0).waist_um < 0.01);
}

TEST_CASE("waist scaling laws") {
  const double w = gaussian_waist(3.0, 200.0, 800.0).waist_um;
  CHECK(gaussian_waist(3.0, 200.0, 3200.0).waist_um == doctest::Approx(2.0 * w).epsilon(1e-12));
  for (double L : {1.0, 10.0, 50.0, 150.0}) {
    const double expected = w * std::pow(L * (200.0 - L) / (3.0 * 197.0), 0.25);
    CHECK(gaussian_waist(L, 200.0, 800.0).waist_um == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("mode volume") {
  const auto unit = mode_volume(2.0 / std::sqrt(kPi), 1.0, 780.0);
  CHECK(unit.volume_um3 == doctest::Approx(1.0).epsilon(1e-12));
  const auto measured = mode_volume(mode_shape_from_fwhm(3.7).waist_um, 2.75, 780.0);
  CHECK(measured.volume_um3 == doctest::Approx(21.3).epsilon(0.01));
  CHECK(measured.volume_lambda3 == doctest::Approx(45.0).epsilon(0.01));
  // Taking the waist equal to the FWHM lands near the quoted 70 cubic wavelengths.
  CHECK(mode_volume(3.7, 2.75, 780.0).volume_lambda3 == doctest::Approx(62.0).epsilon(0.01));
  CHECK(mode_volume(2.0, 2.73, 780.0).volume_lambda3 == doctest::Approx(18.0).epsilon(0.02));
  CHECK(mode_volume(2.0, 2.73, 780.0, 0.5).volume_um3 >
        mode_volume(2.0, 2.73, 780.0).volume_um3);
}

TEST_CASE("quality factor") {
  CHECK(quality_factor(200.0, 7) == doctest::Approx(1400.0));
  CHECK(quality_factor(123.0, 1) == doctest::Approx(123.0));
  CHECK(quality_factor(3.7e4, 7) == doctest::Approx(2.59e5));
  CHECK_THROWS_AS(quality_factor(200.0, 0), ValidationError);
}

TEST_CASE("Hermite-Gauss intensity") {
  const double w = 3.0;
  CHECK(hermite_gauss_intensity({0, 0}, w, 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(hermite_gauss_intensity({0, 1}, w, 0.0, 0.0) == doctest::Approx(0.0));
  const double half = w * std::sqrt(2.0 * std::log(2.0)) / 2.0;
  CHECK(hermite_gauss_intensity({0, 0}, w, half, 0.0) == doctest::Approx(0.5).epsilon(1e-12));

  // TEM01 lobes sit on the y axis at y = +-w / sqrt(2).
  const double peak = w / std::sqrt(2.0);
  const double at = hermite_gauss_intensity({0, 1}, w, 0.0, peak);
  CHECK(at == doctest::Approx(hermite_gauss_intensity({0, 1}, w, 0.0, -peak)));
  for (double dy : {-0.05, 0.05}) {
    CHECK(hermite_gauss_intensity({0, 1}, w, 0.0, peak + dy) < at);
  }
  CHECK(hermite_gauss_intensity({0, 1}, w, peak, 0.0) == doctest::Approx(0.0));
  CHECK(hermite(3, 0.5) == doctest::Approx(8.0 * 0.125 - 12.0 * 0.5));
  CHECK_THROWS_AS(hermite_gauss_intensity({0, 0}, 0.0, 0.0, 0.0), ValidationError);
}

TEST_CASE("cavity report") {
  const auto r = make_cavity_report(0.97, 0.999, 7, 785.0, 1400.0);
  CHECK(r.finesse == doctest::Approx(200.0).epsilon(0.02));
  CHECK(r.length_um == doctest::Approx(2.75).epsilon(0.01));
  CHECK(rel(r.fsr_nm, 110.0) < 0.05);
  CHECK(r.order_m == 7);
  CHECK(r.q_factor == doctest::Approx(r.finesse * 7));
}

}  // TEST_SUITE
