#include <cmath>
#include <random>
#include <thread>

#include <doctest.h>

#include "microcavity/errors.hpp"
#include "microcavity/optics.hpp"

using namespace microcavity;
using namespace microcavity::optics;
using microcavity::material::kSiO2;
using microcavity::material::kTa2O5;
using microcavity::material::kTiO2;

namespace {

// Admittance of a quarter-wave stack at its design wavelength seen from the
// ambient side; the layer nearest the substrate is applied first.
double quarter_wave_reflectance(double n_high, double n_low, int n, double ns, bool low_on_top) {
  const double ratio = low_on_top ? n_low / n_high : n_high / n_low;
  const double y = ns * std::pow(ratio, 2 * n);
  const double r = (1.0 - y) / (1.0 + y);
  return r * r;
}

double analytic_relative_width(double n_high, double n_low) {
  return 4.0 / kPi * std::asin((n_high - n_low) / (n_high + n_low));
}

}  // namespace

TEST_SUITE("optics") {

TEST_CASE("quarter-wave stack layer thicknesses") {
  const auto s = quarter_wave_stack(kTa2O5, kSiO2, 13, 780.0, true);
  REQUIRE(s.layers.size() == 26);
  CHECK(s.layers.front().refractive_index == kSiO2);
  CHECK(s.layers[0].thickness_nm == doctest::Approx(133.56).epsilon(1e-4));
  CHECK(s.layers[1].thickness_nm == doctest::Approx(92.86).epsilon(1e-4));
  CHECK(quarter_wave_stack(kTa2O5, kSiO2, 0, 780.0, true).layers.empty());
  CHECK(quarter_wave_stack(kTa2O5, kSiO2, 2, 780.0, false).layers.front().refractive_index ==
        kTa2O5);
}

TEST_CASE("non-physical inputs are rejected") {
  CHECK_THROWS_AS(quarter_wave_stack(2.1, 0.9, 3, 780.0, true), ValidationError);
  CHECK_THROWS_AS(quarter_wave_stack(1.4, 1.46, 3, 780.0, true), ValidationError);
  CHECK_THROWS_AS(quarter_wave_stack(2.1, 1.46, -1, 780.0, true), ValidationError);
  LayerStack zero{{{1.5, 0.0}}, 1.0, 1.5};
  CHECK_THROWS_AS(stack_response(zero, 700.0, 0.0, Polarization::s), ValidationError);
  LayerStack low{{{0.5, 100.0}}, 1.0, 1.5};
  CHECK_THROWS_AS(stack_response(low, 700.0, 0.0, Polarization::s), ValidationError);
  LayerStack bare{{}, 1.0, 1.5};
  CHECK_THROWS_AS(stack_response(bare, 700.0, kPi / 2.0, Polarization::s), ValidationError);
  CHECK_THROWS_AS(stack_response(bare, -1.0, 0.0, Polarization::s), ValidationError);
}

TEST_CASE("bare interface gives the Fresnel reflectance") {
  LayerStack bare{{}, 1.0, 1.5};
  const auto r = stack_response(bare, 633.0, 0.0, Polarization::s);
  CHECK(r.R == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(r.R + r.T == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("13-bilayer Ta2O5/SiO2 mirror reaches 99.9 %") {
  const auto s = quarter_wave_stack(kTa2O5, kSiO2, 13, 780.0, true);
  CHECK(stack_response(s, 780.0, 0.0, Polarization::s).R >= 0.999);
}

TEST_CASE("transfer matrix matches the analytic quarter-wave reflectance") {
  for (bool low_on_top : {true, false}) {
    for (int n = 1; n <= 15; ++n) {
      const auto s = quarter_wave_stack(kTa2O5, kSiO2, n, 780.0, low_on_top);
      const double expected = quarter_wave_reflectance(kTa2O5, kSiO2, n, s.substrate_index,
                                                       low_on_top);
      CAPTURE(n);
      CAPTURE(low_on_top);
      CHECK(std::abs(stack_response(s, 780.0, 0.0, Polarization::s).R - expected) < 1e-8);
    }
  }
}

TEST_CASE("reflectivity spectrum") {
  const auto s = quarter_wave_stack(kTa2O5, kSiO2, 4, 770.0, true);
  const auto grid = linear_grid(600.0, 950.0, 1.0);
  const auto rs = reflectivity_spectrum(s, grid, 0.0, Polarization::s);
  const auto rp = reflectivity_spectrum(s, grid, 0.0, Polarization::p);
  REQUIRE(rs.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(rs.value[i] == rp.value[i]);

  LayerStack bare{{}, 1.0, 1.5};
  for (double v : reflectivity_spectrum(bare, grid, 0.0, Polarization::s).value) {
    CHECK(v == doctest::Approx(0.04).epsilon(1e-12));
  }
  const std::vector<double> empty;
  CHECK_THROWS_AS(reflectivity_spectrum(s, empty, 0.0, Polarization::s), ValidationError);
  const std::vector<double> descending{700.0, 650.0};
  CHECK_THROWS_AS(reflectivity_spectrum(s, descending, 0.0, Polarization::s), ValidationError);
}

TEST_CASE("stopband of the 13-bilayer mirror matches the analytic width") {
  const auto s = quarter_wave_stack(kTa2O5, kSiO2, 13, 780.0, true);
  const auto band = stopband(s, 0.99, {500.0, 1100.0});
  REQUIRE(band.has_value());
  CHECK(band->contains(780.0));
  const double analytic = analytic_relative_width(kTa2O5, kSiO2) * 780.0;
  CHECK(std::abs(band->width() - analytic) / analytic < 0.15);
  CHECK_FALSE(stopband(quarter_wave_stack(kTa2O5, kSiO2, 2, 780.0, true), 0.99,
                       {500.0, 1100.0}).has_value());
  CHECK_THROWS_AS(stopband(s, 1.0, {500.0, 1100.0}), ValidationError);
}

TEST_CASE("12-bilayer TiO2/SiO2 mirror covers 524-684 nm") {
  const auto s = quarter_wave_stack(kTiO2, kSiO2, 12, 600.0, true);
  const auto band = stopband(s, 0.99, {400.0, 800.0});
  REQUIRE(band.has_value());
  CHECK(std::abs(band->min_nm - 524.0) <= 20.0);
  CHECK(std::abs(band->max_nm - 684.0) <= 20.0);
}

TEST_CASE("4-bilayer Ta2O5/SiO2 mirror band gap covers 685-880 nm") {
  const auto s = quarter_wave_stack(kTa2O5, kSiO2, 4, 770.0, true);
  const auto gap = bragg_band_gap(s, {550.0, 1100.0});
  REQUIRE(gap.has_value());
  CHECK(std::abs(gap->min_nm - 685.0) <= 20.0);
  CHECK(std::abs(gap->max_nm - 880.0) <= 20.0);
  // Four bilayers never reach 99 %, so the threshold definition finds nothing.
  CHECK_FALSE(stopband(s, 0.99, {550.0, 1100.0}).has_value());
  // The reflectance plateau sits inside the gap.
  const auto grid = linear_grid(600.0, 950.0, 0.5);
  const auto spectrum = reflectivity_spectrum(s, grid, 0.0, Polarization::s);
  const double peak = *std::max_element(spectrum.value.begin(), spectrum.value.end());
  const auto half = stopband(s, 0.5 * peak, {600.0, 950.0});
  REQUIRE(half.has_value());
  CHECK(gap->contains(half->center()));
  LayerStack odd{{{2.1, 90.0}, {1.46, 130.0}, {2.1, 90.0}}, 1.0, 1.46};
  CHECK_THROWS_AS(bragg_band_gap(odd, {550.0, 1100.0}), ValidationError);
}

TEST_CASE("group delay penetration length") {
  const auto s = quarter_wave_stack(kTa2O5, kSiO2, 13, 780.0, true);
  const auto pen = group_delay_length(s, 780.0);
  CHECK(pen.reliable);
  CHECK(pen.length_um >= 0.25);
  CHECK(pen.length_um <= 1.0);

  const auto half = group_delay_length(s, 780.0, 0.5e-4);
  CHECK(std::abs(half.length_um - pen.length_um) / pen.length_um < 1e-3);

  auto perfect = [](double) { return std::complex<double>(-1.0, 0.0); };
  CHECK(phase_delay_length_um(perfect, 780.0) == doctest::Approx(0.0));

  CHECK_FALSE(group_delay_length(s, 1100.0).reliable);
}

TEST_CASE("energy conservation over random lossless stacks") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> index(1.0, 3.0);
  std::uniform_real_distribution<double> thickness(5.0, 400.0);
  std::uniform_real_distribution<double> wavelength(300.0, 1500.0);
  std::uniform_real_distribution<double> angle(0.0, 1.5);
  std::uniform_int_distribution<int> count(0, 30);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    LayerStack s;
    s.ambient_index = index(rng);
    s.substrate_index = index(rng);
    const int n = count(rng);
    for (int i = 0; i < n; ++i) s.layers.push_back({index(rng), thickness(rng)});
    const double wl = wavelength(rng);
    const double a = angle(rng);
    for (auto pol : {Polarization::s, Polarization::p}) {
      const auto r = stack_response(s, wl, a, pol);
      worst = std::max(worst, std::abs(r.R + r.T - 1.0));
      CHECK(r.R >= 0.0);
      CHECK(r.R <= 1.0 + 1e-12);
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("transmittance is reciprocal") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> index(1.0, 2.6);
  std::uniform_real_distribution<double> thickness(20.0, 300.0);
  for (int trial = 0; trial < 200; ++trial) {
    LayerStack fwd;
    fwd.ambient_index = 1.0;
    fwd.substrate_index = index(rng);
    for (int i = 0; i < 8; ++i) fwd.layers.push_back({index(rng), thickness(rng)});
    LayerStack rev{{fwd.layers.rbegin(), fwd.layers.rend()}, fwd.substrate_index,
                   fwd.ambient_index};
    const double a = 0.4;
    const double a_rev = std::asin(fwd.ambient_index * std::sin(a) / rev.ambient_index);
    for (auto pol : {Polarization::s, Polarization::p}) {
      const double t1 = stack_response(fwd, 700.0, a, pol).T;
      const double t2 = stack_response(rev, 700.0, a_rev, pol).T;
      CHECK(t1 == doctest::Approx(t2).epsilon(1e-10));
    }
  }
}

TEST_CASE("adding a bilayer never lowers the center reflectance") {
  for (bool low_on_top : {true, false}) {
    // The first bilayer can lower R below the bare substrate; monotone from one bilayer on.
    double previous = 0.0;
    for (int n = 1; n <= 20; ++n) {
      const double r = stack_response(quarter_wave_stack(kTa2O5, kSiO2, n, 780.0, low_on_top),
                                      780.0, 0.0, Polarization::s).R;
      CHECK(r >= previous - 1e-15);
      previous = r;
    }
  }
}

TEST_CASE("stopband blue-shifts with angle of incidence") {
  const auto s = quarter_wave_stack(kTa2O5, kSiO2, 13, 780.0, true);
  double previous = 1e9;
  for (int deg = 0; deg <= 60; deg += 5) {
    const auto band = stopband(s, 0.99, {450.0, 1100.0}, deg * kPi / 180.0, Polarization::s);
    REQUIRE(band.has_value());
    CHECK(band->center() <= previous);
    previous = band->center();
  }
}

TEST_CASE("parallel evaluation is bit-identical to sequential") {
  const auto s = quarter_wave_stack(kTiO2, kSiO2, 12, 600.0, true);
  const auto grid = linear_grid(400.0, 800.0, 0.1);
  const auto sequential = reflectivity_spectrum(s, grid, 0.3, Polarization::p);
  std::vector<double> parallel(grid.size());
  std::vector<std::thread> workers;
  const std::size_t n_threads = 4;
  for (std::size_t t = 0; t < n_threads; ++t) {
    workers.emplace_back([&, t] {
      for (std::size_t i = t; i < grid.size(); i += n_threads) {
        parallel[i] = stack_response(s, grid[i], 0.3, Polarization::p).R;
      }
    });
  }
  for (auto& w : workers) w.join();
  CHECK(parallel == sequential.value);
}

}  // TEST_SUITE
