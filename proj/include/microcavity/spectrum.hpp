#pragma once

#include <span>
#include <vector>

namespace microcavity {

/// Sampled (wavelength, value) series on a strictly ascending grid.
struct Spectrum {
  std::vector<double> wavelength_nm;
  std::vector<double> value;

  std::size_t size() const noexcept { return wavelength_nm.size(); }
  bool empty() const noexcept { return wavelength_nm.empty(); }
};

/// Throws ValidationError unless the grid is non-empty, strictly ascending
/// and the same length as the values.
void validate(const Spectrum& spectrum);

/// Uniform grid [from, to] with the given step; the last point is `to` when
/// (to - from) is a multiple of step within rounding.
std::vector<double> linear_grid(double from, double to, double step);

/// n points spaced evenly over [from, to], endpoints included.
std::vector<double> linspace(double from, double to, std::size_t n);

/// Linear interpolation; zero outside the sampled support.
double interpolate(const Spectrum& spectrum, double wavelength_nm);

/// Trapezoidal integral over the sample grid.
double integrate(std::span<const double> x, std::span<const double> y);
double integrate(const Spectrum& spectrum);

}  // namespace microcavity
