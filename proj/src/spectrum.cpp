#include "microcavity/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "microcavity/errors.hpp"

namespace microcavity {

void validate(const Spectrum& spectrum) {
  detail::require(!spectrum.empty(), "spectrum", "spectrum is empty");
  detail::require(spectrum.wavelength_nm.size() == spectrum.value.size(), "spectrum",
                  "wavelength and value columns differ in length");
  for (std::size_t i = 1; i < spectrum.size(); ++i) {
    detail::require(spectrum.wavelength_nm[i] > spectrum.wavelength_nm[i - 1], "spectrum",
                    "wavelength grid must be strictly ascending");
  }
}

std::vector<double> linear_grid(double from, double to, double step) {
  detail::require(step > 0.0, "spectrum", "grid step must be positive");
  detail::require(to >= from, "spectrum", "grid end must not precede its start");
  const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = from + step * static_cast<double>(i);
  return grid;
}

std::vector<double> linspace(double from, double to, std::size_t n) {
  detail::require(n >= 1, "spectrum", "linspace needs at least one point");
  std::vector<double> grid(n);
  if (n == 1) {
    grid[0] = from;
    return grid;
  }
  const double step = (to - from) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) grid[i] = from + step * static_cast<double>(i);
  grid.back() = to;
  return grid;
}

double interpolate(const Spectrum& spectrum, double wavelength_nm) {
  const auto& x = spectrum.wavelength_nm;
  if (x.empty() || wavelength_nm < x.front() || wavelength_nm > x.back()) return 0.0;
  const auto it = std::upper_bound(x.begin(), x.end(), wavelength_nm);
  if (it == x.end()) return spectrum.value.back();
  const auto hi = static_cast<std::size_t>(it - x.begin());
  const std::size_t lo = hi - 1;
  const double f = (wavelength_nm - x[lo]) / (x[hi] - x[lo]);
  return spectrum.value[lo] + f * (spectrum.value[hi] - spectrum.value[lo]);
}

double integrate(std::span<const double> x, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) sum += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return sum;
}

double integrate(const Spectrum& spectrum) {
  return integrate(spectrum.wavelength_nm, spectrum.value);
}

}  // namespace microcavity
