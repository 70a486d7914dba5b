#pragma once

#include <numbers>

namespace microcavity {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// Handbook refractive indices, dispersion-free.
namespace material {
inline constexpr double kSiO2 = 1.46;
inline constexpr double kTa2O5 = 2.10;
inline constexpr double kTiO2 = 2.35;
inline constexpr double kAnthracene = 1.60;
inline constexpr double kAir = 1.0;
inline constexpr double kFusedSilicaSubstrate = 1.46;
}  // namespace material

/// Intensity FWHM of a Gaussian beam per unit 1/e field half-width.
inline constexpr double kFwhmPerWaist = 1.1774100225154747;  // sqrt(2 ln 2)

}  // namespace microcavity
