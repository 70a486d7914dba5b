#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "microcavity/cavity.hpp"
#include "microcavity/least_squares.hpp"

namespace microcavity::analysis {

/// Cavity length scan: detected power against (possibly uncalibrated)
/// piezo displacement.
struct ScanTrace {
  std::vector<double> displacement;
  std::vector<double> signal;
  double noise_sigma = 0.0;  // 0 when unknown or noiseless
};

void validate(const ScanTrace& trace);

struct PeakFit {
  std::vector<double> centers;  // ascending
  std::vector<double> fwhms;
  std::vector<double> amplitudes;
  double baseline = 0.0;
  double residual_rms = 0.0;
  // 1-sigma standard errors, ordered [baseline, (amplitude, center, fwhm) per peak]
  std::vector<double> standard_errors;
  int iterations = 0;

  /// Index of the largest-amplitude peak.
  std::size_t dominant() const;
};

struct PeakGuess {
  double center = 0.0;
  double fwhm = 0.0;
  double amplitude = 0.0;
};

/// Baseline plus a sum of Lorentzians A / (1 + (2 (x - c) / fwhm)^2).
double lorentzian_model(std::span<const PeakGuess> peaks, double baseline, double x);

/// Seeds peaks at local maxima above median + 3 MAD and fits by
/// Levenberg-Marquardt. Throws ValidationError when fewer than `n_peaks`
/// maxima are detectable and ConvergenceError when the fit does not settle.
PeakFit fit_peaks_lorentzian(const ScanTrace& trace, int n_peaks,
                             const LeastSquaresOptions& options = {});

/// Same fit from caller-supplied initial peaks (in any order).
PeakFit fit_peaks_lorentzian(const ScanTrace& trace, std::span<const PeakGuess> initial,
                             double initial_baseline, const LeastSquaresOptions& options = {});

/// Seed peaks only (the automatic initialization used by the fit).
std::vector<PeakGuess> seed_peaks(const ScanTrace& trace, int n_peaks);

/// F = lambda / (2 FWHM_nm) of the dominant peak, FWHM converted with
/// `piezo_scale_nm_per_unit`.
double finesse_from_scan(const PeakFit& fit, double wavelength_nm, double piezo_scale_nm_per_unit);

struct CalibrationCandidate {
  int m = 0;
  double residual_nm = 0.0;
  double scale_nm_per_unit = 0.0;
  double offset_nm = 0.0;
};

struct LengthCalibration {
  int m = 0;
  double length_um = 0.0;  // m * lambda_ref / 2, lambda_ref = first wavelength
  double piezo_scale_nm_per_unit = 0.0;
  double offset_nm = 0.0;
  double residual_nm = 0.0;
  bool ambiguous = false;
  int runner_up_m = 0;
  double runner_up_residual_nm = 0.0;
  std::vector<CalibrationCandidate> candidates;
};

struct CalibrationOptions {
  int m_min = 1;
  int m_max = 200;
  double ambiguity_ratio = 2.0;        // runner-up / best residual below this -> ambiguous
  double residual_threshold_nm = 10.0;  // best residual above this -> ambiguous
};

/// Integer-order length calibration. positions_raw[i] lists, in order, the
/// raw piezo positions of consecutive longitudinal resonances m, m+1, ... at
/// wavelengths_nm[i]; the first entry of every list belongs to the same
/// order m. For each candidate m the lengths (m + k) lambda_i / 2 are
/// regressed linearly on the raw positions; the m with the smallest RMS
/// residual wins (ties go to the smaller m).
LengthCalibration calibrate_length(const std::vector<std::vector<double>>& positions_raw,
                                   std::span<const double> wavelengths_nm,
                                   const CalibrationOptions& options = {});

/// Lateral scan map; signal is row-major with y as the row index:
/// signal[iy * x_um.size() + ix].
struct ModeMap {
  std::vector<double> x_um;
  std::vector<double> y_um;
  std::vector<double> signal;

  double at(std::size_t ix, std::size_t iy) const { return signal[iy * x_um.size() + ix]; }
};

void validate(const ModeMap& map);

struct Gaussian2DFit {
  double center_x_um = 0.0;
  double center_y_um = 0.0;
  double fwhm_x_um = 0.0;
  double fwhm_y_um = 0.0;
  double amplitude = 0.0;
  double baseline = 0.0;
  double residual_rms = 0.0;
  double relative_residual = 0.0;  // residual_rms / amplitude
  bool poor_fit = false;
  int iterations = 0;
};

double gaussian_2d_model(const Gaussian2DFit& p, double x_um, double y_um);

/// Single elliptical Gaussian plus baseline. Maps smaller than 8x8, flat or
/// saturated maps are rejected. `poor_fit` is set when the relative residual
/// exceeds `poor_threshold`.
Gaussian2DFit fit_gaussian_2d(const ModeMap& map, double poor_threshold = 0.05,
                              const LeastSquaresOptions& options = {});

struct ScanMode {
  cavity::TransverseMode mode;
  double weight = 1.0;
};

struct ScanSynthesis {
  cavity::CavityGeometry geometry;
  cavity::MirrorSpec mirror1 = cavity::MirrorSpec::fixed(cavity::kGoldReflectance);
  cavity::MirrorSpec mirror2 = cavity::MirrorSpec::fixed(0.999);
  std::vector<ScanMode> modes{{{0, 0}, 1.0}};
  double scan_from_nm = 0.0;  // absolute cavity length
  double scan_to_nm = 0.0;
  int samples = 1024;
  double noise_sigma = 0.0;  // fraction of the strongest mode's peak
  std::uint64_t seed = 0;
  double peak_transmission = 1.0;
};

/// Airy resonances of every listed mode against cavity length, higher
/// orders offset by the transverse-mode spacing, plus seeded Gaussian noise.
ScanTrace synthesize_scan_trace(const ScanSynthesis& spec);

struct MapSynthesis {
  cavity::TransverseMode mode;
  double w_um = 0.0;
  double extent_um = 10.0;
  double step_um = 0.25;
  double bead_diameter_um = 0.0;
  double noise_sigma = 0.0;  // fraction of the map peak
  std::uint64_t seed = 0;
};

/// Hermite-Gauss intensity averaged over a uniform disc of the bead
/// diameter on a square grid centered on the mode axis.
ModeMap synthesize_mode_map(const MapSynthesis& spec);

struct CalibrationSynthesis {
  int m = 7;
  std::vector<double> wavelengths_nm{785.0, 775.0, 763.0};
  int orders_per_wavelength = 2;
  double scale_nm_per_unit = 1.25;
  double offset_nm = 0.0;
  double noise_fraction = 0.0;  // sigma as a fraction of the resonance spacing
  std::uint64_t seed = 0;
};

std::vector<std::vector<double>> synthesize_calibration_positions(const CalibrationSynthesis& spec);

}  // namespace microcavity::analysis
