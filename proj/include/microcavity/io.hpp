#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "microcavity/analysis.hpp"
#include "microcavity/coupling.hpp"
#include "microcavity/design.hpp"

namespace microcavity::io {

using json = nlohmann::json;

/// printf("%.9g") text of a value.
std::string format_g9(double v);
/// The value rounded to 9 significant digits, so that JSON dumps print the
/// same digits as format_g9. Non-finite values become null.
json number(double v);

/// Pretty-printed JSON (two-space indent, trailing newline) with every
/// floating-point value written as %.9g.
std::string dump(const json& value);

std::string read_text(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);
json read_json(const std::filesystem::path& path);

// Stack file: {"ambient_index", "substrate_index", "layers": [{"index", "thickness_nm"}]}
optics::LayerStack stack_from_json(const json& j);
json stack_to_json(const optics::LayerStack& stack);

// Emitter file: {"zpl": {"center_nm", "fwhm_nm", "weight"},
//                "vibronic": [{"center_nm", "fwhm_nm", "weight", "shape"}]}
coupling::EmitterModel emitter_from_json(const json& j);
json emitter_to_json(const coupling::EmitterModel& emitter);

// CSV formats. Every numeric cell is %.9g, LF line endings.
std::string spectrum_csv(const Spectrum& spectrum);                  // wavelength_nm,value
Spectrum parse_spectrum_csv(const std::string& text);
std::string scan_csv(const analysis::ScanTrace& trace);              // displacement_raw,signal
analysis::ScanTrace parse_scan_csv(const std::string& text);
std::string map_csv(const analysis::ModeMap& map);                   // x_um,y_um,signal
analysis::ModeMap parse_map_csv(const std::string& text);
std::string columns_csv(const std::string& header, const std::vector<double>& a,
                        const std::vector<double>& b);

json to_json(const cavity::CavityReport& report);
json to_json(const coupling::PurcellReport& report);
json to_json(const analysis::PeakFit& fit);
json to_json(const analysis::LengthCalibration& calibration);
json to_json(const analysis::Gaussian2DFit& fit);
json to_json(const design::DesignResult& result);
json to_json(const design::OptimizationResult& result);

// Calibration input: {"wavelengths_nm": [...], "positions_raw": [[...], ...]}
struct CalibrationInput {
  std::vector<double> wavelengths_nm;
  std::vector<std::vector<double>> positions_raw;
};
CalibrationInput calibration_input_from_json(const json& j);
json calibration_input_to_json(const CalibrationInput& input);

// Design space: {"finesse": [min, max], "radius_um": [min, max], "order": [min, max],
//                "wavelength_nm", optional "emitter", "grid_points", "finesse_cap"}
design::DesignSpace design_space_from_json(const json& j);

}  // namespace microcavity::io
