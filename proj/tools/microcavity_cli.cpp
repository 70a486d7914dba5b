// Command-line front end. Every command parses flags, calls one library
// operation and serializes the result; numeric work stays in the library.

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "microcavity/analysis.hpp"
#include "microcavity/cavity.hpp"
#include "microcavity/coupling.hpp"
#include "microcavity/design.hpp"
#include "microcavity/errors.hpp"
#include "microcavity/io.hpp"
#include "microcavity/optics.hpp"

namespace {

using namespace microcavity;
using io::json;
using io::number;

constexpr const char* kModule = "cli";

constexpr int exit_code_validation = 2;
constexpr int exit_code_io = 3;

void report_error(const std::string& kind, const std::string& module, const std::string& message) {
  json err{{"error", kind}, {"module", module}, {"message", message}};
  std::cerr << err.dump() << '\n';
}

json document(const std::string& command, json params, json result) {
  return {{"command", command}, {"params", std::move(params)}, {"result", std::move(result)}};
}

// JSON results go to --out when given, otherwise to stdout.
void emit_json(const std::string& out, const json& doc) {
  const std::string text = io::dump(doc);
  if (out.empty()) {
    std::cout << text;
  } else {
    io::write_text_atomic(out, text);
  }
}

// CSV results go to --out; the resolved parameters are echoed on stdout.
void emit_csv(const std::string& command, const std::string& out, const std::string& csv,
              json params, json summary = json::object()) {
  io::write_text_atomic(out, csv);
  json doc = document(command, std::move(params), std::move(summary));
  doc["output"] = out;
  std::cout << io::dump(doc);
}

optics::Polarization parse_polarization(const std::string& s) {
  return s == "p" ? optics::Polarization::p : optics::Polarization::s;
}

struct StackArgs {
  std::string file;
  double n_high = material::kTa2O5;
  double n_low = material::kSiO2;
  int bilayers = 13;
  double center_nm = 780.0;
  bool high_on_top = false;
  double ambient = material::kAir;
  double substrate = material::kFusedSilicaSubstrate;

  void add(CLI::App* cmd) {
    cmd->add_option("--stack", file, "Stack file (path, JSON); overrides the quarter-wave flags");
    cmd->add_option("--n-high", n_high, "High refractive index (dimensionless)");
    cmd->add_option("--n-low", n_low, "Low refractive index (dimensionless)");
    cmd->add_option("--bilayers", bilayers, "Number of quarter-wave bilayers (count)");
    cmd->add_option("--center-nm", center_nm, "Design wavelength of the quarter-wave stack (nm)");
    cmd->add_flag("--high-on-top", high_on_top,
                  "Put the high-index layer at the ambient interface (flag, default low on top)");
    cmd->add_option("--ambient", ambient, "Ambient refractive index (dimensionless)");
    cmd->add_option("--substrate", substrate, "Substrate refractive index (dimensionless)");
  }

  optics::LayerStack resolve() const {
    if (!file.empty()) return io::stack_from_json(io::read_json(file));
    return optics::quarter_wave_stack(n_high, n_low, bilayers, center_nm, !high_on_top, ambient,
                                      substrate);
  }

  json params(const optics::LayerStack& stack) const {
    json p;
    if (!file.empty()) {
      p["stack_file"] = file;
    } else {
      p["n_high"] = number(n_high);
      p["n_low"] = number(n_low);
      p["bilayers"] = bilayers;
      p["center_nm"] = number(center_nm);
      p["low_index_on_top"] = !high_on_top;
    }
    p["ambient_index"] = number(stack.ambient_index);
    p["substrate_index"] = number(stack.substrate_index);
    p["layer_count"] = stack.layers.size();
    return p;
  }
};

struct RadiusArgs {
  double um = 1400.0;
  std::optional<double> mm;

  void add(CLI::App* cmd) {
    auto* a = cmd->add_option("--radius-um", um, "Concave mirror radius of curvature (um)");
    auto* b = cmd->add_option("--radius-mm", mm, "Concave mirror radius of curvature (mm)");
    a->excludes(b);
  }

  double resolve() const { return mm ? *mm * 1000.0 : um; }
};

struct EmitterArgs {
  std::string file;

  void add(CLI::App* cmd) {
    cmd->add_option("--emitter", file,
                    "Emitter model file (path, JSON); default is the built-in DBT-like model");
  }

  coupling::EmitterModel resolve() const {
    return file.empty() ? coupling::default_dbt_emitter() : io::emitter_from_json(io::read_json(file));
  }

  json params(const coupling::EmitterModel& model) const {
    return file.empty() ? io::emitter_to_json(model) : json(file);
  }
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError(kModule, "bad number '" + s + "' in " + what);
}

int to_int(const std::string& s, const std::string& what) {
  const double v = to_double(s, what);
  if (v != static_cast<int>(v)) throw ValidationError(kModule, "expected an integer in " + what);
  return static_cast<int>(v);
}

// "P:N:WEIGHT" -> TEM_pn with relative weight.
std::vector<analysis::ScanMode> parse_scan_modes(const std::vector<std::string>& specs) {
  std::vector<analysis::ScanMode> modes;
  for (const auto& s : specs) {
    const auto f = split(s, ':');
    if (f.size() != 3) throw ValidationError(kModule, "--mode expects P:N:WEIGHT, got '" + s + "'");
    modes.push_back({{to_int(f[0], "--mode"), to_int(f[1], "--mode")}, to_double(f[2], "--mode")});
  }
  return modes;
}

// "ORDER:WEIGHT" -> transverse order n+p with relative weight.
std::vector<coupling::ModeCoupling> parse_mode_couplings(const std::vector<std::string>& specs) {
  std::vector<coupling::ModeCoupling> modes;
  for (const auto& s : specs) {
    const auto f = split(s, ':');
    if (f.size() != 2) throw ValidationError(kModule, "--mode expects ORDER:WEIGHT, got '" + s + "'");
    modes.push_back({to_int(f[0], "--mode"), to_double(f[1], "--mode")});
  }
  return modes;
}

json interval_json(const std::optional<optics::WavelengthInterval>& band, const char* method) {
  json r{{"method", method}, {"found", band.has_value()}};
  if (band) {
    r["min_nm"] = number(band->min_nm);
    r["max_nm"] = number(band->max_nm);
    r["width_nm"] = number(band->width());
    r["center_nm"] = number(band->center());
  }
  return r;
}

using Handlers = std::map<std::string, std::function<void()>>;

void add_dbr_spectrum(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("dbr-spectrum", "Reflectance spectrum R(lambda) of a layer stack");
  auto stack = std::make_shared<StackArgs>();
  auto from = std::make_shared<double>(600.0);
  auto to = std::make_shared<double>(950.0);
  auto step = std::make_shared<double>(0.5);
  auto angle = std::make_shared<double>(0.0);
  auto pol = std::make_shared<std::string>("s");
  auto out = std::make_shared<std::string>();
  stack->add(cmd);
  cmd->add_option("--from-nm", *from, "Grid start wavelength (nm)");
  cmd->add_option("--to-nm", *to, "Grid end wavelength (nm)");
  cmd->add_option("--step-nm", *step, "Grid step (nm)");
  cmd->add_option("--angle-rad", *angle, "Angle of incidence in the ambient medium (rad)");
  cmd->add_option("--polarization", *pol, "Polarization (s or p)")->check(CLI::IsMember({"s", "p"}));
  cmd->add_option("--out", *out, "Output spectrum CSV (path)")->required();
  h["dbr-spectrum"] = [=] {
    const auto s = stack->resolve();
    const auto grid = linear_grid(*from, *to, *step);
    const auto spectrum = optics::reflectivity_spectrum(s, grid, *angle, parse_polarization(*pol));
    json p = stack->params(s);
    p["from_nm"] = number(*from);
    p["to_nm"] = number(*to);
    p["step_nm"] = number(*step);
    p["angle_rad"] = number(*angle);
    p["polarization"] = *pol;
    emit_csv("dbr-spectrum", *out, io::spectrum_csv(spectrum), p);
  };
}

void add_stopband(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("stopband", "High-reflectance band of a layer stack");
  auto stack = std::make_shared<StackArgs>();
  auto threshold = std::make_shared<double>(0.99);
  auto from = std::make_shared<double>(400.0);
  auto to = std::make_shared<double>(1200.0);
  auto angle = std::make_shared<double>(0.0);
  auto pol = std::make_shared<std::string>("s");
  auto band_gap = std::make_shared<bool>(false);
  auto out = std::make_shared<std::string>();
  stack->add(cmd);
  cmd->add_option("--threshold", *threshold, "Reflectance threshold (dimensionless, 0-1)");
  cmd->add_option("--from-nm", *from, "Search range start (nm)");
  cmd->add_option("--to-nm", *to, "Search range end (nm)");
  cmd->add_option("--angle-rad", *angle, "Angle of incidence in the ambient medium (rad)");
  cmd->add_option("--polarization", *pol, "Polarization (s or p)")->check(CLI::IsMember({"s", "p"}));
  cmd->add_flag("--band-gap", *band_gap,
                "Report the photonic band gap of the periodic bilayer instead (flag)");
  cmd->add_option("--out", *out, "Output JSON (path); stdout when omitted");
  h["stopband"] = [=] {
    const auto s = stack->resolve();
    const optics::WavelengthInterval range{*from, *to};
    json p = stack->params(s);
    p["from_nm"] = number(*from);
    p["to_nm"] = number(*to);
    json result;
    if (*band_gap) {
      p["method"] = "band-gap";
      result = interval_json(optics::bragg_band_gap(s, range), "band-gap");
    } else {
      p["threshold"] = number(*threshold);
      p["angle_rad"] = number(*angle);
      p["polarization"] = *pol;
      result = interval_json(
          optics::stopband(s, *threshold, range, *angle, parse_polarization(*pol)), "threshold");
    }
    emit_json(*out, document("stopband", p, result));
  };
}

void add_group_delay(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("group-delay", "Penetration length of a stack's reflection phase");
  auto stack = std::make_shared<StackArgs>();
  auto lambda = std::make_shared<std::optional<double>>();
  auto step = std::make_shared<double>(1e-4);
  auto band = std::make_shared<double>(0.99);
  auto cavity_length = std::make_shared<std::optional<double>>();
  auto out = std::make_shared<std::string>();
  stack->add(cmd);
  cmd->add_option("--lambda", *lambda, "Evaluation wavelength (nm); default is --center-nm");
  cmd->add_option("--relative-step", *step, "Central-difference step relative to omega (dimensionless)");
  cmd->add_option("--band-threshold", *band,
                  "Reflectance below which the result is flagged unreliable (dimensionless)");
  cmd->add_option("--cavity-length-um", *cavity_length,
                  "Optical cavity length to convert into a physical gap (um)");
  cmd->add_option("--out", *out, "Output JSON (path); stdout when omitted");
  h["group-delay"] = [=] {
    const auto s = stack->resolve();
    const double wl = lambda->value_or(stack->center_nm);
    const auto pen = optics::group_delay_length(s, wl, *step, *band);
    json p = stack->params(s);
    p["lambda_nm"] = number(wl);
    p["relative_step"] = number(*step);
    p["band_threshold"] = number(*band);
    json r{{"length_um", number(pen.length_um)},
           {"reliable", pen.reliable},
           {"reflectance", number(optics::stack_response(s, wl, 0.0, optics::Polarization::s).R)}};
    if (*cavity_length) {
      p["cavity_length_um"] = number(**cavity_length);
      r["physical_gap_um"] = number(cavity::physical_gap_um(**cavity_length, pen.length_um));
    }
    emit_json(*out, document("group-delay", p, r));
  };
}

void add_cavity_report(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("cavity-report", "Finesse, FSR, waist and mode volume of a cavity");
  auto R1 = std::make_shared<double>(cavity::kGoldReflectance);
  auto R2 = std::make_shared<double>(0.999);
  auto m = std::make_shared<int>(7);
  auto lambda = std::make_shared<double>(785.0);
  auto radius = std::make_shared<RadiusArgs>();
  auto T1 = std::make_shared<std::optional<double>>();
  auto T2 = std::make_shared<std::optional<double>>();
  auto fwhm = std::make_shared<std::optional<double>>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--R1", *R1, "Concave (gold) mirror reflectance (dimensionless, 0-1)");
  cmd->add_option("--R2", *R2, "Planar (DBR) mirror reflectance (dimensionless, 0-1)");
  cmd->add_option("--m", *m, "Longitudinal order (integer)");
  cmd->add_option("--lambda", *lambda, "Resonance wavelength (nm)");
  radius->add(cmd);
  cmd->add_option("--T1", *T1, "Concave mirror transmittance for the plane-wave peak (dimensionless)");
  cmd->add_option("--T2", *T2, "Planar mirror transmittance for the plane-wave peak (dimensionless)");
  cmd->add_option("--measured-fwhm-um", *fwhm,
                  "Measured intensity FWHM of the mode, reported under both volume conventions (um)");
  cmd->add_option("--out", *out, "Output JSON (path); stdout when omitted");
  h["cavity-report"] = [=] {
    const double r_um = radius->resolve();
    const auto report = cavity::make_cavity_report(*R1, *R2, *m, *lambda, r_um);
    json p{{"R1", number(*R1)}, {"R2", number(*R2)}, {"m", *m}, {"lambda_nm", number(*lambda)},
           {"radius_um", number(r_um)}};
    json r = io::to_json(report);
    if (*T1 || *T2) {
      if (!*T1 || !*T2) throw ValidationError(kModule, "--T1 and --T2 must be given together");
      p["T1"] = number(**T1);
      p["T2"] = number(**T2);
      r["plane_wave_peak_transmission"] = number(cavity::plane_wave_peak_transmission(
          cavity::MirrorSpec::fixed(*R1, **T1), cavity::MirrorSpec::fixed(*R2, **T2)));
    }
    if (*fwhm) {
      p["measured_fwhm_um"] = number(**fwhm);
      const auto shape = cavity::mode_shape_from_fwhm(**fwhm);
      const auto v_waist = cavity::mode_volume(shape.waist_um, report.length_um, *lambda);
      const auto v_fwhm = cavity::mode_volume(**fwhm, report.length_um, *lambda);
      r["measured_mode"] = {{"waist_um", number(shape.waist_um)},
                            {"mode_volume_lambda3", number(v_waist.volume_lambda3)},
                            {"mode_volume_lambda3_waist_equal_fwhm", number(v_fwhm.volume_lambda3)}};
    }
    emit_json(*out, document("cavity-report", p, r));
  };
}

void add_airy(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("airy", "Airy transmission function sampled over a detuning range");
  auto finesse = std::make_shared<double>(200.0);
  auto fsr = std::make_shared<double>(392.5);
  auto from = std::make_shared<double>(-10.0);
  auto to = std::make_shared<double>(10.0);
  auto samples = std::make_shared<int>(2001);
  auto peak = std::make_shared<double>(1.0);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--finesse", *finesse, "Cavity finesse (dimensionless)");
  cmd->add_option("--fsr-nm", *fsr, "Free spectral range of the scan variable (nm)");
  cmd->add_option("--from-nm", *from, "Detuning range start (nm)");
  cmd->add_option("--to-nm", *to, "Detuning range end (nm)");
  cmd->add_option("--samples", *samples, "Number of samples (count)")->check(CLI::Range(2, 10000000));
  cmd->add_option("--peak-transmission", *peak, "Peak transmittance (dimensionless, 0-1)");
  cmd->add_option("--out", *out, "Output CSV (path)")->required();
  h["airy"] = [=] {
    const auto x = linspace(*from, *to, static_cast<std::size_t>(*samples));
    std::vector<double> t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      t[i] = cavity::airy_transmission(x[i], *finesse, *fsr, *peak);
    }
    json p{{"finesse", number(*finesse)}, {"fsr_nm", number(*fsr)}, {"from_nm", number(*from)},
           {"to_nm", number(*to)}, {"samples", *samples}, {"peak_transmission", number(*peak)}};
    emit_csv("airy", *out, io::columns_csv("detuning_nm,transmission", x, t), p,
             {{"fwhm_nm", number(cavity::airy_fwhm(*finesse, *fsr))}});
  };
}

struct MapArgs {
  int p = 0;
  int n = 0;
  double w_um = 3.14;
  double extent_um = 10.0;
  double step_um = 0.25;

  void add(CLI::App* cmd) {
    cmd->add_option("--p", p, "Hermite index along x (integer)");
    cmd->add_option("--n", n, "Hermite index along y (integer)");
    cmd->add_option("--w-um", w_um, "Mode waist, 1/e field half-width (um)");
    cmd->add_option("--extent-um", extent_um, "Side length of the square map (um)");
    cmd->add_option("--step-um", step_um, "Map step size (um)");
  }

  analysis::MapSynthesis spec() const {
    analysis::MapSynthesis s;
    s.mode = {p, n};
    s.w_um = w_um;
    s.extent_um = extent_um;
    s.step_um = step_um;
    return s;
  }

  json params() const {
    return {{"p", p}, {"n", n}, {"w_um", number(w_um)}, {"extent_um", number(extent_um)},
            {"step_um", number(step_um)}};
  }
};

void add_mode_profile(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("mode-profile", "Hermite-Gauss TEM_pn intensity on a square grid");
  auto map = std::make_shared<MapArgs>();
  auto out = std::make_shared<std::string>();
  map->add(cmd);
  cmd->add_option("--out", *out, "Output mode map CSV (path)")->required();
  h["mode-profile"] = [=] {
    emit_csv("mode-profile", *out, io::map_csv(analysis::synthesize_mode_map(map->spec())),
             map->params());
  };
}

void add_fit_scan(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("fit-scan", "Multi-Lorentzian fit of a cavity length scan");
  auto trace = std::make_shared<std::string>();
  auto peaks = std::make_shared<int>(1);
  auto lambda = std::make_shared<std::optional<double>>();
  auto scale = std::make_shared<std::optional<double>>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--trace", *trace, "Scan trace CSV (path)")->required();
  cmd->add_option("--peaks", *peaks, "Number of Lorentzian peaks (count)");
  cmd->add_option("--lambda", *lambda, "Laser wavelength for the finesse estimate (nm)");
  cmd->add_option("--scale-nm-per-unit", *scale,
                  "Piezo calibration for the finesse estimate (nm per raw unit)");
  cmd->add_option("--out", *out, "Output JSON (path); stdout when omitted");
  h["fit-scan"] = [=] {
    const auto t = io::parse_scan_csv(io::read_text(*trace));
    const auto fit = analysis::fit_peaks_lorentzian(t, *peaks);
    json p{{"trace", *trace}, {"peaks", *peaks}};
    json r = io::to_json(fit);
    if (*lambda && *scale) {
      p["lambda_nm"] = number(**lambda);
      p["scale_nm_per_unit"] = number(**scale);
      r["finesse"] = number(analysis::finesse_from_scan(fit, **lambda, **scale));
    } else if (*lambda || *scale) {
      throw ValidationError(kModule, "--lambda and --scale-nm-per-unit must be given together");
    }
    emit_json(*out, document("fit-scan", p, r));
  };
}

void add_calibrate_length(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("calibrate-length",
                                 "Integer-order length and piezo calibration from several wavelengths");
  auto input = std::make_shared<std::string>();
  auto opts = std::make_shared<analysis::CalibrationOptions>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--input", *input, "Calibration input JSON (path)")->required();
  cmd->add_option("--m-min", opts->m_min, "Smallest candidate order (integer)");
  cmd->add_option("--m-max", opts->m_max, "Largest candidate order (integer)");
  cmd->add_option("--ambiguity-ratio", opts->ambiguity_ratio,
                  "Runner-up/best residual ratio below which the result is ambiguous (dimensionless)");
  cmd->add_option("--residual-threshold-nm", opts->residual_threshold_nm,
                  "Best residual above which the result is ambiguous (nm)");
  cmd->add_option("--out", *out, "Output JSON (path); stdout when omitted");
  h["calibrate-length"] = [=] {
    const auto in = io::calibration_input_from_json(io::read_json(*input));
    const auto cal = analysis::calibrate_length(in.positions_raw, in.wavelengths_nm, *opts);
    json p{{"input", *input},
           {"wavelengths_nm", io::calibration_input_to_json(in)["wavelengths_nm"]},
           {"m_min", opts->m_min},
           {"m_max", opts->m_max},
           {"ambiguity_ratio", number(opts->ambiguity_ratio)},
           {"residual_threshold_nm", number(opts->residual_threshold_nm)}};
    emit_json(*out, document("calibrate-length", p, io::to_json(cal)));
  };
}

void add_fit_map(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("fit-map", "Elliptical 2D Gaussian fit of a lateral mode map");
  auto map = std::make_shared<std::string>();
  auto poor = std::make_shared<double>(0.05);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--map", *map, "Mode map CSV (path)")->required();
  cmd->add_option("--poor-threshold", *poor,
                  "Relative residual above which the fit is flagged poor (dimensionless)");
  cmd->add_option("--out", *out, "Output JSON (path); stdout when omitted");
  h["fit-map"] = [=] {
    const auto m = io::parse_map_csv(io::read_text(*map));
    const auto fit = analysis::fit_gaussian_2d(m, *poor);
    json p{{"map", *map}, {"poor_threshold", number(*poor)}};
    emit_json(*out, document("fit-map", p, io::to_json(fit)));
  };
}

void add_synth_scan(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("synth-scan", "Synthetic cavity length scan with seeded noise");
  auto R1 = std::make_shared<double>(cavity::kGoldReflectance);
  auto R2 = std::make_shared<double>(0.999);
  auto m = std::make_shared<int>(7);
  auto lambda = std::make_shared<double>(785.0);
  auto radius = std::make_shared<RadiusArgs>();
  auto modes = std::make_shared<std::vector<std::string>>(std::vector<std::string>{"0:0:1"});
  auto from = std::make_shared<std::optional<double>>();
  auto to = std::make_shared<std::optional<double>>();
  auto samples = std::make_shared<int>(1024);
  auto noise = std::make_shared<double>(0.0);
  auto seed = std::make_shared<std::uint64_t>(0);
  auto peak = std::make_shared<double>(1.0);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--R1", *R1, "Concave mirror reflectance (dimensionless, 0-1)");
  cmd->add_option("--R2", *R2, "Planar mirror reflectance (dimensionless, 0-1)");
  cmd->add_option("--m", *m, "Longitudinal order (integer)");
  cmd->add_option("--lambda", *lambda, "Laser wavelength (nm)");
  radius->add(cmd);
  cmd->add_option("--mode", *modes, "Transverse mode P:N:WEIGHT (integers, dimensionless weight); repeatable");
  cmd->add_option("--from-nm", *from, "Scan start as absolute cavity length (nm); default L - 10 nm");
  cmd->add_option("--to-nm", *to, "Scan end as absolute cavity length (nm); default L + 15 nm");
  cmd->add_option("--samples", *samples, "Number of samples (count)");
  cmd->add_option("--noise", *noise, "Gaussian noise sigma as a fraction of the strongest peak (dimensionless)");
  cmd->add_option("--seed", *seed, "Random seed (integer)");
  cmd->add_option("--peak-transmission", *peak, "Peak transmittance (dimensionless, 0-1)");
  cmd->add_option("--out", *out, "Output scan CSV (path)")->required();
  h["synth-scan"] = [=] {
    analysis::ScanSynthesis s;
    s.geometry = cavity::CavityGeometry::on_resonance(*m, *lambda, radius->resolve());
    s.mirror1 = cavity::MirrorSpec::fixed(*R1);
    s.mirror2 = cavity::MirrorSpec::fixed(*R2);
    s.modes = parse_scan_modes(*modes);
    const double length_nm = s.geometry.optical_length_um * 1e3;
    s.scan_from_nm = from->value_or(length_nm - 10.0);
    s.scan_to_nm = to->value_or(length_nm + 15.0);
    s.samples = *samples;
    s.noise_sigma = *noise;
    s.seed = *seed;
    s.peak_transmission = *peak;
    json mode_list = json::array();
    for (const auto& md : s.modes) {
      mode_list.push_back({{"p", md.mode.p}, {"n", md.mode.n}, {"weight", number(md.weight)}});
    }
    json p{{"R1", number(*R1)}, {"R2", number(*R2)}, {"m", *m}, {"lambda_nm", number(*lambda)},
           {"radius_um", number(s.geometry.radius_of_curvature_um)}, {"modes", mode_list},
           {"from_nm", number(s.scan_from_nm)}, {"to_nm", number(s.scan_to_nm)},
           {"samples", *samples}, {"noise", number(*noise)}, {"seed", *seed},
           {"peak_transmission", number(*peak)}};
    emit_csv("synth-scan", *out, io::scan_csv(analysis::synthesize_scan_trace(s)), p);
  };
}

void add_synth_map(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("synth-map", "Synthetic bead scan of a transverse mode with seeded noise");
  auto map = std::make_shared<MapArgs>();
  auto bead = std::make_shared<double>(0.0);
  auto noise = std::make_shared<double>(0.0);
  auto seed = std::make_shared<std::uint64_t>(0);
  auto out = std::make_shared<std::string>();
  map->add(cmd);
  cmd->add_option("--bead-um", *bead, "Bead diameter (um)");
  cmd->add_option("--noise", *noise, "Gaussian noise sigma as a fraction of the map peak (dimensionless)");
  cmd->add_option("--seed", *seed, "Random seed (integer)");
  cmd->add_option("--out", *out, "Output mode map CSV (path)")->required();
  h["synth-map"] = [=] {
    auto s = map->spec();
    s.bead_diameter_um = *bead;
    s.noise_sigma = *noise;
    s.seed = *seed;
    json p = map->params();
    p["bead_um"] = number(*bead);
    p["noise"] = number(*noise);
    p["seed"] = *seed;
    emit_csv("synth-map", *out, io::map_csv(analysis::synthesize_mode_map(s)), p);
  };
}

void add_filter_spectrum(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("filter-spectrum",
                                 "Emission spectrum filtered by the cavity Airy comb plus leak background");
  auto emission = std::make_shared<std::string>();
  auto emitter = std::make_shared<EmitterArgs>();
  auto from = std::make_shared<double>(760.0);
  auto to = std::make_shared<double>(900.0);
  auto step = std::make_shared<double>(0.02);
  auto finesse = std::make_shared<double>(200.0);
  auto m = std::make_shared<int>(7);
  auto length = std::make_shared<std::optional<double>>();
  auto resonance = std::make_shared<double>(785.0);
  auto radius = std::make_shared<RadiusArgs>();
  auto modes = std::make_shared<std::vector<std::string>>(std::vector<std::string>{"0:1"});
  auto background = std::make_shared<double>(0.0);
  auto background_csv = std::make_shared<std::string>();
  auto measured = std::make_shared<std::string>();
  auto peak = std::make_shared<double>(1.0);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--emission", *emission, "Emission spectrum CSV (path); default samples the emitter model");
  emitter->add(cmd);
  cmd->add_option("--from-nm", *from, "Model grid start (nm)");
  cmd->add_option("--to-nm", *to, "Model grid end (nm)");
  cmd->add_option("--step-nm", *step, "Model grid step (nm)");
  cmd->add_option("--finesse", *finesse, "Cavity finesse (dimensionless)");
  cmd->add_option("--m", *m, "Longitudinal order used when --length-um is absent (integer)");
  cmd->add_option("--length-um", *length,
                  "Optical cavity length, snapped to the nearest resonant order (um)");
  cmd->add_option("--resonance-nm", *resonance, "TEM00 resonance wavelength (nm)");
  radius->add(cmd);
  cmd->add_option("--mode", *modes,
                  "Transverse mode ORDER:WEIGHT (integer n+p, dimensionless weight); repeatable");
  cmd->add_option("--background", *background, "Scalar leak background (dimensionless)");
  cmd->add_option("--background-csv", *background_csv, "Leak background spectrum CSV (path)");
  cmd->add_option("--fit-background-to", *measured,
                  "Measured spectrum CSV used to fit a scalar background (path)");
  cmd->add_option("--peak-transmission", *peak, "Peak transmittance (dimensionless, 0-1)");
  cmd->add_option("--out", *out, "Output spectrum CSV (path)")->required();
  h["filter-spectrum"] = [=] {
    json p;
    Spectrum s;
    if (!emission->empty()) {
      s = io::parse_spectrum_csv(io::read_text(*emission));
      p["emission"] = *emission;
    } else {
      const auto model = emitter->resolve();
      s = coupling::emission_spectrum(model, linear_grid(*from, *to, *step));
      p["emitter"] = emitter->params(model);
      p["from_nm"] = number(*from);
      p["to_nm"] = number(*to);
      p["step_nm"] = number(*step);
    }
    coupling::FilterOptions o;
    o.finesse = *finesse;
    o.resonance_nm = *resonance;
    o.length_um = length->value_or(cavity::resonance_length_um(*m, *resonance));
    o.peak_transmission = *peak;
    o.radius_um = radius->resolve();
    o.modes = parse_mode_couplings(*modes);
    json summary;
    if (!background_csv->empty()) {
      o.background = io::parse_spectrum_csv(io::read_text(*background_csv));
      p["background_csv"] = *background_csv;
    } else if (!measured->empty()) {
      const double b = coupling::fit_leak_background(
          io::parse_spectrum_csv(io::read_text(*measured)), s, o);
      o.background = b;
      p["fit_background_to"] = *measured;
      summary["fitted_background"] = number(b);
    } else {
      o.background = *background;
      p["background"] = number(*background);
    }
    json mode_list = json::array();
    for (const auto& md : o.modes) mode_list.push_back({{"order", md.order}, {"weight", number(md.weight)}});
    p["finesse"] = number(*finesse);
    p["resonance_nm"] = number(*resonance);
    p["length_um"] = number(coupling::snapped_length_um(o.length_um, o.resonance_nm));
    p["radius_um"] = number(o.radius_um);
    p["modes"] = mode_list;
    p["peak_transmission"] = number(*peak);
    emit_csv("filter-spectrum", *out, io::spectrum_csv(coupling::filtered_spectrum(s, o)), p,
             summary.is_null() ? json::object() : summary);
  };
}

void add_purcell(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("purcell", "Purcell factor and open-cavity reduction chain");
  auto q = std::make_shared<std::optional<double>>();
  auto finesse = std::make_shared<double>(200.0);
  auto m = std::make_shared<int>(7);
  auto volume = std::make_shared<std::optional<double>>();
  auto waist = std::make_shared<std::optional<double>>();
  auto radius = std::make_shared<RadiusArgs>();
  auto lambda = std::make_shared<double>(780.0);
  auto overlap = std::make_shared<double>(1.0);
  auto alpha0 = std::make_shared<double>(0.30);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--q", *q, "Quality factor (dimensionless); default finesse * m");
  cmd->add_option("--finesse", *finesse, "Cavity finesse (dimensionless)");
  cmd->add_option("--m", *m, "Longitudinal order (integer)");
  cmd->add_option("--volume-lambda3", *volume,
                  "Mode volume (cubic wavelengths); default pi w0^2 L / 4 with L = m lambda / 2");
  cmd->add_option("--waist-um", *waist,
                  "Mode waist, 1/e field half-width (um); default from the mirror radius");
  radius->add(cmd);
  cmd->add_option("--lambda", *lambda, "Emission wavelength (nm)");
  cmd->add_option("--overlap", *overlap, "Spectral overlap (dimensionless, 0-1)");
  cmd->add_option("--alpha0", *alpha0, "Free-space 0-0 branching ratio (dimensionless, 0-1)");
  cmd->add_option("--out", *out, "Output JSON (path); stdout when omitted");
  h["purcell"] = [=] {
    const double length_um = cavity::resonance_length_um(*m, *lambda);
    const double Q = q->has_value() ? **q : cavity::quality_factor(*finesse, *m);
    const double w0 = waist->has_value()
                          ? **waist
                          : cavity::gaussian_waist(length_um, radius->resolve(), *lambda).waist_um;
    const double v = volume->has_value()
                         ? **volume
                         : cavity::mode_volume(w0, length_um, *lambda).volume_lambda3;
    json p{{"q_factor", number(Q)}, {"volume_lambda3", number(v)}, {"waist_um", number(w0)},
           {"lambda_nm", number(*lambda)}, {"overlap", number(*overlap)},
           {"alpha0", number(*alpha0)}};
    if (!q->has_value()) {
      p["finesse"] = number(*finesse);
      p["m"] = *m;
    }
    if (!waist->has_value()) p["radius_um"] = number(radius->resolve());
    const auto report = coupling::purcell_report(Q, v, w0, *lambda, *overlap, *alpha0);
    emit_json(*out, document("purcell", p, io::to_json(report)));
  };
}

void add_branching(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("branching", "0-0 branching ratio after enhancement, or its inverse");
  auto alpha0 = std::make_shared<double>(0.30);
  auto enhancement = std::make_shared<std::optional<double>>();
  auto target = std::make_shared<std::optional<double>>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--alpha0", *alpha0, "Free-space 0-0 branching ratio (dimensionless, 0-1)");
  cmd->add_option("--enhancement", *enhancement, "0-0 rate enhancement factor (dimensionless)");
  cmd->add_option("--target", *target,
                  "Target branching ratio; reports the required enhancement (dimensionless, 0-1)");
  cmd->add_option("--out", *out, "Output JSON (path); stdout when omitted");
  h["branching"] = [=] {
    if (!*enhancement && !*target) {
      throw ValidationError(kModule, "give --enhancement, --target or both");
    }
    json p{{"alpha0", number(*alpha0)}};
    json r = json::object();
    if (*enhancement) {
      p["enhancement"] = number(**enhancement);
      r["branching_ratio"] = number(coupling::branching_ratio(*alpha0, **enhancement));
    }
    if (*target) {
      p["target"] = number(**target);
      r["required_enhancement"] = number(coupling::required_enhancement(*alpha0, **target));
    }
    emit_json(*out, document("branching", p, r));
  };
}

void add_bfp(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("bfp", "Back-focal-plane radial profile through the planar mirror");
  auto stack = std::make_shared<StackArgs>();
  stack->bilayers = 4;
  stack->center_nm = 770.0;
  auto emitter = std::make_shared<EmitterArgs>();
  auto cavity_on = std::make_shared<bool>(false);
  auto m = std::make_shared<int>(7);
  auto lambda = std::make_shared<double>(785.0);
  auto radius = std::make_shared<RadiusArgs>();
  auto max_angle = std::make_shared<double>(1.0);
  auto angles = std::make_shared<int>(201);
  auto opts = std::make_shared<coupling::BfpOptions>();
  auto out = std::make_shared<std::string>();
  stack->add(cmd);
  emitter->add(cmd);
  cmd->add_flag("--cavity-on", *cavity_on, "Add the resonant cavity lobe (flag)");
  cmd->add_option("--m", *m, "Longitudinal order of the resonant cavity (integer)");
  cmd->add_option("--lambda", *lambda, "Cavity resonance wavelength (nm)");
  radius->add(cmd);
  cmd->add_option("--max-angle-rad", *max_angle, "Largest emission angle (rad)");
  cmd->add_option("--angles", *angles, "Number of angles from 0 to the maximum (count)")
      ->check(CLI::Range(2, 100000));
  cmd->add_option("--mirror-reflectance", opts->mirror_reflectance,
                  "Concave mirror reflectance for the cavity finesse (dimensionless, 0-1)");
  cmd->add_option("--wavelength-step-nm", opts->wavelength_step_nm,
                  "Integration step over the emission spectrum (nm)");
  cmd->add_option("--out", *out, "Output profile CSV (path)")->required();
  h["bfp"] = [=] {
    const auto s = stack->resolve();
    const auto model = emitter->resolve();
    const auto geometry = cavity::CavityGeometry::on_resonance(*m, *lambda, radius->resolve());
    const auto grid = linspace(0.0, *max_angle, static_cast<std::size_t>(*angles));
    const auto profile = coupling::bfp_radial_profile(model, s, *cavity_on, geometry, grid, *opts);
    json p = stack->params(s);
    p["emitter"] = emitter->params(model);
    p["cavity_on"] = *cavity_on;
    p["m"] = *m;
    p["lambda_nm"] = number(*lambda);
    p["radius_um"] = number(geometry.radius_of_curvature_um);
    p["max_angle_rad"] = number(*max_angle);
    p["angles"] = *angles;
    p["mirror_reflectance"] = number(opts->mirror_reflectance);
    p["wavelength_step_nm"] = number(opts->wavelength_step_nm);
    emit_csv("bfp", *out, io::columns_csv("angle_rad,intensity", profile.angle_rad, profile.intensity),
             p);
  };
}

void add_optimize(CLI::App& app, Handlers& h) {
  auto* cmd = app.add_subcommand("optimize", "Search cavity designs for the 0-0 branching ratio");
  auto space_file = std::make_shared<std::string>();
  auto space = std::make_shared<design::DesignSpace>();
  auto emitter = std::make_shared<EmitterArgs>();
  auto objective = std::make_shared<std::string>("max-branching");
  auto target = std::make_shared<std::optional<double>>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--space", *space_file, "Design space JSON (path); overrides the range flags");
  cmd->add_option("--finesse-min", space->finesse_min, "Lowest finesse (dimensionless)");
  cmd->add_option("--finesse-max", space->finesse_max, "Highest finesse (dimensionless)");
  cmd->add_option("--finesse-cap", space->finesse_cap, "Upper bound allowed for --finesse-max (dimensionless)");
  cmd->add_option("--radius-min-um", space->radius_min_um, "Smallest mirror radius (um)");
  cmd->add_option("--radius-max-um", space->radius_max_um, "Largest mirror radius (um)");
  cmd->add_option("--order-min", space->order_min, "Smallest longitudinal order (integer)");
  cmd->add_option("--order-max", space->order_max, "Largest longitudinal order (integer)");
  cmd->add_option("--lambda", space->wavelength_nm, "Emission wavelength (nm)");
  cmd->add_option("--grid-points", space->grid_points, "Coarse grid points per continuous axis (count)");
  emitter->add(cmd);
  cmd->add_option("--objective", *objective, "max-branching or min-finesse (name)")
      ->check(CLI::IsMember({"max-branching", "min-finesse"}));
  cmd->add_option("--target", *target, "Target branching ratio (dimensionless, 0-1)");
  cmd->add_option("--out", *out, "Output JSON (path); stdout when omitted");
  h["optimize"] = [=] {
    design::DesignSpace s = *space;
    json p;
    if (!space_file->empty()) {
      s = io::design_space_from_json(io::read_json(*space_file));
      p["space"] = *space_file;
    } else {
      s.emitter = emitter->resolve();
      p["emitter"] = emitter->params(s.emitter);
    }
    p["finesse"] = {number(s.finesse_min), number(s.finesse_max)};
    p["finesse_cap"] = number(s.finesse_cap);
    p["radius_um"] = {number(s.radius_min_um), number(s.radius_max_um)};
    p["order"] = {s.order_min, s.order_max};
    p["wavelength_nm"] = number(s.wavelength_nm);
    p["grid_points"] = s.grid_points;
    p["objective"] = *objective;
    if (*target) p["target"] = number(**target);
    const auto obj = *objective == "min-finesse" ? design::Objective::min_finesse_for_target
                                                 : design::Objective::max_branching;
    const auto result = design::optimize_design(s, obj, *target);
    emit_json(*out, document("optimize", p, io::to_json(result)));
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fiber Fabry-Perot microcavity toolkit", "microcavity"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1, 1);
  Handlers handlers;
  add_dbr_spectrum(app, handlers);
  add_stopband(app, handlers);
  add_group_delay(app, handlers);
  add_cavity_report(app, handlers);
  add_airy(app, handlers);
  add_mode_profile(app, handlers);
  add_fit_scan(app, handlers);
  add_calibrate_length(app, handlers);
  add_fit_map(app, handlers);
  add_synth_scan(app, handlers);
  add_synth_map(app, handlers);
  add_filter_spectrum(app, handlers);
  add_purcell(app, handlers);
  add_branching(app, handlers);
  add_bfp(app, handlers);
  add_optimize(app, handlers);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help();
    std::string message = e.what();
    if (argc > 1 && argv[1][0] != '-' && !handlers.count(argv[1])) {
      message = std::string("unknown command '") + argv[1] + "'";
    }
    report_error("usage", kModule, message);
    return exit_code_validation;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    handlers.at(name)();
  } catch (const ValidationError& e) {
    report_error("validation", e.module(), e.what());
    return exit_code_validation;
  } catch (const ConvergenceError& e) {
    report_error("convergence", e.module(), e.what());
    return exit_code_validation;
  } catch (const IoError& e) {
    report_error("io", "io", e.what());
    return exit_code_io;
  } catch (const std::filesystem::filesystem_error& e) {
    report_error("io", "io", e.what());
    return exit_code_io;
  }
  return 0;
}
