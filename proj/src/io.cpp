#include "microcavity/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "microcavity/errors.hpp"

namespace microcavity::io {
namespace {

constexpr const char* kModule = "io";

template <class F>
auto parsing(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(kModule, std::string("malformed ") + what + ": " + e.what());
  }
}

std::vector<std::vector<double>> parse_csv(const std::string& text, const std::string& header,
                                           std::size_t columns) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(kModule, "CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) {
    throw ValidationError(kModule, "CSV header must be '" + header + "', got '" + line + "'");
  }
  std::vector<std::vector<double>> cols(columns);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(cells, cell, ',')) {
      if (c >= columns) break;
      try {
        std::size_t used = 0;
        cols[c].push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ValidationError(kModule, "CSV row " + std::to_string(row) + ": bad number '" +
                                           cell + "'");
      }
      ++c;
    }
    if (c != columns) {
      throw ValidationError(kModule, "CSV row " + std::to_string(row) + " needs " +
                                         std::to_string(columns) + " columns");
    }
  }
  return cols;
}

const char* shape_name(coupling::LineShape s) {
  return s == coupling::LineShape::lorentzian ? "lorentzian" : "gaussian";
}

coupling::LineShape parse_shape(const std::string& s) {
  if (s == "lorentzian") return coupling::LineShape::lorentzian;
  if (s == "gaussian") return coupling::LineShape::gaussian;
  throw ValidationError(kModule, "unknown line shape '" + s + "'");
}

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

}  // namespace

std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_g9(v).c_str(), nullptr);
}

namespace {

void dump_into(std::string& out, const json& v, int depth) {
  const std::string pad(2 * static_cast<std::size_t>(depth + 1), ' ');
  const std::string close_pad(2 * static_cast<std::size_t>(depth), ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        dump_into(out, it.value(), depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ",\n";
        out += pad;
        dump_into(out, v[i], depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_g9(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump(const json& value) {
  std::string out;
  dump_into(out, value, 0);
  out += '\n';
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(kModule, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

optics::LayerStack stack_from_json(const json& j) {
  return parsing("stack file", [&] {
    optics::LayerStack s;
    s.ambient_index = j.at("ambient_index").get<double>();
    s.substrate_index = j.at("substrate_index").get<double>();
    for (const auto& l : j.at("layers")) {
      s.layers.push_back({l.at("index").get<double>(), l.at("thickness_nm").get<double>()});
    }
    optics::validate(s);
    return s;
  });
}

json stack_to_json(const optics::LayerStack& stack) {
  json layers = json::array();
  for (const auto& l : stack.layers) {
    layers.push_back({{"index", number(l.refractive_index)},
                      {"thickness_nm", number(l.thickness_nm)}});
  }
  return {{"ambient_index", number(stack.ambient_index)},
          {"substrate_index", number(stack.substrate_index)},
          {"layers", layers}};
}

coupling::EmitterModel emitter_from_json(const json& j) {
  return parsing("emitter file", [&] {
    coupling::EmitterModel m;
    const auto& z = j.at("zpl");
    m.zpl = {z.at("center_nm").get<double>(), z.at("fwhm_nm").get<double>(),
             z.at("weight").get<double>(),
             parse_shape(z.value("shape", std::string("lorentzian")))};
    for (const auto& b : j.value("vibronic", json::array())) {
      m.vibronic.push_back({b.at("center_nm").get<double>(), b.at("fwhm_nm").get<double>(),
                            b.at("weight").get<double>(),
                            parse_shape(b.value("shape", std::string("gaussian")))});
    }
    coupling::validate(m);
    return m;
  });
}

json emitter_to_json(const coupling::EmitterModel& emitter) {
  auto band = [](const coupling::EmissionBand& b) {
    return json{{"center_nm", number(b.center_nm)},
                {"fwhm_nm", number(b.fwhm_nm)},
                {"weight", number(b.weight)},
                {"shape", shape_name(b.shape)}};
  };
  json vib = json::array();
  for (const auto& b : emitter.vibronic) vib.push_back(band(b));
  return {{"zpl", band(emitter.zpl)}, {"vibronic", vib}};
}

std::string columns_csv(const std::string& header, const std::vector<double>& a,
                        const std::vector<double>& b) {
  std::string out = header + "\n";
  for (std::size_t i = 0; i < a.size(); ++i) {
    out += format_g9(a[i]);
    out += ',';
    out += format_g9(b[i]);
    out += '\n';
  }
  return out;
}

std::string spectrum_csv(const Spectrum& spectrum) {
  return columns_csv("wavelength_nm,value", spectrum.wavelength_nm, spectrum.value);
}

Spectrum parse_spectrum_csv(const std::string& text) {
  auto cols = parse_csv(text, "wavelength_nm,value", 2);
  Spectrum s{std::move(cols[0]), std::move(cols[1])};
  validate(s);
  return s;
}

std::string scan_csv(const analysis::ScanTrace& trace) {
  return columns_csv("displacement_raw,signal", trace.displacement, trace.signal);
}

analysis::ScanTrace parse_scan_csv(const std::string& text) {
  auto cols = parse_csv(text, "displacement_raw,signal", 2);
  analysis::ScanTrace t{std::move(cols[0]), std::move(cols[1]), 0.0};
  analysis::validate(t);
  return t;
}

std::string map_csv(const analysis::ModeMap& map) {
  std::string out = "x_um,y_um,signal\n";
  for (std::size_t iy = 0; iy < map.y_um.size(); ++iy) {
    for (std::size_t ix = 0; ix < map.x_um.size(); ++ix) {
      out += format_g9(map.x_um[ix]) + ',' + format_g9(map.y_um[iy]) + ',' +
             format_g9(map.at(ix, iy)) + '\n';
    }
  }
  return out;
}

analysis::ModeMap parse_map_csv(const std::string& text) {
  const auto cols = parse_csv(text, "x_um,y_um,signal", 3);
  const auto& xs = cols[0];
  const auto& ys = cols[1];
  detail::require(!xs.empty(), kModule, "mode map CSV has no rows");
  // Row-major: x varies fastest, so the x axis is the run before y first changes.
  std::size_t nx = 1;
  while (nx < ys.size() && ys[nx] == ys[0]) ++nx;
  detail::require(xs.size() % nx == 0, kModule, "mode map CSV is not a full rectangular grid");
  const std::size_t ny = xs.size() / nx;
  analysis::ModeMap map;
  map.x_um.assign(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(nx));
  for (std::size_t iy = 0; iy < ny; ++iy) {
    map.y_um.push_back(ys[iy * nx]);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      detail::require(xs[iy * nx + ix] == map.x_um[ix] && ys[iy * nx + ix] == map.y_um[iy],
                      kModule, "mode map CSV rows are not in row-major grid order");
    }
  }
  map.signal = cols[2];
  analysis::validate(map);
  return map;
}

json to_json(const cavity::CavityReport& r) {
  return {{"finesse", number(r.finesse)},
          {"fsr_nm", number(r.fsr_nm)},
          {"fsr_thz", number(r.fsr_thz)},
          {"length_um", number(r.length_um)},
          {"order_m", r.order_m},
          {"radius_um", number(r.radius_um)},
          {"waist_um", number(r.waist_um)},
          {"fwhm_um", number(r.fwhm_um)},
          {"mode_volume_um3", number(r.mode_volume_um3)},
          {"mode_volume_lambda3", number(r.mode_volume_lambda3)},
          {"q_factor", number(r.q_factor)}};
}

json to_json(const coupling::PurcellReport& r) {
  return {{"purcell_max", number(r.purcell_max)},
          {"solid_angle_fraction", number(r.solid_angle_fraction)},
          {"spectral_overlap", number(r.spectral_overlap)},
          {"effective_enhancement", number(r.effective_enhancement)},
          {"branching_ratio_after", number(r.branching_ratio_after)}};
}

json to_json(const analysis::PeakFit& f) {
  return {{"centers", numbers(f.centers)},
          {"fwhms", numbers(f.fwhms)},
          {"amplitudes", numbers(f.amplitudes)},
          {"baseline", number(f.baseline)},
          {"residual_rms", number(f.residual_rms)},
          {"standard_errors", numbers(f.standard_errors)},
          {"iterations", f.iterations}};
}

json to_json(const analysis::LengthCalibration& c) {
  json candidates = json::array();
  for (const auto& k : c.candidates) {
    candidates.push_back({{"m", k.m},
                          {"residual_nm", number(k.residual_nm)},
                          {"scale_nm_per_unit", number(k.scale_nm_per_unit)},
                          {"offset_nm", number(k.offset_nm)}});
  }
  return {{"m", c.m},
          {"length_um", number(c.length_um)},
          {"piezo_scale_nm_per_unit", number(c.piezo_scale_nm_per_unit)},
          {"offset_nm", number(c.offset_nm)},
          {"residual_nm", number(c.residual_nm)},
          {"ambiguous", c.ambiguous},
          {"runner_up_m", c.runner_up_m},
          {"runner_up_residual_nm", number(c.runner_up_residual_nm)},
          {"candidates", candidates}};
}

json to_json(const analysis::Gaussian2DFit& f) {
  return {{"center_x_um", number(f.center_x_um)},
          {"center_y_um", number(f.center_y_um)},
          {"fwhm_x_um", number(f.fwhm_x_um)},
          {"fwhm_y_um", number(f.fwhm_y_um)},
          {"amplitude", number(f.amplitude)},
          {"baseline", number(f.baseline)},
          {"residual_rms", number(f.residual_rms)},
          {"relative_residual", number(f.relative_residual)},
          {"poor_fit", f.poor_fit},
          {"iterations", f.iterations}};
}

json to_json(const design::DesignResult& r) {
  json j{{"finesse", number(r.point.finesse)},
         {"radius_um", number(r.point.radius_um)},
         {"order_m", r.point.order},
         {"wavelength_nm", number(r.wavelength_nm)},
         {"alpha0", number(r.alpha0)},
         {"length_um", number(r.length_um)},
         {"q_factor", number(r.q_factor)},
         {"waist_um", number(r.waist_um)},
         {"mode_volume_um3", number(r.mode_volume_um3)},
         {"mode_volume_lambda3", number(r.mode_volume_lambda3)},
         {"far_field_half_angle_rad", number(r.far_field_half_angle_rad)},
         {"purcell", to_json(r.purcell)},
         {"zero_phonon_enhancement", number(r.zero_phonon_enhancement)},
         {"branching_ratio", number(r.branching_ratio)},
         {"stability_margin_um", number(r.stability_margin_um)}};
  j["target_slack"] = r.target_slack ? number(*r.target_slack) : json(nullptr);
  return j;
}

json to_json(const design::OptimizationResult& r) {
  auto points = [](const std::vector<design::TracePoint>& v) {
    json a = json::array();
    for (const auto& t : v) {
      a.push_back({{"finesse", number(t.point.finesse)},
                   {"radius_um", number(t.point.radius_um)},
                   {"order_m", t.point.order},
                   {"branching_ratio", number(t.branching_ratio)}});
    }
    return a;
  };
  return {{"feasible", r.feasible},
          {"best", to_json(r.best)},
          {"best_achieved_branching", number(r.best_achieved_branching)},
          {"evaluations", r.evaluations},
          {"pareto", points(r.pareto)},
          {"trace", points(r.trace)}};
}

CalibrationInput calibration_input_from_json(const json& j) {
  return parsing("calibration input", [&] {
    CalibrationInput in;
    in.wavelengths_nm = j.at("wavelengths_nm").get<std::vector<double>>();
    in.positions_raw = j.at("positions_raw").get<std::vector<std::vector<double>>>();
    return in;
  });
}

json calibration_input_to_json(const CalibrationInput& input) {
  json positions = json::array();
  for (const auto& list : input.positions_raw) positions.push_back(numbers(list));
  return {{"wavelengths_nm", numbers(input.wavelengths_nm)}, {"positions_raw", positions}};
}

design::DesignSpace design_space_from_json(const json& j) {
  return parsing("design space", [&] {
    design::DesignSpace s;
    const auto f = j.at("finesse").get<std::vector<double>>();
    const auto r = j.at("radius_um").get<std::vector<double>>();
    const auto m = j.at("order").get<std::vector<int>>();
    detail::require(f.size() == 2 && r.size() == 2 && m.size() == 2, kModule,
                    "design space ranges must be [min, max] pairs");
    s.finesse_min = f[0];
    s.finesse_max = f[1];
    s.radius_min_um = r[0];
    s.radius_max_um = r[1];
    s.order_min = m[0];
    s.order_max = m[1];
    s.wavelength_nm = j.at("wavelength_nm").get<double>();
    if (j.contains("emitter")) s.emitter = emitter_from_json(j.at("emitter"));
    s.grid_points = j.value("grid_points", s.grid_points);
    s.finesse_cap = j.value("finesse_cap", s.finesse_cap);
    design::validate(s);
    return s;
  });
}

}  // namespace microcavity::io
