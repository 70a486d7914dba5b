// Runs the command-line tool and compares its artifacts with direct library
// calls serialized the same way.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <doctest.h>

#include "microcavity/errors.hpp"
#include "microcavity/io.hpp"

using namespace microcavity;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "microcavity_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args) {
  const auto out = workdir() / "stdout.txt";
  const auto err = workdir() / "stderr.txt";
  const std::string cmd = std::string("cd '") + workdir().string() + "' && '" + MICROCAVITY_CLI +
                          "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = io::read_text(out);
  r.err = io::read_text(err);
  return r;
}

std::string file(const std::string& name) { return io::read_text(workdir() / name); }

io::json result_of(const Run& r) { return io::json::parse(r.out).at("result"); }

const std::string kData = MICROCAVITY_TEST_DATA;

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("cavity-report reproduces the library report") {
  const auto r = run("cavity-report --R1 0.97 --R2 0.999 --m 7 --lambda 785 --radius-mm 1.4");
  REQUIRE(r.status == 0);
  const auto result = result_of(r);
  CHECK(result.at("finesse").get<double>() == doctest::Approx(200.0).epsilon(0.02));
  CHECK(result.at("length_um").get<double>() == doctest::Approx(2.75).epsilon(0.01));
  CHECK(result.at("fsr_nm").get<double>() == doctest::Approx(110.0).epsilon(0.05));
  const auto lib = io::to_json(cavity::make_cavity_report(0.97, 0.999, 7, 785.0, 1400.0));
  CHECK(io::dump(result) == io::dump(lib));
  const auto params = io::json::parse(r.out).at("params");
  CHECK(params.at("radius_um").get<double>() == 1400.0);
}

TEST_CASE("branching") {
  const auto r = run("branching --alpha0 0.30 --enhancement 1");
  REQUIRE(r.status == 0);
  CHECK(result_of(r).at("branching_ratio").get<double>() == 0.30);
  const auto inv = run("branching --alpha0 0.30 --target 0.98");
  CHECK(result_of(inv).at("required_enhancement").get<double>() ==
        doctest::Approx(114.333333).epsilon(1e-9));
}

TEST_CASE("calibrate-length on the bundled fixture") {
  const auto input = io::calibration_input_from_json(
      io::read_json(kData + "/calibration_three_wavelengths.json"));
  // The fixture is the synthesizer output for m = 7 with 0.5 % noise, seed 1.
  analysis::CalibrationSynthesis spec;
  spec.wavelengths_nm = {785.0, 775.0, 763.0};
  spec.noise_fraction = 0.005;
  spec.seed = 1;
  const auto expected = analysis::synthesize_calibration_positions(spec);
  REQUIRE(input.positions_raw.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    for (std::size_t k = 0; k < expected[i].size(); ++k) {
      CHECK(io::format_g9(input.positions_raw[i][k]) == io::format_g9(expected[i][k]));
    }
  }
  const auto r = run("calibrate-length --input '" + kData + "/calibration_three_wavelengths.json'");
  REQUIRE(r.status == 0);
  CHECK(result_of(r).at("m").get<int>() == 7);
  CHECK_FALSE(result_of(r).at("ambiguous").get<bool>());
}

TEST_CASE("CSV commands are thin adapters") {
  SUBCASE("dbr-spectrum") {
    REQUIRE(run("dbr-spectrum --bilayers 4 --center-nm 770 --angle-rad 0.2 --polarization p "
                "--out r.csv").status == 0);
    const auto s = optics::quarter_wave_stack(material::kTa2O5, material::kSiO2, 4, 770.0, true);
    const auto lib = optics::reflectivity_spectrum(s, linear_grid(600.0, 950.0, 0.5), 0.2,
                                                   optics::Polarization::p);
    CHECK(file("r.csv") == io::spectrum_csv(lib));
  }
  SUBCASE("synth-scan") {
    REQUIRE(run("synth-scan --mode 0:0:1 --mode 0:1:0.35 --noise 0.02 --seed 11 --out s.csv")
                .status == 0);
    analysis::ScanSynthesis spec;
    spec.geometry = cavity::CavityGeometry::on_resonance(7, 785.0, 1400.0);
    spec.modes = {{{0, 0}, 1.0}, {{0, 1}, 0.35}};
    spec.scan_from_nm = 2747.5 - 10.0;
    spec.scan_to_nm = 2747.5 + 15.0;
    spec.noise_sigma = 0.02;
    spec.seed = 11;
    CHECK(file("s.csv") == io::scan_csv(analysis::synthesize_scan_trace(spec)));
  }
  SUBCASE("filter-spectrum") {
    REQUIRE(run("filter-spectrum --mode 0:1 --mode 1:0.5 --radius-mm 1.4 --background 0.001 "
                "--out f.csv").status == 0);
    const auto s = coupling::emission_spectrum(coupling::default_dbt_emitter(),
                                               linear_grid(760.0, 900.0, 0.02));
    coupling::FilterOptions o;
    o.finesse = 200.0;
    o.resonance_nm = 785.0;
    o.length_um = cavity::resonance_length_um(7, 785.0);
    o.radius_um = 1400.0;
    o.modes = {{0, 1.0}, {1, 0.5}};
    o.background = 0.001;
    CHECK(file("f.csv") == io::spectrum_csv(coupling::filtered_spectrum(s, o)));
  }
  SUBCASE("bfp") {
    REQUIRE(run("bfp --cavity-on --angles 21 --out b.csv").status == 0);
    const auto s = optics::quarter_wave_stack(material::kTa2O5, material::kSiO2, 4, 770.0, true);
    const auto p = coupling::bfp_radial_profile(
        coupling::default_dbt_emitter(), s, true,
        cavity::CavityGeometry::on_resonance(7, 785.0, 1400.0), linspace(0.0, 1.0, 21));
    CHECK(file("b.csv") == io::columns_csv("angle_rad,intensity", p.angle_rad, p.intensity));
  }
  SUBCASE("synth-map then fit-map") {
    REQUIRE(run("synth-map --w-um 3.14 --bead-um 0.1 --out m.csv").status == 0);
    analysis::MapSynthesis spec;
    spec.w_um = 3.14;
    spec.bead_diameter_um = 0.1;
    const auto map = analysis::synthesize_mode_map(spec);
    CHECK(file("m.csv") == io::map_csv(map));
    const auto r = run("fit-map --map m.csv");
    REQUIRE(r.status == 0);
    CHECK(io::dump(result_of(r)) ==
          io::dump(io::to_json(analysis::fit_gaussian_2d(io::parse_map_csv(io::map_csv(map))))));
  }
}

TEST_CASE("JSON commands are thin adapters") {
  const auto r = run("optimize --objective min-finesse --target 0.98 --grid-points 8");
  REQUIRE(r.status == 0);
  design::DesignSpace space;
  space.grid_points = 8;
  const auto lib = design::optimize_design(space, design::Objective::min_finesse_for_target, 0.98);
  CHECK(io::dump(result_of(r)) == io::dump(io::to_json(lib)));

  const auto g = run("group-delay --bilayers 13 --center-nm 780");
  REQUIRE(g.status == 0);
  const auto s = optics::quarter_wave_stack(material::kTa2O5, material::kSiO2, 13, 780.0, true);
  CHECK(result_of(g).at("length_um").get<double>() ==
        io::number(optics::group_delay_length(s, 780.0).length_um).get<double>());
}

TEST_CASE("re-runs are byte-identical") {
  const std::string args = "synth-scan --noise 0.05 --seed 3 --out a.csv";
  const auto first = run(args);
  const std::string a = file("a.csv");
  const auto second = run(args);
  CHECK(first.out == second.out);
  CHECK(a == file("a.csv"));
  const auto o1 = run("optimize --grid-points 6");
  const auto o2 = run("optimize --grid-points 6");
  CHECK(o1.out == o2.out);
  CHECK_FALSE(fs::exists(workdir() / "a.csv.tmp"));
}

TEST_CASE("error handling and exit codes") {
  const auto unknown = run("frobnicate");
  CHECK(unknown.status == 2);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(unknown.err.find("unknown command 'frobnicate'") != std::string::npos);

  const auto invalid = run("branching --alpha0 1.5 --enhancement 2");
  CHECK(invalid.status == 2);
  const auto line = invalid.err.substr(invalid.err.rfind('{'));
  const auto err = io::json::parse(line);
  CHECK(err.at("error") == "validation");
  CHECK(err.at("module") == "coupling");

  const auto unstable = run("cavity-report --radius-um 2");
  CHECK(unstable.status == 2);
  CHECK(io::json::parse(unstable.err).at("module") == "cavity");

  const auto missing = run("fit-scan --trace nope.csv");
  CHECK(missing.status == 3);
  CHECK(io::json::parse(missing.err).at("error") == "io");

  const auto unwritable = run("airy --out no/such/dir/a.csv");
  CHECK(unwritable.status == 3);

  io::write_text_atomic(workdir() / "bad.csv", "wrong,header\n1,2\n");
  CHECK(run("fit-scan --trace bad.csv").status == 2);
  CHECK(run("cavity-report --radius-um 100 --radius-mm 1").status == 2);
}

TEST_CASE("every flag documents its unit") {
  for (const std::string cmd :
       {"dbr-spectrum", "stopband", "group-delay", "cavity-report", "airy", "mode-profile",
        "fit-scan", "calibrate-length", "fit-map", "synth-scan", "synth-map", "filter-spectrum",
        "purcell", "branching", "bfp", "optimize"}) {
    const auto r = run(cmd + " --help");
    REQUIRE(r.status == 0);
    // Join wrapped descriptions onto their option line, then inspect each option.
    std::istringstream in(r.out);
    std::string line;
    std::vector<std::string> options;
    while (std::getline(in, line)) {
      if (line.rfind("  --", 0) == 0) {
        options.push_back(line);
      } else if (!options.empty() && line.rfind("    ", 0) == 0) {
        options.back() += line;
      }
    }
    CAPTURE(cmd);
    CHECK(options.size() >= 2);
    for (const auto& opt : options) {
      CAPTURE(opt);
      CHECK(opt.find('(') != std::string::npos);
    }
  }
}

}  // TEST_SUITE
