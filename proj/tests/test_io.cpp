#include <filesystem>

#include <doctest.h>

#include "microcavity/errors.hpp"
#include "microcavity/io.hpp"

using namespace microcavity;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "microcavity_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("number formatting") {
  CHECK(io::format_g9(0.1) == "0.1");
  CHECK(io::format_g9(199.719609231) == "199.719609");
  CHECK(io::number(1.0 / 3.0).dump() == "0.333333333");
  CHECK(io::number(std::nan("")).is_null());
}

TEST_CASE("stack file round trip") {
  const auto s = optics::quarter_wave_stack(2.1, 1.46, 3, 780.0, true);
  const auto back = io::stack_from_json(io::json::parse(io::stack_to_json(s).dump()));
  REQUIRE(back.layers.size() == 6);
  CHECK(back.layers[0].thickness_nm == doctest::Approx(s.layers[0].thickness_nm).epsilon(1e-8));
  CHECK_THROWS_AS(io::stack_from_json(io::json{{"layers", 3}}), ValidationError);
  CHECK_THROWS_AS(io::stack_from_json(io::json::parse(
                      R"({"ambient_index":1,"substrate_index":1.5,"layers":[{"index":0.5,"thickness_nm":10}]})")),
                  ValidationError);
}

TEST_CASE("emitter file round trip") {
  const auto m = coupling::default_dbt_emitter();
  const auto back = io::emitter_from_json(io::emitter_to_json(m));
  CHECK(back.zpl.center_nm == m.zpl.center_nm);
  CHECK(back.zpl.shape == coupling::LineShape::lorentzian);
  REQUIRE(back.vibronic.size() == m.vibronic.size());
  CHECK(back.vibronic[2].weight == m.vibronic[2].weight);
  auto j = io::emitter_to_json(m);
  j["vibronic"][0]["shape"] = "triangle";
  CHECK_THROWS_AS(io::emitter_from_json(j), ValidationError);
}

TEST_CASE("CSV formats") {
  Spectrum s{{700.0, 700.5, 701.0}, {0.1, 0.25, 1.0 / 3.0}};
  const auto text = io::spectrum_csv(s);
  CHECK(text == "wavelength_nm,value\n700,0.1\n700.5,0.25\n701,0.333333333\n");
  const auto back = io::parse_spectrum_csv(text);
  CHECK(back.wavelength_nm == s.wavelength_nm);
  CHECK_THROWS_AS(io::parse_spectrum_csv("lambda,value\n1,2\n"), ValidationError);
  CHECK_THROWS_AS(io::parse_spectrum_csv("wavelength_nm,value\n1,x\n"), ValidationError);
  CHECK_THROWS_AS(io::parse_spectrum_csv("wavelength_nm,value\n2,1\n1,1\n"), ValidationError);
  CHECK(io::parse_spectrum_csv("wavelength_nm,value\r\n1,2\r\n").value[0] == 2.0);

  analysis::ModeMap map{linspace(-1, 1, 9), linspace(-2, 2, 9), {}};
  for (std::size_t i = 0; i < 81; ++i) map.signal.push_back(static_cast<double>(i));
  const auto parsed = io::parse_map_csv(io::map_csv(map));
  CHECK(parsed.x_um == map.x_um);
  CHECK(parsed.y_um == map.y_um);
  CHECK(parsed.signal == map.signal);
  CHECK_THROWS_AS(io::parse_map_csv("x_um,y_um,signal\n0,0,1\n1,0,1\n0,1,1\n"), ValidationError);
}

TEST_CASE("atomic writes") {
  const auto path = scratch("atomic.txt");
  io::write_text_atomic(path, "first\n");
  io::write_text_atomic(path, "second\n");
  CHECK(io::read_text(path) == "second\n");
  auto tmp = path;
  tmp += ".tmp";
  CHECK_FALSE(std::filesystem::exists(tmp));
  CHECK_THROWS_AS(io::write_text_atomic(scratch("missing") / "dir" / "x.txt", "x"), IoError);
  CHECK_THROWS_AS(io::read_text(scratch("does_not_exist.json")), IoError);
}

TEST_CASE("design space file") {
  const auto s = io::design_space_from_json(io::json::parse(
      R"({"finesse":[100,1e5],"radius_um":[20,200],"order":[3,9],"wavelength_nm":780})"));
  CHECK(s.radius_max_um == 200.0);
  CHECK(s.order_max == 9);
  CHECK_THROWS_AS(io::design_space_from_json(io::json::parse(
                      R"({"finesse":[100],"radius_um":[20,200],"order":[3,9],"wavelength_nm":780})")),
                  ValidationError);
}

}  // TEST_SUITE
