// Configuration JSON, run manifest, and SVG plot tests.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "oce/config_json.hpp"
#include "oce/errors.hpp"
#include "oce/svg_plot.hpp"

using namespace oce;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  fs::path p = fs::temp_directory_path() / ("oce_cfg_test_" + std::to_string(++counter));
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

AppConfig mutated_config() {
  AppConfig cfg;
  cfg.sim.n_lines = 257;
  cfg.sim.depth_um = 1200.0;
  cfg.sim.lambda0_um = 1.31;
  cfg.sim.noise_power_w = 0.0;
  cfg.sim.n_alines = 16;
  cfg.sim.seed = 424242;
  cfg.dp.a_max_um = 42.0;
  cfg.dp.l_max_um = 25.0;
  cfg.dp.data_term = DataTerm::AbsNcc;
  cfg.dp.rounding = PixelRounding::Floor;
  cfg.dp.positive_deeper = false;
  cfg.dp.beta_per_um = 3e-4;
  cfg.baseline.cc_search_axial = 17;
  cfg.baseline.cc_subpixel = BaselineConfig::Subpixel::CubicAscent;
  cfg.baseline.vp_gradient_window = 5;
  cfg.sweep.amplitudes = {1e-4, 2e-3};
  cfg.sweep.methods = {Method::VP, Method::DP};
  cfg.sweep.strain_window_um = 36.0;
  cfg.sweep.auto_cc_range = false;
  cfg.deform.kind = DeformSpec::Kind::Points;
  cfg.deform.points = {{0.0, 0.0}, {400.0, 1.5}, {900.0, 2.0}};
  cfg.deform.lateral_um = 24.0;
  return cfg;
}

void check_equal(const AppConfig& a, const AppConfig& b) {
  CHECK(a.sim.n_lines == b.sim.n_lines);
  CHECK(a.sim.depth_um == b.sim.depth_um);
  CHECK(a.sim.lambda0_um == b.sim.lambda0_um);
  CHECK(a.sim.fwhm_um == b.sim.fwhm_um);
  CHECK(a.sim.source_power_w == b.sim.source_power_w);
  CHECK(a.sim.noise_power_w == b.sim.noise_power_w);
  CHECK(a.sim.attenuation_per_um == b.sim.attenuation_per_um);
  CHECK(a.sim.scatterer_density == b.sim.scatterer_density);
  CHECK(a.sim.spectrometer_sigma == b.sim.spectrometer_sigma);
  CHECK(a.sim.lateral_pitch_um == b.sim.lateral_pitch_um);
  CHECK(a.sim.n_alines == b.sim.n_alines);
  CHECK(a.sim.seed == b.sim.seed);
  CHECK(a.dp.a_max_um == b.dp.a_max_um);
  CHECK(a.dp.l_max_um == b.dp.l_max_um);
  CHECK(a.dp.lateral_step_um == b.dp.lateral_step_um);
  CHECK(a.dp.lateral_halfwidth == b.dp.lateral_halfwidth);
  CHECK(a.dp.w1 == b.dp.w1);
  CHECK(a.dp.w2 == b.dp.w2);
  CHECK(a.dp.beta_per_um == b.dp.beta_per_um);
  CHECK(a.dp.gamma_per_um == b.dp.gamma_per_um);
  CHECK(a.dp.data_term == b.dp.data_term);
  CHECK(a.dp.rounding == b.dp.rounding);
  CHECK(a.dp.positive_deeper == b.dp.positive_deeper);
  CHECK(a.baseline.kasai_axial == b.baseline.kasai_axial);
  CHECK(a.baseline.kasai_lateral == b.baseline.kasai_lateral);
  CHECK(a.baseline.cc_search_axial == b.baseline.cc_search_axial);
  CHECK(a.baseline.cc_search_lateral == b.baseline.cc_search_lateral);
  CHECK(a.baseline.cc_w1 == b.baseline.cc_w1);
  CHECK(a.baseline.cc_w2 == b.baseline.cc_w2);
  CHECK(a.baseline.cc_subpixel == b.baseline.cc_subpixel);
  CHECK(a.baseline.vp_lateral_halfwidth == b.baseline.vp_lateral_halfwidth);
  CHECK(a.baseline.vp_gradient_window == b.baseline.vp_gradient_window);
  CHECK(a.baseline.positive_deeper == b.baseline.positive_deeper);
  CHECK(a.sweep.amplitudes == b.sweep.amplitudes);
  CHECK(a.sweep.methods == b.sweep.methods);
  CHECK(a.sweep.strain_window_um == b.sweep.strain_window_um);
  CHECK(a.sweep.snr_band_lo_um == b.sweep.snr_band_lo_um);
  CHECK(a.sweep.snr_band_hi_um == b.sweep.snr_band_hi_um);
  CHECK(a.sweep.auto_cc_range == b.sweep.auto_cc_range);
  CHECK(a.deform.kind == b.deform.kind);
  CHECK(a.deform.amplitude == b.deform.amplitude);
  CHECK(a.deform.constant_um == b.deform.constant_um);
  CHECK(a.deform.lateral_um == b.deform.lateral_um);
  CHECK(a.deform.points == b.deform.points);
}

} // namespace

TEST_CASE("configuration snapshots round-trip through JSON") {
  check_equal(load_config_text(config_to_json_text(AppConfig{})), AppConfig{});
  const AppConfig cfg = mutated_config();
  check_equal(load_config_text(config_to_json_text(cfg)), cfg);
  // The snapshot itself is deterministic.
  CHECK(config_to_json_text(cfg) == config_to_json_text(mutated_config()));
}

TEST_CASE("partial configs keep defaults for unspecified fields") {
  const AppConfig cfg = load_config_text(R"({"sim": {"n_lines": 129}})");
  CHECK(cfg.sim.n_lines == 129);
  CHECK(cfg.sim.depth_um == 2300.0);
  CHECK(cfg.dp.a_max_um == 150.0);
  CHECK(cfg.sweep.methods.size() == 5);
  const AppConfig empty = load_config_text("{}");
  CHECK(empty.sim.n_lines == 1025);
}

TEST_CASE("unknown keys are rejected by their full path") {
  CHECK_THROWS_WITH_AS(load_config_text(R"({"sim": {"n_linez": 5}})"),
                       doctest::Contains("sim.n_linez"), ConfigError);
  CHECK_THROWS_WITH_AS(load_config_text(R"({"simulator": {}})"), doctest::Contains("simulator"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(load_config_text(R"({"dp": {"betta": 1.0}})"), doctest::Contains("dp.betta"),
                       ConfigError);
}

TEST_CASE("malformed values are rejected with the field name") {
  CHECK_THROWS_AS(load_config_text("not json"), ConfigError);
  CHECK_THROWS_WITH_AS(load_config_text(R"({"sim": {"n_lines": "many"}})"),
                       doctest::Contains("n_lines"), ConfigError);
  CHECK_THROWS_WITH_AS(load_config_text(R"({"dp": {"data_term": "fancy"}})"),
                       doctest::Contains("data_term"), ConfigError);
  CHECK_THROWS_WITH_AS(load_config_text(R"({"sweep": {"methods": ["dp", "xx"]}})"),
                       doctest::Contains("method"), ConfigError);
  CHECK_THROWS_WITH_AS(load_config_text(R"({"deform": {"kind": "wavy"}})"),
                       doctest::Contains("kind"), ConfigError);
  CHECK_THROWS_AS(load_config_text(R"({"sim": {"seed": -4}})"), ConfigError);
  CHECK_THROWS_AS(load_config_text(R"({"sweep": {"snr_band_um": [700.0]}})"), ConfigError);
}

TEST_CASE("enumerations parse from their documented spellings") {
  const AppConfig a = load_config_text(R"({"dp": {"data_term": "abs_ncc", "rounding": "floor"}})");
  CHECK(a.dp.data_term == DataTerm::AbsNcc);
  CHECK(a.dp.rounding == PixelRounding::Floor);
  const AppConfig b = load_config_text(R"({"baseline": {"cc_subpixel": "cubic_ascent"}})");
  CHECK(b.baseline.cc_subpixel == BaselineConfig::Subpixel::CubicAscent);
  const AppConfig c = load_config_text(R"({"sweep": {"snr_band_um": [500.0, 900.0]}})");
  CHECK(c.sweep.snr_band_lo_um == 500.0);
  CHECK(c.sweep.snr_band_hi_um == 900.0);
}

TEST_CASE("deformation specs materialize into profiles") {
  DeformSpec layered;
  layered.kind = DeformSpec::Kind::Layered;
  layered.amplitude = 2e-3;
  const DeformationProfile lp = layered.profile(900.0);
  CHECK(lp.displacement_at(900.0) == doctest::Approx(4.0 / 3.0 * 2e-3 * 900.0).epsilon(1e-12));

  DeformSpec constant;
  constant.kind = DeformSpec::Kind::Constant;
  constant.constant_um = 4.5;
  constant.lateral_um = -12.0;
  const DeformationProfile cp = constant.profile(900.0);
  CHECK(cp.displacement_at(123.0) == doctest::Approx(4.5));
  CHECK(cp.lateral_um == -12.0);

  DeformSpec pts;
  pts.kind = DeformSpec::Kind::Points;
  pts.points = {{0.0, 0.0}, {100.0, 1.0}};
  CHECK(pts.profile(900.0).displacement_at(50.0) == doctest::Approx(0.5));

  DeformSpec none;
  CHECK_THROWS_AS(none.profile(900.0), ConfigError);
}

TEST_CASE("run manifests round-trip") {
  const fs::path dir = temp_dir();
  RunManifest m;
  m.version = "0.1.0";
  m.subcommand = "sweep";
  m.seed = 20260815;
  m.jobs = 3;
  m.format = "bin";
  m.method = "ccvp";
  m.config = mutated_config();
  m.inputs = {"/abs/ref.ocb", "/abs/def.ocb"};
  m.outputs = {"report.csv", "report.json"};
  m.wall_s = 1.5;
  write_manifest((dir / "manifest.json").string(), m);
  const RunManifest back = read_manifest((dir / "manifest.json").string());
  CHECK(back.tool == "oce");
  CHECK(back.version == m.version);
  CHECK(back.subcommand == m.subcommand);
  CHECK(back.seed == m.seed);
  CHECK(back.jobs == m.jobs);
  CHECK(back.format == m.format);
  CHECK(back.method == m.method);
  CHECK(back.inputs == m.inputs);
  CHECK(back.outputs == m.outputs);
  CHECK(back.wall_s == m.wall_s);
  check_equal(back.config, m.config);

  std::ofstream(dir / "broken.json") << "{\"tool\": \"oce\"";
  CHECK_THROWS_AS(read_manifest((dir / "broken.json").string()), IoError);
  std::ofstream(dir / "partial.json") << "{\"tool\": \"oce\"}";
  CHECK_THROWS_AS(read_manifest((dir / "partial.json").string()), IoError);
}

TEST_CASE("SVG plots are deterministic and skip unusable points") {
  const fs::path dir = temp_dir();
  PlotSpec spec;
  spec.title = "errors";
  spec.x_label = "amplitude";
  spec.y_label = "nmae";
  spec.log_x = true;
  spec.log_y = true;
  PlotSeries a;
  a.label = "dp";
  a.x = {1e-5, 1e-4, 1e-3, 1e-2};
  a.y = {0.5, 0.2, 0.0, 0.01}; // zero is unusable on a log axis
  PlotSeries b;
  b.label = "kasai & friends";
  b.x = {1e-5, 1e-4, 1e-3, 1e-2};
  b.y = {0.9, 0.8, 0.7, 0.6};
  spec.series = {a, b};
  write_svg_plot((dir / "p.svg").string(), spec);
  const std::string text = slurp(dir / "p.svg");
  CHECK(text.find("<svg") != std::string::npos);
  CHECK(text.find("polyline") != std::string::npos);
  CHECK(text.find("errors") != std::string::npos);
  CHECK(text.find("dp") != std::string::npos);
  CHECK(text.find("kasai &amp; friends") != std::string::npos); // XML escaping
  write_svg_plot((dir / "p2.svg").string(), spec);
  CHECK(slurp(dir / "p2.svg") == text);

  // Broken polyline: the zero y point splits the first series into segments.
  PlotSpec linear = spec;
  linear.log_x = false;
  linear.log_y = false;
  linear.series[0].y[2] = std::numeric_limits<double>::quiet_NaN();
  write_svg_plot((dir / "p3.svg").string(), linear);
  CHECK(slurp(dir / "p3.svg").find("polyline") != std::string::npos);
}
