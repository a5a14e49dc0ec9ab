#include "oce/config_json.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "oce/errors.hpp"
#include "oce/version.hpp"

namespace oce {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw ConfigError("config: " + msg); }

double want_number(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path + ": expected a number");
  return v.get<double>();
}

int want_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad(path + ": expected an integer");
  return v.get<int>();
}

std::uint64_t want_u64(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<long long>() < 0))
    bad(path + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

bool want_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) bad(path + ": expected a boolean");
  return v.get<bool>();
}

std::string want_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path + ": expected a string");
  return v.get<std::string>();
}

void parse_sim(const json& obj, SimConfig& sim) {
  if (!obj.is_object()) bad("sim: expected an object");
  for (const auto& [key, value] : obj.items()) {
    const std::string path = "sim." + key;
    if (key == "n_lines")
      sim.n_lines = want_int(value, path);
    else if (key == "depth_um")
      sim.depth_um = want_number(value, path);
    else if (key == "lambda0_um")
      sim.lambda0_um = want_number(value, path);
    else if (key == "fwhm_um")
      sim.fwhm_um = want_number(value, path);
    else if (key == "source_power_w")
      sim.source_power_w = want_number(value, path);
    else if (key == "noise_power_w")
      sim.noise_power_w = want_number(value, path);
    else if (key == "attenuation_per_um")
      sim.attenuation_per_um = want_number(value, path);
    else if (key == "scatterer_density")
      sim.scatterer_density = want_number(value, path);
    else if (key == "spectrometer_sigma")
      sim.spectrometer_sigma = want_number(value, path);
    else if (key == "lateral_pitch_um")
      sim.lateral_pitch_um = want_number(value, path);
    else if (key == "n_alines")
      sim.n_alines = want_int(value, path);
    else if (key == "seed")
      sim.seed = want_u64(value, path);
    else
      bad("unknown key '" + path + "'");
  }
}

void parse_dp(const json& obj, DPConfig& dp) {
  if (!obj.is_object()) bad("dp: expected an object");
  for (const auto& [key, value] : obj.items()) {
    const std::string path = "dp." + key;
    if (key == "a_max_um")
      dp.a_max_um = want_number(value, path);
    else if (key == "l_max_um")
      dp.l_max_um = want_number(value, path);
    else if (key == "lateral_step_um")
      dp.lateral_step_um = want_number(value, path);
    else if (key == "lateral_halfwidth")
      dp.lateral_halfwidth = want_int(value, path);
    else if (key == "w1")
      dp.w1 = want_int(value, path);
    else if (key == "w2")
      dp.w2 = want_int(value, path);
    else if (key == "beta_per_um")
      dp.beta_per_um = want_number(value, path);
    else if (key == "gamma_per_um")
      dp.gamma_per_um = want_number(value, path);
    else if (key == "data_term") {
      const std::string s = want_string(value, path);
      if (s == "one_minus_ncc")
        dp.data_term = DataTerm::OneMinusNcc;
      else if (s == "abs_ncc")
        dp.data_term = DataTerm::AbsNcc;
      else
        bad(path + ": expected 'one_minus_ncc' or 'abs_ncc'");
    } else if (key == "rounding") {
      const std::string s = want_string(value, path);
      if (s == "nearest")
        dp.rounding = PixelRounding::Nearest;
      else if (s == "floor")
        dp.rounding = PixelRounding::Floor;
      else
        bad(path + ": expected 'nearest' or 'floor'");
    } else if (key == "positive_deeper")
      dp.positive_deeper = want_bool(value, path);
    else
      bad("unknown key '" + path + "'");
  }
}

void parse_baseline(const json& obj, BaselineConfig& bc) {
  if (!obj.is_object()) bad("baseline: expected an object");
  for (const auto& [key, value] : obj.items()) {
    const std::string path = "baseline." + key;
    if (key == "kasai_axial")
      bc.kasai_axial = want_int(value, path);
    else if (key == "kasai_lateral")
      bc.kasai_lateral = want_int(value, path);
    else if (key == "cc_search_axial")
      bc.cc_search_axial = want_int(value, path);
    else if (key == "cc_search_lateral")
      bc.cc_search_lateral = want_int(value, path);
    else if (key == "cc_w1")
      bc.cc_w1 = want_int(value, path);
    else if (key == "cc_w2")
      bc.cc_w2 = want_int(value, path);
    else if (key == "cc_subpixel") {
      const std::string s = want_string(value, path);
      if (s == "paraboloid")
        bc.cc_subpixel = BaselineConfig::Subpixel::Paraboloid;
      else if (s == "cubic_ascent")
        bc.cc_subpixel = BaselineConfig::Subpixel::CubicAscent;
      else
        bad(path + ": expected 'paraboloid' or 'cubic_ascent'");
    } else if (key == "vp_lateral_halfwidth")
      bc.vp_lateral_halfwidth = want_int(value, path);
    else if (key == "vp_gradient_window")
      bc.vp_gradient_window = want_int(value, path);
    else if (key == "positive_deeper")
      bc.positive_deeper = want_bool(value, path);
    else
      bad("unknown key '" + path + "'");
  }
}

void parse_sweep(const json& obj, SweepConfig& sc) {
  if (!obj.is_object()) bad("sweep: expected an object");
  for (const auto& [key, value] : obj.items()) {
    const std::string path = "sweep." + key;
    if (key == "amplitudes") {
      if (!value.is_array()) bad(path + ": expected an array of numbers");
      sc.amplitudes.clear();
      for (const auto& a : value) sc.amplitudes.push_back(want_number(a, path + "[]"));
    } else if (key == "methods") {
      if (!value.is_array()) bad(path + ": expected an array of method names");
      sc.methods.clear();
      for (const auto& mjson : value) sc.methods.push_back(parse_method(want_string(mjson, path + "[]")));
    } else if (key == "strain_window_um")
      sc.strain_window_um = want_number(value, path);
    else if (key == "snr_band_um") {
      if (!value.is_array() || value.size() != 2)
        bad(path + ": expected [low_um, high_um]");
      sc.snr_band_lo_um = want_number(value[0], path + "[0]");
      sc.snr_band_hi_um = want_number(value[1], path + "[1]");
    } else if (key == "auto_cc_range")
      sc.auto_cc_range = want_bool(value, path);
    else
      bad("unknown key '" + path + "'");
  }
}

void parse_deform(const json& obj, DeformSpec& d) {
  if (!obj.is_object()) bad("deform: expected an object");
  for (const auto& [key, value] : obj.items()) {
    const std::string path = "deform." + key;
    if (key == "kind") {
      const std::string s = want_string(value, path);
      if (s == "none")
        d.kind = DeformSpec::Kind::None;
      else if (s == "layered")
        d.kind = DeformSpec::Kind::Layered;
      else if (s == "constant")
        d.kind = DeformSpec::Kind::Constant;
      else if (s == "points")
        d.kind = DeformSpec::Kind::Points;
      else
        bad(path + ": expected 'none', 'layered', 'constant' or 'points'");
    } else if (key == "amplitude")
      d.amplitude = want_number(value, path);
    else if (key == "constant_um")
      d.constant_um = want_number(value, path);
    else if (key == "lateral_um")
      d.lateral_um = want_number(value, path);
    else if (key == "points") {
      if (!value.is_array()) bad(path + ": expected an array of [z_um, u_um] pairs");
      d.points.clear();
      for (const auto& pt : value) {
        if (!pt.is_array() || pt.size() != 2) bad(path + "[]: expected [z_um, u_um]");
        d.points.emplace_back(want_number(pt[0], path + "[][0]"),
                              want_number(pt[1], path + "[][1]"));
      }
    } else
      bad("unknown key '" + path + "'");
  }
}

json sim_to_json(const SimConfig& sim) {
  return json{{"n_lines", sim.n_lines},
              {"depth_um", sim.depth_um},
              {"lambda0_um", sim.lambda0_um},
              {"fwhm_um", sim.fwhm_um},
              {"source_power_w", sim.source_power_w},
              {"noise_power_w", sim.noise_power_w},
              {"attenuation_per_um", sim.attenuation_per_um},
              {"scatterer_density", sim.scatterer_density},
              {"spectrometer_sigma", sim.spectrometer_sigma},
              {"lateral_pitch_um", sim.lateral_pitch_um},
              {"n_alines", sim.n_alines},
              {"seed", sim.seed}};
}

json dp_to_json(const DPConfig& dp) {
  return json{{"a_max_um", dp.a_max_um},
              {"l_max_um", dp.l_max_um},
              {"lateral_step_um", dp.lateral_step_um},
              {"lateral_halfwidth", dp.lateral_halfwidth},
              {"w1", dp.w1},
              {"w2", dp.w2},
              {"beta_per_um", dp.beta_per_um},
              {"gamma_per_um", dp.gamma_per_um},
              {"data_term", dp.data_term == DataTerm::OneMinusNcc ? "one_minus_ncc" : "abs_ncc"},
              {"rounding", dp.rounding == PixelRounding::Nearest ? "nearest" : "floor"},
              {"positive_deeper", dp.positive_deeper}};
}

json baseline_to_json(const BaselineConfig& bc) {
  return json{{"kasai_axial", bc.kasai_axial},
              {"kasai_lateral", bc.kasai_lateral},
              {"cc_search_axial", bc.cc_search_axial},
              {"cc_search_lateral", bc.cc_search_lateral},
              {"cc_w1", bc.cc_w1},
              {"cc_w2", bc.cc_w2},
              {"cc_subpixel", bc.cc_subpixel == BaselineConfig::Subpixel::Paraboloid
                                  ? "paraboloid"
                                  : "cubic_ascent"},
              {"vp_lateral_halfwidth", bc.vp_lateral_halfwidth},
              {"vp_gradient_window", bc.vp_gradient_window},
              {"positive_deeper", bc.positive_deeper}};
}

json sweep_to_json(const SweepConfig& sc) {
  json methods = json::array();
  for (Method m : sc.methods) methods.push_back(method_name(m));
  return json{{"amplitudes", sc.amplitudes},
              {"methods", methods},
              {"strain_window_um", sc.strain_window_um},
              {"snr_band_um", json::array({sc.snr_band_lo_um, sc.snr_band_hi_um})},
              {"auto_cc_range", sc.auto_cc_range}};
}

json deform_to_json(const DeformSpec& d) {
  const char* kind = "none";
  if (d.kind == DeformSpec::Kind::Layered) kind = "layered";
  if (d.kind == DeformSpec::Kind::Constant) kind = "constant";
  if (d.kind == DeformSpec::Kind::Points) kind = "points";
  json points = json::array();
  for (const auto& [z, u] : d.points) points.push_back(json::array({z, u}));
  return json{{"kind", kind},
              {"amplitude", d.amplitude},
              {"constant_um", d.constant_um},
              {"lateral_um", d.lateral_um},
              {"points", points}};
}

json config_to_json(const AppConfig& cfg) {
  return json{{"sim", sim_to_json(cfg.sim)},
              {"dp", dp_to_json(cfg.dp)},
              {"baseline", baseline_to_json(cfg.baseline)},
              {"sweep", sweep_to_json(cfg.sweep)},
              {"deform", deform_to_json(cfg.deform)}};
}

AppConfig config_from_json(const json& doc) {
  if (!doc.is_object()) bad("top level: expected an object");
  AppConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (key == "sim")
      parse_sim(value, cfg.sim);
    else if (key == "dp")
      parse_dp(value, cfg.dp);
    else if (key == "baseline")
      parse_baseline(value, cfg.baseline);
    else if (key == "sweep")
      parse_sweep(value, cfg.sweep);
    else if (key == "deform")
      parse_deform(value, cfg.deform);
    else
      bad("unknown key '" + key + "'");
  }
  return cfg;
}

} // namespace

DeformationProfile DeformSpec::profile(double span_um) const {
  switch (kind) {
    case Kind::None:
      throw ConfigError("deform.kind: no deformation specified");
    case Kind::Layered: {
      DeformationProfile p = layered_profile(amplitude, span_um);
      p.lateral_um = lateral_um;
      return p;
    }
    case Kind::Constant:
      return DeformationProfile::constant(constant_um, lateral_um);
    case Kind::Points: {
      DeformationProfile p;
      p.points = points;
      p.lateral_um = lateral_um;
      p.validate();
      return p;
    }
  }
  throw ConfigError("deform.kind: no deformation specified");
}

AppConfig load_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

AppConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return load_config_text(buf.str());
}

std::string config_to_json_text(const AppConfig& cfg) { return config_to_json(cfg).dump(2); }

void write_manifest(const std::string& path, const RunManifest& manifest) {
  json doc{{"tool", manifest.tool},
           {"version", manifest.version.empty() ? kVersion : manifest.version},
           {"subcommand", manifest.subcommand},
           {"seed", manifest.seed},
           {"jobs", manifest.jobs},
           {"format", manifest.format},
           {"method", manifest.method},
           {"config", config_to_json(manifest.config)},
           {"inputs", manifest.inputs},
           {"outputs", manifest.outputs},
           {"timing", json{{"wall_s", manifest.wall_s}}}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw IoError(std::string("manifest: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw IoError("manifest: expected a JSON object");

  RunManifest m;
  try {
    m.tool = doc.at("tool").get<std::string>();
    m.version = doc.at("version").get<std::string>();
    m.subcommand = doc.at("subcommand").get<std::string>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.jobs = doc.at("jobs").get<int>();
    m.format = doc.at("format").get<std::string>();
    m.method = doc.at("method").get<std::string>();
    m.inputs = doc.at("inputs").get<std::vector<std::string>>();
    m.outputs = doc.at("outputs").get<std::vector<std::string>>();
    m.wall_s = doc.at("timing").at("wall_s").get<double>();
  } catch (const json::exception& e) {
    throw IoError(std::string("manifest: missing or mistyped field: ") + e.what());
  }
  m.config = config_from_json(doc.at("config"));
  return m;
}

} // namespace oce
