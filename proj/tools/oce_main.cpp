// oce: spectral-domain OCT elastography toolkit.
//
// Subcommands: simulate, track, sweep, strain, demo-fig1, rerun. Every
// artifact-producing run writes a manifest (manifest.json) beside its outputs
// that records the resolved configuration and permits bit-exact re-execution
// via `oce rerun <manifest>`.
//
// Exit codes: 0 ok, 2 usage, 3 config validation, 4 I/O, 5 numerical failure,
// 1 rerun mismatch. Errors print one line to stderr: "E<code>: <message>".
// Set OCE_LOG to any non-empty value for progress logging on stderr.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oce/baselines.hpp"
#include "oce/config_json.hpp"
#include "oce/dp_tracker.hpp"
#include "oce/errors.hpp"
#include "oce/ocb_io.hpp"
#include "oce/simulator.hpp"
#include "oce/strain_eval.hpp"
#include "oce/svg_plot.hpp"
#include "oce/types.hpp"
#include "oce/version.hpp"

namespace fs = std::filesystem;
using namespace oce;

namespace {

bool log_enabled() {
  const char* v = std::getenv("OCE_LOG");
  return v != nullptr && *v != '\0';
}

void log_info(const std::string& msg) {
  if (log_enabled()) std::cerr << "[oce] " << msg << '\n';
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir{"out"};
  std::uint64_t seed{0};
  bool seed_set{false};
  int jobs{1};
  std::string method{"dp"};
  std::string format{"csv"};
};

AppConfig resolve_config(const CommonOpts& opts) {
  AppConfig cfg;
  if (!opts.config_path.empty()) cfg = load_config_file(opts.config_path);
  if (opts.seed_set) cfg.sim.seed = opts.seed;
  return cfg;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir + " (" + ec.message() + ")");
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void append_csv_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out += buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path);
  return data;
}

void finish_manifest(RunManifest& manifest, const std::string& out_dir,
                     std::chrono::steady_clock::time_point t0) {
  manifest.version = kVersion;
  manifest.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(join(out_dir, "manifest.json"), manifest);
  log_info("wrote " + join(out_dir, "manifest.json"));
}

// ---------------------------------------------------------------------------

std::vector<std::string> do_simulate(const AppConfig& cfg, int jobs, const std::string& out_dir) {
  cfg.sim.validate();
  ensure_out_dir(out_dir);
  std::vector<std::string> outputs;

  const ScattererField phantom = build_phantom(cfg.sim);
  write_phantom_csv(join(out_dir, "phantom.csv"), phantom);
  outputs.push_back("phantom.csv");

  const ComplexBScan ref = synthesize_bscan(phantom, cfg.sim, jobs, /*noise_tag=*/0);
  write_bscan(join(out_dir, "ref.ocb"), ref);
  outputs.push_back("ref.ocb");
  log_info("simulated reference scan " + std::to_string(ref.m) + "x" + std::to_string(ref.n));

  if (cfg.deform.kind != DeformSpec::Kind::None) {
    const double span = cfg.sim.depth_um / 2.0;
    const DeformationProfile prof = cfg.deform.profile(span);
    const DeformResult def = deform_phantom(phantom, prof, cfg.sim);
    if (def.dropped > 0)
      log_info(std::to_string(def.dropped) + " scatterers left the imaged range");
    const ComplexBScan scan2 = synthesize_bscan(def.field, cfg.sim, jobs, /*noise_tag=*/1);
    write_bscan(join(out_dir, "deformed.ocb"), scan2);
    outputs.push_back("deformed.ocb");

    const DisplacementField truth =
        truth_displacement(prof, ref.m, ref.n, cfg.sim.axial_pitch_um());
    write_displacement_csv(join(out_dir, "truth_displacement.csv"), truth);
    outputs.push_back("truth_displacement.csv");
  }
  return outputs;
}

std::vector<std::string> do_track(const AppConfig& cfg, const std::string& method,
                                  const std::string& format, int jobs,
                                  const std::string& ref_path, const std::string& def_path,
                                  const std::string& out_dir) {
  ensure_out_dir(out_dir);
  const ComplexBScan I1 = read_bscan(ref_path);
  const ComplexBScan I2 = read_bscan(def_path);

  const auto t0 = std::chrono::steady_clock::now();
  const DisplacementField field =
      run_method(parse_method(method), I1, I2, cfg.dp, cfg.baseline, jobs);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("track: method=%s size=%dx%d runtime_s=%.3f\n", method.c_str(), I1.m, I1.n, dt);

  std::vector<std::string> outputs;
  if (format == "bin") {
    const FieldMeta meta{I1.axial_pitch_um, I1.lateral_pitch_um, I1.lambda0_um,
                         I1.refractive_index};
    write_displacement_bin(join(out_dir, "displacement.ocd"), field, meta);
    outputs.push_back("displacement.ocd");
  } else {
    write_displacement_csv(join(out_dir, "displacement.csv"), field);
    outputs.push_back("displacement.csv");
  }

  const StrainField s = strain(field, cfg.sweep.strain_window_um, I1.axial_pitch_um);
  write_strain_csv(join(out_dir, "strain.csv"), s);
  outputs.push_back("strain.csv");
  return outputs;
}

std::vector<std::string> do_sweep(const AppConfig& cfg, int jobs, const std::string& out_dir) {
  ensure_out_dir(out_dir);
  const EvalReport report = sweep(cfg.sim, cfg.dp, cfg.baseline, cfg.sweep, jobs);

  std::vector<std::string> outputs;
  write_report_csv(join(out_dir, "report.csv"), report);
  outputs.push_back("report.csv");
  write_report_json(join(out_dir, "report.json"), report);
  outputs.push_back("report.json");
  write_runtimes_csv(join(out_dir, "runtimes.csv"), report); // timing: not in the manifest

  // NMAE and SNR curves, one series per method.
  std::vector<Method> methods = cfg.sweep.methods;
  const auto curve = [&](Method m, double EvalRow::* field) {
    PlotSeries s;
    s.label = method_name(m);
    for (const EvalRow& r : report.rows)
      if (r.method == m) {
        s.x.push_back(r.amplitude);
        s.y.push_back(r.*field);
      }
    return s;
  };
  PlotSpec nmae_d;
  nmae_d.title = "Axial displacement NMAE vs deformation amplitude";
  nmae_d.x_label = "outer-layer strain";
  nmae_d.y_label = "displacement NMAE";
  nmae_d.log_x = true;
  nmae_d.log_y = true;
  for (Method m : methods) nmae_d.series.push_back(curve(m, &EvalRow::nmae_displacement));
  write_svg_plot(join(out_dir, "nmae_displacement.svg"), nmae_d);
  outputs.push_back("nmae_displacement.svg");

  PlotSpec nmae_s = nmae_d;
  nmae_s.title = "Axial strain NMAE vs deformation amplitude";
  nmae_s.y_label = "strain NMAE";
  nmae_s.series.clear();
  for (Method m : methods) nmae_s.series.push_back(curve(m, &EvalRow::nmae_strain));
  write_svg_plot(join(out_dir, "nmae_strain.svg"), nmae_s);
  outputs.push_back("nmae_strain.svg");

  PlotSpec snr;
  snr.title = "Peak-strain SNR vs deformation amplitude";
  snr.x_label = "outer-layer strain";
  snr.y_label = "SNR (dB)";
  snr.log_x = true;
  for (Method m : methods) snr.series.push_back(curve(m, &EvalRow::strain_snr_db));
  write_svg_plot(join(out_dir, "snr_db.svg"), snr);
  outputs.push_back("snr_db.svg");

  // True displacement / strain depth profiles per amplitude.
  std::vector<double> amplitudes = cfg.sweep.amplitudes;
  if (amplitudes.empty()) amplitudes = default_amplitudes();
  const double span = cfg.sim.depth_um / 2.0;
  const double pitch = cfg.sim.axial_pitch_um();
  PlotSpec prof_u, prof_s;
  prof_u.title = "True axial displacement profiles";
  prof_u.x_label = "depth (um)";
  prof_u.y_label = "displacement (um)";
  prof_u.markers = false;
  prof_s = prof_u;
  prof_s.title = "True axial strain profiles";
  prof_s.y_label = "strain";
  std::string profile_csv = "amplitude,z_um,u_um,strain\n";
  for (double amp : amplitudes) {
    const DeformationProfile prof = layered_profile(amp, span);
    PlotSeries su, ss;
    char label[40];
    std::snprintf(label, sizeof(label), "eps=%g", amp);
    su.label = label;
    ss.label = label;
    for (int i = 0; i < cfg.sim.half_pixels(); ++i) {
      const double z = double(i) * pitch;
      su.x.push_back(z);
      su.y.push_back(prof.displacement_at(z));
      ss.x.push_back(z);
      ss.y.push_back(prof.strain_at(z));
      append_csv_double(profile_csv, amp);
      profile_csv += ',';
      append_csv_double(profile_csv, z);
      profile_csv += ',';
      append_csv_double(profile_csv, prof.displacement_at(z));
      profile_csv += ',';
      append_csv_double(profile_csv, prof.strain_at(z));
      profile_csv += '\n';
    }
    prof_u.series.push_back(std::move(su));
    prof_s.series.push_back(std::move(ss));
  }
  write_svg_plot(join(out_dir, "profiles_displacement.svg"), prof_u);
  outputs.push_back("profiles_displacement.svg");
  write_svg_plot(join(out_dir, "profiles_strain.svg"), prof_s);
  outputs.push_back("profiles_strain.svg");
  write_text_file(join(out_dir, "profiles.csv"), profile_csv);
  outputs.push_back("profiles.csv");

  std::printf("sweep: %zu rows written to %s\n", report.rows.size(), out_dir.c_str());
  return outputs;
}

std::vector<std::string> do_strain_cmd(const AppConfig& cfg, const std::string& input,
                                       const std::string& out_dir) {
  ensure_out_dir(out_dir);
  DisplacementField field;
  double pitch = cfg.sim.axial_pitch_um();
  if (fs::path(input).extension() == ".csv") {
    field = read_displacement_csv(input);
  } else {
    FieldMeta meta;
    field = read_displacement_bin(input, &meta);
    pitch = meta.axial_pitch_um;
  }
  const StrainField s = strain(field, cfg.sweep.strain_window_um, pitch);
  write_strain_csv(join(out_dir, "strain.csv"), s);
  return {"strain.csv"};
}

// Demo: how sub-pixel scatterer motion reshapes the interference speckle and
// why naive per-pixel phase comparison fails once motion accumulates past the
// pixel scale, while comparing against a shifted pixel re-correlates.
std::vector<std::string> do_demo(const AppConfig& cfg, int jobs, const std::string& out_dir) {
  ensure_out_dir(out_dir);
  std::vector<std::string> outputs;

  SimConfig sim = cfg.sim;
  sim.n_alines = 1;
  sim.noise_power_w = 0.0;
  sim.validate();
  const double pitch = sim.axial_pitch_um();
  const double span = sim.depth_um / 2.0;

  // Part 1: two equal scatterers 1.25 px apart, then both shifted 0.75 px
  // deeper. The speckle envelope reshapes rather than translating rigidly.
  {
    const double z0 = 500.0;
    ScattererField before, after;
    before.columns = {{{z0, 1.0}, {z0 + 1.25 * pitch, 1.0}}};
    after.columns = {{{z0 + 0.75 * pitch, 1.0}, {z0 + 2.0 * pitch, 1.0}}};
    const ComplexBScan s1 = synthesize_bscan(before, sim, jobs, 0);
    const ComplexBScan s2 = synthesize_bscan(after, sim, jobs, 0);

    const int c = int(std::lround(z0 / pitch));
    const int lo = std::max(0, c - 12), hi = std::min(s1.m - 1, c + 16);
    PlotSeries a1, a2;
    a1.label = "reference";
    a2.label = "shifted 0.75 px";
    std::string csv = "z_um,amplitude_reference,amplitude_shifted\n";
    for (int i = lo; i <= hi; ++i) {
      const double z = double(i) * pitch;
      a1.x.push_back(z);
      a1.y.push_back(std::abs(s1.at(i, 0)));
      a2.x.push_back(z);
      a2.y.push_back(std::abs(s2.at(i, 0)));
      append_csv_double(csv, z);
      csv += ',';
      append_csv_double(csv, std::abs(s1.at(i, 0)));
      csv += ',';
      append_csv_double(csv, std::abs(s2.at(i, 0)));
      csv += '\n';
    }
    write_text_file(join(out_dir, "demo_amplitude.csv"), csv);
    outputs.push_back("demo_amplitude.csv");
    PlotSpec spec;
    spec.title = "Two-scatterer speckle before/after a 0.75 px shift";
    spec.x_label = "depth (um)";
    spec.y_label = "|A(z)|";
    spec.series = {a1, a2};
    write_svg_plot(join(out_dir, "demo_amplitude.svg"), spec);
    outputs.push_back("demo_amplitude.svg");
  }

  // Part 2: dense speckle column compressed bottom-up by one pixel,
  // u(z) = -pitch * z / span. Per-pixel interframe phase is clean where
  // |u| < pitch/2 (top half) and decorrelates deeper; comparing one pixel
  // shallower recovers the bottom half instead.
  {
    const ScattererField phantom = build_phantom(sim);
    DeformationProfile prof;
    prof.points = {{0.0, 0.0}, {span, -pitch}};
    const DeformResult def = deform_phantom(phantom, prof, sim);
    const ComplexBScan s1 = synthesize_bscan(phantom, sim, jobs, 0);
    const ComplexBScan s2 = synthesize_bscan(def.field, sim, jobs, 0);

    PlotSeries same, comp, ideal;
    same.label = "same pixel";
    comp.label = "one pixel compensated";
    ideal.label = "true phase (wrapped)";
    std::string csv =
        "z_um,u_true_um,phase_same_rad,amp_same,phase_compensated_rad,amp_compensated,"
        "phase_true_wrapped_rad\n";
    for (int i = 0; i < s1.m; ++i) {
      const double z = double(i) * pitch;
      const double u = prof.displacement_at(z);
      const PhaseDiff p_same = vector_phase_diff(s1, s2, i, 0, 0, 0, 0, true);
      const PhaseDiff p_comp = vector_phase_diff(s1, s2, i, 0, -1, 0, 0, true);
      double true_phase = 4.0 * std::numbers::pi * u / sim.lambda0_um;
      true_phase = std::remainder(true_phase, 2.0 * std::numbers::pi);
      same.x.push_back(z);
      same.y.push_back(p_same.phase);
      comp.x.push_back(z);
      comp.y.push_back(p_comp.phase);
      ideal.x.push_back(z);
      ideal.y.push_back(true_phase);
      append_csv_double(csv, z);
      csv += ',';
      append_csv_double(csv, u);
      csv += ',';
      append_csv_double(csv, p_same.phase);
      csv += ',';
      append_csv_double(csv, p_same.amplitude);
      csv += ',';
      append_csv_double(csv, p_comp.phase);
      csv += ',';
      append_csv_double(csv, p_comp.amplitude);
      csv += ',';
      append_csv_double(csv, true_phase);
      csv += '\n';
    }
    write_text_file(join(out_dir, "demo_phase.csv"), csv);
    outputs.push_back("demo_phase.csv");
    PlotSpec spec;
    spec.title = "Interframe phase under a one-pixel bottom-up compression";
    spec.x_label = "depth (um)";
    spec.y_label = "phase (rad)";
    spec.markers = false;
    spec.series = {same, comp, ideal};
    write_svg_plot(join(out_dir, "demo_phase.svg"), spec);
    outputs.push_back("demo_phase.svg");
  }
  return outputs;
}

int do_rerun(const std::string& manifest_path, std::string out_dir) {
  const RunManifest m = read_manifest(manifest_path);
  const std::string base = fs::path(manifest_path).parent_path().string();
  if (out_dir.empty()) out_dir = join(base, "rerun");
  log_info("replaying '" + m.subcommand + "' into " + out_dir);

  const auto t0 = std::chrono::steady_clock::now();
  RunManifest replay = m;
  replay.outputs.clear();
  if (m.subcommand == "simulate") {
    replay.outputs = do_simulate(m.config, m.jobs, out_dir);
  } else if (m.subcommand == "track") {
    if (m.inputs.size() != 2) throw IoError("manifest: track requires two recorded inputs");
    replay.outputs =
        do_track(m.config, m.method, m.format, m.jobs, m.inputs[0], m.inputs[1], out_dir);
  } else if (m.subcommand == "sweep") {
    replay.outputs = do_sweep(m.config, m.jobs, out_dir);
  } else if (m.subcommand == "strain") {
    if (m.inputs.size() != 1) throw IoError("manifest: strain requires one recorded input");
    replay.outputs = do_strain_cmd(m.config, m.inputs[0], out_dir);
  } else if (m.subcommand == "demo-fig1") {
    replay.outputs = do_demo(m.config, m.jobs, out_dir);
  } else {
    throw IoError("manifest: unknown subcommand '" + m.subcommand + "'");
  }
  finish_manifest(replay, out_dir, t0);

  int mismatches = 0;
  for (const std::string& name : m.outputs) {
    const std::string a = join(base, name), b = join(out_dir, name);
    const bool same = read_bytes(a) == read_bytes(b);
    std::printf("%s %s\n", same ? "match   " : "MISMATCH", name.c_str());
    if (!same) ++mismatches;
  }
  if (mismatches == 0)
    std::printf("rerun: %zu outputs identical\n", m.outputs.size());
  else
    std::printf("rerun: %d of %zu outputs differ\n", mismatches, m.outputs.size());
  return mismatches == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"oce: OCT elastography simulation, displacement tracking and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CommonOpts opts;
  std::string ref_path, def_path, input_path, manifest_path, rerun_out;

  const auto add_common = [&](CLI::App* cmd, bool with_method_format) {
    cmd->add_option("--config", opts.config_path, "JSON configuration file");
    auto* seed = cmd->add_option("--seed", opts.seed, "Override sim.seed");
    cmd->parse_complete_callback([&opts, seed] { opts.seed_set = seed->count() > 0; });
    cmd->add_option("--jobs", opts.jobs, "Worker thread count")->check(CLI::PositiveNumber);
    cmd->add_option("--out", opts.out_dir, "Output directory (default: out)");
    if (with_method_format) {
      cmd->add_option("--method", opts.method, "Tracking method")
          ->check(CLI::IsMember({"dp", "kasai", "cc", "vp", "ccvp"}));
      cmd->add_option("--format", opts.format, "Displacement output format")
          ->check(CLI::IsMember({"csv", "bin"}));
    }
  };

  auto* c_sim = app.add_subcommand("simulate",
                                   "Simulate B-scans of a scatterer phantom (plus a deformed "
                                   "acquisition when deform.kind is set)");
  add_common(c_sim, false);

  auto* c_track = app.add_subcommand("track", "Estimate displacement between two OCB scans");
  add_common(c_track, true);
  c_track->add_option("ref", ref_path, "Reference OCB scan")->required();
  c_track->add_option("def", def_path, "Deformed OCB scan")->required();

  auto* c_sweep = app.add_subcommand(
      "sweep", "Run the deformation-amplitude sweep and write report + plots");
  add_common(c_sweep, false);

  auto* c_strain = app.add_subcommand("strain", "Compute strain from a displacement field file");
  add_common(c_strain, false);
  c_strain->add_option("field", input_path, "Displacement field (.csv or .ocd)")->required();

  auto* c_demo = app.add_subcommand(
      "demo-fig1", "Write the demo figure data: speckle reshaping under sub-pixel motion and "
                   "interframe phase under a one-pixel compression");
  add_common(c_demo, false);

  auto* c_rerun = app.add_subcommand("rerun", "Replay a manifest and verify outputs match");
  c_rerun->add_option("manifest", manifest_path, "manifest.json of a previous run")->required();
  c_rerun->add_option("--out", rerun_out, "Replay output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "E2: " << e.what() << '\n';
    return 2;
  }

  try {
    const auto t0 = std::chrono::steady_clock::now();
    if (c_rerun->parsed()) return do_rerun(manifest_path, rerun_out);

    const AppConfig cfg = resolve_config(opts);
    RunManifest manifest;
    manifest.seed = cfg.sim.seed;
    manifest.jobs = opts.jobs;
    manifest.format = opts.format;
    manifest.method = opts.method;
    manifest.config = cfg;

    if (c_sim->parsed()) {
      manifest.subcommand = "simulate";
      manifest.outputs = do_simulate(cfg, opts.jobs, opts.out_dir);
    } else if (c_track->parsed()) {
      manifest.subcommand = "track";
      manifest.inputs = {fs::absolute(ref_path).string(), fs::absolute(def_path).string()};
      manifest.outputs = do_track(cfg, opts.method, opts.format, opts.jobs, ref_path, def_path,
                                  opts.out_dir);
    } else if (c_sweep->parsed()) {
      manifest.subcommand = "sweep";
      manifest.outputs = do_sweep(cfg, opts.jobs, opts.out_dir);
    } else if (c_strain->parsed()) {
      manifest.subcommand = "strain";
      manifest.inputs = {fs::absolute(input_path).string()};
      manifest.outputs = do_strain_cmd(cfg, input_path, opts.out_dir);
    } else if (c_demo->parsed()) {
      manifest.subcommand = "demo-fig1";
      manifest.outputs = do_demo(cfg, opts.jobs, opts.out_dir);
    }
    finish_manifest(manifest, opts.out_dir, t0);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "E3: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "E4: " << e.what() << '\n';
    return 4;
  } catch (const NumericError& e) {
    std::cerr << "E5: " << e.what() << '\n';
    return 5;
  }
}
