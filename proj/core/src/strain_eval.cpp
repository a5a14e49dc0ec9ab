#include "oce/strain_eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "oce/errors.hpp"

namespace oce {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int window_half_pixels(double window_um, double axial_pitch_um) {
  if (!(axial_pitch_um > 0.0)) throw ConfigError("strain: axial_pitch_um must be positive");
  if (!(window_um > 0.0)) throw ConfigError("strain: window_um must be positive");
  return std::max(1, int(std::floor(window_um / (2.0 * axial_pitch_um))));
}

double normalized_mae(const std::vector<double>& est, const std::vector<std::uint8_t>& est_ok,
                      const std::vector<double>& truth,
                      const std::vector<std::uint8_t>& truth_ok) {
  double max_abs = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k)
    if (truth_ok[k]) max_abs = std::max(max_abs, std::fabs(truth[k]));
  if (max_abs == 0.0) return kNaN; // undefined for an identically zero truth
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (!est_ok[k] || !truth_ok[k]) continue;
    sum += std::fabs(est[k] - truth[k]);
    ++count;
  }
  if (count == 0) return kNaN;
  return sum / (double(count) * max_abs);
}

void append_csv_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out += buf;
}

} // namespace

StrainField strain(const DisplacementField& field, double window_um, double axial_pitch_um) {
  field.validate();
  const int h = window_half_pixels(window_um, axial_pitch_um);
  StrainField out(field.m, field.n);
  out.window_um = window_um;
  for (int j = 0; j < field.n; ++j) {
    for (int i = 0; i < field.m; ++i) {
      const int lo = std::max(0, i - h), hi = std::min(field.m - 1, i + h);
      int count = 0;
      double mean_t = 0.0, mean_u = 0.0;
      for (int x = lo; x <= hi; ++x) {
        if (!field.valid[field.idx(x, j)]) continue;
        ++count;
        mean_t += double(x - i) * axial_pitch_um;
        mean_u += field.axial_um[field.idx(x, j)];
      }
      if (count < 3) continue;
      mean_t /= double(count);
      mean_u /= double(count);
      double stt = 0.0, stu = 0.0;
      for (int x = lo; x <= hi; ++x) {
        if (!field.valid[field.idx(x, j)]) continue;
        const double dt = double(x - i) * axial_pitch_um - mean_t;
        stt += dt * dt;
        stu += dt * (field.axial_um[field.idx(x, j)] - mean_u);
      }
      if (!(stt > 0.0)) continue;
      out.strain[out.idx(i, j)] = stu / stt;
      out.valid[out.idx(i, j)] = 1;
    }
  }
  return out;
}

double nmae(const DisplacementField& est, const DisplacementField& truth) {
  est.validate();
  truth.validate();
  if (est.m != truth.m || est.n != truth.n) throw ConfigError("nmae: field size mismatch");
  return normalized_mae(est.axial_um, est.valid, truth.axial_um, truth.valid);
}

double nmae(const StrainField& est, const StrainField& truth) {
  est.validate();
  truth.validate();
  if (est.m != truth.m || est.n != truth.n) throw ConfigError("nmae: field size mismatch");
  if (est.window_um != truth.window_um)
    throw ConfigError("nmae: strain windows differ; fields are not comparable");
  return normalized_mae(est.strain, est.valid, truth.strain, truth.valid);
}

double strain_snr_db(const std::vector<double>& values) {
  if (values.size() < 2) return kNaN;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / double(values.size() - 1));
  if (sd == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(std::fabs(mean) / sd);
}

const char* method_name(Method m) {
  switch (m) {
    case Method::DP: return "dp";
    case Method::Kasai: return "kasai";
    case Method::CC: return "cc";
    case Method::VP: return "vp";
    case Method::CCVP: return "ccvp";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "dp") return Method::DP;
  if (name == "kasai") return Method::Kasai;
  if (name == "cc") return Method::CC;
  if (name == "vp") return Method::VP;
  if (name == "ccvp") return Method::CCVP;
  throw ConfigError("method: unknown name '" + name + "'");
}

void SweepConfig::validate() const {
  for (double a : amplitudes)
    if (!(a > 0.0)) throw ConfigError("sweep.amplitudes: must be positive");
  if (methods.empty()) throw ConfigError("sweep.methods: must not be empty");
  if (!(strain_window_um > 0.0)) throw ConfigError("sweep.strain_window_um: must be positive");
  if (!(snr_band_hi_um > snr_band_lo_um))
    throw ConfigError("sweep.snr_band_um: upper bound must exceed lower bound");
}

std::vector<double> default_amplitudes() {
  return {2e-5, 4.31e-5, 9.28e-5, 2e-4, 4.31e-4, 9.28e-4,
          2e-3, 4.31e-3, 9.28e-3, 2e-2, 4.31e-2, 9.28e-2};
}

DisplacementField truth_displacement(const DeformationProfile& profile, int m, int n,
                                     double axial_pitch_um) {
  profile.validate();
  DisplacementField field(m, n);
  field.has_lateral = profile.lateral_um != 0.0;
  for (int i = 0; i < m; ++i) {
    const double u = profile.displacement_at(double(i) * axial_pitch_um);
    for (int j = 0; j < n; ++j) {
      field.axial_um[field.idx(i, j)] = u;
      field.lateral_um[field.idx(i, j)] = profile.lateral_um;
    }
  }
  return field;
}

StrainField truth_strain(const DeformationProfile& profile, int m, int n, double axial_pitch_um,
                         double window_um) {
  profile.validate();
  if (!(axial_pitch_um > 0.0))
    throw ConfigError("truth_strain: axial_pitch_um must be positive");
  StrainField field(m, n);
  field.window_um = window_um;
  for (int i = 0; i < m; ++i) {
    const double z = double(i) * axial_pitch_um;
    bool near_interface = false;
    for (std::size_t k = 1; k + 1 < profile.points.size(); ++k)
      if (std::fabs(z - profile.points[k].first) <= window_um / 2.0) near_interface = true;
    const double s = profile.strain_at(z);
    for (int j = 0; j < n; ++j) {
      field.strain[field.idx(i, j)] = s;
      field.valid[field.idx(i, j)] = std::uint8_t(!near_interface);
    }
  }
  return field;
}

DisplacementField run_method(Method method, const ComplexBScan& I1, const ComplexBScan& I2,
                             const DPConfig& dp, const BaselineConfig& baseline, int jobs) {
  switch (method) {
    case Method::DP: return track(I1, I2, dp, jobs);
    case Method::Kasai: return kasai_track(I1, I2, baseline, jobs);
    case Method::CC: return cc_track(I1, I2, baseline, jobs);
    case Method::VP: return vp_track(I1, I2, baseline, jobs);
    case Method::CCVP: return ccvp_track(I1, I2, baseline, jobs);
  }
  throw ConfigError("run_method: unknown method");
}

EvalReport sweep(const SimConfig& sim, const DPConfig& dp, const BaselineConfig& baseline,
                 const SweepConfig& cfg, int jobs) {
  sim.validate();
  dp.validate();
  baseline.validate();
  cfg.validate();
  SweepConfig sc = cfg;
  if (sc.amplitudes.empty()) sc.amplitudes = default_amplitudes();

  const int m = sim.half_pixels(), n = sim.n_alines;
  const double pitch = sim.axial_pitch_um();
  const double span = sim.depth_um / 2.0;

  const ScattererField phantom = build_phantom(sim);
  const ComplexBScan ref = synthesize_bscan(phantom, sim, jobs, /*noise_tag=*/0);

  EvalReport report;
  report.rows.reserve(sc.amplitudes.size() * sc.methods.size());
  for (std::size_t t = 0; t < sc.amplitudes.size(); ++t) {
    const double amp = sc.amplitudes[t];
    const DeformationProfile prof = layered_profile(amp, span);
    const DeformResult def = deform_phantom(phantom, prof, sim);
    const ComplexBScan scan2 = synthesize_bscan(def.field, sim, jobs, /*noise_tag=*/1 + t);

    const DisplacementField truth_d = truth_displacement(prof, m, n, pitch);
    const StrainField truth_s = truth_strain(prof, m, n, pitch, sc.strain_window_um);
    double max_u = 0.0;
    for (int i = 0; i < m; ++i)
      max_u = std::max(max_u, std::fabs(truth_d.axial_um[truth_d.idx(i, 0)]));

    for (Method method : sc.methods) {
      BaselineConfig bc = baseline;
      if (sc.auto_cc_range && (method == Method::CC || method == Method::CCVP))
        bc.cc_search_axial =
            std::max(bc.cc_search_axial, int(std::ceil(max_u / pitch)) + 3);

      const auto t0 = std::chrono::steady_clock::now();
      const DisplacementField est = run_method(method, ref, scan2, dp, bc, jobs);
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;

      const StrainField est_s = strain(est, sc.strain_window_um, pitch);

      // Per-A-line peak strain inside the band feeds the SNR statistic.
      std::vector<double> peaks;
      peaks.reserve(std::size_t(n));
      for (int j = 0; j < n; ++j) {
        double peak = -std::numeric_limits<double>::infinity();
        bool any = false;
        for (int i = 0; i < m; ++i) {
          const double z = double(i) * pitch;
          if (z < sc.snr_band_lo_um || z > sc.snr_band_hi_um) continue;
          if (!est_s.valid[est_s.idx(i, j)]) continue;
          peak = std::max(peak, est_s.strain[est_s.idx(i, j)]);
          any = true;
        }
        if (any) peaks.push_back(peak);
      }

      EvalRow row;
      row.method = method;
      row.amplitude = amp;
      row.nmae_displacement = nmae(est, truth_d);
      row.nmae_strain = nmae(est_s, truth_s);
      row.strain_snr_db = strain_snr_db(peaks);
      row.runtime_s = dt.count();
      report.rows.push_back(row);
    }
  }
  return report;
}

void write_report_csv(const std::string& path, const EvalReport& report) {
  std::string text = "method,amplitude,nmae_displacement,nmae_strain,strain_snr_db\n";
  for (const EvalRow& r : report.rows) {
    text += method_name(r.method);
    text += ',';
    append_csv_double(text, r.amplitude);
    text += ',';
    append_csv_double(text, r.nmae_displacement);
    text += ',';
    append_csv_double(text, r.nmae_strain);
    text += ',';
    append_csv_double(text, r.strain_snr_db);
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

void write_report_json(const std::string& path, const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const EvalRow& r : report.rows) {
    rows.push_back({{"method", method_name(r.method)},
                    {"amplitude", r.amplitude},
                    {"nmae_displacement", r.nmae_displacement},
                    {"nmae_strain", r.nmae_strain},
                    {"strain_snr_db", r.strain_snr_db}});
  }
  // Non-finite statistics (undefined NMAE, infinite SNR) serialize as null.
  const nlohmann::json doc{{"rows", rows}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

void write_runtimes_csv(const std::string& path, const EvalReport& report) {
  std::string text = "method,amplitude,runtime_s\n";
  for (const EvalRow& r : report.rows) {
    text += method_name(r.method);
    text += ',';
    append_csv_double(text, r.amplitude);
    text += ',';
    append_csv_double(text, r.runtime_s);
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

} // namespace oce
