#include "oce/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "oce/errors.hpp"
#include "oce/parallel.hpp"
#include "oce/rng.hpp"

namespace oce {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kPhantomTag = 0x70686e746d; // phantom position/strength streams
constexpr std::uint64_t kNoiseTag = 0x6e6f697365;   // acquisition noise streams

} // namespace

void SimConfig::validate() const {
  if (n_lines < 3) throw ConfigError("sim.n_lines: must be at least 3");
  if (n_lines % 2 == 0) throw ConfigError("sim.n_lines: must be odd");
  if (!(depth_um > 0.0)) throw ConfigError("sim.depth_um: must be positive");
  if (!(lambda0_um > 0.0)) throw ConfigError("sim.lambda0_um: must be positive");
  if (!(fwhm_um > 0.0)) throw ConfigError("sim.fwhm_um: must be positive");
  if (!(source_power_w > 0.0)) throw ConfigError("sim.source_power_w: must be positive");
  if (noise_power_w < 0.0) throw ConfigError("sim.noise_power_w: must be non-negative");
  if (attenuation_per_um < 0.0) throw ConfigError("sim.attenuation_per_um: must be non-negative");
  if (!(scatterer_density > 0.0)) throw ConfigError("sim.scatterer_density: must be positive");
  if (spectrometer_sigma < 0.0) throw ConfigError("sim.spectrometer_sigma: must be non-negative");
  if (!(lateral_pitch_um > 0.0)) throw ConfigError("sim.lateral_pitch_um: must be positive");
  if (n_alines < 1) throw ConfigError("sim.n_alines: must be positive");
}

double SimConfig::k0() const { return 2.0 * kPi / lambda0_um; }
double SimConfig::dk_line() const { return kPi / depth_um; }
double SimConfig::dk_width() const { return 2.0 * kPi * fwhm_um / (lambda0_um * lambda0_um); }
double SimConfig::sigma_k() const { return dk_width() / (2.0 * std::sqrt(2.0 * std::numbers::ln2)); }

void DeformationProfile::validate() const {
  if (points.empty()) throw ConfigError("deform.points: must not be empty");
  for (std::size_t k = 1; k < points.size(); ++k)
    if (!(points[k].first > points[k - 1].first))
      throw ConfigError("deform.points: z must be strictly increasing");
}

double DeformationProfile::displacement_at(double z_um) const {
  if (points.size() == 1) return points.front().second;
  std::size_t hi = 1;
  while (hi + 1 < points.size() && z_um > points[hi].first) ++hi;
  const auto& [z0, u0] = points[hi - 1];
  const auto& [z1, u1] = points[hi];
  const double t = (z_um - z0) / (z1 - z0);
  return u0 + t * (u1 - u0);
}

double DeformationProfile::strain_at(double z_um) const {
  if (points.size() == 1) return 0.0;
  std::size_t hi = 1;
  while (hi + 1 < points.size() && z_um >= points[hi].first) ++hi;
  const auto& [z0, u0] = points[hi - 1];
  const auto& [z1, u1] = points[hi];
  return (u1 - u0) / (z1 - z0);
}

DeformationProfile DeformationProfile::constant(double u_um, double lateral_um) {
  DeformationProfile p;
  p.points = {{0.0, u_um}};
  p.lateral_um = lateral_um;
  return p;
}

double spectral_amplitude(int n, const SimConfig& cfg) {
  const double sk = cfg.sigma_k();
  const double dk = (double(n) * cfg.dk_line());
  return std::exp(-dk * dk / (2.0 * sk * sk)) / std::sqrt(2.0 * kPi * sk * sk);
}

ScattererField build_phantom(const SimConfig& cfg) {
  cfg.validate();
  ScattererField field;
  field.columns.resize(std::size_t(cfg.n_alines));
  const double z_max = cfg.depth_um / 2.0;
  const double mean_count = cfg.scatterer_density * cfg.half_pixels();
  for (int j = 0; j < cfg.n_alines; ++j) {
    auto rng = column_engine(cfg.seed, kPhantomTag, j);
    std::poisson_distribution<int> count_dist(mean_count);
    std::uniform_real_distribution<double> z_dist(0.0, z_max);
    std::uniform_real_distribution<double> s_dist(0.5, 1.5);
    const int count = count_dist(rng);
    auto& col = field.columns[std::size_t(j)];
    col.reserve(std::size_t(count));
    for (int s = 0; s < count; ++s) {
      const double z = z_dist(rng);
      const double strength = s_dist(rng);
      col.push_back({z, strength});
    }
  }
  return field;
}

DeformationProfile layered_profile(double outer_strain, double depth_um) {
  if (!(depth_um > 0.0)) throw ConfigError("layered_profile: depth_um must be positive");
  const double d3 = depth_um / 3.0;
  DeformationProfile p;
  p.points = {{0.0, 0.0},
              {d3, outer_strain * d3},
              {2.0 * d3, outer_strain * d3 + 2.0 * outer_strain * d3},
              {depth_um, outer_strain * d3 + 2.0 * outer_strain * d3 + outer_strain * d3}};
  return p;
}

DeformResult deform_phantom(const ScattererField& field, const DeformationProfile& profile,
                            const SimConfig& cfg) {
  profile.validate();
  const double z_max = cfg.depth_um / 2.0;
  DeformResult out;
  out.field.columns.resize(field.columns.size());
  out.field.lateral_shift_um = field.lateral_shift_um + profile.lateral_um;
  for (std::size_t j = 0; j < field.columns.size(); ++j) {
    auto& col = out.field.columns[j];
    col.reserve(field.columns[j].size());
    for (const auto& s : field.columns[j]) {
      const double z = s.z_um + profile.displacement_at(s.z_um);
      if (z < 0.0 || z >= z_max) {
        ++out.dropped;
        continue;
      }
      col.push_back({z, s.strength});
    }
  }
  return out;
}

std::vector<std::complex<double>> synthesize_aline(const std::vector<Scatterer>& line,
                                                   const SimConfig& cfg, std::uint64_t noise_tag,
                                                   int column) {
  cfg.validate();
  const int N = cfg.n_lines;
  const int half = cfg.half_pixels();
  const int n_min = -(N - 1) / 2;

  // Source spectrum I(k_n), evaluated once.
  std::vector<double> source(static_cast<std::size_t>(N));
  for (int idx = 0; idx < N; ++idx) source[std::size_t(idx)] = spectral_amplitude(n_min + idx, cfg);

  // Spectrum accumulation: strength·p0·e^{−µt z}·I(k_n)·e^{i2 k_n z}. The
  // per-line phasor advances by e^{i2Δk z}; refresh from std::polar every 64
  // steps to bound recurrence drift.
  std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(N));
  for (const auto& s : line) {
    const double w = s.strength * cfg.source_power_w * std::exp(-cfg.attenuation_per_um * s.z_um);
    const std::complex<double> step = std::polar(1.0, 2.0 * cfg.dk_line() * s.z_um);
    std::complex<double> ph;
    for (int idx = 0; idx < N; ++idx) {
      if (idx % 64 == 0)
        ph = std::polar(1.0, 2.0 * (cfg.k0() + double(n_min + idx) * cfg.dk_line()) * s.z_um);
      spectrum[std::size_t(idx)] += (w * source[std::size_t(idx)]) * ph;
      ph *= step;
    }
  }

  // Inverse discrete transform to depth: a(z_q) = Σ_n S(k_n)·e^{−i2πn q/N},
  // z_q = q·H/N. Twiddle table over (n·q) mod N, index advanced additively.
  std::vector<std::complex<double>> twiddle(static_cast<std::size_t>(N));
  for (int t = 0; t < N; ++t)
    twiddle[std::size_t(t)] = std::polar(1.0, -2.0 * kPi * double(t) / double(N));
  std::vector<std::complex<double>> out(static_cast<std::size_t>(half));
  for (int idx = 0; idx < N; ++idx) {
    const std::complex<double> s = spectrum[std::size_t(idx)];
    if (s == std::complex<double>{0.0, 0.0}) continue;
    const int t_step = ((n_min + idx) % N + N) % N;
    int t = 0;
    for (int q = 0; q < half; ++q) {
      out[std::size_t(q)] += s * twiddle[std::size_t(t)];
      t += t_step;
      if (t >= N) t -= N;
    }
  }
  const double sigma_r = cfg.spectrometer_sigma;
  for (int q = 0; q < half; ++q) {
    const double z = double(q) * cfg.depth_um / double(N);
    const double arg = cfg.dk_line() * z;
    const double g = (q == 0 ? 1.0 : std::sin(arg) / arg) / (2.0 * kPi);
    const double f = std::exp(-2.0 * z * z * sigma_r * sigma_r) / std::sqrt(2.0 * kPi);
    out[std::size_t(q)] *= g * f;
  }

  if (cfg.noise_power_w > 0.0) {
    auto rng = column_engine(cfg.seed ^ noise_tag, kNoiseTag, column);
    std::normal_distribution<double> gauss(0.0, std::sqrt(cfg.noise_power_w / (2.0 * half)));
    for (int q = 0; q < half; ++q) out[std::size_t(q)] += std::complex<double>(gauss(rng), gauss(rng));
  }
  return out;
}

ComplexBScan synthesize_bscan(const ScattererField& field, const SimConfig& cfg, int jobs,
                              std::uint64_t noise_tag) {
  cfg.validate();
  if (int(field.columns.size()) != cfg.n_alines)
    throw ConfigError("synthesize_bscan: field column count != sim.n_alines");
  const int n = cfg.n_alines;
  ComplexBScan scan(cfg.half_pixels(), n);
  scan.axial_pitch_um = cfg.axial_pitch_um();
  scan.lateral_pitch_um = cfg.lateral_pitch_um;
  scan.lambda0_um = cfg.lambda0_um;
  scan.refractive_index = 1.0;

  const long shift_px = std::lround(field.lateral_shift_um / cfg.lateral_pitch_um);
  parallel_for_index(n, jobs, [&](int j) {
    const int src = int(((long(j) - shift_px) % n + n) % n);
    const auto line = synthesize_aline(field.columns[std::size_t(src)], cfg, noise_tag, j);
    for (int i = 0; i < scan.m; ++i) scan.at(i, j) = line[std::size_t(i)];
  });
  return scan;
}

void write_phantom_csv(const std::filesystem::path& path, const ScattererField& field) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "column,z_um,strength\n";
  char line[96];
  for (std::size_t j = 0; j < field.columns.size(); ++j)
    for (const auto& s : field.columns[j]) {
      std::snprintf(line, sizeof(line), "%zu,%.9g,%.9g\n", j, s.z_um, s.strength);
      out << line;
    }
  if (!out) throw IoError("write failed: " + path.string());
}

} // namespace oce
