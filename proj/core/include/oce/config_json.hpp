#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "oce/baselines.hpp"
#include "oce/dp_tracker.hpp"
#include "oce/simulator.hpp"
#include "oce/strain_eval.hpp"

namespace oce {

/// Declarative deformation for the simulate/demo commands.
struct DeformSpec {
  enum class Kind { None, Layered, Constant, Points };
  Kind kind{Kind::None};
  double amplitude{1e-3};  ///< outer strain of the three-layer profile
  double constant_um{0.0}; ///< rigid axial translation
  double lateral_um{0.0};
  std::vector<std::pair<double, double>> points; ///< explicit (z_um, u_um) profile

  /// Materializes the profile; `span_um` scales the layered variant.
  [[nodiscard]] DeformationProfile profile(double span_um) const;
};

/// Every tunable of the toolkit, JSON sections "sim", "dp", "baseline",
/// "sweep", "deform". Unknown keys are rejected by name.
struct AppConfig {
  SimConfig sim{};
  DPConfig dp{};
  BaselineConfig baseline{};
  SweepConfig sweep{};
  DeformSpec deform{};
};

AppConfig load_config_text(const std::string& text); ///< ConfigError on any problem
AppConfig load_config_file(const std::string& path); ///< IoError if unreadable

/// Full resolved snapshot (defaults included); load_config_text round-trips it.
std::string config_to_json_text(const AppConfig& cfg);

/// Record of one CLI invocation, written next to its outputs. Reruns replay
/// subcommand/config/seed and must reproduce the data outputs byte for byte;
/// the timing block is the only field excluded from comparisons.
struct RunManifest {
  std::string tool{"oce"};
  std::string version;
  std::string subcommand;
  std::uint64_t seed{0};
  int jobs{1};
  std::string format{"csv"};
  std::string method{"dp"};
  AppConfig config{};
  std::vector<std::string> inputs;
  std::vector<std::string> outputs; ///< repo-relative or absolute data files
  double wall_s{0.0};
};

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path); ///< IoError / ConfigError

} // namespace oce
