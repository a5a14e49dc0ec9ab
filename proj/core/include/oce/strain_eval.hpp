#pragma once

#include <string>
#include <vector>

#include "oce/baselines.hpp"
#include "oce/dp_tracker.hpp"
#include "oce/simulator.hpp"
#include "oce/types.hpp"

namespace oce {

/// Least-squares depth gradient of the axial displacement over a centred
/// window of about window_um (odd pixel count, at least 3). Pixels with fewer
/// than 3 valid samples in the window stay invalid.
StrainField strain(const DisplacementField& field, double window_um, double axial_pitch_um);

/// Normalized mean absolute error of the axial component: mean over mutually
/// valid pixels of |est - truth| divided by the frame maximum of |truth|.
/// NaN when the truth is identically zero or no pixel is comparable.
double nmae(const DisplacementField& est, const DisplacementField& truth);

/// Same measure on strain values (windows must match).
double nmae(const StrainField& est, const StrainField& truth);

/// 20*log10(|mean| / sample standard deviation). All-equal input gives +inf;
/// fewer than two samples give NaN.
double strain_snr_db(const std::vector<double>& values);

enum class Method { DP, Kasai, CC, VP, CCVP };

const char* method_name(Method m);
Method parse_method(const std::string& name); ///< throws ConfigError on unknown names

/// Amplitude sweep settings; the simulator/tracker configurations are passed
/// to sweep() alongside.
struct SweepConfig {
  std::vector<double> amplitudes;    ///< outer-layer strains (defaults: see default_amplitudes)
  std::vector<Method> methods{Method::DP, Method::Kasai, Method::CC, Method::VP, Method::CCVP};
  double strain_window_um{48.0};
  double snr_band_lo_um{600.0};
  double snr_band_hi_um{800.0};
  bool auto_cc_range{true}; ///< widen the CC search to cover the true motion

  void validate() const;
};

/// The twelve benchmark outer strains, three per decade over [2e-5, 9.28e-2].
std::vector<double> default_amplitudes();

struct EvalRow {
  Method method{Method::DP};
  double amplitude{0.0};
  double nmae_displacement{0.0};
  double nmae_strain{0.0};
  double strain_snr_db{0.0};
  double runtime_s{0.0};
};

struct EvalReport {
  std::vector<EvalRow> rows; ///< amplitudes outer, methods inner, config order
};

/// Analytic per-pixel truth for a deformation profile on an m x n grid.
DisplacementField truth_displacement(const DeformationProfile& profile, int m, int n,
                                     double axial_pitch_um);

/// Analytic strain; rows within window_um/2 of an interior profile breakpoint
/// are marked invalid so interface pixels drop out of strain comparisons.
StrainField truth_strain(const DeformationProfile& profile, int m, int n, double axial_pitch_um,
                         double window_um);

/// Runs one tracking method on a scan pair.
DisplacementField run_method(Method method, const ComplexBScan& I1, const ComplexBScan& I2,
                             const DPConfig& dp, const BaselineConfig& baseline, int jobs = 1);

/// Simulates one phantom, then for every amplitude deforms it (three layers
/// with strains eps, 2*eps, eps), re-acquires with an independent noise
/// stream, runs every method and scores displacement NMAE, strain NMAE
/// (interface rows excluded), per-A-line peak strain SNR over the band, and
/// wall runtime. Results are bit-reproducible for any `jobs`.
EvalReport sweep(const SimConfig& sim, const DPConfig& dp, const BaselineConfig& baseline,
                 const SweepConfig& cfg, int jobs = 1);

/// "method,amplitude,nmae_displacement,nmae_strain,strain_snr_db" (no runtime
/// so repeated runs are byte-identical).
void write_report_csv(const std::string& path, const EvalReport& report);

/// Same rows as the CSV, as a JSON array under "rows".
void write_report_json(const std::string& path, const EvalReport& report);

/// "method,amplitude,runtime_s" — the only timing-dependent sweep output.
void write_runtimes_csv(const std::string& path, const EvalReport& report);

} // namespace oce
