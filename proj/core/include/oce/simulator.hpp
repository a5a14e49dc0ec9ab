#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "oce/types.hpp"

namespace oce {

/// Spectral-domain B-scan simulator configuration. Depth positions are in
/// micrometres in air; wavenumbers in rad/µm.
///
/// The unambiguous depth range [0, depth_um) is sampled by n_lines pixels
/// (pitch depth_um/n_lines); the detected spectrum is real, so only the first
/// half of the depth samples is meaningful and scatterers live in
/// [0, depth_um/2).
struct SimConfig {
  int n_lines{1025};              ///< N spectral lines / depth samples, odd
  double depth_um{2300.0};        ///< H, full unambiguous depth in air
  double lambda0_um{0.878};       ///< source central wavelength
  double fwhm_um{0.0625};         ///< spectral FWHM in wavelength
  double source_power_w{2.9e-3};  ///< p0
  double noise_power_w{2.9e-13};  ///< p_n, total noise power per returned A-line
  double attenuation_per_um{5e-4};   ///< µt, single-pass amplitude attenuation
  double scatterer_density{2.0};     ///< mean scatterers per depth pixel
  double spectrometer_sigma{5e-4};   ///< σ_r of the Gaussian resolution filter (rad/µm)
  double lateral_pitch_um{12.0};     ///< A-line spacing (no lateral coupling is modelled)
  int n_alines{128};
  std::uint64_t seed{20260815};

  /// Throws ConfigError naming the offending field (N must be odd, etc.).
  void validate() const;

  [[nodiscard]] int half_pixels() const { return n_lines / 2; }
  [[nodiscard]] double axial_pitch_um() const { return depth_um / n_lines; }
  [[nodiscard]] double k0() const;        ///< 2π/λ0
  [[nodiscard]] double dk_line() const;   ///< spectral line spacing π/H
  [[nodiscard]] double dk_width() const;  ///< wavenumber FWHM 2πΔλ/λ0²
  [[nodiscard]] double sigma_k() const;   ///< dk_width/(2·sqrt(2·ln2))
};

struct Scatterer {
  double z_um{0.0};     ///< depth position, 0 ≤ z < H/2
  double strength{1.0}; ///< base reflectivity factor
};

/// Per-column scatterer lists plus any rigid lateral translation accumulated
/// by deformation. Lateral shifts are realized at synthesis time as a circular
/// column remap of round(lateral_shift_um / lateral_pitch_um) pixels.
struct ScattererField {
  std::vector<std::vector<Scatterer>> columns;
  double lateral_shift_um{0.0};
};

/// Piecewise-linear axial displacement profile u(z), positive = deeper.
/// Outside the breakpoint span the edge segments extrapolate linearly.
struct DeformationProfile {
  std::vector<std::pair<double, double>> points; ///< (z_um, u_um), strictly increasing z
  double lateral_um{0.0}; ///< rigid lateral translation

  void validate() const;
  [[nodiscard]] double displacement_at(double z_um) const;
  [[nodiscard]] double strain_at(double z_um) const; ///< slope of the containing segment

  static DeformationProfile constant(double u_um, double lateral_um = 0.0);
};

/// Gaussian source spectrum I(k_n) at line index n (symmetric around k0).
double spectral_amplitude(int n, const SimConfig& cfg);

/// Poisson scatterer counts per A-line (mean density × half_pixels), positions
/// uniform over [0, H/2), strengths uniform over [0.5, 1.5). Column streams
/// derive from (seed, column) only.
ScattererField build_phantom(const SimConfig& cfg);

/// Three equal layers over [0, depth_um] with strains (ε, 2ε, ε), u(0) = 0.
DeformationProfile layered_profile(double outer_strain, double depth_um);

struct DeformResult {
  ScattererField field;
  std::size_t dropped{0}; ///< scatterers that left [0, H/2)
};

/// Moves every scatterer to z + u(z) and records the profile's lateral
/// translation on the field. Scatterers leaving [0, H/2) are dropped and counted.
DeformResult deform_phantom(const ScattererField& field, const DeformationProfile& profile,
                            const SimConfig& cfg);

/// Synthesizes one A-line: accumulates the spectrum
/// strength·p0·e^{−µt·z}·I(k_n)·e^{i2·k_n·z} over scatterers, applies the
/// inverse discrete transform to depth, multiplies by the spectrometer kernels
/// g(z) = sinc(Δk_line·z/π)/(2π) and f(z) = exp(−2z²σ_r²)/√(2π), adds complex
/// circular Gaussian noise of per-pixel power p_n/half_pixels, and returns the
/// first half_pixels depth samples (mirror crop).
/// `noise_tag` and `column` select the per-acquisition, per-column noise stream.
std::vector<std::complex<double>> synthesize_aline(const std::vector<Scatterer>& line,
                                                   const SimConfig& cfg,
                                                   std::uint64_t noise_tag = 0, int column = 0);

/// Synthesizes all A-lines (independently; `jobs` worker threads yield
/// bit-identical output for any job count) and fills scan metadata.
ComplexBScan synthesize_bscan(const ScattererField& field, const SimConfig& cfg, int jobs = 1,
                              std::uint64_t noise_tag = 0);

/// CSV with header "column,z_um,strength".
void write_phantom_csv(const std::filesystem::path& path, const ScattererField& field);

} // namespace oce
