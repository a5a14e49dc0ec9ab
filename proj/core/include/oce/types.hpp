#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace oce {

/// Complex-valued B-scan, m depth pixels by n A-lines, row-major (depth-major).
/// Units are micrometres internally; angles are radians.
struct ComplexBScan {
  int m{0}; ///< depth pixels per A-line
  int n{0}; ///< A-line (column) count
  double axial_pitch_um{0.0};   ///< depth sampling interval, in air
  double lateral_pitch_um{0.0}; ///< A-line spacing
  double lambda0_um{0.0};       ///< source central wavelength
  double refractive_index{1.0}; ///< r_n used for phase-to-displacement scaling
  std::vector<std::complex<double>> samples; ///< size m*n, index i*n + j

  ComplexBScan() = default;
  ComplexBScan(int m_, int n_) : m(m_), n(n_), samples(std::size_t(m_) * n_) {}

  [[nodiscard]] std::complex<double>& at(int i, int j) { return samples[std::size_t(i) * n + j]; }
  [[nodiscard]] const std::complex<double>& at(int i, int j) const {
    return samples[std::size_t(i) * n + j];
  }
  [[nodiscard]] bool in_bounds(int i, int j) const { return i >= 0 && i < m && j >= 0 && j < n; }

  /// Throws ConfigError if dimensions/pitches are non-positive or the sample
  /// buffer size disagrees with m*n; NumericError if any sample is non-finite.
  void validate() const;

  /// True when dimensions, pitches, wavelength and refractive index all match.
  [[nodiscard]] bool metadata_matches(const ComplexBScan& other) const;
};

/// Per-pixel displacement estimates in micrometres. Positive axial = deeper.
struct DisplacementField {
  int m{0};
  int n{0};
  std::vector<double> axial_um;   ///< size m*n
  std::vector<double> lateral_um; ///< size m*n
  std::vector<std::uint8_t> valid; ///< size m*n, 1 = estimate usable
  bool has_lateral{false}; ///< false for axial-only estimators (lateral is all zero)

  DisplacementField() = default;
  DisplacementField(int m_, int n_)
      : m(m_), n(n_), axial_um(std::size_t(m_) * n_), lateral_um(std::size_t(m_) * n_),
        valid(std::size_t(m_) * n_, 1) {}

  [[nodiscard]] std::size_t idx(int i, int j) const { return std::size_t(i) * n + j; }
  void validate() const;
};

/// Per-pixel dimensionless axial strain plus the fitting window used.
struct StrainField {
  int m{0};
  int n{0};
  std::vector<double> strain;      ///< size m*n, 0 where invalid
  std::vector<std::uint8_t> valid; ///< size m*n
  double window_um{0.0}; ///< axial least-squares window length

  StrainField() = default;
  StrainField(int m_, int n_)
      : m(m_), n(n_), strain(std::size_t(m_) * n_), valid(std::size_t(m_) * n_, 0) {}

  [[nodiscard]] std::size_t idx(int i, int j) const { return std::size_t(i) * n + j; }
  void validate() const;
};

} // namespace oce
