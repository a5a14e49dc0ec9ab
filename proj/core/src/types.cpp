#include "oce/types.hpp"

#include <cmath>

#include "oce/errors.hpp"

namespace oce {

void ComplexBScan::validate() const {
  if (m <= 0 || n <= 0) throw ConfigError("ComplexBScan: dimensions must be positive");
  if (axial_pitch_um <= 0.0 || lateral_pitch_um <= 0.0)
    throw ConfigError("ComplexBScan: pitches must be positive");
  if (lambda0_um <= 0.0) throw ConfigError("ComplexBScan: lambda0_um must be positive");
  if (refractive_index <= 0.0) throw ConfigError("ComplexBScan: refractive_index must be positive");
  if (samples.size() != std::size_t(m) * n)
    throw ConfigError("ComplexBScan: sample buffer size mismatch");
  for (const auto& s : samples)
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
      throw NumericError("ComplexBScan: non-finite sample");
}

bool ComplexBScan::metadata_matches(const ComplexBScan& other) const {
  return m == other.m && n == other.n && axial_pitch_um == other.axial_pitch_um &&
         lateral_pitch_um == other.lateral_pitch_um && lambda0_um == other.lambda0_um &&
         refractive_index == other.refractive_index;
}

void DisplacementField::validate() const {
  if (m <= 0 || n <= 0) throw ConfigError("DisplacementField: dimensions must be positive");
  const std::size_t sz = std::size_t(m) * n;
  if (axial_um.size() != sz || lateral_um.size() != sz || valid.size() != sz)
    throw ConfigError("DisplacementField: buffer size mismatch");
  for (std::size_t k = 0; k < sz; ++k)
    if (valid[k] && (!std::isfinite(axial_um[k]) || !std::isfinite(lateral_um[k])))
      throw NumericError("DisplacementField: non-finite valid entry");
}

void StrainField::validate() const {
  if (m <= 0 || n <= 0) throw ConfigError("StrainField: dimensions must be positive");
  const std::size_t sz = std::size_t(m) * n;
  if (strain.size() != sz || valid.size() != sz)
    throw ConfigError("StrainField: buffer size mismatch");
  for (std::size_t k = 0; k < sz; ++k)
    if (valid[k] && !std::isfinite(strain[k]))
      throw NumericError("StrainField: non-finite valid entry");
}

} // namespace oce
