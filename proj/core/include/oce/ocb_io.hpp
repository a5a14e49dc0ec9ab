#pragma once

#include <filesystem>
#include <string>

#include "oce/types.hpp"

namespace oce {

/// OCB container: magic "OCB1", u32 m, u32 n, f64 axial_pitch_um,
/// f64 lateral_pitch_um, f64 lambda0_um, f64 refractive_index, then m*n
/// samples row-major (depth-major), each f32 real + f32 imag. Little-endian.
/// Samples are held as f64 in memory and quantized to f32 on disk.

/// Writes scan to path. Throws NumericError on non-finite samples (nothing is
/// written), IoError on filesystem failure.
void write_bscan(const std::filesystem::path& path, const ComplexBScan& scan);

/// Reads an OCB file. Throws IoError with a distinct message for a malformed
/// header, truncated payload, or non-finite samples.
ComplexBScan read_bscan(const std::filesystem::path& path);

/// Displacement grid mirroring the OCB layout: magic "OCD1", same header
/// fields, then m*n records of f32 axial_um + f32 lateral_um, then m*n u8
/// validity flags. Pitch/wavelength metadata comes from the source scan.
struct FieldMeta {
  double axial_pitch_um{1.0};
  double lateral_pitch_um{1.0};
  double lambda0_um{1.0};
  double refractive_index{1.0};
};

void write_displacement_bin(const std::filesystem::path& path, const DisplacementField& field,
                            const FieldMeta& meta);
DisplacementField read_displacement_bin(const std::filesystem::path& path, FieldMeta* meta = nullptr);

/// CSV with header "i,j,axial_um,lateral_um,valid", one row per pixel.
void write_displacement_csv(const std::filesystem::path& path, const DisplacementField& field);
DisplacementField read_displacement_csv(const std::filesystem::path& path);

/// CSV with header "i,j,strain,valid".
void write_strain_csv(const std::filesystem::path& path, const StrainField& field);

} // namespace oce
