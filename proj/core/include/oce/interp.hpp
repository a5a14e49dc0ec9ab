#pragma once

#include <vector>

namespace oce {

struct ComplexBScan;

/// Row-major scalar image (magnitudes of a complex B-scan).
struct MagImage {
  int m{0};
  int n{0};
  std::vector<double> v;

  [[nodiscard]] double at(int i, int j) const { return v[std::size_t(i) * n + j]; }
};

MagImage magnitude_image(const ComplexBScan& scan);

/// Keys cubic convolution weights (a = -0.5) for a fractional offset t in
/// [0, 1); w covers samples at integer offsets {-1, 0, 1, 2}. At t = 0 the
/// weights are exactly {0, 1, 0, 0}, so integer coordinates reproduce samples.
void cubic_weights(double t, double w[4]);

/// Bicubic sample at real coordinates (row y, column x); indices are clamped
/// to the image, so edge values repeat outside.
double sample_bicubic(const MagImage& img, double y, double x);

} // namespace oce
