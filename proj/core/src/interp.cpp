#include "oce/interp.hpp"

#include <algorithm>
#include <cmath>

#include "oce/types.hpp"

namespace oce {

MagImage magnitude_image(const ComplexBScan& scan) {
  MagImage img;
  img.m = scan.m;
  img.n = scan.n;
  img.v.resize(scan.samples.size());
  for (std::size_t k = 0; k < scan.samples.size(); ++k) img.v[k] = std::abs(scan.samples[k]);
  return img;
}

void cubic_weights(double t, double w[4]) {
  // Keys kernel, a = -0.5: exact interpolation of quadratics, C1 continuity.
  const double t2 = t * t, t3 = t2 * t;
  w[0] = -0.5 * t3 + t2 - 0.5 * t;
  w[1] = 1.5 * t3 - 2.5 * t2 + 1.0;
  w[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
  w[3] = 0.5 * t3 - 0.5 * t2;
}

double sample_bicubic(const MagImage& img, double y, double x) {
  const double fy = std::floor(y), fx = std::floor(x);
  double wy[4], wx[4];
  cubic_weights(y - fy, wy);
  cubic_weights(x - fx, wx);
  const int iy = int(fy), ix = int(fx);
  double acc = 0.0;
  for (int r = 0; r < 4; ++r) {
    const int row = std::clamp(iy - 1 + r, 0, img.m - 1);
    double h = 0.0;
    for (int c = 0; c < 4; ++c) {
      const int col = std::clamp(ix - 1 + c, 0, img.n - 1);
      h += wx[c] * img.at(row, col);
    }
    acc += wy[r] * h;
  }
  return acc;
}

} // namespace oce
