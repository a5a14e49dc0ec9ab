#include "oce/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "oce/dp_tracker.hpp"
#include "oce/errors.hpp"
#include "oce/interp.hpp"
#include "oce/parallel.hpp"

namespace oce {
namespace {

constexpr double kPi = std::numbers::pi;

void check_pair(const ComplexBScan& I1, const ComplexBScan& I2, const BaselineConfig& cfg,
                const char* who) {
  cfg.validate();
  I1.validate();
  I2.validate();
  if (!I1.metadata_matches(I2))
    throw ConfigError(std::string(who) + ": scan metadata mismatch");
}

double wrapped_phase(std::complex<double> sum, bool positive_deeper) {
  double phi = std::arg(sum);
  if (positive_deeper) phi = -phi;
  if (phi <= -kPi) phi += 2.0 * kPi;
  return phi;
}

double phase_to_um(double phi, const ComplexBScan& scan) {
  return scan.lambda0_um * phi / (4.0 * kPi * scan.refractive_index);
}

/// Integer-offset ZNCC of magnitude windows; the window shrinks to the rows
/// and columns valid in both images. informative = both variances positive.
struct IntNcc {
  double value{0.0};
  bool evaluable{false};
  bool informative{false};
};

IntNcc zncc_int(const MagImage& a, const MagImage& b, int i, int j, int da, int dl, int w1,
                int w2) {
  IntNcc out;
  const int x_lo = std::max({-w1, -i, -(i + da)});
  const int x_hi = std::min({w1, a.m - 1 - i, b.m - 1 - (i + da)});
  const int y_lo = std::max({-w2, -j, -(j + dl)});
  const int y_hi = std::min({w2, a.n - 1 - j, b.n - 1 - (j + dl)});
  if (x_lo > x_hi || y_lo > y_hi) return out;
  out.evaluable = true;
  double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
  for (int x = x_lo; x <= x_hi; ++x) {
    const double* ra = a.v.data() + std::size_t(i + x) * a.n + j;
    const double* rb = b.v.data() + std::size_t(i + da + x) * b.n + (j + dl);
    for (int y = y_lo; y <= y_hi; ++y) {
      const double va = ra[y], vb = rb[y];
      sa += va;
      sb += vb;
      saa += va * va;
      sbb += vb * vb;
      sab += va * vb;
    }
  }
  const double inv = 1.0 / double((x_hi - x_lo + 1) * (y_hi - y_lo + 1));
  const double var_a = saa - sa * sa * inv;
  const double var_b = sbb - sb * sb * inv;
  if (var_a <= 0.0 || var_b <= 0.0) return out; // flat window: value 0, uninformative
  out.informative = true;
  out.value = std::clamp((sab - sa * sb * inv) / std::sqrt(var_a * var_b), -1.0, 1.0);
  return out;
}

/// Vertex of the parabola through (-1, cm), (0, c0), (1, cp) near a maximum,
/// clamped to [-0.5, 0.5]; 0 when the points are not concave.
double parabola_peak(double cm, double c0, double cp) {
  const double denom = cm + cp - 2.0 * c0;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp((cm - cp) / (2.0 * denom), -0.5, 0.5);
}

/// Laterally vector-summed interframe product of row i of I1 against row
/// i + shift of I2 for column j; zero when the shifted row is out of range.
std::complex<double> lateral_product(const ComplexBScan& I1, const ComplexBScan& I2, int i,
                                     int shift, int j, int halfwidth) {
  const int i2 = i + shift;
  if (i2 < 0 || i2 >= I2.m) return {0.0, 0.0};
  std::complex<double> sum{0.0, 0.0};
  for (int w = -halfwidth; w <= halfwidth; ++w) {
    const int c = j + w;
    if (c < 0 || c >= I1.n) continue;
    sum += I1.at(i, c) * std::conj(I2.at(i2, c));
  }
  return sum;
}

} // namespace

void BaselineConfig::validate() const {
  if (kasai_axial < 1 || kasai_lateral < 1)
    throw ConfigError("baseline.kasai_axial/kasai_lateral: must be at least 1");
  if (cc_search_axial < 0 || cc_search_lateral < 0)
    throw ConfigError("baseline.cc_search_axial/cc_search_lateral: must be non-negative");
  if (cc_w1 < 0 || cc_w2 < 0) throw ConfigError("baseline.cc_w1/cc_w2: must be non-negative");
  if (vp_lateral_halfwidth < 0)
    throw ConfigError("baseline.vp_lateral_halfwidth: must be non-negative");
  if (vp_gradient_window < 1)
    throw ConfigError("baseline.vp_gradient_window: must be at least 1");
}

DisplacementField kasai_track(const ComplexBScan& I1, const ComplexBScan& I2,
                              const BaselineConfig& cfg, int jobs) {
  check_pair(I1, I2, cfg, "kasai_track");
  DisplacementField field(I1.m, I1.n);
  field.has_lateral = false;
  const int lo_i = (cfg.kasai_axial - 1) / 2, hi_i = cfg.kasai_axial / 2;
  const int lo_j = (cfg.kasai_lateral - 1) / 2, hi_j = cfg.kasai_lateral / 2;
  parallel_for_index(I1.n, jobs, [&](int j) {
    for (int i = 0; i < I1.m; ++i) {
      std::complex<double> sum{0.0, 0.0};
      for (int x = std::max(0, i - lo_i); x <= std::min(I1.m - 1, i + hi_i); ++x)
        for (int y = std::max(0, j - lo_j); y <= std::min(I1.n - 1, j + hi_j); ++y)
          sum += I1.at(x, y) * std::conj(I2.at(x, y));
      const std::size_t k = field.idx(i, j);
      if (std::abs(sum) > 0.0) {
        field.axial_um[k] = phase_to_um(wrapped_phase(sum, cfg.positive_deeper), I1);
      } else {
        field.axial_um[k] = 0.0;
        field.valid[k] = 0;
      }
    }
  });
  return field;
}

DisplacementField cc_track(const ComplexBScan& I1, const ComplexBScan& I2,
                           const BaselineConfig& cfg, int jobs) {
  check_pair(I1, I2, cfg, "cc_track");
  const MagImage mag1 = magnitude_image(I1);
  const MagImage mag2 = magnitude_image(I2);
  DisplacementField field(I1.m, I1.n);
  field.has_lateral = true;
  const int sa = cfg.cc_search_axial, sl = cfg.cc_search_lateral;
  const int na = 2 * sa + 1, nl = 2 * sl + 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  parallel_for_index(I1.n, jobs, [&](int j) {
    std::vector<double> table(std::size_t(na) * nl);
    for (int i = 0; i < I1.m; ++i) {
      std::fill(table.begin(), table.end(), nan);
      double best_v = 0.0;
      int best_da = 0, best_dl = 0;
      bool found = false, informative = false;
      for (int da = -sa; da <= sa; ++da) {
        for (int dl = -sl; dl <= sl; ++dl) {
          const IntNcc c = zncc_int(mag1, mag2, i, j, da, dl, cfg.cc_w1, cfg.cc_w2);
          if (!c.evaluable) continue;
          table[std::size_t(da + sa) * nl + (dl + sl)] = c.value;
          informative = informative || c.informative;
          // Ties prefer the smaller offset: squared norm, then |da|, da, dl.
          bool better = false;
          if (!found || c.value > best_v) {
            better = true;
          } else if (c.value == best_v) {
            const int n_new = da * da + dl * dl, n_old = best_da * best_da + best_dl * best_dl;
            if (n_new != n_old)
              better = n_new < n_old;
            else if (std::abs(da) != std::abs(best_da))
              better = std::abs(da) < std::abs(best_da);
            else if (da != best_da)
              better = da < best_da;
            else
              better = dl < best_dl;
          }
          if (better) {
            best_v = c.value;
            best_da = da;
            best_dl = dl;
            found = true;
          }
        }
      }
      const std::size_t k = field.idx(i, j);
      if (!found || !informative) {
        field.valid[k] = 0;
        continue;
      }
      double ya = double(best_da), xl = double(best_dl);
      if (cfg.cc_subpixel == BaselineConfig::Subpixel::Paraboloid) {
        const auto cell = [&](int da, int dl) {
          return table[std::size_t(da + sa) * nl + (dl + sl)];
        };
        if (best_da - 1 >= -sa && best_da + 1 <= sa) {
          const double cm = cell(best_da - 1, best_dl), c0 = cell(best_da, best_dl),
                       cp = cell(best_da + 1, best_dl);
          if (std::isfinite(cm) && std::isfinite(cp)) ya += parabola_peak(cm, c0, cp);
        }
        if (best_dl - 1 >= -sl && best_dl + 1 <= sl) {
          const double cm = cell(best_da, best_dl - 1), c0 = cell(best_da, best_dl),
                       cp = cell(best_da, best_dl + 1);
          if (std::isfinite(cm) && std::isfinite(cp)) xl += parabola_peak(cm, c0, cp);
        }
      } else {
        // Coordinate ascent on the interpolated correlation, halving steps.
        double cur = best_v;
        double step = 0.5;
        for (int iter = 0; iter < 8; ++iter) {
          bool moved = false;
          const double cand[4][2] = {{ya - step, xl}, {ya + step, xl}, {ya, xl - step},
                                     {ya, xl + step}};
          for (const auto& c : cand) {
            if (c[0] < -double(sa) || c[0] > double(sa) || c[1] < -double(sl) ||
                c[1] > double(sl))
              continue;
            const NccValue v = ncc_px(mag1, mag2, i, j, c[0], c[1], cfg.cc_w1, cfg.cc_w2);
            if (v.overlap && v.value > cur) {
              cur = v.value;
              ya = c[0];
              xl = c[1];
              moved = true;
            }
          }
          if (!moved) step *= 0.5;
        }
      }
      field.axial_um[k] = ya * I1.axial_pitch_um;
      field.lateral_um[k] = xl * I1.lateral_pitch_um;
    }
  });
  return field;
}

DisplacementField vp_track(const ComplexBScan& I1, const ComplexBScan& I2,
                           const BaselineConfig& cfg, int jobs) {
  check_pair(I1, I2, cfg, "vp_track");
  DisplacementField field(I1.m, I1.n);
  field.has_lateral = false;
  const int hw = cfg.vp_lateral_halfwidth;
  const int G = cfg.vp_gradient_window;
  const double pitch = I1.axial_pitch_um;

  parallel_for_index(I1.n, jobs, [&](int j) {
    std::vector<std::complex<double>> window; // trailing gradient products
    window.reserve(std::size_t(G));
    std::size_t next = 0;

    const std::complex<double> b0 = lateral_product(I1, I2, 0, 0, j, hw);
    double disp = 0.0;
    bool ok0 = std::abs(b0) > 0.0;
    if (ok0) disp = phase_to_um(wrapped_phase(b0, cfg.positive_deeper), I1);
    field.axial_um[field.idx(0, j)] = disp;
    field.valid[field.idx(0, j)] = std::uint8_t(ok0);

    std::complex<double> b_prev = b0;
    double last_inc = 0.0;
    for (int i = 1; i < I1.m; ++i) {
      // Supra-pixel compensation: compare against the row the accumulated
      // displacement points at, so the wrapped gradient stays sub-pitch.
      const int raw_shift = int(std::lround(disp / pitch));
      const int shift = std::clamp(raw_shift, -i, I2.m - 1 - i);
      const std::complex<double> b_cur = lateral_product(I1, I2, i, shift, j, hw);

      bool ok = shift == raw_shift && std::abs(b_cur) > 0.0;
      if (ok) {
        // The product of consecutive lateral sums carries the interframe
        // phase *change* between depths; vector-average the trailing window.
        const std::complex<double> prod = b_cur * std::conj(b_prev);
        if (window.size() < std::size_t(G))
          window.push_back(prod);
        else {
          window[next] = prod;
          next = (next + 1) % std::size_t(G);
        }
        std::complex<double> sum{0.0, 0.0};
        for (const auto& v : window) sum += v;
        if (std::abs(sum) > 0.0) {
          // arg(b) is phi1 - phi2, so the increment sign matches wrapped_phase.
          last_inc = phase_to_um(wrapped_phase(sum, cfg.positive_deeper), I1);
        } else {
          ok = false;
        }
        b_prev = b_cur;
      }
      disp += last_inc; // zero-amplitude rows carry the neighbouring gradient
      field.axial_um[field.idx(i, j)] = disp;
      field.valid[field.idx(i, j)] = std::uint8_t(ok);
    }
  });
  return field;
}

DisplacementField ccvp_track(const ComplexBScan& I1, const ComplexBScan& I2,
                             const BaselineConfig& cfg, int jobs) {
  check_pair(I1, I2, cfg, "ccvp_track");
  const DisplacementField cc = cc_track(I1, I2, cfg, jobs);
  const int m = I1.m, n = I1.n;
  const double pitch = I1.axial_pitch_um;

  // Median-smooth the CC axial estimate over 5 depth pixels, then round to
  // whole pixels; these shifts realign I2 so VP only sees sub-pixel residuals.
  std::vector<int> shift_px(std::size_t(m) * n, 0);
  std::vector<double> vals;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < m; ++i) {
      vals.clear();
      for (int x = std::max(0, i - 2); x <= std::min(m - 1, i + 2); ++x)
        if (cc.valid[cc.idx(x, j)]) vals.push_back(cc.axial_um[cc.idx(x, j)]);
      if (vals.empty()) continue;
      std::sort(vals.begin(), vals.end());
      const double median = vals[(vals.size() - 1) / 2];
      shift_px[std::size_t(i) * n + j] = int(std::lround(median / pitch));
    }
  }

  ComplexBScan aligned = I2;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const int src = std::clamp(i + shift_px[std::size_t(i) * n + j], 0, m - 1);
      aligned.samples[std::size_t(i) * n + j] = I2.at(src, j);
    }

  const DisplacementField vp = vp_track(I1, aligned, cfg, jobs);
  DisplacementField field(m, n);
  field.has_lateral = true;
  for (std::size_t k = 0; k < field.axial_um.size(); ++k) {
    field.axial_um[k] = double(shift_px[k]) * pitch + vp.axial_um[k];
    field.lateral_um[k] = cc.lateral_um[k];
    field.valid[k] = std::uint8_t(cc.valid[k] && vp.valid[k]);
  }
  return field;
}

DisplacementField compensate_translation(const DisplacementField& field,
                                         const DisplacementField& reference, double window_um,
                                         double depth_um, double axial_pitch_um) {
  field.validate();
  reference.validate();
  if (field.m != reference.m || field.n != reference.n)
    throw ConfigError("compensate_translation: field size mismatch");
  if (!(axial_pitch_um > 0.0))
    throw ConfigError("compensate_translation: axial_pitch_um must be positive");
  if (window_um < 0.0) throw ConfigError("compensate_translation: window_um must be >= 0");

  double sum = 0.0;
  std::size_t count = 0;
  for (int i = 0; i < reference.m; ++i) {
    if (std::fabs(double(i) * axial_pitch_um - depth_um) > window_um / 2.0) continue;
    for (int j = 0; j < reference.n; ++j) {
      const std::size_t k = reference.idx(i, j);
      if (!reference.valid[k]) continue;
      sum += reference.axial_um[k];
      ++count;
    }
  }
  DisplacementField out = field;
  if (count == 0) return out;
  const double offset = sum / double(count);
  for (double& v : out.axial_um) v += offset;
  return out;
}

} // namespace oce
