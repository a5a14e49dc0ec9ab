#include "oce/dp_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "oce/errors.hpp"
#include "oce/interp.hpp"
#include "oce/parallel.hpp"

namespace oce {
namespace {

constexpr double kPi = std::numbers::pi;

long to_pixels(double um, double pitch_um, PixelRounding rounding) {
  const double px = um / pitch_um;
  return rounding == PixelRounding::Nearest ? std::lround(px) : long(std::floor(px));
}

/// 1D weighted-L1 lower envelope over ascending positions. out_v/out_src give
/// min_j val[j] + w*(distance), with the value recomputed directly from the
/// winning source so results match the naive scan bitwise. better(k1, k2)
/// breaks exact ties.
template <typename Better>
void envelope_pass(const double* pos, const double* val, int K, double w, const Better& better,
                   double* out_v, int* out_src) {
  int src = 0;
  for (int k = 0; k < K; ++k) {
    double run = val[src] + w * (pos[k] - pos[src]);
    if (val[k] < run || (val[k] == run && better(k, src))) {
      src = k;
      run = val[k];
    }
    out_v[k] = run;
    out_src[k] = src;
  }
  src = K - 1;
  for (int k = K - 1; k >= 0; --k) {
    double run = val[src] + w * (pos[src] - pos[k]);
    if (val[k] < run || (val[k] == run && better(k, src))) {
      src = k;
      run = val[k];
    }
    if (run < out_v[k] || (run == out_v[k] && better(src, out_src[k]))) {
      out_v[k] = run;
      out_src[k] = src;
    }
  }
}

/// ZNCC between the |I1| window around (i, j) and the bicubically sampled
/// |I2| window around (i + da_px, j + dl_px); the unshifted window shrinks at
/// borders and interpolation clamps sample indices.
NccValue ncc_mag(const MagImage& mag1, const MagImage& mag2, int i, int j, double da_px,
                 double dl_px, int w1, int w2, std::vector<double>& hrow_scratch) {
  const int x_lo = std::max(-w1, -i), x_hi = std::min(w1, mag1.m - 1 - i);
  const int y_lo = std::max(-w2, -j), y_hi = std::min(w2, mag1.n - 1 - j);
  const double ci = double(i) + da_px, cj = double(j) + dl_px;
  if (ci + x_hi < 0.0 || ci + x_lo > double(mag2.m - 1) || cj + y_hi < 0.0 ||
      cj + y_lo > double(mag2.n - 1))
    return {0.0, false};

  const double fi = std::floor(ci), fj = std::floor(cj);
  double wv[4], wh[4];
  cubic_weights(ci - fi, wv);
  cubic_weights(cj - fj, wh);
  const int base_i = int(fi), base_j = int(fj);

  // Horizontal cubic pass over the integer rows the vertical pass will touch.
  const int rows = (x_hi - x_lo) + 4;
  const int cols = (y_hi - y_lo) + 1;
  hrow_scratch.resize(std::size_t(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    const int row = std::clamp(base_i + x_lo - 1 + r, 0, mag2.m - 1);
    const double* src = mag2.v.data() + std::size_t(row) * mag2.n;
    for (int y = 0; y < cols; ++y) {
      const int c0 = base_j + y_lo + y - 1;
      double h = 0.0;
      for (int k = 0; k < 4; ++k) h += wh[k] * src[std::clamp(c0 + k, 0, mag2.n - 1)];
      hrow_scratch[std::size_t(r) * cols + y] = h;
    }
  }

  double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
  const int count = (x_hi - x_lo + 1) * cols;
  for (int x = x_lo; x <= x_hi; ++x) {
    const double* m1row = mag1.v.data() + std::size_t(i + x) * mag1.n + (j + y_lo);
    const double* h0 = hrow_scratch.data() + std::size_t(x - x_lo) * cols;
    const double* h1 = h0 + cols;
    const double* h2 = h1 + cols;
    const double* h3 = h2 + cols;
    for (int y = 0; y < cols; ++y) {
      const double a = m1row[y];
      const double b = wv[0] * h0[y] + wv[1] * h1[y] + wv[2] * h2[y] + wv[3] * h3[y];
      sa += a;
      sb += b;
      saa += a * a;
      sbb += b * b;
      sab += a * b;
    }
  }
  const double inv = 1.0 / double(count);
  const double var_a = saa - sa * sa * inv;
  const double var_b = sbb - sb * sb * inv;
  if (var_a <= 0.0 || var_b <= 0.0) return {0.0, true};
  const double cov = sab - sa * sb * inv;
  return {std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0), true};
}

} // namespace

void DPConfig::validate() const {
  if (!(a_max_um > 0.0)) throw ConfigError("dp.a_max_um: must be positive");
  if (l_max_um < 0.0) throw ConfigError("dp.l_max_um: must be non-negative");
  if (l_max_um > 0.0 && !(lateral_step_um > 0.0))
    throw ConfigError("dp.lateral_step_um: must be positive when l_max_um > 0");
  if (lateral_halfwidth < 0) throw ConfigError("dp.lateral_halfwidth: must be non-negative");
  if (w1 < 0 || w2 < 0) throw ConfigError("dp.w1/w2: must be non-negative");
  if (beta_per_um < 0.0 || gamma_per_um < 0.0)
    throw ConfigError("dp.beta_per_um/gamma_per_um: must be non-negative");
}

bool StateGrid::better_state(int p1, int p2) const {
  const int r1 = a_index(p1), r2 = a_index(p2);
  const double f1 = std::fabs(axial_um[std::size_t(r1)]);
  const double f2 = std::fabs(axial_um[std::size_t(r2)]);
  if (f1 != f2) return f1 < f2;
  if (r1 != r2) return r1 < r2;
  return l_index(p1) < l_index(p2);
}

StateGrid build_states(const DPConfig& cfg, double lambda0_um, double refractive_index) {
  cfg.validate();
  if (!(lambda0_um > 0.0) || !(refractive_index > 0.0))
    throw ConfigError("build_states: lambda0_um and refractive_index must be positive");
  StateGrid grid;
  const double step_a = lambda0_um / (2.0 * refractive_index);
  int r_max = int(std::floor(cfg.a_max_um / step_a));
  while (r_max > 0 && double(r_max) * step_a >= cfg.a_max_um) --r_max;
  grid.axial_um.reserve(std::size_t(2 * r_max + 1));
  for (int r = -r_max; r <= r_max; ++r) grid.axial_um.push_back(double(r) * step_a);
  grid.zero_a = r_max;

  int q_max = 0;
  if (cfg.l_max_um > 0.0) {
    q_max = int(std::floor(cfg.l_max_um / cfg.lateral_step_um));
    while (q_max > 0 && double(q_max) * cfg.lateral_step_um >= cfg.l_max_um) --q_max;
  }
  grid.lateral_um.reserve(std::size_t(2 * q_max + 1));
  for (int q = -q_max; q <= q_max; ++q) grid.lateral_um.push_back(double(q) * cfg.lateral_step_um);
  grid.zero_l = q_max;
  return grid;
}

PhaseDiff vector_phase_diff(const ComplexBScan& I1, const ComplexBScan& I2, int i, int j,
                            int ashift_px, int lshift_px, int W, bool positive_deeper) {
  PhaseDiff out;
  const int i2 = i + ashift_px;
  if (i < 0 || i >= I1.m || i2 < 0 || i2 >= I2.m) return out;
  const int half = W / 2;
  std::complex<double> sum{0.0, 0.0};
  bool any = false;
  for (int w = -half; w <= half; ++w) {
    const int c1 = j + w;
    const int c2 = j + lshift_px + w;
    if (c1 < 0 || c1 >= I1.n || c2 < 0 || c2 >= I2.n) continue;
    sum += I1.at(i, c1) * std::conj(I2.at(i2, c2));
    any = true;
  }
  if (!any) return out;
  out.amplitude = std::abs(sum);
  if (out.amplitude == 0.0) return out; // low-confidence marker: ok stays false
  double phi = std::arg(sum); // phase of sum(I1 * conj(I2)) = phi1 - phi2
  if (positive_deeper) phi = -phi;
  if (phi <= -kPi) phi += 2.0 * kPi;
  out.phase = phi;
  out.ok = true;
  return out;
}

double state_displacement(double a_r_um, double phase, double lambda0_um,
                          double refractive_index) {
  return a_r_um + lambda0_um * phase / (4.0 * kPi * refractive_index);
}

NccValue ncc(const ComplexBScan& I1, const ComplexBScan& I2, int i, int j, double d_a_um,
             double d_l_um, int w1, int w2) {
  if (!I1.in_bounds(i, j)) throw ConfigError("ncc: pixel out of bounds");
  const MagImage mag1 = magnitude_image(I1);
  const MagImage mag2 = magnitude_image(I2);
  std::vector<double> scratch;
  return ncc_mag(mag1, mag2, i, j, d_a_um / I2.axial_pitch_um, d_l_um / I2.lateral_pitch_um, w1,
                 w2, scratch);
}

NccValue ncc_px(const MagImage& mag1, const MagImage& mag2, int i, int j, double da_px,
                double dl_px, int w1, int w2) {
  if (i < 0 || i >= mag1.m || j < 0 || j >= mag1.n)
    throw ConfigError("ncc_px: pixel out of bounds");
  std::vector<double> scratch;
  return ncc_mag(mag1, mag2, i, j, da_px, dl_px, w1, w2, scratch);
}

double data_cost(double ncc_value, DataTerm term) {
  return term == DataTerm::OneMinusNcc ? 1.0 - ncc_value : std::fabs(ncc_value);
}

double reg_cost(double d_a_um, double d_l_um, double prev_d_a_um, double prev_d_l_um,
                double beta_per_um, double gamma_per_um) {
  return beta_per_um * std::fabs(d_a_um - prev_d_a_um) +
         gamma_per_um * std::fabs(d_l_um - prev_d_l_um);
}

void min_transition_naive(const StateGrid& grid, const std::vector<double>& prev, double beta,
                          double gamma, std::vector<double>& out_cost,
                          std::vector<int>& out_src) {
  const int S = int(grid.size());
  if (int(prev.size()) != S) throw ConfigError("min_transition: prev size mismatch");
  out_cost.resize(std::size_t(S));
  out_src.resize(std::size_t(S));
  for (int p = 0; p < S; ++p) {
    double best = 0.0;
    int best_src = -1;
    for (int p2 = 0; p2 < S; ++p2) {
      // Same accumulation order as the separable passes: axial term first.
      const double v =
          (prev[std::size_t(p2)] + beta * std::fabs(grid.a(p) - grid.a(p2))) +
          gamma * std::fabs(grid.l(p) - grid.l(p2));
      if (best_src < 0 || v < best || (v == best && grid.better_state(p2, best_src))) {
        best = v;
        best_src = p2;
      }
    }
    out_cost[std::size_t(p)] = best;
    out_src[std::size_t(p)] = best_src;
  }
}

void min_transition(const StateGrid& grid, const std::vector<double>& prev, double beta,
                    double gamma, std::vector<double>& out_cost, std::vector<int>& out_src) {
  const int R = grid.R(), Q = grid.Q();
  const int S = R * Q;
  if (int(prev.size()) != S) throw ConfigError("min_transition: prev size mismatch");
  out_cost.resize(std::size_t(S));
  out_src.resize(std::size_t(S));

  const double* a_pos = grid.axial_um.data();
  const double* l_pos = grid.lateral_um.data();

  // Stage A: per lateral column, envelope along the axial axis.
  std::vector<double> m1(static_cast<std::size_t>(S));  // [r*Q + q] = min_r' prev[r',q] + beta*|a_r - a_r'|
  std::vector<int> s1(static_cast<std::size_t>(S));     // winning r'
  std::vector<double> col_val(static_cast<std::size_t>(R));
  std::vector<double> col_out(static_cast<std::size_t>(R));
  std::vector<int> col_src(static_cast<std::size_t>(R));
  const auto better_a = [&](int r1, int r2) {
    const double f1 = std::fabs(a_pos[r1]), f2 = std::fabs(a_pos[r2]);
    if (f1 != f2) return f1 < f2;
    return r1 < r2;
  };
  for (int q = 0; q < Q; ++q) {
    for (int r = 0; r < R; ++r) col_val[std::size_t(r)] = prev[std::size_t(r) * Q + q];
    envelope_pass(a_pos, col_val.data(), R, beta, better_a, col_out.data(), col_src.data());
    for (int r = 0; r < R; ++r) {
      m1[std::size_t(r) * Q + q] = col_out[std::size_t(r)];
      s1[std::size_t(r) * Q + q] = col_src[std::size_t(r)];
    }
  }

  // Stage L: per axial row, envelope along the lateral axis; tie-break uses
  // the composed source (|a|, r index, l index).
  std::vector<double> row_out(static_cast<std::size_t>(Q));
  std::vector<int> row_src(static_cast<std::size_t>(Q));
  for (int r = 0; r < R; ++r) {
    const double* row_val = m1.data() + std::size_t(r) * Q;
    const int* row_s1 = s1.data() + std::size_t(r) * Q;
    const auto better_l = [&](int q1, int q2) {
      const int r1 = row_s1[q1], r2 = row_s1[q2];
      const double f1 = std::fabs(a_pos[r1]), f2 = std::fabs(a_pos[r2]);
      if (f1 != f2) return f1 < f2;
      if (r1 != r2) return r1 < r2;
      return q1 < q2;
    };
    envelope_pass(l_pos, row_val, Q, gamma, better_l, row_out.data(), row_src.data());
    for (int q = 0; q < Q; ++q) {
      const int qs = row_src[std::size_t(q)];
      out_cost[std::size_t(r) * Q + q] = row_out[std::size_t(q)];
      out_src[std::size_t(r) * Q + q] = row_s1[qs] * Q + qs;
    }
  }
}

CostLattice build_cost_lattice(const ComplexBScan& I1, const ComplexBScan& I2, int j,
                               const StateGrid& grid, const DPConfig& cfg) {
  cfg.validate();
  if (j < 0 || j >= I1.n) throw ConfigError("build_cost_lattice: column out of range");
  if (!I1.metadata_matches(I2)) throw ConfigError("build_cost_lattice: scan metadata mismatch");

  const int m = I1.m;
  const int S = int(grid.size());
  CostLattice lat;
  lat.m = m;
  lat.S = S;
  lat.data.resize(std::size_t(m) * S);
  lat.alpha_um.resize(std::size_t(m) * S);
  lat.eval.resize(std::size_t(m) * S);

  const MagImage mag1 = magnitude_image(I1);
  const MagImage mag2 = magnitude_image(I2);

  // Integer pixel shifts per state; states sharing a shift pair share the
  // phase measurement, so cache per distinct pair.
  std::vector<long> sa(static_cast<std::size_t>(S)), sl(static_cast<std::size_t>(S));
  std::vector<std::pair<long, long>> pairs;
  std::vector<int> pair_of(static_cast<std::size_t>(S));
  for (int p = 0; p < S; ++p) {
    sa[std::size_t(p)] = to_pixels(grid.a(p), I1.axial_pitch_um, cfg.rounding);
    sl[std::size_t(p)] = to_pixels(grid.l(p), I1.lateral_pitch_um, cfg.rounding);
    const std::pair<long, long> key{sa[std::size_t(p)], sl[std::size_t(p)]};
    int idx = -1;
    for (std::size_t t = 0; t < pairs.size(); ++t)
      if (pairs[t] == key) {
        idx = int(t);
        break;
      }
    if (idx < 0) {
      idx = int(pairs.size());
      pairs.push_back(key);
    }
    pair_of[std::size_t(p)] = idx;
  }

  const int W = 2 * cfg.lateral_halfwidth;
  std::vector<PhaseDiff> phase(pairs.size() * std::size_t(m));
  for (std::size_t t = 0; t < pairs.size(); ++t)
    for (int i = 0; i < m; ++i)
      phase[t * std::size_t(m) + i] =
          vector_phase_diff(I1, I2, i, j, int(pairs[t].first), int(pairs[t].second), W,
                            cfg.positive_deeper);

  std::vector<double> scratch;
  const double lambda0 = I1.lambda0_um, rn = I1.refractive_index;
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < S; ++p) {
      const PhaseDiff& pd = phase[std::size_t(pair_of[std::size_t(p)]) * m + i];
      const double alpha = state_displacement(grid.a(p), pd.ok ? pd.phase : 0.0, lambda0, rn);
      const NccValue d = ncc_mag(mag1, mag2, i, j, alpha / I1.axial_pitch_um,
                                 grid.l(p) / I1.lateral_pitch_um, cfg.w1, cfg.w2, scratch);
      const std::size_t k = lat.idx(i, p);
      lat.alpha_um[k] = alpha;
      lat.data[k] = data_cost(d.value, cfg.data_term);
      const int i2 = i + int(sa[std::size_t(p)]);
      lat.eval[k] = std::uint8_t(d.overlap && i2 >= 0 && i2 < m);
    }
  }
  return lat;
}

ViterbiPath viterbi_min_path(const StateGrid& grid, const std::vector<double>& data, int m,
                             double beta, double gamma, bool use_naive_transitions) {
  const int S = int(grid.size());
  if (m < 1 || int(data.size()) != m * S)
    throw ConfigError("viterbi_min_path: lattice size mismatch");

  std::vector<double> prev(data.begin(), data.begin() + S);
  std::vector<double> tcost, cur(static_cast<std::size_t>(S));
  std::vector<int> tsrc;
  std::vector<int> back(std::size_t(m) * S, -1);
  for (int i = 1; i < m; ++i) {
    if (use_naive_transitions)
      min_transition_naive(grid, prev, beta, gamma, tcost, tsrc);
    else
      min_transition(grid, prev, beta, gamma, tcost, tsrc);
    for (int p = 0; p < S; ++p) {
      cur[std::size_t(p)] = data[std::size_t(i) * S + p] + tcost[std::size_t(p)];
      back[std::size_t(i) * S + p] = tsrc[std::size_t(p)];
    }
    std::swap(prev, cur);
  }

  int best = 0;
  for (int p = 1; p < S; ++p) {
    if (prev[std::size_t(p)] < prev[std::size_t(best)] ||
        (prev[std::size_t(p)] == prev[std::size_t(best)] && grid.better_state(p, best)))
      best = p;
  }
  ViterbiPath path;
  path.total_cost = prev[std::size_t(best)];
  path.states.resize(std::size_t(m));
  int p = best;
  for (int i = m - 1; i >= 0; --i) {
    path.states[std::size_t(i)] = p;
    if (i > 0) p = back[std::size_t(i) * S + p];
  }
  return path;
}

DisplacementField track(const ComplexBScan& I1, const ComplexBScan& I2, const DPConfig& cfg,
                        int jobs) {
  cfg.validate();
  I1.validate();
  I2.validate();
  if (!I1.metadata_matches(I2)) throw ConfigError("track: scan metadata mismatch");

  const StateGrid grid = build_states(cfg, I1.lambda0_um, I1.refractive_index);
  DisplacementField field(I1.m, I1.n);
  field.has_lateral = grid.Q() > 1;

  parallel_for_index(I1.n, jobs, [&](int j) {
    const CostLattice lat = build_cost_lattice(I1, I2, j, grid, cfg);
    const ViterbiPath path =
        viterbi_min_path(grid, lat.data, lat.m, cfg.beta_per_um, cfg.gamma_per_um);
    for (int i = 0; i < I1.m; ++i) {
      const int p = path.states[std::size_t(i)];
      const std::size_t k = field.idx(i, j);
      field.axial_um[k] = lat.alpha_um[lat.idx(i, p)];
      field.lateral_um[k] = grid.l(p);
      field.valid[k] = lat.eval[lat.idx(i, p)];
    }
  });
  return field;
}

} // namespace oce
