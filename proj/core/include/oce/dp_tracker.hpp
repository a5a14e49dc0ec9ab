#pragma once

#include <cstdint>
#include <vector>

#include "oce/interp.hpp"
#include "oce/types.hpp"

namespace oce {

enum class DataTerm {
  OneMinusNcc, ///< 1 - NCC (default; low cost = high correlation)
  AbsNcc       ///< |NCC| taken literally as the lattice cost
};

enum class PixelRounding { Nearest, Floor };

/// Dynamic-programming tracker configuration. Distances in micrometres.
struct DPConfig {
  double a_max_um{150.0};      ///< axial search bound; wrap states satisfy |a_r| < a_max
  double l_max_um{0.0};        ///< lateral search bound; 0 = pure axial tracking
  double lateral_step_um{12.0}; ///< quantization of the lateral state set
  int lateral_halfwidth{10};   ///< W/2: phase averaging spans W+1 columns
  int w1{5};                   ///< NCC axial half-extent (window 2*w1+1 rows)
  int w2{5};                   ///< NCC lateral half-extent (window 2*w2+1 columns)
  double beta_per_um{1e-5};    ///< axial regularization weight
  double gamma_per_um{1e-5};   ///< lateral regularization weight
  DataTerm data_term{DataTerm::OneMinusNcc};
  PixelRounding rounding{PixelRounding::Nearest}; ///< state-to-pixel shift rounding
  bool positive_deeper{true};  ///< phase sign convention: motion toward depth = positive

  void validate() const;
};

/// Decision space S = A x L. Axial states are the phase-wrap ladder
/// a_r = r*lambda0/(2*r_n) with |a_r| < a_max; lateral states sit on
/// lateral_step_um with |l_q| < l_max (the zero state always exists).
/// Flat state index p = a_index*Q + l_index with both axes ascending.
struct StateGrid {
  std::vector<double> axial_um;   ///< ascending, symmetric around 0
  std::vector<double> lateral_um; ///< ascending, symmetric around 0
  int zero_a{0}; ///< index of a = 0
  int zero_l{0}; ///< index of l = 0

  [[nodiscard]] int R() const { return int(axial_um.size()); }
  [[nodiscard]] int Q() const { return int(lateral_um.size()); }
  [[nodiscard]] std::size_t size() const { return axial_um.size() * lateral_um.size(); }
  [[nodiscard]] int a_index(int p) const { return p / Q(); }
  [[nodiscard]] int l_index(int p) const { return p % Q(); }
  [[nodiscard]] double a(int p) const { return axial_um[std::size_t(a_index(p))]; }
  [[nodiscard]] double l(int p) const { return lateral_um[std::size_t(l_index(p))]; }

  /// Documented tie-break: smaller |a|, then smaller a index, then smaller l index.
  [[nodiscard]] bool better_state(int p1, int p2) const;
};

StateGrid build_states(const DPConfig& cfg, double lambda0_um, double refractive_index);

struct PhaseDiff {
  double amplitude{0.0}; ///< |vector sum|
  double phase{0.0};     ///< averaged interframe phase, (-pi, pi]
  bool ok{false};        ///< false when shifted row is outside or the sum vanished
};

/// Laterally vector-averaged interframe phase at pixel (i, j) comparing
/// I1(i, j+w) against I2(i+ashift_px, j+lshift_px+w), w in [-W/2, W/2], with
/// window columns clamped to the image. With positive_deeper the sign is
/// flipped so that motion toward greater depth yields positive phase.
PhaseDiff vector_phase_diff(const ComplexBScan& I1, const ComplexBScan& I2, int i, int j,
                            int ashift_px, int lshift_px, int W, bool positive_deeper = true);

/// Refined per-state displacement alpha = a_r + lambda0*phase/(4*pi*r_n).
double state_displacement(double a_r_um, double phase, double lambda0_um,
                          double refractive_index);

struct NccValue {
  double value{0.0};  ///< zero-normalized cross-correlation in [-1, 1]
  bool overlap{true}; ///< false when the shifted window left the image entirely
};

/// ZNCC of magnitude windows: |I1| around (i, j) against bicubically
/// interpolated |I2| around (i + d_a/axial_pitch, j + d_l/lateral_pitch),
/// window (2*w1+1) x (2*w2+1), shrunk at borders. Zero variance gives 0.
NccValue ncc(const ComplexBScan& I1, const ComplexBScan& I2, int i, int j, double d_a_um,
             double d_l_um, int w1, int w2);

/// Same correlation on prebuilt magnitude images with shifts in pixels.
NccValue ncc_px(const MagImage& mag1, const MagImage& mag2, int i, int j, double da_px,
                double dl_px, int w1, int w2);

[[nodiscard]] double data_cost(double ncc_value, DataTerm term);

/// Weighted L1 transition penalty beta*|d_a - prev_d_a| + gamma*|d_l - prev_d_l|.
[[nodiscard]] double reg_cost(double d_a_um, double d_l_um, double prev_d_a_um,
                              double prev_d_l_um, double beta_per_um, double gamma_per_um);

/// Transition minimization over the state grid:
///   out_cost[p] = min_p' prev[p'] + beta*|a(p)-a(p')| + gamma*|l(p)-l(p')|
/// with the minimizing predecessor in out_src[p] (ties per better_state).
/// The fast path runs in O(|S|) using separable forward/backward lower
/// envelopes along the a axis then the l axis and matches the naive scan.
void min_transition(const StateGrid& grid, const std::vector<double>& prev, double beta,
                    double gamma, std::vector<double>& out_cost, std::vector<int>& out_src);
void min_transition_naive(const StateGrid& grid, const std::vector<double>& prev, double beta,
                          double gamma, std::vector<double>& out_cost,
                          std::vector<int>& out_src);

/// Per-column cost lattice: m x |S| data costs, refined displacements, and
/// evaluability bits (false where the shifted window left the image).
struct CostLattice {
  int m{0};
  int S{0};
  std::vector<double> data;        ///< m*S, finite
  std::vector<double> alpha_um;    ///< m*S refined per-state displacements
  std::vector<std::uint8_t> eval;  ///< m*S

  [[nodiscard]] std::size_t idx(int i, int p) const { return std::size_t(i) * S + p; }
};

CostLattice build_cost_lattice(const ComplexBScan& I1, const ComplexBScan& I2, int j,
                               const StateGrid& grid, const DPConfig& cfg);

struct ViterbiPath {
  std::vector<int> states; ///< one state index per row
  double total_cost{0.0};
};

/// Minimum-cost depth path over an m x |S| data-cost lattice with weighted L1
/// transitions on the state grid. First row carries data cost only; the
/// global minimum at the last row is traced back.
ViterbiPath viterbi_min_path(const StateGrid& grid, const std::vector<double>& data, int m,
                             double beta, double gamma, bool use_naive_transitions = false);

/// Joint phase/intensity tracking of I2 against I1. Columns are processed
/// independently (`jobs` threads give bit-identical results for any count).
DisplacementField track(const ComplexBScan& I1, const ComplexBScan& I2, const DPConfig& cfg,
                        int jobs = 1);

} // namespace oce
