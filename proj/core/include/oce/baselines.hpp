#pragma once

#include "oce/types.hpp"

namespace oce {

/// Shared configuration for the reference trackers.
struct BaselineConfig {
  int kasai_axial{3};   ///< Kasai window rows
  int kasai_lateral{3}; ///< Kasai window columns
  int cc_search_axial{8};   ///< CC integer search range, ± depth pixels
  int cc_search_lateral{1}; ///< CC integer search range, ± A-lines
  int cc_w1{5}; ///< CC window axial half-extent
  int cc_w2{5}; ///< CC window lateral half-extent
  enum class Subpixel { Paraboloid, CubicAscent };
  Subpixel cc_subpixel{Subpixel::Paraboloid};
  int vp_lateral_halfwidth{10}; ///< W/2 for the lateral vector averaging
  int vp_gradient_window{8};    ///< axial rows vector-averaged per phase gradient
  bool positive_deeper{true};   ///< same sign convention as the DP tracker

  void validate() const;
};

/// Windowed autocorrelation phase estimator: displacement from the wrapped
/// phase of sum I1*conj(I2) over the Kasai window. Axial only; ambiguous
/// beyond lambda0/(4*r_n).
DisplacementField kasai_track(const ComplexBScan& I1, const ComplexBScan& I2,
                              const BaselineConfig& cfg, int jobs = 1);

/// Intensity cross-correlation: integer NCC search over the configured range
/// with sub-pixel refinement of the peak. Search range must cover the motion.
DisplacementField cc_track(const ComplexBScan& I1, const ComplexBScan& I2,
                           const BaselineConfig& cfg, int jobs = 1);

/// Vector-phase gradient estimator: laterally averaged interframe products,
/// inter-pixel phase gradients vector-averaged over the gradient window, and
/// cumulative depth integration seeded by the first row's wrapped phase. The
/// comparison row in I2 advances by the accumulated integer pixel shift
/// (supra-pixel compensation). Axial only.
DisplacementField vp_track(const ComplexBScan& I1, const ComplexBScan& I2,
                           const BaselineConfig& cfg, int jobs = 1);

/// CC for the supra-pixel part (5-px axial median, rounded to whole pixels,
/// used to realign I2) plus VP on the realigned pair for the sub-pixel part.
DisplacementField ccvp_track(const ComplexBScan& I1, const ComplexBScan& I2,
                             const BaselineConfig& cfg, int jobs = 1);

/// Adds the reference field's average valid axial value over rows within
/// window_um/2 of depth_um (all columns) to every axial value of `field`.
DisplacementField compensate_translation(const DisplacementField& field,
                                         const DisplacementField& reference, double window_um,
                                         double depth_um, double axial_pitch_um);

} // namespace oce
