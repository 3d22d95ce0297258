#pragma once

#include "ssmlab/fringe_types.hpp"

namespace ssmlab {

/// Build the reference field A(r) * exp(i K0 . r) on the readout grid.
/// `fallback_peak_intensity` feeds the sqrt(relative_power * peak) rule when
/// the beam carries no explicit amplitude.
ComplexField make_reference_field(const Grid2D& grid, const ReferenceBeam& ref,
                                  double fallback_peak_intensity);

/// Detect an intensity map: mean counts = gain * I, shot noise drawn at the
/// count scale as excess * Poisson(gain * I / excess) so the variance is
/// excess_noise * mean (normal approximation above Poisson mean 256), then
/// Gaussian read noise, rounding and saturation.
CameraFrame expose_intensity(const RealMap& intensity, const CameraModel& cam,
                             uint64_t seed, int frame_index = 0,
                             double frame_period_s = 5e-3);

/// One camera frame of |readout * exp(i drift) + reference|^2 through the
/// camera model. The fringe carrier must stay resolvable: period
/// 2*pi/(|K0| * pitch) >= 4 samples, else ValidationError. Zero readout gives
/// a fringe-free frame of the plain reference intensity.
CameraFrame synth_interferogram(const ComplexField& readout, const ReferenceBeam& ref,
                                double drift_phase_rad, const CameraModel& cam,
                                uint64_t seed, int frame_index = 0,
                                double frame_period_s = 5e-3);

/// The interference intensity |readout * exp(i drift) + reference|^2 alone,
/// for callers that accumulate several pulses on one exposure.
RealMap interference_intensity(const ComplexField& readout, const ReferenceBeam& ref,
                               double drift_phase_rad);

} // namespace ssmlab
