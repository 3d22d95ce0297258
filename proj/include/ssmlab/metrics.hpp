#pragma once

#include "ssmlab/field.hpp"

namespace ssmlab {

/// Overlap fidelity between two non-negative intensity maps on a ROI:
///   F = sum sqrt(i * i0) / sqrt(sum i * sum i0).
/// Lies in [0, 1] by Cauchy-Schwarz (clamped against rounding), equals 1 iff
/// the maps are proportional on the ROI. Throws on negative values or if
/// either map is identically zero on the ROI.
double overlap_fidelity(const RealMap& i, const RealMap& i0, const Roi& roi);

/// Same functional applied to phase maps: amplitudes are replaced by phases,
/// i.e. F = sum |phi*phi0| / sqrt(sum phi^2 * sum phi0^2).
double phase_fidelity(const RealMap& phi, const RealMap& phi0, const Roi& roi);

/// Energy ratio sum(i) / sum(i0) on the ROI. May exceed 1 only if `i` gained
/// energy; callers should treat > 1 as a warning. Throws if i0 sums to zero.
double efficiency(const RealMap& i, const RealMap& i0, const Roi& roi);

/// Retrieval is defined up to one global phase constant. Find the constant
/// c = arg <exp(i(phi - phi0))> on the ROI, return phi - c wrapped to
/// (-pi, pi], plus c itself. Used before comparing a retrieved phase map
/// against a designed profile.
struct AlignedPhase {
    RealMap phi;
    double offset_rad = 0.0;
};
AlignedPhase align_global_phase(const RealMap& phi, const RealMap& phi0, const Roi& roi);

/// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

} // namespace ssmlab
