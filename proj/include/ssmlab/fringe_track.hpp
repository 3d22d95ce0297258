#pragma once

#include <vector>

#include "ssmlab/fringe_filter.hpp"

namespace ssmlab {

/// Global phase of each frame against the first:
///   Phi(t) = arg sum_K Q(K,t) conj(Q(K,t0)),  Phi(t0) = 0 exactly.
/// Frames whose normalized overlap |<Q_t|Q_0>| / (|Q_t||Q_0|) falls below
/// min_overlap are flagged invalid (phase kept at 0).
struct TrackedPhase {
    std::vector<double> phi_rad;     // wrapped to (-pi, pi]
    std::vector<bool> valid;
    int n_invalid = 0;
};

TrackedPhase track_global_phase(const std::vector<AnalyticSignal>& stack,
                                double min_overlap = 0.05);

/// Cumulative 1D unwrap (adds multiples of 2*pi so steps stay within pi).
std::vector<double> unwrap_series(const std::vector<double>& phi);

/// Drift-compensated average (1/N) sum_t Q_t exp(-i Phi_t) over valid frames.
/// Throws if no valid frame remains. SNR improves ~ sqrt(N) for independent
/// frame noise.
AnalyticSignal average_filtered(const std::vector<AnalyticSignal>& stack,
                                const TrackedPhase& track);

} // namespace ssmlab
