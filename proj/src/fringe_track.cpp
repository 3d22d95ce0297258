#include "ssmlab/fringe_track.hpp"

#include <cmath>

namespace ssmlab {

TrackedPhase track_global_phase(const std::vector<AnalyticSignal>& stack,
                                double min_overlap) {
    if (stack.empty())
        throw ValidationError("track_global_phase: empty stack");

    TrackedPhase out;
    out.phi_rad.resize(stack.size(), 0.0);
    out.valid.resize(stack.size(), true);

    const AnalyticSignal& ref = stack.front();
    const double ref_norm = signal_norm(ref);
    if (!(ref_norm > 0.0))
        throw ValidationError("track_global_phase: reference frame has no signal");

    for (size_t t = 1; t < stack.size(); ++t) {
        const std::complex<double> d = signal_dot(stack[t], ref);
        const double denom = signal_norm(stack[t]) * ref_norm;
        if (!(denom > 0.0) || std::abs(d) < min_overlap * denom) {
            out.valid[t] = false;
            ++out.n_invalid;
            continue;
        }
        out.phi_rad[t] = std::arg(d);
    }
    return out;
}

std::vector<double> unwrap_series(const std::vector<double>& phi) {
    std::vector<double> out(phi.size());
    if (phi.empty()) return out;
    out[0] = phi[0];
    double offset = 0.0;
    for (size_t t = 1; t < phi.size(); ++t) {
        double d = phi[t] - phi[t - 1];
        if (d > M_PI) offset -= 2.0 * M_PI;
        else if (d < -M_PI) offset += 2.0 * M_PI;
        out[t] = phi[t] + offset;
    }
    return out;
}

AnalyticSignal average_filtered(const std::vector<AnalyticSignal>& stack,
                                const TrackedPhase& track) {
    if (stack.empty())
        throw ValidationError("average_filtered: empty stack");
    if (track.phi_rad.size() != stack.size() || track.valid.size() != stack.size())
        throw DimensionError("average_filtered: track length does not match stack");

    AnalyticSignal out;
    out.grid = stack.front().grid;
    out.window = stack.front().window;
    out.spectrum = Eigen::ArrayXXcd::Zero(out.window.ny(), out.window.nx());

    long n = 0;
    for (size_t t = 0; t < stack.size(); ++t) {
        if (!track.valid[t]) continue;
        if (!(stack[t].window == out.window))
            throw DimensionError("average_filtered: inconsistent windows in stack");
        out.spectrum += stack[t].spectrum * std::polar(1.0, -track.phi_rad[t]);
        ++n;
    }
    if (n == 0)
        throw ValidationError("average_filtered: no valid frames to average");
    out.spectrum /= static_cast<double>(n);
    return out;
}

} // namespace ssmlab
