#include "ssmlab/memory.hpp"

#include <complex>

namespace ssmlab {

SpinWaveState write_in(const ComplexField& signal, int nz) {
    if (nz < 1) throw ValidationError("write_in: nz must be >= 1");
    SpinWaveState s;
    s.transverse = signal;
    s.slice_phases = Eigen::ArrayXXd::Zero(signal.grid.ny, nz);
    s.population = 1.0;
    return s;
}

void apply_ssm(SpinWaveState& state, const SsmPulse& pulse,
               const IntensityRealization& realization) {
    if (pulse.detuning_sign != 1 && pulse.detuning_sign != -1)
        throw ValidationError("apply_ssm: detuning_sign must be +1 or -1");
    if (realization.intensity.rows() != state.slice_phases.rows() ||
        realization.intensity.cols() != state.slice_phases.cols())
        throw DimensionError("apply_ssm: realization shape does not match state (ny, nz)");
    const double scale = pulse.detuning_sign * pulse.alpha * pulse.duration_us;
    state.slice_phases += scale * realization.intensity;
}

ReadoutResult readout(const SpinWaveState& state, double fraction,
                      double amplitude_factor) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw ValidationError("readout: fraction must be in (0, 1]");
    if (fraction > state.population + 1e-12)
        throw ValidationError("readout: requested fraction exceeds remaining population");
    if (!(amplitude_factor > 0.0) || amplitude_factor > 1.0)
        throw ValidationError("readout: amplitude_factor must be in (0, 1]");

    const Grid2D& g = state.transverse.grid;
    const int nz = state.nz();

    // ensemble average over slices: this is where the stored coherence pays
    // for the modulator's intensity roughness
    Eigen::ArrayXcd factor(g.ny);
    for (int j = 0; j < g.ny; ++j) {
        std::complex<double> acc(0.0, 0.0);
        for (int s = 0; s < nz; ++s)
            acc += std::polar(1.0, state.slice_phases(j, s));
        factor(j) = acc / static_cast<double>(nz);
    }

    ReadoutResult out;
    out.field = ComplexField(g);
    const double amp = std::sqrt(fraction) * amplitude_factor;
    for (int j = 0; j < g.ny; ++j)
        out.field.values.row(j) = amp * factor(j) * state.transverse.values.row(j);

    out.state = state;
    out.state.population = state.population - fraction;
    return out;
}

} // namespace ssmlab
