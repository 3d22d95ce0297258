#pragma once

#include "ssmlab/field.hpp"
#include "ssmlab/ssm.hpp"

namespace ssmlab {

/// Stored spin-wave: a transverse amplitude times per-slice longitudinal
/// phases phi(y, z). The modulator beam propagates along x, so its intensity
/// (and hence the imprinted phase) varies over (y, z) but not x.
struct SpinWaveState {
    ComplexField transverse;
    Eigen::ArrayXXd slice_phases; // (ny, nz), rad
    double population = 1.0;      // remaining readout budget in [0, 1]

    int nz() const { return static_cast<int>(slice_phases.cols()); }
};

/// Store a signal field with nz longitudinal slices, all phases zero.
SpinWaveState write_in(const ComplexField& signal, int nz = 256);

/// Imprint one modulator pulse: slice_phases += sign * alpha * T * I(y,z).
/// The realization must match (ny, nz).
void apply_ssm(SpinWaveState& state, const SsmPulse& pulse,
               const IntensityRealization& realization);

/// Convert part of the stored population back to light. The emitted field is
/// sqrt(fraction) * amplitude_factor * transverse(y,x) * <exp(i phi(y,z))>_z;
/// the slice average is where ensemble decoherence shows up. The returned
/// state keeps the remaining population and all slice phases. fraction must
/// not exceed the remaining population.
struct ReadoutResult {
    ComplexField field;
    SpinWaveState state;
};

ReadoutResult readout(const SpinWaveState& state, double fraction,
                      double amplitude_factor = 1.0);

} // namespace ssmlab
