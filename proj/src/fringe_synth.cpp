#include "ssmlab/fringe_synth.hpp"

#include <cmath>
#include <complex>

#include "ssmlab/rng.hpp"

namespace ssmlab {

ComplexField make_reference_field(const Grid2D& grid, const ReferenceBeam& ref,
                                  double fallback_peak_intensity) {
    if (ref.relative_power < 0.0)
        throw ValidationError("make_reference_field: relative power must be >= 0");
    double amp = ref.amplitude;
    if (amp == 0.0)
        amp = std::sqrt(ref.relative_power * fallback_peak_intensity);

    // The reference carries exp(-i K0.r), so the cross term S R* of the
    // interferogram puts the direct (non-conjugate) image at +K0, which is
    // where the sideband window is centered. Windowing the +K0 lobe of a
    // reference with the opposite convention would retrieve S* and flip
    // every phase sign downstream.
    ComplexField field(grid);
    for (int j = 0; j < grid.ny; ++j) {
        const double y = grid.y(j);
        for (int i = 0; i < grid.nx; ++i) {
            const double x = grid.x(i);
            const double a = ref.amplitude_map ? ref.amplitude_map->values(j, i) : amp;
            field.values(j, i) =
                std::polar(a, -(ref.tilt_kx_rad_um * x + ref.tilt_ky_rad_um * y));
        }
    }
    return field;
}

CameraFrame expose_intensity(const RealMap& intensity, const CameraModel& cam,
                             uint64_t seed, int frame_index, double frame_period_s) {
    cam.validate();
    const Grid2D& g = intensity.grid;

    CameraFrame frame;
    frame.grid = g;
    frame.counts.resize(g.ny, g.nx);
    frame.frame_index = frame_index;
    frame.timestamp_s = frame_index * frame_period_s;

    auto rng = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double maxc = static_cast<double>(cam.max_count());

    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double inten = intensity.values(j, i);
            if (inten < 0.0)
                throw ValidationError("expose_intensity: negative intensity sample");
            double counts = cam.gain * inten;
            if (cam.shot_noise && counts > 0.0) {
                // excess-noise factor F: variance F * mean at fixed mean counts.
                // Large means use the matching normal approximation (skewness
                // < 1/16 above the cutoff), small means the exact Poisson.
                const double lambda = counts / cam.excess_noise;
                if (lambda > 256.0) {
                    counts = cam.excess_noise *
                             std::max(0.0, lambda + std::sqrt(lambda) * gauss(rng));
                } else {
                    std::poisson_distribution<long> poisson(lambda);
                    counts = cam.excess_noise * static_cast<double>(poisson(rng));
                }
            }
            if (cam.read_noise_std > 0.0) counts += cam.read_noise_std * gauss(rng);
            counts = std::nearbyint(counts);
            if (counts < 0.0) counts = 0.0;
            if (counts > maxc) {
                counts = maxc;
                ++frame.saturated;
            }
            frame.counts(j, i) = static_cast<uint16_t>(counts);
        }
    }
    return frame;
}

RealMap interference_intensity(const ComplexField& readout, const ReferenceBeam& ref,
                               double drift_phase_rad) {
    const Grid2D& g = readout.grid;
    if (ref.amplitude_map && !ref.amplitude_map->grid.same_shape(g))
        throw DimensionError("interference_intensity: amplitude map shape mismatch");

    const double peak_i = readout.values.abs2().maxCoeff();
    ComplexField reference = make_reference_field(g, ref, peak_i);
    const std::complex<double> drift = std::polar(1.0, drift_phase_rad);

    RealMap out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            out.values(j, i) =
                std::norm(readout.values(j, i) * drift + reference.values(j, i));
    return out;
}

CameraFrame synth_interferogram(const ComplexField& readout, const ReferenceBeam& ref,
                                double drift_phase_rad, const CameraModel& cam,
                                uint64_t seed, int frame_index, double frame_period_s) {
    const Grid2D& g = readout.grid;

    // carrier must stay resolvable on the camera
    const double kmag = ref.k_mag();
    if (kmag > 0.0) {
        const double period = 2.0 * M_PI / (kmag * std::max(g.pitch_x_um, g.pitch_y_um));
        if (period < 4.0) {
            char msg[160];
            std::snprintf(msg, sizeof(msg),
                          "synth_interferogram: fringe period %.2f samples is below the "
                          "4-sample floor (reference tilt too steep)",
                          period);
            throw ValidationError(msg);
        }
    }

    return expose_intensity(interference_intensity(readout, ref, drift_phase_rad), cam,
                            seed, frame_index, frame_period_s);
}

std::vector<double> drift_walk(const DriftModel& drift, int n_frames, uint64_t seed) {
    if (n_frames < 1) throw ValidationError("drift_walk: need at least one frame");
    if (drift.step_std_rad < 0.0)
        throw ValidationError("drift_walk: step std must be >= 0");
    std::vector<double> phi(n_frames, 0.0);
    auto eng = make_engine(seed);
    std::normal_distribution<double> n01;
    for (int t = 1; t < n_frames; ++t)
        phi[t] = phi[t - 1] + drift.step_std_rad * n01(eng);
    return phi;
}

} // namespace ssmlab
