#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "ssmlab/grid.hpp"

namespace ssmlab {

/// One imposed phase value per y row of the target grid.
struct PhaseProfile1D {
    Eigen::ArrayXd y_um;
    Eigen::ArrayXd phase_rad;

    int size() const { return static_cast<int>(y_um.size()); }
};

/// Thin-lens phase k*y^2/(2f). f > 0 focuses; f must be nonzero and finite.
PhaseProfile1D lens_phase(const Grid2D& grid, double focal_mm, double wavelength_nm);

/// Smoothed step of the given height centered at y0. edge_width_um is the
/// 12%-88% transition width of the logistic edge; 0 gives an ideal half-plane
/// step (phi = height for y >= y0). For any positive width phi(y0) = height/2.
PhaseProfile1D step_phase(const Grid2D& grid, double y0_um, double height_rad,
                          double edge_width_um);

/// Saw-tooth (gradient * y) mod wrap, mapped into [0, wrap). wrap = +inf
/// disables wrapping and leaves the plain linear ramp.
PhaseProfile1D sawtooth_phase(const Grid2D& grid, double gradient_rad_per_um,
                              double wrap_rad);

/// Statistics of the modulator's intensity roughness along the ensemble:
/// additive noise, Gaussian per correlation cell, with sigma proportional to
/// the local mean intensity (quadratic variance scaling).
struct SsmNoiseModel {
    double sigma_rel = 0.29;           // sigma / I0
    double corr_length_um = 37.0;      // -3 dB correlation cell
    double ensemble_length_um = 1.0e4; // medium length along z
};

/// One modulator pulse: target profile plus the phase-per-intensity scale.
/// The imposed phase is detuning_sign * alpha * duration * I(y,z);
/// flipping the detuning sign flips the imprinted phase.
struct SsmPulse {
    PhaseProfile1D target;
    double alpha = 1.0;        // rad per intensity-unit per us
    double duration_us = 1.0;
    int detuning_sign = +1;    // +1 or -1
    SsmNoiseModel noise;
};

/// Mean intensity profile realizing a target phase, plus the constant that
/// had to be added to keep the intensity non-negative:
///   I0(y) = (phi(y) + phase_offset) / (detuning_sign * alpha * duration).
struct IntensityProfile {
    Eigen::ArrayXd i0;       // per y row, >= 0
    double phase_offset = 0; // additive constant actually imprinted
};

IntensityProfile phase_to_intensity(const PhaseProfile1D& target, const SsmPulse& pulse);

/// Phase imprinted by a given mean intensity profile (no offset removal):
/// phi = detuning_sign * alpha * duration * i0.
Eigen::ArrayXd intensity_to_phase(const Eigen::ArrayXd& i0, const SsmPulse& pulse);

/// I(y,z) = I0(y) + dI, one independent Gaussian draw per correlation cell,
/// sigma = sigma_rel * I0(y), resampled piecewise-constant onto nz slices.
/// Negative samples are clipped to zero and counted; a clipped fraction above
/// 1% aborts the run.
struct IntensityRealization {
    Eigen::ArrayXXd intensity; // (ny, nz)
    uint64_t seed = 0;
    int n_cells = 0;
    long clipped = 0;
    double clipped_fraction = 0.0;
    bool under_resolved = false; // nz < n_cells: slices skip some cells
};

IntensityRealization realize_noise(const Eigen::ArrayXd& i0, const SsmNoiseModel& noise,
                                   int nz, uint64_t seed);

/// Noise-free realization (all slices equal to I0), for round-trip checks.
IntensityRealization noiseless_realization(const Eigen::ArrayXd& i0, int nz);

/// Closed-form ensemble envelope exp(-gamma * phi^2) of the stored coherence
/// under the white-noise model; gamma = sigma_rel^2 / 2.
double decoherence_envelope(double phi_rad, double gamma);

/// Monte-Carlo oracle for the same envelope: |mean exp(i * s * Z)| with
/// Z ~ N(0,1) and s = alpha*T*sigma. Requires n >= 1000; seeded.
double mc_decoherence_amplitude(double alphaT_sigma, long n, uint64_t seed);

} // namespace ssmlab
