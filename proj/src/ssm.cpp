#include "ssmlab/ssm.hpp"

#include <cmath>
#include <complex>

#include "ssmlab/rng.hpp"

namespace ssmlab {

namespace {

Eigen::ArrayXd y_axis(const Grid2D& grid) {
    Eigen::ArrayXd y(grid.ny);
    for (int j = 0; j < grid.ny; ++j) y(j) = grid.y(j);
    return y;
}

void check_pulse(const SsmPulse& pulse, const char* who) {
    if (pulse.detuning_sign != 1 && pulse.detuning_sign != -1)
        throw ValidationError(std::string(who) + ": detuning_sign must be +1 or -1");
    if (!(pulse.alpha > 0.0) || !(pulse.duration_us > 0.0))
        throw ValidationError(std::string(who) + ": alpha and duration must be positive");
}

} // namespace

PhaseProfile1D lens_phase(const Grid2D& grid, double focal_mm, double wavelength_nm) {
    if (!std::isfinite(focal_mm) || focal_mm == 0.0)
        throw ValidationError("lens_phase: focal length must be finite and nonzero");
    if (!(wavelength_nm > 0.0))
        throw ValidationError("lens_phase: wavelength must be positive");
    const double k = 2.0 * M_PI / (wavelength_nm * 1e-3); // rad/um
    const double f_um = focal_mm * 1e3;
    PhaseProfile1D p;
    p.y_um = y_axis(grid);
    p.phase_rad = k * p.y_um.square() / (2.0 * f_um);
    return p;
}

PhaseProfile1D step_phase(const Grid2D& grid, double y0_um, double height_rad,
                          double edge_width_um) {
    if (edge_width_um < 0.0)
        throw ValidationError("step_phase: edge width must be >= 0");
    PhaseProfile1D p;
    p.y_um = y_axis(grid);
    p.phase_rad.resize(grid.ny);
    if (edge_width_um == 0.0) {
        for (int j = 0; j < grid.ny; ++j)
            p.phase_rad(j) = (p.y_um(j) >= y0_um) ? height_rad : 0.0;
    } else {
        // logistic with scale s = width/4 -> 12%..88% transition over `width`
        const double s = edge_width_um / 4.0;
        for (int j = 0; j < grid.ny; ++j)
            p.phase_rad(j) = height_rad / (1.0 + std::exp(-(p.y_um(j) - y0_um) / s));
    }
    return p;
}

PhaseProfile1D sawtooth_phase(const Grid2D& grid, double gradient_rad_per_um,
                              double wrap_rad) {
    if (!(wrap_rad > 0.0))
        throw ValidationError("sawtooth_phase: wrap must be positive (use +inf for none)");
    PhaseProfile1D p;
    p.y_um = y_axis(grid);
    p.phase_rad.resize(grid.ny);
    for (int j = 0; j < grid.ny; ++j) {
        const double raw = gradient_rad_per_um * p.y_um(j);
        if (std::isinf(wrap_rad)) {
            p.phase_rad(j) = raw;
        } else {
            double m = std::fmod(raw, wrap_rad);
            if (m < 0.0) m += wrap_rad;
            p.phase_rad(j) = m;
        }
    }
    return p;
}

IntensityProfile phase_to_intensity(const PhaseProfile1D& target, const SsmPulse& pulse) {
    check_pulse(pulse, "phase_to_intensity");
    if (target.size() == 0)
        throw ValidationError("phase_to_intensity: empty profile");
    IntensityProfile out;
    // offset makes (phi + offset)/(sign*alpha*T) non-negative everywhere
    out.phase_offset = (pulse.detuning_sign > 0) ? -target.phase_rad.minCoeff()
                                                 : -target.phase_rad.maxCoeff();
    const double denom = pulse.detuning_sign * pulse.alpha * pulse.duration_us;
    out.i0 = (target.phase_rad + out.phase_offset) / denom;
    out.i0 = out.i0.max(0.0); // clip the -0.0 / rounding dust
    return out;
}

Eigen::ArrayXd intensity_to_phase(const Eigen::ArrayXd& i0, const SsmPulse& pulse) {
    check_pulse(pulse, "intensity_to_phase");
    return pulse.detuning_sign * pulse.alpha * pulse.duration_us * i0;
}

IntensityRealization realize_noise(const Eigen::ArrayXd& i0, const SsmNoiseModel& noise,
                                   int nz, uint64_t seed) {
    if (nz < 1) throw ValidationError("realize_noise: nz must be >= 1");
    if (!(noise.sigma_rel >= 0.0))
        throw ValidationError("realize_noise: sigma_rel must be >= 0");
    if (!(noise.corr_length_um > 0.0) || !(noise.ensemble_length_um > 0.0))
        throw ValidationError("realize_noise: lengths must be positive");
    if ((i0 < 0.0).any())
        throw ValidationError("realize_noise: mean intensity must be non-negative");

    const int ny = static_cast<int>(i0.size());
    IntensityRealization out;
    out.seed = seed;
    out.n_cells = std::max(1, static_cast<int>(
        std::lround(noise.ensemble_length_um / noise.corr_length_um)));
    out.under_resolved = nz < out.n_cells;
    out.intensity.resize(ny, nz);

    // slice s center -> correlation cell index (piecewise constant resampling)
    std::vector<int> cell_of(nz);
    for (int s = 0; s < nz; ++s) {
        int c = static_cast<int>((s + 0.5) / nz * out.n_cells);
        cell_of[s] = std::min(c, out.n_cells - 1);
    }

    auto rng = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::ArrayXd cells(out.n_cells);
    for (int j = 0; j < ny; ++j) {
        const double sigma = noise.sigma_rel * i0(j);
        for (int c = 0; c < out.n_cells; ++c) cells(c) = sigma * gauss(rng);
        for (int s = 0; s < nz; ++s) {
            double v = i0(j) + cells(cell_of[s]);
            if (v < 0.0) {
                v = 0.0;
                ++out.clipped;
            }
            out.intensity(j, s) = v;
        }
    }
    out.clipped_fraction = static_cast<double>(out.clipped) / (static_cast<double>(ny) * nz);
    if (out.clipped_fraction > 0.01)
        throw Error("realize_noise: clipped fraction " + std::to_string(out.clipped_fraction) +
                    " exceeds 1% -- noise model out of its validity range");
    return out;
}

IntensityRealization noiseless_realization(const Eigen::ArrayXd& i0, int nz) {
    if (nz < 1) throw ValidationError("noiseless_realization: nz must be >= 1");
    IntensityRealization out;
    out.n_cells = nz;
    out.intensity = i0.replicate(1, nz);
    return out;
}

double decoherence_envelope(double phi_rad, double gamma) {
    if (gamma < 0.0) throw ValidationError("decoherence_envelope: gamma must be >= 0");
    return std::exp(-gamma * phi_rad * phi_rad);
}

double mc_decoherence_amplitude(double alphaT_sigma, long n, uint64_t seed) {
    if (n < 1000)
        throw ValidationError("mc_decoherence_amplitude: need at least 1000 samples");
    auto rng = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double re = 0.0, im = 0.0;
    for (long i = 0; i < n; ++i) {
        const double phi = alphaT_sigma * gauss(rng);
        re += std::cos(phi);
        im += std::sin(phi);
    }
    re /= static_cast<double>(n);
    im /= static_cast<double>(n);
    return std::hypot(re, im);
}

} // namespace ssmlab
