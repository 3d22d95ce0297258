#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "ssmlab/errors.hpp"
#include "ssmlab/memory.hpp"
#include "ssmlab/rng.hpp"

using namespace ssmlab;

namespace {

SpinWaveState stored_gaussian(const Grid2D& g, int nz) {
    return write_in(gaussian_field(g, 60.0, 60.0), nz);
}

} // namespace

TEST_CASE("write_in stores the field with clean phases") {
    Grid2D g(32, 32, 3.25, 3.25);
    ComplexField f = gaussian_field(g, 40.0, 50.0);
    SpinWaveState s = write_in(f, 17);
    CHECK(s.nz() == 17);
    CHECK(s.population == 1.0);
    CHECK(s.slice_phases.rows() == 32);
    CHECK(s.slice_phases.abs().maxCoeff() == 0.0);
    CHECK((s.transverse.values - f.values).abs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(write_in(f, 0), ValidationError);
}

TEST_CASE("apply_ssm accumulates sign * alpha * T * I slice by slice") {
    Grid2D g(16, 16, 1.0, 1.0);
    SpinWaveState s = stored_gaussian(g, 8);

    Eigen::ArrayXd i0(16);
    for (int j = 0; j < 16; ++j) i0(j) = 0.1 * j;
    IntensityRealization real = noiseless_realization(i0, 8);

    SsmPulse pulse;
    pulse.alpha = 0.7;
    pulse.duration_us = 2.0;
    apply_ssm(s, pulse, real);
    for (int j = 0; j < 16; ++j)
        for (int z = 0; z < 8; ++z)
            CHECK(s.slice_phases(j, z) == doctest::Approx(1.4 * i0(j)).epsilon(1e-14));

    // second pulse with flipped detuning cancels the first
    SsmPulse flipped = pulse;
    flipped.detuning_sign = -1;
    apply_ssm(s, flipped, real);
    CHECK(s.slice_phases.abs().maxCoeff() < 1e-14);

    IntensityRealization wrong = noiseless_realization(i0, 9);
    CHECK_THROWS_AS(apply_ssm(s, pulse, wrong), DimensionError);
    SsmPulse bad = pulse;
    bad.detuning_sign = 2;
    CHECK_THROWS_AS(apply_ssm(s, bad, real), ValidationError);
}

TEST_CASE("readout equals the brute-force slice average") {
    Grid2D g(24, 24, 2.0, 2.0);
    const int nz = 37;
    SpinWaveState s = stored_gaussian(g, nz);

    // hand-built per-slice phases, nothing separable about them
    for (int j = 0; j < g.ny; ++j)
        for (int z = 0; z < nz; ++z)
            s.slice_phases(j, z) = 0.8 * std::sin(0.3 * j + 0.11 * z) + 0.05 * j;

    const double fraction = 0.37, amp = 0.9;
    ReadoutResult out = readout(s, fraction, amp);

    double worst = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        std::complex<double> acc(0.0, 0.0);
        for (int z = 0; z < nz; ++z)
            acc += std::polar(1.0, s.slice_phases(j, z));
        acc /= double(nz);
        for (int i = 0; i < g.nx; ++i) {
            const std::complex<double> want =
                std::sqrt(fraction) * amp * acc * s.transverse.values(j, i);
            worst = std::max(worst, std::abs(out.field.values(j, i) - want));
        }
    }
    CHECK(worst < 1e-14);
    CHECK(out.state.population == doctest::Approx(1.0 - fraction).epsilon(1e-12));
    // the stored state itself is untouched by reading it out
    CHECK((out.state.slice_phases - s.slice_phases).abs().maxCoeff() == 0.0);
}

TEST_CASE("readout budget bookkeeping") {
    Grid2D g(16, 16, 1.0, 1.0);
    SpinWaveState s = stored_gaussian(g, 4);

    ReadoutResult first = readout(s, 0.5);
    ReadoutResult second = readout(first.state, 0.5);
    CHECK(second.state.population == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(readout(second.state, 0.5), ValidationError);

    // with all phases zero each half-readout carries half the energy
    const double e0 = total_intensity(s.transverse);
    CHECK(total_intensity(first.field) == doctest::Approx(0.5 * e0).epsilon(1e-12));
    CHECK(total_intensity(second.field) == doctest::Approx(0.5 * e0).epsilon(1e-12));

    CHECK_THROWS_AS(readout(s, 0.0), ValidationError);
    CHECK_THROWS_AS(readout(s, 1.5), ValidationError);
    CHECK_THROWS_AS(readout(s, 0.5, 0.0), ValidationError);
    CHECK_THROWS_AS(readout(s, 0.5, 1.5), ValidationError);
}

TEST_CASE("slice-averaged readout reproduces the gaussian decoherence envelope") {
    // imprint phi = alpha T I with I fluctuating by sigma_rel per correlation
    // cell; the readout's slice average must decay as exp(-gamma phi^2) with
    // gamma = sigma_rel^2 / 2
    const double phi_bar = 2.0, sigma_rel = 0.29;
    const double gamma = sigma_rel * sigma_rel / 2.0;
    const double expect = std::exp(-gamma * phi_bar * phi_bar);

    Grid2D g(8, 64, 10.0, 10.0);
    SsmNoiseModel noise;
    noise.sigma_rel = sigma_rel; // corr 37 um over 1 cm -> 270 cells
    Eigen::ArrayXd i0 = Eigen::ArrayXd::Constant(64, phi_bar); // alpha T = 1

    SsmPulse pulse;

    const int n_seeds = 30, nz = 540;
    double sum = 0.0;
    long count = 0;
    ComplexField flat(g);
    flat.values.setConstant(Complex(1.0, 0.0));
    for (int seed = 0; seed < n_seeds; ++seed) {
        SpinWaveState s = write_in(flat, nz);
        apply_ssm(s, pulse, realize_noise(i0, noise, nz, derive_seed(2024, seed)));
        ReadoutResult out = readout(s, 1.0);
        for (int j = 0; j < g.ny; ++j) {
            sum += std::abs(out.field.values(j, 0));
            ++count;
        }
    }
    const double mean = sum / count;

    // 270 cells per row, 64 rows, 30 seeds: allow for the finite-cell noise
    // of each row estimate plus the small positive modulus bias
    const double s_eff = sigma_rel * phi_bar;
    const double var_re = 0.5 * (1.0 + std::exp(-2.0 * s_eff * s_eff)) -
                          std::exp(-s_eff * s_eff);
    const double se_row = std::sqrt(var_re / 270.0);
    const double tol = 3.0 * se_row / std::sqrt(double(count)) + 2e-3;
    CHECK(std::abs(mean - expect) < tol);
}
