#pragma once

#include <vector>

#include "ssmlab/fft.hpp"
#include "ssmlab/field.hpp"
#include "ssmlab/fit.hpp"

namespace ssmlab {

/// Imaging geometry between the ensemble plane and the far-field camera.
/// The ensemble is imaged with magnification M onto the Fourier lens, so a
/// physical lens of focal f placed at the image plane acts on the ensemble
/// coordinates with an effective focal f / M^2.
struct ImagingConfig {
    double f_eff_mm = 50.0;
    double magnification = 4.0;
    double wavelength_nm = 780.0;
    int pad_factor = 1; // zero-padding of the far-field transform

    double wavelength_um() const { return wavelength_nm * 1e-3; }
    double k_rad_per_um() const { return 2.0 * M_PI / wavelength_um(); }

    /// Far-field position (um at the focal plane) -> angle in mrad.
    double angle_mrad(double x_um) const { return x_um / f_eff_mm; }

    void validate() const {
        if (!(f_eff_mm > 0) || !(magnification > 0) || !(wavelength_nm > 0))
            throw ValidationError("ImagingConfig: f_eff, M and wavelength must be positive");
        if (pad_factor < 1 || pad_factor > 16)
            throw ValidationError("ImagingConfig: pad_factor out of range [1,16]");
    }
};

/// Cylindrical lens at the image plane, acting along y only.
/// focal_mm must be nonzero; +inf is the identity sentinel.
struct PhysicalLens {
    double focal_mm = std::numeric_limits<double>::infinity();
};

/// Multiply the field by exp(i M^2 k y^2 / (2 f_ph)), i.e. the lens phase
/// demagnified onto the ensemble plane.
ComplexField apply_physical_lens(const ComplexField& field, const PhysicalLens& lens,
                                 const ImagingConfig& cfg);

/// Largest wrapped phase increment between neighboring samples, ignoring
/// samples below amp_threshold_rel of the peak amplitude.
struct PhaseStepInfo {
    double max_step_rad = 0.0;
    double gradient_rad_per_um = 0.0;
    int ix = 0, iy = 0;
    char axis = 'x';
};
PhaseStepInfo max_phase_step(const ComplexField& field, double amp_threshold_rel = 1e-6);

/// Propagate to the far field of the effective Fourier lens: zero-pad by
/// cfg.pad_factor, centered unitary FFT, and rescale the axes to positions
/// x' = k_x * f_eff / |K| (um at the camera). Throws AliasingError if the
/// sampled phase steps exceed 0.9*pi per sample anywhere the amplitude is
/// non-negligible.
ComplexField to_far_field(const ComplexField& field, const ImagingConfig& cfg);

/// 1/e^2 intensity radius along y from a Gaussian fit of the y-marginal,
/// in the units of the map's y axis. FitError on degenerate input.
double measure_waist(const RealMap& intensity);

/// Parameters of the waist-vs-power model. The modulator imprints a
/// quadratic phase (phase_scale * p) * y^2 at power p, decoheres the
/// coherence by exp(-gamma * phi^2), and a fixed physical lens f_ph adds its
/// demagnified quadratic phase. phase_scale is in rad/um^2 per power unit.
struct WaistFitModel {
    double w_sw_um = 150.0;
    double gamma = 0.042;
    double f_ph_mm = -2000.0;
    double phase_scale = 3.2e-5;
};

struct WaistCurveOptions {
    int n_samples = 2048;     // 1D y grid (the model is x-invariant)
    double pitch_um = 3.25;
    int pad_factor = 4;
};

/// Far-field 1/e^2 angular waist (mrad) for each modulator power.
std::vector<double> simulate_waist_curve(const WaistFitModel& model,
                                         const std::vector<double>& powers,
                                         const ImagingConfig& cfg,
                                         const WaistCurveOptions& opts = {});

struct WaistFitResult {
    WaistFitModel model;
    Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();
    Eigen::Vector4d std_err = Eigen::Vector4d::Zero();
    double residual_rms_mrad = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Least-squares fit of the four model parameters to measured (power, waist)
/// pairs. Needs at least 8 points; if the iteration cap is hit the best
/// parameters so far are returned with converged == false.
WaistFitResult fit_waist_model(const std::vector<double>& powers,
                               const std::vector<double>& w0_mrad,
                               const ImagingConfig& cfg,
                               const WaistFitModel& initial,
                               const WaistCurveOptions& opts = {});

} // namespace ssmlab
