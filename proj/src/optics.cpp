#include "ssmlab/optics.hpp"

#include <cmath>
#include <complex>

namespace ssmlab {

ComplexField apply_physical_lens(const ComplexField& field, const PhysicalLens& lens,
                                 const ImagingConfig& cfg) {
    cfg.validate();
    if (lens.focal_mm == 0.0)
        throw ValidationError("apply_physical_lens: focal length must be nonzero");
    if (std::isinf(lens.focal_mm)) return field; // identity sentinel

    const Grid2D& g = field.grid;
    const double m2 = cfg.magnification * cfg.magnification;
    const double k = cfg.k_rad_per_um();
    const double f_um = lens.focal_mm * 1e3;

    ComplexField out(g);
    for (int j = 0; j < g.ny; ++j) {
        const double y = g.y(j);
        const std::complex<double> ph = std::polar(1.0, m2 * k * y * y / (2.0 * f_um));
        out.values.row(j) = field.values.row(j) * ph;
    }
    return out;
}

PhaseStepInfo max_phase_step(const ComplexField& field, double amp_threshold_rel) {
    const Grid2D& g = field.grid;
    const double amp_min = amp_threshold_rel * std::sqrt(field.values.abs2().maxCoeff());
    PhaseStepInfo info;

    auto consider = [&](const Complex& a, const Complex& b, double pitch,
                        int ix, int iy, char axis) {
        if (std::abs(a) < amp_min || std::abs(b) < amp_min) return;
        const double step = std::abs(std::arg(b * std::conj(a)));
        if (step > info.max_step_rad) {
            info.max_step_rad = step;
            info.gradient_rad_per_um = step / pitch;
            info.ix = ix;
            info.iy = iy;
            info.axis = axis;
        }
    };

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i)
            consider(field.values(j, i), field.values(j, i + 1), g.pitch_x_um, i, j, 'x');
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            consider(field.values(j, i), field.values(j + 1, i), g.pitch_y_um, i, j, 'y');
    return info;
}

ComplexField to_far_field(const ComplexField& field, const ImagingConfig& cfg) {
    cfg.validate();
    // guard only where there is energy: below 1e-3 of the peak amplitude the
    // intensity is < 1e-6 of the peak, and aliasing there is immaterial
    const PhaseStepInfo step = max_phase_step(field, 1e-3);
    if (step.max_step_rad > 0.9 * M_PI) {
        char msg[256];
        std::snprintf(msg, sizeof(msg),
                      "to_far_field: phase gradient %.3g rad/um (%.3g rad/sample) along %c "
                      "at sample (%d,%d) is not resolvable on this grid",
                      step.gradient_rad_per_um, step.max_step_rad, step.axis, step.ix, step.iy);
        throw AliasingError(msg);
    }

    ComplexField padded = pad_centered(field, cfg.pad_factor);
    ComplexField spectrum = fft2_centered(padded);

    // k_x -> camera position x' = k_x * f_eff / |K|
    const double scale = cfg.f_eff_mm * 1e3 / cfg.k_rad_per_um();
    Grid2D ffgrid(spectrum.grid.nx, spectrum.grid.ny,
                  spectrum.grid.pitch_x_um * scale, spectrum.grid.pitch_y_um * scale);
    return ComplexField(ffgrid, std::move(spectrum.values));
}

double measure_waist(const RealMap& intensity) {
    const Grid2D& g = intensity.grid;
    Eigen::ArrayXd marginal = intensity.values.rowwise().sum();
    const double peak = marginal.maxCoeff();
    if (!(peak > 0.0))
        throw FitError("measure_waist: empty intensity map");

    Eigen::ArrayXd y(g.ny);
    for (int j = 0; j < g.ny; ++j) y(j) = g.y(j);
    GaussianFit1D fit = fit_gaussian_1d(y, marginal);
    if (!fit.converged || !(fit.sigma > 0.0))
        throw FitError("measure_waist: marginal fit failed");
    return 2.0 * fit.sigma; // 1/e^2 intensity radius
}

namespace {

// 1D far-field waist (mrad) of one modulator power. The model is x-invariant
// so the y line carries all the physics; equivalence with the 2D route is
// covered by tests.
double waist_of_power(const WaistFitModel& m, double power, const ImagingConfig& cfg,
                      const WaistCurveOptions& opts) {
    const int n = opts.n_samples;
    const double k = cfg.k_rad_per_um();
    const double a_p = m.phase_scale * power;                       // rad/um^2
    const double a_ph = cfg.magnification * cfg.magnification * k /
                        (2.0 * m.f_ph_mm * 1e3);                    // lens term
    const double gamma = std::max(m.gamma, 0.0);
    const double w = std::abs(m.w_sw_um);

    Eigen::ArrayXcd line(n);
    for (int i = 0; i < n; ++i) {
        const double y = (i - n / 2) * opts.pitch_um;
        const double phi_ssm = a_p * y * y;
        const double envelope = -(y * y) / (w * w) - gamma * phi_ssm * phi_ssm;
        line(i) = std::polar(std::exp(std::max(envelope, -700.0)),
                             phi_ssm + a_ph * y * y);
    }

    // aliasing guard on the y line (amplitude-masked, as in to_far_field)
    const double amp_min = 1e-6;
    for (int i = 0; i + 1 < n; ++i) {
        if (std::abs(line(i)) < amp_min || std::abs(line(i + 1)) < amp_min) continue;
        const double step = std::abs(std::arg(line(i + 1) * std::conj(line(i))));
        if (step > 0.9 * M_PI)
            throw AliasingError("simulate_waist_curve: power " + std::to_string(power) +
                                " produces an unresolvable phase gradient");
    }

    const int np = n * opts.pad_factor;
    Eigen::ArrayXcd padded = Eigen::ArrayXcd::Zero(np);
    padded.segment((np - n) / 2, n) = line;
    Eigen::ArrayXcd spec = fft1_centered(padded);

    const double dk = 2.0 * M_PI / (np * opts.pitch_um);
    const double mrad_per_sample = dk / k * 1e3;
    Eigen::ArrayXd theta(np), inten(np);
    for (int i = 0; i < np; ++i) {
        theta(i) = (i - np / 2) * mrad_per_sample;
        inten(i) = std::norm(spec(i));
    }
    GaussianFit1D fit = fit_gaussian_1d(theta, inten);
    if (!fit.converged || !(fit.sigma > 0.0))
        throw FitError("simulate_waist_curve: far-field fit failed at power " +
                       std::to_string(power));
    return 2.0 * fit.sigma;
}

} // namespace

std::vector<double> simulate_waist_curve(const WaistFitModel& model,
                                         const std::vector<double>& powers,
                                         const ImagingConfig& cfg,
                                         const WaistCurveOptions& opts) {
    cfg.validate();
    if (opts.n_samples < 64 || opts.n_samples % 2 != 0)
        throw ValidationError("simulate_waist_curve: n_samples must be even and >= 64");
    if (!(model.w_sw_um > 0.0))
        throw ValidationError("simulate_waist_curve: waist must be positive");
    if (model.f_ph_mm == 0.0)
        throw ValidationError("simulate_waist_curve: f_ph must be nonzero");
    std::vector<double> out;
    out.reserve(powers.size());
    for (double p : powers) out.push_back(waist_of_power(model, p, cfg, opts));
    return out;
}

WaistFitResult fit_waist_model(const std::vector<double>& powers,
                               const std::vector<double>& w0_mrad,
                               const ImagingConfig& cfg,
                               const WaistFitModel& initial,
                               const WaistCurveOptions& opts) {
    if (powers.size() != w0_mrad.size())
        throw ValidationError("fit_waist_model: powers and waists differ in length");
    if (powers.size() < 8)
        throw ValidationError("fit_waist_model: need at least 8 points");

    const int m = static_cast<int>(powers.size());
    auto residuals = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
        WaistFitModel trial;
        trial.w_sw_um = std::abs(x(0));
        trial.gamma = x(1);
        trial.f_ph_mm = x(2);
        trial.phase_scale = x(3);
        r.resize(m);
        for (int i = 0; i < m; ++i) {
            double w;
            try {
                w = waist_of_power(trial, powers[i], cfg, opts);
            } catch (const Error&) {
                w = 1e6; // out-of-range trial: huge residual steers LM back
            }
            r(i) = w - w0_mrad[i];
        }
    };

    Eigen::VectorXd x0(4);
    x0 << initial.w_sw_um, initial.gamma, initial.f_ph_mm, initial.phase_scale;
    LevMarOptions lm_opts;
    lm_opts.max_iterations = 120;
    lm_opts.xtol = 1e-10;
    lm_opts.ftol = 1e-12;
    LevMarResult lm = levmar_fit(numeric_jacobian(residuals, 1e-5), x0, lm_opts);

    WaistFitResult out;
    out.model.w_sw_um = std::abs(lm.params(0));
    out.model.gamma = lm.params(1);
    out.model.f_ph_mm = lm.params(2);
    out.model.phase_scale = lm.params(3);
    out.iterations = lm.iterations;
    out.converged = lm.converged;
    out.residual_rms_mrad = std::sqrt(2.0 * lm.cost / m);
    if (lm.covariance.size() == 16) {
        out.covariance = lm.covariance;
        for (int i = 0; i < 4; ++i)
            out.std_err(i) = std::sqrt(std::max(lm.covariance(i, i), 0.0));
    }
    return out;
}

} // namespace ssmlab
