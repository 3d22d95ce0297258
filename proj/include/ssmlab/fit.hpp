#pragma once

#include <functional>

#include <Eigen/Dense>

#include "ssmlab/field.hpp"

namespace ssmlab {

// ---------------------------------------------------------------------------
// Small Levenberg-Marquardt core shared by all fits in the project.
// ---------------------------------------------------------------------------

struct LevMarOptions {
    int max_iterations = 200;
    double xtol = 1e-12;       // relative step size below which we stop
    double ftol = 1e-12;       // relative cost decrease below which we stop
    double initial_lambda = 1e-3;
};

struct LevMarResult {
    Eigen::VectorXd params;
    bool converged = false;
    int iterations = 0;
    double cost = 0.0;                // 0.5 * sum r^2 at the solution
    Eigen::MatrixXd covariance;       // sigma^2 * (J^T J)^-1, empty if singular
};

/// Residual callback: fill r(m) for params x(n); if jac != nullptr also fill
/// the m x n Jacobian. Fits without an analytic Jacobian can pass
/// `numeric_jacobian(f)` instead.
using ResidualFn =
    std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac)>;

/// Wrap a residual-only callback with forward-difference derivatives.
ResidualFn numeric_jacobian(std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> f,
                            double rel_step = 1e-6);

LevMarResult levmar_fit(const ResidualFn& fn, const Eigen::VectorXd& x0,
                        const LevMarOptions& opts = {});

// ---------------------------------------------------------------------------
// Gaussian fits
// ---------------------------------------------------------------------------

/// Result of a 2D Gaussian fit A*exp(-(x-x0)^2/(2 sx^2) - (y-y0)^2/(2 sy^2)) + b.
struct GaussianFit2D {
    double amplitude = 0.0;
    double center_x_um = 0.0;
    double center_y_um = 0.0;
    double sigma_x_um = 0.0;
    double sigma_y_um = 0.0;
    double offset = 0.0;
    double residual_rms = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Moment-seeded Levenberg-Marquardt fit of a single 2D Gaussian lobe.
/// Preconditions: the map must have a dominant single lobe (peak at least
/// 5x the median); degenerate input (all-zero map) throws FitError. If the
/// iteration cap is hit the result is returned with converged == false --
/// callers that need a hard guarantee must check the flag.
GaussianFit2D fit_gaussian_2d(const RealMap& map, const LevMarOptions& opts = {});

/// 1D Gaussian fit a*exp(-(t-c)^2/(2 s^2)) + b against samples (t, v).
struct GaussianFit1D {
    double amplitude = 0.0;
    double center = 0.0;
    double sigma = 0.0;
    double offset = 0.0;
    double residual_rms = 0.0;
    bool converged = false;
};

GaussianFit1D fit_gaussian_1d(const Eigen::ArrayXd& t, const Eigen::ArrayXd& v,
                              const LevMarOptions& opts = {});

/// Analysis window from a readout image: fit a Gaussian and keep
/// center +- n_sigma * sigma per axis, clamped to the grid. n_sigma == 0
/// degenerates to the single sample nearest the fitted center. Fit failure
/// propagates as FitError.
Roi roi_from_readout(const RealMap& readout, double n_sigma = 2.0);

} // namespace ssmlab
