#pragma once

#include "ssmlab/fringe_filter.hpp"
#include "ssmlab/metrics.hpp"

namespace ssmlab {

/// Pixel-wise phase difference arg(mod * conj(ref)) between the averaged
/// modulated signal and the reference (no-modulation) run. The flag trips
/// when more than 10% of ROI pixels have reference amplitude below
/// amp_threshold_rel of the ROI peak.
struct PhaseRetrieval {
    RealMap phi;  // rad, wrapped to (-pi, pi]
    double low_amplitude_fraction = 0.0;
    bool low_confidence = false;
};

PhaseRetrieval extract_phase(const AnalyticSignal& modulated,
                             const AnalyticSignal& reference_run,
                             const Roi& roi, double amp_threshold_rel = 0.1);

/// Column-collapsed profile: circular mean over x per y row (robust at the
/// +-pi boundary), optionally unwrapped along y. spread is the circular std.
struct YProfile {
    Eigen::ArrayXd y_um;
    Eigen::ArrayXd phi_rad;
    Eigen::ArrayXd spread_rad;
};

YProfile phase_profile_y(const RealMap& phi, const Roi& roi, bool unwrap = true);

/// Decoherence map Gamma = 0.5 * log(h0 / h) for intensity-like maps whose
/// ratio is exp(-2 Gamma) (i.e. pass |analytic|^2). Pixels where either map
/// falls below mask_rel of the h0 ROI peak are excluded (NaN); more than 30%
/// exclusion throws.
struct DecoherenceMap {
    RealMap gamma;  // NaN where masked
    double excluded_fraction = 0.0;
};

DecoherenceMap decoherence_map(const RealMap& h, const RealMap& h0, const Roi& roi,
                               double mask_rel = 1e-2);

/// Straight-line fit Gamma = gamma * phi^2 + b over the ROI: both maps are
/// collapsed to y profiles first (x-average over valid pixels), then ordinary
/// least squares with parameter standard errors from the residuals.
struct GammaFit {
    double gamma = 0.0;
    double gamma_err = 0.0;
    double intercept = 0.0;
    double intercept_err = 0.0;
    int n_points = 0;
};

GammaFit fit_gamma(const DecoherenceMap& decoherence, const RealMap& phi, const Roi& roi);

/// Fit phi(x,y) ~ a*(y-y0)^2 + c on the ROI by maximizing the coherence
/// |<exp(i(phi - a(y-y0)^2))>| (the constant c drops out), then report the
/// equivalent focal length f = k/(2a). Phases may be wrapped. If the best
/// curvature corresponds to |f| above f_max_mm the map is flagged as having
/// no detectable curvature.
struct ParabolaFitOptions {
    double f_min_mm = 20.0;
    double f_max_mm = 1.0e4;
    int n_scan = 601;
};

struct ParabolaFit {
    double focal_mm = std::numeric_limits<double>::infinity();
    double y0_um = 0.0;
    double curvature_rad_um2 = 0.0;
    double merit = 0.0; // coherence in [0, 1] at the optimum
    bool no_curvature = false;
};

ParabolaFit fit_parabola_phase(const RealMap& phi, const Roi& roi,
                               double wavelength_nm,
                               const ParabolaFitOptions& opts = {});

} // namespace ssmlab
