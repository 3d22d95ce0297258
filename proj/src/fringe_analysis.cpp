#include "ssmlab/fringe_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

namespace ssmlab {

PhaseRetrieval extract_phase(const AnalyticSignal& modulated,
                             const AnalyticSignal& reference_run,
                             const Roi& roi, double amp_threshold_rel) {
    if (!modulated.grid.same_shape(reference_run.grid))
        throw DimensionError("extract_phase: signals live on different grids");

    ComplexField m = modulated.to_field();
    ComplexField r = reference_run.to_field();

    PhaseRetrieval out;
    out.phi = RealMap(m.grid);
    for (int j = 0; j < m.grid.ny; ++j)
        for (int i = 0; i < m.grid.nx; ++i)
            out.phi.values(j, i) = std::arg(m.values(j, i) * std::conj(r.values(j, i)));

    const Roi rr = roi.clamped(m.grid);
    if (rr.empty()) throw ValidationError("extract_phase: empty ROI");
    double peak = 0.0;
    for (int j = rr.iy0; j <= rr.iy1; ++j)
        for (int i = rr.ix0; i <= rr.ix1; ++i)
            peak = std::max(peak, std::abs(r.values(j, i)));
    long low = 0, total = 0;
    for (int j = rr.iy0; j <= rr.iy1; ++j)
        for (int i = rr.ix0; i <= rr.ix1; ++i) {
            ++total;
            if (std::abs(r.values(j, i)) < amp_threshold_rel * peak) ++low;
        }
    out.low_amplitude_fraction = total ? static_cast<double>(low) / total : 1.0;
    out.low_confidence = out.low_amplitude_fraction > 0.10;
    return out;
}

YProfile phase_profile_y(const RealMap& phi, const Roi& roi, bool unwrap) {
    const Roi r = roi.clamped(phi.grid);
    if (r.empty()) throw ValidationError("phase_profile_y: empty ROI");

    YProfile out;
    const int ny = r.height();
    out.y_um.resize(ny);
    out.phi_rad.resize(ny);
    out.spread_rad.resize(ny);

    for (int j = 0; j < ny; ++j) {
        std::complex<double> acc(0.0, 0.0);
        for (int i = r.ix0; i <= r.ix1; ++i)
            acc += std::polar(1.0, phi.values(r.iy0 + j, i));
        acc /= static_cast<double>(r.width());
        out.y_um(j) = phi.grid.y(r.iy0 + j);
        out.phi_rad(j) = std::arg(acc);
        // circular std; equals the linear std for small spread
        const double rbar = std::min(std::abs(acc), 1.0);
        out.spread_rad(j) = rbar > 1e-12 ? std::sqrt(-2.0 * std::log(rbar)) : M_PI;
    }

    if (unwrap) {
        double offset = 0.0;
        double prev_raw = ny > 0 ? out.phi_rad(0) : 0.0;
        for (int j = 1; j < ny; ++j) {
            const double raw = out.phi_rad(j);
            const double d = raw - prev_raw;
            if (d > M_PI) offset -= 2.0 * M_PI;
            else if (d < -M_PI) offset += 2.0 * M_PI;
            out.phi_rad(j) = raw + offset;
            prev_raw = raw;
        }
    }
    return out;
}

DecoherenceMap decoherence_map(const RealMap& h, const RealMap& h0, const Roi& roi,
                               double mask_rel) {
    if (!h.grid.same_shape(h0.grid))
        throw DimensionError("decoherence_map: map shapes differ");
    const Roi r = roi.clamped(h.grid);
    if (r.empty()) throw ValidationError("decoherence_map: empty ROI");

    double peak0 = 0.0;
    for (int j = r.iy0; j <= r.iy1; ++j)
        for (int i = r.ix0; i <= r.ix1; ++i)
            peak0 = std::max(peak0, h0.values(j, i));
    if (!(peak0 > 0.0))
        throw ValidationError("decoherence_map: reference map is zero on the ROI");
    const double floor = mask_rel * peak0;

    DecoherenceMap out;
    out.gamma = RealMap(h.grid);
    out.gamma.values.setConstant(std::numeric_limits<double>::quiet_NaN());
    long masked = 0, total = 0;
    for (int j = r.iy0; j <= r.iy1; ++j)
        for (int i = r.ix0; i <= r.ix1; ++i) {
            ++total;
            const double a = h.values(j, i);
            const double b = h0.values(j, i);
            if (!(a > floor) || !(b > floor)) {
                ++masked;
                continue;
            }
            out.gamma.values(j, i) = 0.5 * std::log(b / a);
        }
    out.excluded_fraction = static_cast<double>(masked) / total;
    if (out.excluded_fraction > 0.30)
        throw Error("decoherence_map: " + std::to_string(100.0 * out.excluded_fraction) +
                    "% of the ROI is below the amplitude mask");
    return out;
}

GammaFit fit_gamma(const DecoherenceMap& decoherence, const RealMap& phi, const Roi& roi) {
    if (!decoherence.gamma.grid.same_shape(phi.grid))
        throw DimensionError("fit_gamma: map shapes differ");
    const Roi r = roi.clamped(phi.grid);
    if (r.empty()) throw ValidationError("fit_gamma: empty ROI");

    // collapse to y profiles over valid pixels
    std::vector<double> xs, ys;
    for (int j = r.iy0; j <= r.iy1; ++j) {
        double gsum = 0.0, psum = 0.0;
        int n = 0;
        for (int i = r.ix0; i <= r.ix1; ++i) {
            const double gv = decoherence.gamma.values(j, i);
            if (std::isnan(gv)) continue;
            gsum += gv;
            psum += phi.values(j, i);
            ++n;
        }
        if (n < std::max(1, r.width() / 4)) continue; // row mostly masked
        const double pbar = psum / n;
        xs.push_back(pbar * pbar);
        ys.push_back(gsum / n);
    }

    const int n = static_cast<int>(xs.size());
    if (n < 8)
        throw FitError("fit_gamma: fewer than 8 usable rows in the ROI");

    // ordinary least squares Gamma = gamma * phi^2 + b
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double det = n * sxx - sx * sx;
    if (!(std::abs(det) > 1e-30))
        throw FitError("fit_gamma: phi^2 has no spread over the ROI");

    GammaFit out;
    out.n_points = n;
    out.gamma = (n * sxy - sx * sy) / det;
    out.intercept = (sy - out.gamma * sx) / n;

    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double e = ys[i] - (out.gamma * xs[i] + out.intercept);
        ss += e * e;
    }
    const double s2 = n > 2 ? ss / (n - 2) : 0.0;
    out.gamma_err = std::sqrt(s2 * n / det);
    out.intercept_err = std::sqrt(s2 * sxx / det);
    return out;
}

namespace {

struct ParabolaMerit {
    const RealMap& phi;
    Roi roi;

    double operator()(double a, double y0) const {
        std::complex<double> acc(0.0, 0.0);
        for (int j = roi.iy0; j <= roi.iy1; ++j) {
            const double dy = phi.grid.y(j) - y0;
            const double model = a * dy * dy;
            for (int i = roi.ix0; i <= roi.ix1; ++i)
                acc += std::polar(1.0, phi.values(j, i) - model);
        }
        const long n = static_cast<long>(roi.width()) * roi.height();
        return std::abs(acc) / static_cast<double>(n);
    }
};

// small Nelder-Mead on (a, y0); the merit surface is smooth near its peak
void nelder_mead_refine(const ParabolaMerit& merit, double& a, double& y0,
                        double da, double dy, int iters) {
    struct Vertex { double a, y0, neg; };
    auto eval = [&](double aa, double yy) { return -merit(aa, yy); };
    std::array<Vertex, 3> s = {Vertex{a, y0, eval(a, y0)},
                               Vertex{a + da, y0, eval(a + da, y0)},
                               Vertex{a, y0 + dy, eval(a, y0 + dy)}};
    for (int it = 0; it < iters; ++it) {
        std::sort(s.begin(), s.end(),
                  [](const Vertex& l, const Vertex& r) { return l.neg < r.neg; });
        const double ca = 0.5 * (s[0].a + s[1].a);
        const double cy = 0.5 * (s[0].y0 + s[1].y0);
        Vertex refl{ca + (ca - s[2].a), cy + (cy - s[2].y0), 0.0};
        refl.neg = eval(refl.a, refl.y0);
        if (refl.neg < s[0].neg) {
            Vertex exp_{ca + 2.0 * (ca - s[2].a), cy + 2.0 * (cy - s[2].y0), 0.0};
            exp_.neg = eval(exp_.a, exp_.y0);
            s[2] = exp_.neg < refl.neg ? exp_ : refl;
        } else if (refl.neg < s[1].neg) {
            s[2] = refl;
        } else {
            Vertex con{ca + 0.5 * (s[2].a - ca), cy + 0.5 * (s[2].y0 - cy), 0.0};
            con.neg = eval(con.a, con.y0);
            if (con.neg < s[2].neg) {
                s[2] = con;
            } else { // shrink
                for (int k = 1; k < 3; ++k) {
                    s[k].a = s[0].a + 0.5 * (s[k].a - s[0].a);
                    s[k].y0 = s[0].y0 + 0.5 * (s[k].y0 - s[0].y0);
                    s[k].neg = eval(s[k].a, s[k].y0);
                }
            }
        }
    }
    std::sort(s.begin(), s.end(),
              [](const Vertex& l, const Vertex& r) { return l.neg < r.neg; });
    a = s[0].a;
    y0 = s[0].y0;
}

} // namespace

ParabolaFit fit_parabola_phase(const RealMap& phi, const Roi& roi,
                               double wavelength_nm, const ParabolaFitOptions& opts) {
    const Roi r = roi.clamped(phi.grid);
    if (r.empty()) throw ValidationError("fit_parabola_phase: empty ROI");
    if (!(opts.f_min_mm > 0.0) || !(opts.f_max_mm > opts.f_min_mm))
        throw ValidationError("fit_parabola_phase: bad focal range");

    const double k = 2.0 * M_PI / (wavelength_nm * 1e-3);
    // curvature a = k / (2 f_um) = k / (2000 f_mm); scan uniformly in 1/f
    auto a_of_inv_f = [&](double inv_f_mm) { return k * inv_f_mm / 2000.0; };

    ParabolaMerit merit{phi, r};
    const double span_y = (r.iy1 - r.iy0) * phi.grid.pitch_y_um;
    const double y_mid = 0.5 * (phi.grid.y(r.iy0) + phi.grid.y(r.iy1));

    double best_a = 0.0, best_y0 = y_mid, best_m = -1.0;
    const double inv_max = 1.0 / opts.f_min_mm;
    for (int iy = -2; iy <= 2; ++iy) {
        const double y0 = y_mid + 0.125 * iy * span_y;
        for (int s = 0; s < opts.n_scan; ++s) {
            const double inv_f = -inv_max + 2.0 * inv_max * s / (opts.n_scan - 1);
            const double a = a_of_inv_f(inv_f);
            const double m = merit(a, y0);
            if (m > best_m) {
                best_m = m;
                best_a = a;
                best_y0 = y0;
            }
        }
    }

    const double da0 = a_of_inv_f(2.0 * inv_max / (opts.n_scan - 1));
    double a = best_a, y0 = best_y0;
    nelder_mead_refine(merit, a, y0, 0.5 * da0, 0.02 * span_y, 220);

    ParabolaFit out;
    out.curvature_rad_um2 = a;
    out.y0_um = y0;
    out.merit = merit(a, y0);
    const double a_floor = a_of_inv_f(1.0 / opts.f_max_mm);
    if (std::abs(a) < a_floor) {
        out.no_curvature = true; // |f| beyond the configured maximum
        out.focal_mm = std::numeric_limits<double>::infinity();
    } else {
        out.focal_mm = k / (2000.0 * a);
    }
    return out;
}

} // namespace ssmlab
