#include "ssmlab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ssmlab {

ResidualFn numeric_jacobian(std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> f,
                            double rel_step) {
    return [f, rel_step](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        f(x, r);
        if (!jac) return;
        const int n = static_cast<int>(x.size());
        const int m = static_cast<int>(r.size());
        jac->resize(m, n);
        Eigen::VectorXd xp = x, rp(m);
        for (int k = 0; k < n; ++k) {
            const double h = rel_step * std::max(std::abs(x(k)), 1e-8);
            xp(k) = x(k) + h;
            f(xp, rp);
            jac->col(k) = (rp - r) / h;
            xp(k) = x(k);
        }
    };
}

LevMarResult levmar_fit(const ResidualFn& fn, const Eigen::VectorXd& x0,
                        const LevMarOptions& opts) {
    LevMarResult res;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    fn(x, r, &J);
    double cost = 0.5 * r.squaredNorm();
    double lambda = opts.initial_lambda;
    const int n = static_cast<int>(x.size());

    int iter = 0;
    bool converged = false;
    for (; iter < opts.max_iterations && !converged; ++iter) {
        Eigen::MatrixXd JtJ = J.transpose() * J;
        Eigen::VectorXd g = J.transpose() * r;

        bool stepped = false;
        for (int attempt = 0; attempt < 30; ++attempt) {
            Eigen::MatrixXd A = JtJ;
            for (int k = 0; k < n; ++k)
                A(k, k) += lambda * std::max(JtJ(k, k), 1e-12);
            Eigen::VectorXd delta = A.ldlt().solve(-g);
            if (!delta.allFinite()) { lambda *= 5.0; continue; }

            Eigen::VectorXd xt = x + delta;
            Eigen::VectorXd rt;
            fn(xt, rt, nullptr);
            const double ct = 0.5 * rt.squaredNorm();
            if (ct < cost) {
                const double step_rel = delta.norm() / std::max(x.norm(), 1e-12);
                const double cost_rel = (cost - ct) / std::max(cost, 1e-300);
                x = xt;
                cost = ct;
                lambda = std::max(lambda / 3.0, 1e-12);
                fn(x, r, &J);
                stepped = true;
                if (step_rel < opts.xtol || cost_rel < opts.ftol) converged = true;
                break;
            }
            lambda *= 5.0;
        }
        if (!stepped) { converged = true; break; } // stuck in a flat valley
    }

    res.params = x;
    res.converged = converged;
    res.iterations = iter;
    res.cost = cost;

    const int m = static_cast<int>(r.size());
    if (m > n) {
        Eigen::MatrixXd JtJ = J.transpose() * J;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(JtJ);
        if (lu.isInvertible()) {
            const double sigma2 = 2.0 * cost / (m - n);
            res.covariance = sigma2 * lu.inverse();
        }
    }
    return res;
}

// ---------------------------------------------------------------------------

namespace {

double median_of(std::vector<double> v) {
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    return v[mid];
}

void check_single_lobe(const Eigen::ArrayXXd& vals, const char* who) {
    const double peak = vals.maxCoeff();
    if (!(peak > 0.0))
        throw FitError(std::string(who) + ": degenerate input (no positive peak)");
    std::vector<double> tmp(vals.data(), vals.data() + vals.size());
    const double med = median_of(std::move(tmp));
    if (med > 0.0 && peak < 5.0 * med)
        throw FitError(std::string(who) + ": no dominant lobe (peak < 5x median)");
}

} // namespace

GaussianFit2D fit_gaussian_2d(const RealMap& map, const LevMarOptions& opts) {
    const Grid2D& g = map.grid;
    const Eigen::ArrayXXd& v = map.values;
    check_single_lobe(v, "fit_gaussian_2d");

    // moment seed over background-subtracted positive part
    const double baseline = v.minCoeff();
    Eigen::ArrayXXd w = (v - baseline).max(0.0);
    const double wsum = w.sum();
    if (!(wsum > 0.0)) throw FitError("fit_gaussian_2d: flat map");

    double cx = 0, cy = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            cx += w(j, i) * g.x(i);
            cy += w(j, i) * g.y(j);
        }
    cx /= wsum;
    cy /= wsum;
    double vx = 0, vy = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            vx += w(j, i) * (g.x(i) - cx) * (g.x(i) - cx);
            vy += w(j, i) * (g.y(j) - cy) * (g.y(j) - cy);
        }
    vx /= wsum;
    vy /= wsum;

    Eigen::VectorXd x0(6);
    x0 << v.maxCoeff() - baseline, cx, cy,
          std::max(std::sqrt(vx), 0.25 * g.pitch_x_um),
          std::max(std::sqrt(vy), 0.25 * g.pitch_y_um), baseline;

    const int m = g.nx * g.ny;
    auto fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        const double A = p(0), x0p = p(1), y0p = p(2), b = p(5);
        const double sx = std::max(std::abs(p(3)), 1e-3 * g.pitch_x_um);
        const double sy = std::max(std::abs(p(4)), 1e-3 * g.pitch_y_um);
        r.resize(m);
        if (jac) jac->resize(m, 6);
        int idx = 0;
        for (int j = 0; j < g.ny; ++j) {
            const double dy = (g.y(j) - y0p) / sy;
            const double ey = std::exp(-0.5 * std::min(dy * dy, 700.0));
            for (int i = 0; i < g.nx; ++i, ++idx) {
                const double dx = (g.x(i) - x0p) / sx;
                const double e = ey * std::exp(-0.5 * std::min(dx * dx, 700.0));
                r(idx) = A * e + b - v(j, i);
                if (jac) {
                    (*jac)(idx, 0) = e;
                    (*jac)(idx, 1) = A * e * dx / sx;
                    (*jac)(idx, 2) = A * e * dy / sy;
                    (*jac)(idx, 3) = A * e * dx * dx / sx;
                    (*jac)(idx, 4) = A * e * dy * dy / sy;
                    (*jac)(idx, 5) = 1.0;
                }
            }
        }
    };

    LevMarResult lm = levmar_fit(fn, x0, opts);

    GaussianFit2D out;
    out.amplitude = lm.params(0);
    out.center_x_um = lm.params(1);
    out.center_y_um = lm.params(2);
    out.sigma_x_um = std::abs(lm.params(3));
    out.sigma_y_um = std::abs(lm.params(4));
    out.offset = lm.params(5);
    out.iterations = lm.iterations;
    out.converged = lm.converged;
    out.residual_rms = std::sqrt(2.0 * lm.cost / m);
    return out;
}

GaussianFit1D fit_gaussian_1d(const Eigen::ArrayXd& t, const Eigen::ArrayXd& v,
                              const LevMarOptions& opts) {
    const int m = static_cast<int>(t.size());
    if (m < 5 || v.size() != m)
        throw FitError("fit_gaussian_1d: need at least 5 matched samples");
    const double peak = v.maxCoeff();
    if (!(peak > v.minCoeff()))
        throw FitError("fit_gaussian_1d: flat input");

    const double baseline = v.minCoeff();
    Eigen::ArrayXd w = (v - baseline).max(0.0);
    const double wsum = w.sum();
    const double c0 = (w * t).sum() / wsum;
    const double var = (w * (t - c0).square()).sum() / wsum;
    const double dt = std::abs(t(1) - t(0));

    Eigen::VectorXd x0(4);
    x0 << peak - baseline, c0, std::max(std::sqrt(var), 0.25 * dt), baseline;

    auto fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
        const double A = p(0), c = p(1), b = p(3);
        const double s = std::max(std::abs(p(2)), 1e-3 * dt);
        r.resize(m);
        if (jac) jac->resize(m, 4);
        for (int i = 0; i < m; ++i) {
            const double d = (t(i) - c) / s;
            const double e = std::exp(-0.5 * std::min(d * d, 700.0));
            r(i) = A * e + b - v(i);
            if (jac) {
                (*jac)(i, 0) = e;
                (*jac)(i, 1) = A * e * d / s;
                (*jac)(i, 2) = A * e * d * d / s;
                (*jac)(i, 3) = 1.0;
            }
        }
    };

    LevMarResult lm = levmar_fit(fn, x0, opts);
    GaussianFit1D out;
    out.amplitude = lm.params(0);
    out.center = lm.params(1);
    out.sigma = std::abs(lm.params(2));
    out.offset = lm.params(3);
    out.converged = lm.converged;
    out.residual_rms = std::sqrt(2.0 * lm.cost / m);
    return out;
}

Roi roi_from_readout(const RealMap& readout, double n_sigma) {
    if (n_sigma < 0.0)
        throw ValidationError("roi_from_readout: n_sigma must be >= 0");
    GaussianFit2D fit = fit_gaussian_2d(readout);
    if (!fit.converged)
        throw FitError("roi_from_readout: readout fit did not converge");

    const Grid2D& g = readout.grid;
    const double hx = n_sigma * fit.sigma_x_um;
    const double hy = n_sigma * fit.sigma_y_um;
    const int icx = g.nx / 2 + static_cast<int>(std::lround(fit.center_x_um / g.pitch_x_um));
    const int icy = g.ny / 2 + static_cast<int>(std::lround(fit.center_y_um / g.pitch_y_um));

    Roi roi;
    roi.ix0 = icx - static_cast<int>(std::lround(hx / g.pitch_x_um));
    roi.ix1 = icx + static_cast<int>(std::lround(hx / g.pitch_x_um));
    roi.iy0 = icy - static_cast<int>(std::lround(hy / g.pitch_y_um));
    roi.iy1 = icy + static_cast<int>(std::lround(hy / g.pitch_y_um));
    roi = roi.clamped(g);
    if (roi.empty())
        throw FitError("roi_from_readout: fitted center is outside the grid");
    return roi;
}

} // namespace ssmlab
