#include "ssmlab/fringe_split.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "ssmlab/fringe_track.hpp"
#include "ssmlab/metrics.hpp"

namespace ssmlab {

namespace {

struct Peak {
    int ix = 0, iy = 0;
    double value = -1.0;
};

Peak find_peak(const Eigen::ArrayXXd& mag, int ix0, int ix1, int iy0, int iy1) {
    Peak p;
    for (int j = iy0; j <= iy1; ++j)
        for (int i = ix0; i <= ix1; ++i)
            if (mag(j, i) > p.value) {
                p.value = mag(j, i);
                p.ix = i;
                p.iy = j;
            }
    return p;
}

} // namespace

SplitSignals split_readout_separate(const std::vector<CameraFrame>& frames,
                                    double boundary_ky_rad_um) {
    if (frames.empty())
        throw ValidationError("split_readout_separate: no frames");
    const Grid2D& g = frames.front().grid;
    for (const CameraFrame& f : frames)
        if (!f.grid.same_shape(g))
            throw DimensionError("split_readout_separate: frames live on different grids");

    // incoherent spectrum average over a few frames for robust peak placement
    const int n_probe = std::min<int>(8, static_cast<int>(frames.size()));
    Eigen::ArrayXXd mag = Eigen::ArrayXXd::Zero(g.ny, g.nx);
    for (int t = 0; t < n_probe; ++t)
        mag += spectrum_magnitude(frames[t].to_map()).values;
    mag /= n_probe;

    const int cx = g.nx / 2, cy = g.ny / 2;
    const int jb = cy + static_cast<int>(std::lround(boundary_ky_rad_um / g.dk_y()));
    if (jb <= 1 || jb >= g.ny - 1)
        throw WindowError("split_readout_separate: boundary_ky leaves the grid");

    // both carriers sit in the kx > 0 half-plane; the saw-tooth splits them in ky
    const int ix_lo = cx + 2; // skip the DC column and its guard
    const Peak p1 = find_peak(mag, ix_lo, g.nx - 1, 0, jb - 1);
    const Peak p2 = find_peak(mag, ix_lo, g.nx - 1, jb, g.ny - 1);
    if (!(p1.value > 0.0) || !(p2.value > 0.0))
        throw WindowError("split_readout_separate: no sideband on one side of the boundary");

    const double k1x = (p1.ix - cx) * g.dk_x(), k1y = (p1.iy - cy) * g.dk_y();
    const double k2x = (p2.ix - cx) * g.dk_x(), k2y = (p2.iy - cy) * g.dk_y();
    const double sep = std::hypot(k2x - k1x, k2y - k1y);

    // the two lobes must be genuinely distinct: a valley between the peaks
    // and enough separation for non-overlapping windows
    const int mi = (p1.ix + p2.ix) / 2, mj = (p1.iy + p2.iy) / 2;
    const double valley = mag(mj, mi);
    const double sep_samples = std::hypot(double(p2.ix - p1.ix), double(p2.iy - p1.iy));
    if (sep_samples < 4.0 || valley > 0.5 * std::min(p1.value, p2.value)) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "split_readout_separate: sidebands not resolved "
                      "(separation %.4g rad/um, valley/peak %.2f)",
                      sep, valley / std::min(p1.value, p2.value));
        throw WindowError(buf);
    }

    // window half-width: sideband-sized, but capped at a quarter separation so
    // the windows stay at least their own width apart
    const double hw = std::min(0.5 * std::hypot(k1x, k1y), 0.25 * sep);
    SplitSignals out;
    out.window1 = window_around(g, k1x, k1y, hw, hw);
    out.window2 = window_around(g, k2x, k2y, hw, hw);
    out.separation_rad_um = sep;
    if (out.window1.iy1 >= out.window2.iy0 && out.window1.ix1 >= out.window2.ix0 &&
        out.window2.ix1 >= out.window1.ix0)
        throw WindowError("split_readout_separate: sideband windows overlap");

    // one transform per frame, both windows cut from the same spectrum
    out.first.reserve(frames.size());
    out.second.reserve(frames.size());
    for (const CameraFrame& f : frames) {
        ComplexField tmp(g);
        tmp.values = f.to_map().values.cast<Complex>();
        ComplexField spec = fft2_centered(tmp);

        AnalyticSignal a;
        a.grid = g;
        a.window = out.window1;
        a.spectrum = spec.values.block(out.window1.iy0, out.window1.ix0,
                                       out.window1.ny(), out.window1.nx());
        out.first.push_back(std::move(a));

        AnalyticSignal b;
        b.grid = g;
        b.window = out.window2;
        b.spectrum = spec.values.block(out.window2.iy0, out.window2.ix0,
                                       out.window2.ny(), out.window2.nx());
        out.second.push_back(std::move(b));
    }
    return out;
}

DeltaPhiStats delta_phi_stats(const std::vector<double>& phi1,
                              const std::vector<double>& phi2, int window) {
    if (phi1.size() != phi2.size())
        throw DimensionError("delta_phi_stats: series lengths differ");
    const int n = static_cast<int>(phi1.size());
    if (n < 2) throw ValidationError("delta_phi_stats: need at least 2 frames");
    if (window < 2) throw ValidationError("delta_phi_stats: window must be >= 2");

    std::vector<double> wrapped(n);
    for (int t = 0; t < n; ++t) wrapped[t] = wrap_angle(phi1[t] - phi2[t]);

    DeltaPhiStats out;
    out.window = window;
    out.delta_rad = unwrap_series(wrapped);

    double mean = 0.0;
    for (double d : out.delta_rad) mean += d;
    mean /= n;
    double ss = 0.0;
    for (double d : out.delta_rad) ss += (d - mean) * (d - mean);
    out.std_rad = std::sqrt(ss / (n - 1));

    out.rolling_mean.resize(n);
    out.rolling_std.resize(n);
    const int half = window / 2;
    for (int t = 0; t < n; ++t) {
        const int lo = std::max(0, t - half);
        const int hi = std::min(n - 1, t + half);
        const int m = hi - lo + 1;
        double mu = 0.0;
        for (int s = lo; s <= hi; ++s) mu += out.delta_rad[s];
        mu /= m;
        double v = 0.0;
        for (int s = lo; s <= hi; ++s)
            v += (out.delta_rad[s] - mu) * (out.delta_rad[s] - mu);
        out.rolling_mean[t] = mu;
        out.rolling_std[t] = m > 1 ? std::sqrt(v / (m - 1)) : 0.0;
    }
    return out;
}

} // namespace ssmlab
