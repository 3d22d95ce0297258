#include "ssmlab/fringe_filter.hpp"

#include <cmath>

namespace ssmlab {

namespace {

void check_window(const Grid2D& g, const KWindow& w, const char* who) {
    if (w.ix0 > w.ix1 || w.iy0 > w.iy1)
        throw WindowError(std::string(who) + ": empty window");
    if (w.ix0 < 0 || w.iy0 < 0 || w.ix1 >= g.nx || w.iy1 >= g.ny)
        throw WindowError(std::string(who) + ": window leaves the grid");
    // DC sample plus a 1-sample guard ring must stay outside (carrier leakage)
    const int cx = g.nx / 2, cy = g.ny / 2;
    if (w.ix0 <= cx + 1 && w.ix1 >= cx - 1 && w.iy0 <= cy + 1 && w.iy1 >= cy - 1)
        throw WindowError(std::string(who) + ": window touches DC");
}

} // namespace

KWindow window_around(const Grid2D& grid, double kx, double ky,
                      double half_kx, double half_ky) {
    if (!(half_kx > 0.0) || !(half_ky > 0.0))
        throw WindowError("window_around: half-widths must be positive");
    const int cx = grid.nx / 2, cy = grid.ny / 2;
    KWindow w;
    w.ix0 = cx + static_cast<int>(std::floor((kx - half_kx) / grid.dk_x()));
    w.ix1 = cx + static_cast<int>(std::ceil((kx + half_kx) / grid.dk_x()));
    w.iy0 = cy + static_cast<int>(std::floor((ky - half_ky) / grid.dk_y()));
    w.iy1 = cy + static_cast<int>(std::ceil((ky + half_ky) / grid.dk_y()));
    check_window(grid, w, "window_around");
    return w;
}

KWindow default_sideband_window(const Grid2D& grid, const RealMap& spectrum_mag,
                                double k0x, double k0y) {
    if (!spectrum_mag.grid.same_shape(grid))
        throw DimensionError("default_sideband_window: spectrum shape mismatch");
    const double kmag = std::hypot(k0x, k0y);
    if (!(kmag > 0.0))
        throw WindowError("default_sideband_window: carrier frequency is zero");

    // search for the actual peak within a quarter carrier of the expectation
    const int cx = grid.nx / 2, cy = grid.ny / 2;
    const int ix_c = cx + static_cast<int>(std::lround(k0x / grid.dk_x()));
    const int iy_c = cy + static_cast<int>(std::lround(k0y / grid.dk_y()));
    const int rx = std::max(2, static_cast<int>(std::lround(0.25 * kmag / grid.dk_x())));
    const int ry = std::max(2, static_cast<int>(std::lround(0.25 * kmag / grid.dk_y())));

    int best_i = ix_c, best_j = iy_c;
    double best = -1.0;
    for (int j = std::max(0, iy_c - ry); j <= std::min(grid.ny - 1, iy_c + ry); ++j)
        for (int i = std::max(0, ix_c - rx); i <= std::min(grid.nx - 1, ix_c + rx); ++i)
            if (spectrum_mag.values(j, i) > best) {
                best = spectrum_mag.values(j, i);
                best_i = i;
                best_j = j;
            }

    const double peak_kx = (best_i - cx) * grid.dk_x();
    const double peak_ky = (best_j - cy) * grid.dk_y();
    return window_around(grid, peak_kx, peak_ky, 0.5 * kmag, 0.5 * kmag);
}

ComplexField AnalyticSignal::to_field() const {
    ComplexField spec(Grid2D(grid.nx, grid.ny, grid.dk_x(), grid.dk_y()));
    spec.values.block(window.iy0, window.ix0, window.ny(), window.nx()) = spectrum;
    ComplexField out = ifft2_centered(spec);
    out.grid = grid; // restore exact pitches (avoid 2pi/(n dk) rounding)
    return out;
}

std::complex<double> signal_dot(const AnalyticSignal& a, const AnalyticSignal& b) {
    if (!(a.window == b.window) || !a.grid.same_shape(b.grid))
        throw DimensionError("signal_dot: signals live on different windows");
    return (a.spectrum * b.spectrum.conjugate()).sum();
}

double signal_norm(const AnalyticSignal& a) {
    return std::sqrt(a.spectrum.abs2().sum());
}

AnalyticSignal fourier_filter(const RealMap& frame, const KWindow& window) {
    const Grid2D& g = frame.grid;
    check_window(g, window, "fourier_filter");

    ComplexField tmp(g);
    tmp.values = frame.values.cast<Complex>();
    ComplexField spec = fft2_centered(tmp);

    AnalyticSignal out;
    out.grid = g;
    out.window = window;
    out.spectrum = spec.values.block(window.iy0, window.ix0, window.ny(), window.nx());
    return out;
}

AnalyticSignal fourier_filter(const CameraFrame& frame, const KWindow& window) {
    return fourier_filter(frame.to_map(), window);
}

RealMap spectrum_magnitude(const RealMap& frame) {
    ComplexField tmp(frame.grid);
    tmp.values = frame.values.cast<Complex>();
    ComplexField spec = fft2_centered(tmp);
    RealMap mag(Grid2D(frame.grid.nx, frame.grid.ny, frame.grid.dk_x(), frame.grid.dk_y()));
    mag.values = spec.values.abs();
    return mag;
}

} // namespace ssmlab
