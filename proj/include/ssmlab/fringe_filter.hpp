#pragma once

#include <complex>
#include <vector>

#include "ssmlab/fft.hpp"
#include "ssmlab/fringe_types.hpp"

namespace ssmlab {

/// Rectangular window on the centered Fourier plane, inclusive sample bounds.
struct KWindow {
    int ix0 = 0, ix1 = -1;
    int iy0 = 0, iy1 = -1;

    int nx() const { return ix1 - ix0 + 1; }
    int ny() const { return iy1 - iy0 + 1; }
    bool contains(int ix, int iy) const {
        return ix >= ix0 && ix <= ix1 && iy >= iy0 && iy <= iy1;
    }
    bool operator==(const KWindow& o) const {
        return ix0 == o.ix0 && ix1 == o.ix1 && iy0 == o.iy0 && iy1 == o.iy1;
    }

    /// Mirror through DC (k -> -k) on the same grid.
    KWindow conjugate(const Grid2D& g) const {
        return KWindow{g.nx - ix1, g.nx - ix0, g.ny - iy1, g.ny - iy0};
    }
};

/// Window centered on physical frequency (kx, ky) with the given half-widths
/// (rad/um). Throws WindowError if it leaves the grid or touches DC
/// (the DC sample plus a 1-sample guard ring must stay outside).
KWindow window_around(const Grid2D& grid, double kx, double ky,
                      double half_kx, double half_ky);

/// Default sideband window: centered on the measured |spectrum| peak near the
/// expected carrier, half-width 0.5 * |K0| (half the sideband-to-DC distance)
/// per axis.
KWindow default_sideband_window(const Grid2D& grid, const RealMap& spectrum_mag,
                                double k0x, double k0y);

/// One filtered sideband: the windowed block of the centered spectrum.
/// The full-grid analytic signal is materialized on demand (to_field), while
/// tracking and averaging work on the block directly; both views are
/// equivalent by Parseval since the spectrum is zero outside the window.
struct AnalyticSignal {
    Grid2D grid;
    KWindow window;
    Eigen::ArrayXXcd spectrum; // (window.ny(), window.nx())

    ComplexField to_field() const;
};

/// <a|b> = sum a * conj(b) over the window (windows must match).
std::complex<double> signal_dot(const AnalyticSignal& a, const AnalyticSignal& b);

double signal_norm(const AnalyticSignal& a);

/// Forward FFT of the frame, keep the windowed block. The window must
/// exclude DC and the conjugate sideband by construction of window_around.
AnalyticSignal fourier_filter(const RealMap& frame, const KWindow& window);
AnalyticSignal fourier_filter(const CameraFrame& frame, const KWindow& window);

/// |centered spectrum| of a frame; helper for window placement and tests.
RealMap spectrum_magnitude(const RealMap& frame);

} // namespace ssmlab
