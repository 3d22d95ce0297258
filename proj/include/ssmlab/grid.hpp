#pragma once

#include <algorithm>
#include <cmath>

#include "ssmlab/errors.hpp"

namespace ssmlab {

/// Uniform 2D sampling grid, centered on the optical axis.
///
/// Sample (i, j) sits at x = (i - nx/2) * pitch_x, y = (j - ny/2) * pitch_y,
/// so the DC sample of a centered spectrum lives at index (nx/2, ny/2).
/// Sizes must be even (the centering convention relies on it) and at least 8.
/// Pitches are in micrometers for spatial grids; Fourier-side grids reuse the
/// same struct with the pitch holding the sample spacing in rad/um.
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double pitch_x_um = 0.0;
    double pitch_y_um = 0.0;

    Grid2D() = default;
    Grid2D(int nx_, int ny_, double pitch_x, double pitch_y)
        : nx(nx_), ny(ny_), pitch_x_um(pitch_x), pitch_y_um(pitch_y) {
        if (nx < 8 || ny < 8)
            throw ValidationError("Grid2D: nx and ny must be at least 8");
        if (nx % 2 != 0 || ny % 2 != 0)
            throw ValidationError("Grid2D: nx and ny must be even");
        if (!(pitch_x_um > 0.0) || !(pitch_y_um > 0.0))
            throw ValidationError("Grid2D: pitches must be positive");
    }

    double x(int i) const { return (i - nx / 2) * pitch_x_um; }
    double y(int j) const { return (j - ny / 2) * pitch_y_um; }

    double extent_x_um() const { return nx * pitch_x_um; }
    double extent_y_um() const { return ny * pitch_y_um; }

    /// Fourier sample spacing of the matching centered spectrum, rad/um.
    double dk_x() const { return 2.0 * M_PI / extent_x_um(); }
    double dk_y() const { return 2.0 * M_PI / extent_y_um(); }

    bool same_shape(const Grid2D& o) const { return nx == o.nx && ny == o.ny; }

    bool operator==(const Grid2D& o) const {
        return nx == o.nx && ny == o.ny &&
               pitch_x_um == o.pitch_x_um && pitch_y_um == o.pitch_y_um;
    }
};

/// Inclusive index rectangle on a Grid2D.
struct Roi {
    int ix0 = 0, ix1 = -1;
    int iy0 = 0, iy1 = -1;

    int width() const { return ix1 - ix0 + 1; }
    int height() const { return iy1 - iy0 + 1; }
    bool empty() const { return ix1 < ix0 || iy1 < iy0; }
    bool contains(int ix, int iy) const {
        return ix >= ix0 && ix <= ix1 && iy >= iy0 && iy <= iy1;
    }

    static Roi full(const Grid2D& g) { return Roi{0, g.nx - 1, 0, g.ny - 1}; }

    Roi clamped(const Grid2D& g) const {
        Roi r;
        r.ix0 = std::max(ix0, 0);
        r.iy0 = std::max(iy0, 0);
        r.ix1 = std::min(ix1, g.nx - 1);
        r.iy1 = std::min(iy1, g.ny - 1);
        return r;
    }
};

} // namespace ssmlab
