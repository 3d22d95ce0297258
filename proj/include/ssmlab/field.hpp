#pragma once

#include <complex>

#include <Eigen/Dense>

#include "ssmlab/grid.hpp"

namespace ssmlab {

using Complex = std::complex<double>;

/// Real-valued map sampled on a Grid2D. values(j, i) is row j = y, col i = x,
/// matching the (ny, nx) array shape used on disk.
struct RealMap {
    Grid2D grid;
    Eigen::ArrayXXd values; // (ny, nx)

    RealMap() = default;
    explicit RealMap(const Grid2D& g)
        : grid(g), values(Eigen::ArrayXXd::Zero(g.ny, g.nx)) {}
    RealMap(const Grid2D& g, Eigen::ArrayXXd v) : grid(g), values(std::move(v)) {
        if (values.rows() != grid.ny || values.cols() != grid.nx)
            throw DimensionError("RealMap: value shape does not match grid");
    }
};

/// Complex scalar field sampled on a Grid2D, same layout as RealMap.
struct ComplexField {
    Grid2D grid;
    Eigen::ArrayXXcd values; // (ny, nx)

    ComplexField() = default;
    explicit ComplexField(const Grid2D& g)
        : grid(g), values(Eigen::ArrayXXcd::Zero(g.ny, g.nx)) {}
    ComplexField(const Grid2D& g, Eigen::ArrayXXcd v)
        : grid(g), values(std::move(v)) {
        if (values.rows() != grid.ny || values.cols() != grid.nx)
            throw DimensionError("ComplexField: value shape does not match grid");
    }
};

/// Unit-peak Gaussian amplitude envelope exp(-(x-x0)^2/wx^2 - (y-y0)^2/wy^2).
/// Waists are 1/e amplitude radii (= 1/e^2 intensity radii). The center must
/// lie inside the grid extent.
ComplexField gaussian_field(const Grid2D& grid, double waist_x_um, double waist_y_um,
                            double center_x_um = 0.0, double center_y_um = 0.0);

/// |field|^2 sample by sample.
RealMap intensity_map(const ComplexField& field);

/// Sum of |field|^2 over all samples.
double total_intensity(const ComplexField& field);

/// Sum of map values over a ROI (clamped to the grid).
double sum_over(const RealMap& map, const Roi& roi);

} // namespace ssmlab
