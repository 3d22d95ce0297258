#include "ssmlab/field.hpp"

#include <cmath>

namespace ssmlab {

ComplexField gaussian_field(const Grid2D& grid, double waist_x_um, double waist_y_um,
                            double center_x_um, double center_y_um) {
    if (!(waist_x_um > 0.0) || !(waist_y_um > 0.0))
        throw ValidationError("gaussian_field: waists must be positive");
    const double hx = 0.5 * grid.extent_x_um();
    const double hy = 0.5 * grid.extent_y_um();
    if (center_x_um < -hx || center_x_um > hx || center_y_um < -hy || center_y_um > hy)
        throw ValidationError("gaussian_field: center lies outside the grid");

    ComplexField f(grid);
    for (int j = 0; j < grid.ny; ++j) {
        const double dy = (grid.y(j) - center_y_um) / waist_y_um;
        for (int i = 0; i < grid.nx; ++i) {
            const double dx = (grid.x(i) - center_x_um) / waist_x_um;
            f.values(j, i) = std::exp(-dx * dx - dy * dy);
        }
    }
    return f;
}

RealMap intensity_map(const ComplexField& field) {
    RealMap m(field.grid);
    m.values = field.values.abs2();
    return m;
}

double total_intensity(const ComplexField& field) {
    return field.values.abs2().sum();
}

double sum_over(const RealMap& map, const Roi& roi) {
    const Roi r = roi.clamped(map.grid);
    if (r.empty())
        throw ValidationError("sum_over: empty ROI");
    return map.values.block(r.iy0, r.ix0, r.height(), r.width()).sum();
}

} // namespace ssmlab
