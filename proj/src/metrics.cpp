#include "ssmlab/metrics.hpp"

#include <cmath>
#include <complex>

namespace ssmlab {

namespace {

void check_compatible(const RealMap& a, const RealMap& b, const char* who) {
    if (!a.grid.same_shape(b.grid))
        throw DimensionError(std::string(who) + ": map shapes differ");
}

} // namespace

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * M_PI);
    if (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

double overlap_fidelity(const RealMap& i, const RealMap& i0, const Roi& roi) {
    check_compatible(i, i0, "overlap_fidelity");
    const Roi r = roi.clamped(i.grid);
    if (r.empty()) throw ValidationError("overlap_fidelity: empty ROI");

    double cross = 0.0, s1 = 0.0, s0 = 0.0;
    for (int j = r.iy0; j <= r.iy1; ++j)
        for (int x = r.ix0; x <= r.ix1; ++x) {
            const double a = i.values(j, x);
            const double b = i0.values(j, x);
            if (a < 0.0 || b < 0.0)
                throw ValidationError("overlap_fidelity: negative intensity sample");
            cross += std::sqrt(a * b);
            s1 += a;
            s0 += b;
        }
    if (!(s1 > 0.0) || !(s0 > 0.0))
        throw ValidationError("overlap_fidelity: map is zero on the ROI");
    const double f = cross / std::sqrt(s1 * s0);
    return std::min(f, 1.0); // Cauchy-Schwarz, clamp rounding overshoot
}

double phase_fidelity(const RealMap& phi, const RealMap& phi0, const Roi& roi) {
    check_compatible(phi, phi0, "phase_fidelity");
    RealMap a(phi.grid), b(phi0.grid);
    a.values = phi.values.square();
    b.values = phi0.values.square();
    return overlap_fidelity(a, b, roi);
}

double efficiency(const RealMap& i, const RealMap& i0, const Roi& roi) {
    check_compatible(i, i0, "efficiency");
    const Roi r = roi.clamped(i.grid);
    if (r.empty()) throw ValidationError("efficiency: empty ROI");
    const double s0 = i0.values.block(r.iy0, r.ix0, r.height(), r.width()).sum();
    if (!(s0 > 0.0))
        throw ValidationError("efficiency: reference energy is zero on the ROI");
    const double s1 = i.values.block(r.iy0, r.ix0, r.height(), r.width()).sum();
    return s1 / s0;
}

AlignedPhase align_global_phase(const RealMap& phi, const RealMap& phi0, const Roi& roi) {
    check_compatible(phi, phi0, "align_global_phase");
    const Roi r = roi.clamped(phi.grid);
    if (r.empty()) throw ValidationError("align_global_phase: empty ROI");

    std::complex<double> acc(0.0, 0.0);
    for (int j = r.iy0; j <= r.iy1; ++j)
        for (int x = r.ix0; x <= r.ix1; ++x)
            acc += std::polar(1.0, phi.values(j, x) - phi0.values(j, x));

    AlignedPhase out;
    out.offset_rad = std::arg(acc);
    out.phi = RealMap(phi.grid);
    for (int j = 0; j < phi.grid.ny; ++j)
        for (int x = 0; x < phi.grid.nx; ++x)
            out.phi.values(j, x) = wrap_angle(phi.values(j, x) - out.offset_rad);
    return out;
}

} // namespace ssmlab
