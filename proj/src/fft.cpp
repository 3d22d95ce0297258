#include "ssmlab/fft.hpp"

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include <fftw3.h>

namespace ssmlab {

namespace {

// FFTW plan creation is not thread-safe; execution via the new-array
// interface is. Plans are created once per (ny, nx, sign) with
// FFTW_ESTIMATE (deterministic) | FFTW_UNALIGNED (any buffer).
class PlanCache {
public:
    fftw_plan get2d(int ny, int nx, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(ny, nx, sign);
        auto it = plans2d_.find(key);
        if (it != plans2d_.end()) return it->second;
        std::vector<std::complex<double>> dummy(static_cast<size_t>(ny) * nx);
        auto* p = reinterpret_cast<fftw_complex*>(dummy.data());
        fftw_plan plan = fftw_plan_dft_2d(ny, nx, p, p, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans2d_.emplace(key, plan);
        return plan;
    }

    fftw_plan get1d(int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_pair(n, sign);
        auto it = plans1d_.find(key);
        if (it != plans1d_.end()) return it->second;
        std::vector<std::complex<double>> dummy(static_cast<size_t>(n));
        auto* p = reinterpret_cast<fftw_complex*>(dummy.data());
        fftw_plan plan = fftw_plan_dft_1d(n, p, p, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans1d_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans2d_;
    std::map<std::pair<int, int>, fftw_plan> plans1d_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

// Shift + transform + shift. For even n the forward and inverse index shifts
// coincide (roll by n/2), which keeps the round trip exact.
ComplexField transform2(const ComplexField& in, int sign) {
    const Grid2D& g = in.grid;
    const int nx = g.nx, ny = g.ny;
    const size_t total = static_cast<size_t>(nx) * ny;
    std::vector<std::complex<double>> buf(total), out(total);

    const int sx = nx / 2, sy = ny / 2;
    for (int j = 0; j < ny; ++j) {
        const int js = (j + sy) % ny;
        for (int i = 0; i < nx; ++i)
            buf[static_cast<size_t>(js) * nx + ((i + sx) % nx)] = in.values(j, i);
    }

    fftw_plan plan = cache().get2d(ny, nx, sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));

    const double norm = 1.0 / std::sqrt(static_cast<double>(total));
    // forward: output spacing is dk; inverse: undo a forward transform whose
    // pitch holds dk, recovering the spatial pitch 2pi/(n dk)
    const double px = (sign == FFTW_FORWARD) ? g.dk_x() : 2.0 * M_PI / (nx * g.pitch_x_um);
    const double py = (sign == FFTW_FORWARD) ? g.dk_y() : 2.0 * M_PI / (ny * g.pitch_y_um);
    const Grid2D kgrid(nx, ny, px, py);

    ComplexField result(kgrid);
    for (int j = 0; j < ny; ++j) {
        const int js = (j + sy) % ny;
        for (int i = 0; i < nx; ++i)
            result.values(j, i) = out[static_cast<size_t>(js) * nx + ((i + sx) % nx)] * norm;
    }
    return result;
}

} // namespace

ComplexField fft2_centered(const ComplexField& in) {
    return transform2(in, FFTW_FORWARD);
}

ComplexField ifft2_centered(const ComplexField& in) {
    return transform2(in, FFTW_BACKWARD);
}

Eigen::ArrayXcd fft1_centered(const Eigen::ArrayXcd& in) {
    const int n = static_cast<int>(in.size());
    if (n < 8 || n % 2 != 0)
        throw ValidationError("fft1_centered: length must be even and >= 8");
    std::vector<std::complex<double>> buf(n), out(n);
    const int s = n / 2;
    for (int i = 0; i < n; ++i) buf[(i + s) % n] = in(i);
    fftw_plan plan = cache().get1d(n, FFTW_FORWARD);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::ArrayXcd result(n);
    for (int i = 0; i < n; ++i) result(i) = out[(i + s) % n] * norm;
    return result;
}

ComplexField pad_centered(const ComplexField& in, int factor) {
    if (factor < 1)
        throw ValidationError("pad_centered: factor must be >= 1");
    if (factor == 1) return in;
    const Grid2D& g = in.grid;
    Grid2D pg(g.nx * factor, g.ny * factor, g.pitch_x_um, g.pitch_y_um);
    ComplexField out(pg);
    const int ox = (pg.nx - g.nx) / 2;
    const int oy = (pg.ny - g.ny) / 2;
    out.values.block(oy, ox, g.ny, g.nx) = in.values;
    return out;
}

} // namespace ssmlab
