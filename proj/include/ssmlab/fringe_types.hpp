#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssmlab/field.hpp"

namespace ssmlab {

/// Tilted plane-wave reference for off-axis holography. The tilt components
/// are the carrier frequency of the direct-image sideband: the reference
/// field is exp(-i K0.r), so the cross term S R* appears at +K0.
/// If `amplitude` is zero the flat amplitude is derived per frame as
/// sqrt(relative_power * peak readout intensity); scenarios normally resolve
/// it once so all frames share the same reference. An optional amplitude map
/// overrides the flat profile.
struct ReferenceBeam {
    double tilt_kx_rad_um = 0.13;
    double tilt_ky_rad_um = 0.13;
    double relative_power = 1.0;
    double amplitude = 0.0;
    std::optional<RealMap> amplitude_map;

    double k_mag() const {
        return std::hypot(tilt_kx_rad_um, tilt_ky_rad_um);
    }
};

/// Slow interferometer drift: a Gaussian random walk, one step per frame.
struct DriftModel {
    double step_std_rad = 0.05;
};

/// Generate the walk Phi_0 = 0, Phi_t = Phi_{t-1} + N(0, step^2).
std::vector<double> drift_walk(const DriftModel& drift, int n_frames, uint64_t seed);

/// Intensified camera: linear gain, optional shot noise with an excess-noise
/// multiplier (shot variance = excess_noise * mean), Gaussian read noise,
/// then quantization and saturation at bit_depth.
struct CameraModel {
    double gain = 1.0;            // counts per intensity unit
    double read_noise_std = 2.0;  // counts
    bool shot_noise = true;
    double excess_noise = 2.0;    // intensifier excess-noise factor
    int bit_depth = 16;
    double pixel_pitch_um = 3.25;

    uint32_t max_count() const { return (1u << bit_depth) - 1u; }

    void validate() const {
        if (!(gain > 0)) throw ValidationError("CameraModel: gain must be positive");
        if (read_noise_std < 0) throw ValidationError("CameraModel: read noise must be >= 0");
        if (excess_noise < 1.0) throw ValidationError("CameraModel: excess_noise must be >= 1");
        if (bit_depth < 8 || bit_depth > 16)
            throw ValidationError("CameraModel: bit_depth out of range [8,16]");
        if (!(pixel_pitch_um > 0)) throw ValidationError("CameraModel: pixel pitch must be positive");
    }
};

struct CameraFrame {
    Grid2D grid;
    Eigen::Array<uint16_t, Eigen::Dynamic, Eigen::Dynamic> counts; // (ny, nx)
    int frame_index = 0;
    double timestamp_s = 0.0; // simulation time, deterministic
    long saturated = 0;

    RealMap to_map() const {
        RealMap m(grid);
        m.values = counts.cast<double>();
        return m;
    }
};

/// Frame-stack disk layout: <dir>/frame_%06d.u16 (raw little-endian uint16,
/// row-major) plus <dir>/manifest.json describing grid, count and provenance.
void save_frame_stack(const std::string& dir, const std::vector<CameraFrame>& frames,
                      uint64_t seed, const CameraModel& cam, const ReferenceBeam& ref);
std::vector<CameraFrame> load_frame_stack(const std::string& dir);

} // namespace ssmlab
