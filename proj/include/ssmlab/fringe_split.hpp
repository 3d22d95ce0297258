#pragma once

#include <vector>

#include "ssmlab/fringe_filter.hpp"

namespace ssmlab {

/// Separate the two readout sidebands of a split-readout stack. The second
/// readout carries a saw-tooth tilt along y, so its carrier is shifted by the
/// saw-tooth gradient in k_y; boundary_ky_rad_um is the dividing line between
/// the two sidebands (normally K0y + g/2). Each frame is transformed once and
/// both windows are cut from the same spectrum.
///
/// Errors if the two sidebands cannot be resolved as separate lobes (e.g. no
/// saw-tooth was applied): the message names the measured separation.
struct SplitSignals {
    std::vector<AnalyticSignal> first;
    std::vector<AnalyticSignal> second;
    KWindow window1, window2;
    double separation_rad_um = 0.0;
};

SplitSignals split_readout_separate(const std::vector<CameraFrame>& frames,
                                    double boundary_ky_rad_um);

/// Relative phase statistics between the two tracked readouts.
/// delta = unwrap(wrap(phi1 - phi2)); rolling stats use a centered window.
struct DeltaPhiStats {
    std::vector<double> delta_rad;
    double std_rad = 0.0;
    std::vector<double> rolling_mean;
    std::vector<double> rolling_std;
    int window = 50;
};

DeltaPhiStats delta_phi_stats(const std::vector<double>& phi1,
                              const std::vector<double>& phi2, int window = 50);

} // namespace ssmlab
