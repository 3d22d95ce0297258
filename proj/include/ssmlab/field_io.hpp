#pragma once

#include <string>

#include "ssmlab/field.hpp"

namespace ssmlab {

// Maps and fields are exchanged as raw little-endian float32 next to a JSON
// sidecar. `path` names the .f32 payload; the sidecar is path + ".json" with
// keys {nx, ny, pitch_x_um, pitch_y_um, kind, units}. Complex payloads are
// interleaved re,im per sample, row-major (y rows).

void save_real_map(const std::string& path, const RealMap& map,
                   const std::string& units = "arb");
RealMap load_real_map(const std::string& path);

void save_complex_field(const std::string& path, const ComplexField& field,
                        const std::string& units = "arb");
ComplexField load_complex_field(const std::string& path);

} // namespace ssmlab
