#include "ssmlab/field_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "ssmlab/fringe_types.hpp"

namespace ssmlab {

namespace {

using nlohmann::json;

void write_sidecar(const std::string& path, const Grid2D& g, const std::string& kind,
                   const std::string& units) {
    json meta = {
        {"nx", g.nx},
        {"ny", g.ny},
        {"pitch_x_um", g.pitch_x_um},
        {"pitch_y_um", g.pitch_y_um},
        {"kind", kind},
        {"units", units},
        {"dtype", "float32-le"},
        {"order", "row-major"},
    };
    std::ofstream out(path + ".json");
    if (!out) throw Error("cannot write sidecar " + path + ".json");
    out << meta.dump(2) << "\n";
}

json read_sidecar(const std::string& path, const std::string& expected_kind) {
    std::ifstream in(path + ".json");
    if (!in) throw Error("cannot read sidecar " + path + ".json");
    json meta = json::parse(in);
    if (meta.at("kind").get<std::string>() != expected_kind)
        throw Error(path + ": sidecar kind is '" + meta.at("kind").get<std::string>() +
                    "', expected '" + expected_kind + "'");
    return meta;
}

void write_floats(const std::string& path, const std::vector<float>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
}

std::vector<float> read_floats(const std::string& path, size_t expected) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw Error("cannot read " + path);
    const auto bytes = static_cast<size_t>(in.tellg());
    if (bytes != expected * sizeof(float))
        throw Error(path + ": payload size does not match sidecar grid");
    std::vector<float> data(expected);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
    return data;
}

} // namespace

void save_real_map(const std::string& path, const RealMap& map, const std::string& units) {
    const Grid2D& g = map.grid;
    std::vector<float> data(static_cast<size_t>(g.nx) * g.ny);
    size_t idx = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            data[idx++] = static_cast<float>(map.values(j, i));
    write_floats(path, data);
    write_sidecar(path, g, "real", units);
}

RealMap load_real_map(const std::string& path) {
    json meta = read_sidecar(path, "real");
    Grid2D g(meta.at("nx").get<int>(), meta.at("ny").get<int>(),
             meta.at("pitch_x_um").get<double>(), meta.at("pitch_y_um").get<double>());
    auto data = read_floats(path, static_cast<size_t>(g.nx) * g.ny);
    RealMap map(g);
    size_t idx = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            map.values(j, i) = data[idx++];
    return map;
}

void save_complex_field(const std::string& path, const ComplexField& field,
                        const std::string& units) {
    const Grid2D& g = field.grid;
    std::vector<float> data(2 * static_cast<size_t>(g.nx) * g.ny);
    size_t idx = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            data[idx++] = static_cast<float>(field.values(j, i).real());
            data[idx++] = static_cast<float>(field.values(j, i).imag());
        }
    write_floats(path, data);
    write_sidecar(path, g, "complex", units);
}

ComplexField load_complex_field(const std::string& path) {
    json meta = read_sidecar(path, "complex");
    Grid2D g(meta.at("nx").get<int>(), meta.at("ny").get<int>(),
             meta.at("pitch_x_um").get<double>(), meta.at("pitch_y_um").get<double>());
    auto data = read_floats(path, 2 * static_cast<size_t>(g.nx) * g.ny);
    ComplexField field(g);
    size_t idx = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double re = data[idx++];
            const double im = data[idx++];
            field.values(j, i) = Complex(re, im);
        }
    return field;
}

namespace {

std::string frame_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d.u16", index);
    return buf;
}

} // namespace

void save_frame_stack(const std::string& dir, const std::vector<CameraFrame>& frames,
                      uint64_t seed, const CameraModel& cam, const ReferenceBeam& ref) {
    if (frames.empty()) throw ValidationError("save_frame_stack: no frames");
    std::filesystem::create_directories(dir);

    const Grid2D& g = frames.front().grid;
    json manifest = {
        {"n_frames", frames.size()},
        {"nx", g.nx},
        {"ny", g.ny},
        {"pitch_x_um", g.pitch_x_um},
        {"pitch_y_um", g.pitch_y_um},
        {"dtype", "uint16-le"},
        {"order", "row-major"},
        {"seed", seed},
        {"camera",
         {{"gain", cam.gain},
          {"read_noise_std", cam.read_noise_std},
          {"shot_noise", cam.shot_noise},
          {"excess_noise", cam.excess_noise},
          {"bit_depth", cam.bit_depth},
          {"pixel_pitch_um", cam.pixel_pitch_um}}},
        {"reference",
         {{"tilt_kx_rad_um", ref.tilt_kx_rad_um},
          {"tilt_ky_rad_um", ref.tilt_ky_rad_um},
          {"relative_power", ref.relative_power},
          {"amplitude", ref.amplitude}}},
    };
    json meta = json::array();
    for (size_t t = 0; t < frames.size(); ++t) {
        const CameraFrame& f = frames[t];
        if (!f.grid.same_shape(g))
            throw DimensionError("save_frame_stack: frames live on different grids");
        meta.push_back({{"index", f.frame_index},
                        {"timestamp_s", f.timestamp_s},
                        {"saturated", f.saturated}});

        const std::string path = dir + "/" + frame_name(static_cast<int>(t));
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write " + path);
        std::vector<uint16_t> row(static_cast<size_t>(g.nx));
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) row[static_cast<size_t>(i)] = f.counts(j, i);
            out.write(reinterpret_cast<const char*>(row.data()),
                      static_cast<std::streamsize>(row.size() * sizeof(uint16_t)));
        }
    }
    manifest["frames"] = std::move(meta);
    std::ofstream out(dir + "/manifest.json");
    if (!out) throw Error("cannot write " + dir + "/manifest.json");
    out << manifest.dump(2) << "\n";
}

std::vector<CameraFrame> load_frame_stack(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw Error("cannot read " + dir + "/manifest.json");
    json manifest = json::parse(in);

    Grid2D g(manifest.at("nx").get<int>(), manifest.at("ny").get<int>(),
             manifest.at("pitch_x_um").get<double>(),
             manifest.at("pitch_y_um").get<double>());
    const auto n = manifest.at("n_frames").get<size_t>();
    const json& meta = manifest.at("frames");
    if (meta.size() != n)
        throw Error(dir + ": manifest frame list does not match n_frames");

    std::vector<CameraFrame> frames;
    frames.reserve(n);
    const size_t expected = static_cast<size_t>(g.nx) * g.ny * sizeof(uint16_t);
    for (size_t t = 0; t < n; ++t) {
        const std::string path = dir + "/" + frame_name(static_cast<int>(t));
        std::ifstream fin(path, std::ios::binary | std::ios::ate);
        if (!fin) throw Error("cannot read " + path);
        if (static_cast<size_t>(fin.tellg()) != expected)
            throw Error(path + ": payload size does not match manifest grid");
        fin.seekg(0);

        CameraFrame f;
        f.grid = g;
        f.counts.resize(g.ny, g.nx);
        std::vector<uint16_t> row(static_cast<size_t>(g.nx));
        for (int j = 0; j < g.ny; ++j) {
            fin.read(reinterpret_cast<char*>(row.data()),
                     static_cast<std::streamsize>(row.size() * sizeof(uint16_t)));
            for (int i = 0; i < g.nx; ++i) f.counts(j, i) = row[static_cast<size_t>(i)];
        }
        f.frame_index = meta[t].at("index").get<int>();
        f.timestamp_s = meta[t].at("timestamp_s").get<double>();
        f.saturated = meta[t].at("saturated").get<long>();
        frames.push_back(std::move(f));
    }
    return frames;
}

} // namespace ssmlab
