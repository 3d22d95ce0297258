#include "ssmlab/scenario.hpp"

#include <cmath>
#include <fstream>

#include "ssmlab/errors.hpp"

namespace ssmlab {

namespace {

struct ScenarioEntry {
    const char* name;
    const char* description;
    uint64_t default_seed;
};

// registry order is the display order of `ssmlab list`
const ScenarioEntry kRegistry[] = {
    {"lens-compensation",
     "far-field recovery of a cylindrically aberrated readout by an opposing modulator lens",
     101},
    {"waist-curve",
     "closed-loop fit of the waist-vs-power model (w_sw, gamma, f_ph, phase_scale)", 202},
    {"step-pi",
     "interferometric retrieval of an imprinted pi step, with fidelity and efficiency", 303},
    {"ssm-lens",
     "modulator lens retrieval: parabolic phase fit of the focal length for several truths",
     404},
    {"decoherence-gamma",
     "gamma estimate from the amplitude-ratio decoherence map of a modulator lens run", 505},
    {"split-readout",
     "two temporally split readouts on one camera: sideband separation and delta-phase stability",
     606},
    {"mc-oracle",
     "Monte-Carlo check of the closed-form white-noise decoherence envelope", 707},
};

const ScenarioEntry* find_entry(const std::string& name) {
    for (const auto& e : kRegistry)
        if (name == e.name) return &e;
    return nullptr;
}

json grid_block() {
    return {{"nx", 512}, {"ny", 512}, {"pitch_um", 3.25}};
}

json imaging_block(int pad_factor) {
    return {{"f_eff_mm", 50.0},
            {"magnification", 4.0},
            {"wavelength_nm", 780.0},
            {"pad_factor", pad_factor}};
}

json memory_block() {
    return {{"w_sw_um", 150.0}, {"nz", 256}};
}

json ssm_block(double sigma_rel) {
    return {{"alpha", 1.0},
            {"duration_us", 1.0},
            {"detuning_sign", 1},
            {"noise",
             {{"sigma_rel", sigma_rel},
              {"corr_length_um", 37.0},
              {"ensemble_length_um", 1.0e4}}}};
}

json camera_block() {
    return {{"peak_counts", 20000.0}, // target pre-noise peak; derives the gain
            {"gain", 1.0},            // used directly when peak_counts == 0
            {"read_noise_std", 2.0},
            {"shot_noise", true},
            {"excess_noise", 2.0},
            {"bit_depth", 16},
            {"pixel_pitch_um", 3.25}};
}

json reference_block() {
    return {{"tilt_kx_rad_um", 0.13}, {"tilt_ky_rad_um", 0.13}, {"relative_power", 1.0}};
}

json common(const ScenarioEntry& e) {
    return {{"scenario", e.name},
            {"seed", e.default_seed},
            {"output_dir", ""},
            {"save_maps", true},
            {"save_frames", false}};
}

void deep_merge(json& base, const json& over) {
    if (!base.is_object() || !over.is_object()) {
        base = over;
        return;
    }
    for (auto it = over.begin(); it != over.end(); ++it) {
        if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object())
            deep_merge(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

// --- validation helpers ------------------------------------------------------

const json* find_path(const json& root, const std::string& dotted) {
    const json* cur = &root;
    size_t pos = 0;
    while (pos <= dotted.size()) {
        const size_t dot = dotted.find('.', pos);
        const std::string key = dotted.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (!cur->is_object() || !cur->contains(key)) return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    return cur;
}

struct Checker {
    const json& cfg;
    std::vector<std::string>& problems;

    const json* require(const std::string& key) {
        const json* v = find_path(cfg, key);
        if (!v) problems.push_back(key + ": missing");
        return v;
    }

    double num(const std::string& key, double lo, double hi, double fallback = 0.0) {
        const json* v = require(key);
        if (!v) return fallback;
        if (!v->is_number()) {
            problems.push_back(key + ": must be a number");
            return fallback;
        }
        const double d = v->get<double>();
        if (!(d >= lo) || !(d <= hi)) {
            problems.push_back(key + ": value " + std::to_string(d) + " outside [" +
                               std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return fallback;
        }
        return d;
    }

    long integer(const std::string& key, long lo, long hi, long fallback = 0) {
        const json* v = require(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) {
            problems.push_back(key + ": must be an integer");
            return fallback;
        }
        const long d = v->get<long>();
        if (d < lo || d > hi) {
            problems.push_back(key + ": value " + std::to_string(d) + " outside [" +
                               std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return fallback;
        }
        return d;
    }

    void nonzero(const std::string& key) {
        const json* v = require(key);
        if (!v) return;
        if (!v->is_number() || v->get<double>() == 0.0 || !std::isfinite(v->get<double>()))
            problems.push_back(key + ": must be a nonzero finite number");
    }
};

void check_grid(Checker& c) {
    const long nx = c.integer("grid.nx", 8, 1 << 16);
    const long ny = c.integer("grid.ny", 8, 1 << 16);
    if (nx % 2 != 0 || ny % 2 != 0)
        c.problems.push_back("grid.nx and grid.ny must be even");
    c.num("grid.pitch_um", 1e-6, 1e6);
}

void check_imaging(Checker& c) {
    c.num("imaging.f_eff_mm", 1e-9, 1e12);
    c.num("imaging.magnification", 1e-9, 1e12);
    c.num("imaging.wavelength_nm", 1e-9, 1e12);
    c.integer("imaging.pad_factor", 1, 16);
}

void check_memory(Checker& c) {
    c.num("memory.w_sw_um", 1e-9, 1e12);
    c.integer("memory.nz", 16, 1 << 20);
}

void check_ssm(Checker& c) {
    c.num("ssm.alpha", 1e-12, 1e12);
    c.num("ssm.duration_us", 1e-12, 1e12);
    const json* sign = c.require("ssm.detuning_sign");
    if (sign && (!sign->is_number_integer() ||
                 (sign->get<int>() != 1 && sign->get<int>() != -1)))
        c.problems.push_back("ssm.detuning_sign: must be +1 or -1");
    c.num("ssm.noise.sigma_rel", 0.0, 10.0);
    const double corr = c.num("ssm.noise.corr_length_um", 1e-9, 1e12, 1.0);
    const double len = c.num("ssm.noise.ensemble_length_um", 1e-9, 1e12, 1.0);
    if (len < corr)
        c.problems.push_back("ssm.noise: ensemble_length_um must be >= corr_length_um");
}

void check_camera(Checker& c) {
    c.num("camera.peak_counts", 0.0, 1e12);
    c.num("camera.gain", 1e-12, 1e12);
    c.num("camera.read_noise_std", 0.0, 1e6);
    c.integer("camera.bit_depth", 8, 16);
    c.num("camera.excess_noise", 1.0, 1e3);
    c.num("camera.pixel_pitch_um", 1e-9, 1e6);
    const json* sn = c.require("camera.shot_noise");
    if (sn && !sn->is_boolean())
        c.problems.push_back("camera.shot_noise: must be a boolean");
}

void check_reference(Checker& c) {
    const double kx = c.num("reference.tilt_kx_rad_um", -100.0, 100.0);
    const double ky = c.num("reference.tilt_ky_rad_um", -100.0, 100.0);
    c.num("reference.relative_power", 0.0, 1e6);
    if (std::hypot(kx, ky) <= 0.0)
        c.problems.push_back("reference: tilt |K0| must be positive");
    const json* pitch = find_path(c.cfg, "grid.pitch_um");
    if (pitch && pitch->is_number() && pitch->get<double>() > 0.0 &&
        std::hypot(kx, ky) > 0.0) {
        const double period = 2.0 * M_PI / (std::hypot(kx, ky) * pitch->get<double>());
        if (period < 4.0)
            c.problems.push_back("reference: fringe period below 4 samples on this grid");
    }
}

void check_drift(Checker& c) { c.num("drift.step_std_rad", 0.0, 100.0); }

void check_frames(Checker& c) { c.integer("n_frames", 2, 1000000); }

void check_model_params(Checker& c, const std::string& prefix) {
    c.num(prefix + ".w_sw_um", 1e-9, 1e12);
    c.num(prefix + ".gamma", 0.0, 100.0);
    c.nonzero(prefix + ".f_ph_mm");
    c.num(prefix + ".phase_scale", 1e-15, 1e3);
}

} // namespace

std::vector<std::string> list_scenarios() {
    std::vector<std::string> names;
    for (const auto& e : kRegistry) names.emplace_back(e.name);
    return names;
}

std::vector<std::string> scenario_descriptions() {
    std::vector<std::string> out;
    for (const auto& e : kRegistry) out.emplace_back(e.description);
    return out;
}

json default_config(const std::string& scenario) {
    const ScenarioEntry* e = find_entry(scenario);
    if (!e) throw ValidationError("unknown scenario '" + scenario + "'");
    json cfg = common(*e);

    if (scenario == "lens-compensation") {
        cfg["grid"] = grid_block();
        cfg["imaging"] = imaging_block(4); // far-field scenario: pad for resolution
        cfg["memory"] = memory_block();
        cfg["ssm"] = ssm_block(0.29);
        cfg["compensation"] = {{"ssm_lens_mm", 125.0},
                               {"physical_lens_mm", -2000.0},
                               {"n_realizations", 20}};
    } else if (scenario == "waist-curve") {
        cfg["imaging"] = imaging_block(4);
        // reach deep enough into the decoherence-dominated regime that the
        // envelope parameter separates from the lens terms under 2% noise
        json powers = json::array();
        for (int i = 0; i <= 20; ++i) powers.push_back(0.25 * i);
        cfg["waist"] = {
            {"truth",
             {{"w_sw_um", 150.0}, {"gamma", 0.042}, {"f_ph_mm", -2000.0},
              {"phase_scale", 3.2221e-5}}},
            {"initial",
             {{"w_sw_um", 120.0}, {"gamma", 0.03}, {"f_ph_mm", -1500.0},
              {"phase_scale", 2.6e-5}}},
            {"powers", powers},
            {"noise_rel", 0.02},
            {"n_samples", 2048},
            {"pitch_um", 3.25},
            {"pad_factor", 4},
        };
    } else if (scenario == "step-pi") {
        cfg["grid"] = grid_block();
        cfg["imaging"] = imaging_block(1);
        cfg["memory"] = memory_block();
        cfg["ssm"] = ssm_block(0.29);
        cfg["camera"] = camera_block();
        cfg["reference"] = reference_block();
        cfg["drift"] = {{"step_std_rad", 0.05}};
        cfg["n_frames"] = 60;
        // edge width ~ the modulator's correlation length: sharper edges are
        // not realizable and would only shed energy past the sideband window
        cfg["step"] = {{"height_rad", M_PI}, {"y0_um", 0.0}, {"edge_width_um", 35.0}};
    } else if (scenario == "ssm-lens") {
        cfg["grid"] = grid_block();
        cfg["imaging"] = imaging_block(1);
        cfg["memory"] = memory_block();
        cfg["ssm"] = ssm_block(0.29);
        cfg["camera"] = camera_block();
        cfg["reference"] = reference_block();
        cfg["drift"] = {{"step_std_rad", 0.05}};
        cfg["n_frames"] = 40;
        cfg["lens_scan"] = {{"focal_list_mm", {82.0, 163.0, 401.0}}};
    } else if (scenario == "decoherence-gamma") {
        cfg["grid"] = grid_block();
        cfg["imaging"] = imaging_block(1);
        cfg["memory"] = memory_block();
        cfg["ssm"] = ssm_block(0.29);
        cfg["camera"] = camera_block();
        cfg["reference"] = reference_block();
        cfg["drift"] = {{"step_std_rad", 0.05}};
        cfg["n_frames"] = 100;
        cfg["gamma_run"] = {{"ssm_lens_mm", 82.0}};
    } else if (scenario == "split-readout") {
        cfg["grid"] = grid_block();
        cfg["imaging"] = imaging_block(1);
        cfg["memory"] = memory_block();
        cfg["ssm"] = ssm_block(0.0); // jitter below is the noise under study
        cfg["camera"] = camera_block();
        cfg["reference"] = reference_block();
        cfg["drift"] = {{"step_std_rad", 0.05}};
        cfg["n_frames"] = 500;
        cfg["split"] = {{"sawtooth_gradient_rad_um", 2.0 * M_PI / 100.0},
                        {"sawtooth_wrap_rad", 2.0 * M_PI},
                        {"jitter_rad", 0.14},
                        {"fractions", {0.5, 0.5}},
                        {"rolling_window", 50},
                        {"rejection_frames", 200}};
    } else { // mc-oracle
        cfg["mc"] = {{"alpha_t_sigma", {0.5, 1.0, 2.0}}, {"n_samples", 100000}};
    }
    return cfg;
}

json merge_config(const std::string& scenario, const json& user) {
    json cfg = default_config(scenario);
    if (user.is_null()) return cfg;
    if (!user.is_object())
        throw ValidationError("user config must be a JSON object");
    if (!user.empty() && !user.contains("seed"))
        throw ValidationError("user config missing 'seed' (reproducibility is explicit, "
                              "set one or drop the config file)");
    if (user.contains("scenario") && user["scenario"] != scenario)
        throw ValidationError("config names scenario '" +
                              user["scenario"].get<std::string>() + "' but '" + scenario +
                              "' was requested");
    deep_merge(cfg, user);
    cfg["scenario"] = scenario;
    return cfg;
}

void apply_overrides(json& config, const std::vector<std::string>& overrides) {
    for (const std::string& kv : overrides) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ValidationError("--set expects key.path=value, got '" + kv + "'");
        const std::string path = kv.substr(0, eq);
        const std::string raw = kv.substr(eq + 1);

        json* cur = &config;
        size_t pos = 0;
        while (true) {
            const size_t dot = path.find('.', pos);
            const std::string key =
                path.substr(pos, dot == std::string::npos ? dot : dot - pos);
            if (key.empty())
                throw ValidationError("--set path has an empty segment: '" + path + "'");
            if (dot == std::string::npos) {
                json value;
                try {
                    value = json::parse(raw);
                } catch (const json::parse_error&) {
                    value = raw; // unquoted strings stay strings
                }
                (*cur)[key] = value;
                break;
            }
            cur = &(*cur)[key];
            if (!cur->is_object() && !cur->is_null())
                throw ValidationError("--set path '" + path +
                                      "' descends into a non-object value");
            pos = dot + 1;
        }
    }
}

std::vector<std::string> validate_config(const json& config) {
    std::vector<std::string> problems;
    if (!config.is_object()) return {"config must be a JSON object"};

    const json* name = find_path(config, "scenario");
    if (!name || !name->is_string()) return {"scenario: missing or not a string"};
    const std::string scenario = name->get<std::string>();
    if (!find_entry(scenario)) return {"scenario: unknown name '" + scenario + "'"};

    Checker c{config, problems};

    const json* seed = find_path(config, "seed");
    if (!seed)
        problems.push_back("seed: missing (every run must be reproducible)");
    else if (!seed->is_number_integer() || seed->get<int64_t>() < 0)
        problems.push_back("seed: must be a non-negative integer");

    const json* out = find_path(config, "output_dir");
    if (out && !out->is_string()) problems.push_back("output_dir: must be a string");

    const bool holography = scenario == "step-pi" || scenario == "ssm-lens" ||
                            scenario == "decoherence-gamma" || scenario == "split-readout";

    if (scenario != "mc-oracle" && scenario != "waist-curve") check_grid(c);
    if (scenario != "mc-oracle") check_imaging(c);
    if (scenario != "mc-oracle" && scenario != "waist-curve") check_memory(c);
    if (scenario != "mc-oracle" && scenario != "waist-curve") check_ssm(c);
    if (holography) {
        check_camera(c);
        check_reference(c);
        check_drift(c);
        check_frames(c);
    }

    if (scenario == "lens-compensation") {
        c.nonzero("compensation.ssm_lens_mm");
        c.nonzero("compensation.physical_lens_mm");
        c.integer("compensation.n_realizations", 1, 10000);
    } else if (scenario == "waist-curve") {
        check_model_params(c, "waist.truth");
        check_model_params(c, "waist.initial");
        const json* powers = c.require("waist.powers");
        if (powers && (!powers->is_array() || powers->size() < 8))
            problems.push_back("waist.powers: need an array of at least 8 power values");
        c.num("waist.noise_rel", 0.0, 1.0);
        const long n = c.integer("waist.n_samples", 8, 1 << 20);
        if (n % 2 != 0) problems.push_back("waist.n_samples: must be even");
        c.num("waist.pitch_um", 1e-6, 1e6);
        c.integer("waist.pad_factor", 1, 16);
    } else if (scenario == "step-pi") {
        const json* h = c.require("step.height_rad");
        if (h && (!h->is_number() || !std::isfinite(h->get<double>())))
            problems.push_back("step.height_rad: must be a finite number");
        c.num("step.edge_width_um", 0.0, 1e6);
        const json* y0 = c.require("step.y0_um");
        if (y0 && (!y0->is_number() || !std::isfinite(y0->get<double>())))
            problems.push_back("step.y0_um: must be a finite number");
    } else if (scenario == "ssm-lens") {
        const json* focals = c.require("lens_scan.focal_list_mm");
        if (focals) {
            if (!focals->is_array() || focals->empty())
                problems.push_back("lens_scan.focal_list_mm: need a non-empty array");
            else
                for (const auto& f : *focals)
                    if (!f.is_number() || f.get<double>() == 0.0 ||
                        !std::isfinite(f.get<double>()))
                        problems.push_back(
                            "lens_scan.focal_list_mm: entries must be nonzero finite");
        }
    } else if (scenario == "decoherence-gamma") {
        c.nonzero("gamma_run.ssm_lens_mm");
    } else if (scenario == "split-readout") {
        c.num("split.sawtooth_gradient_rad_um", 1e-9, 100.0);
        c.num("split.sawtooth_wrap_rad", 1e-9, 1e9);
        c.num("split.jitter_rad", 0.0, 10.0);
        const json* fr = c.require("split.fractions");
        if (fr) {
            if (!fr->is_array() || fr->size() != 2)
                problems.push_back("split.fractions: need exactly two readout fractions");
            else {
                double sum = 0.0;
                for (const auto& f : *fr) {
                    if (!f.is_number() || !(f.get<double>() > 0.0) || f.get<double>() > 1.0)
                        problems.push_back("split.fractions: entries must be in (0, 1]");
                    else
                        sum += f.get<double>();
                }
                if (sum > 1.0 + 1e-12)
                    problems.push_back("split.fractions: total exceeds the stored population");
            }
        }
        c.integer("split.rolling_window", 2, 1 << 20);
        c.integer("split.rejection_frames", 2, 1000000);
    } else if (scenario == "mc-oracle") {
        const json* vals = c.require("mc.alpha_t_sigma");
        if (vals && (!vals->is_array() || vals->empty()))
            problems.push_back("mc.alpha_t_sigma: need a non-empty array");
        else if (vals)
            for (const auto& v : *vals)
                if (!v.is_number() || v.get<double>() < 0.0)
                    problems.push_back("mc.alpha_t_sigma: entries must be >= 0");
        c.integer("mc.n_samples", 1000, 1000000000);
    }

    return problems;
}

std::vector<std::string> validate_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {"cannot read '" + path + "'"};
    json user;
    try {
        user = json::parse(in);
    } catch (const json::parse_error& e) {
        return {std::string("JSON parse error: ") + e.what()};
    }
    if (!user.is_object() || !user.contains("scenario") || !user["scenario"].is_string())
        return {"config file must name its 'scenario'"};
    json merged;
    try {
        merged = merge_config(user["scenario"].get<std::string>(), user);
    } catch (const std::exception& e) {
        return {e.what()};
    }
    return validate_config(merged);
}

} // namespace ssmlab
