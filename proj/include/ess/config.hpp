// Experiment configuration: one JSON document per run, validated strictly
// (unknown keys rejected, cross-field constraints re-checked at load) from a
// single schema table that also drives the print-schema subcommand.
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ess/common.hpp"
#include "ess/evolve.hpp"
#include "ess/geometry.hpp"
#include "ess/initial_data.hpp"
#include "ess/io.hpp"

namespace ess {

struct SectorConfig {
    double gamma = pi / 4.0;
    double delta = 0.07;
    std::vector<double> rays_b1{0.05};
    std::vector<double> rays_b2{3.0 * pi / 8.0};
    std::vector<double> radii{0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625, 0.001953125};
    std::vector<double> lambda_deltas{1e-2, 1e-3, 1e-4};
    int diagonal_samples = 5;
};

struct SolverConfig {
    int grid_cells = 256;
    double quad_rel_tol = 1e-6;
    double velocity_rel_tol = 1e-3;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"csv"};
};

struct ExperimentConfig {
    std::string domain_kind = "disk";
    double radius = 1.0;
    double semi_axis_x = 1.0;
    double semi_axis_y = 1.0;
    double validity_radius = 0.0;  // 0: keep the domain's own default

    InitialDataParams initial;
    SectorConfig sector;
    SolverConfig solver;

    EvolutionConfig evolution;
    int snapshot_every = 10;
    double scale_floor = 0.0;

    OutputConfig output;
    long seed = 0;

    nlohmann::json doc;  // the parsed document, for the stored copy
    std::string hash;    // fnv1a64 of the canonical dump

    Domain make_domain() const {
        Domain d = domain_kind == "disk" ? Domain::disk(radius)
                                         : Domain::ellipse(semi_axis_x, semi_axis_y);
        if (validity_radius > 0.0) d.set_validity_radius(validity_radius);
        return d;
    }
};

namespace schema {

struct KeySpec {
    const char* name;
    const char* type;  // "string" | "number" | "integer" | "boolean" | "array" | "object"
    bool required;
    const char* note;
};

inline const std::vector<KeySpec>& domain_keys() {
    static const std::vector<KeySpec> k{
        {"kind", "string", true, "disk | ellipse"},
        {"radius", "number", false, "disk radius; required when kind is disk"},
        {"semi_axis_x", "number", false, "ellipse horizontal semi-axis; required for ellipse"},
        {"semi_axis_y", "number", false, "ellipse vertical semi-axis; required for ellipse"},
        {"validity_radius", "number", false, "override of the near-origin validity ball"},
    };
    return k;
}

inline const std::vector<KeySpec>& initial_data_keys() {
    static const std::vector<KeySpec> k{
        {"epsilon", "number", true, "outer marker scale, 0 < epsilon < 1"},
        {"delta_strip", "number", true, "strip-width bound; epsilon^10 must lie below it"},
        {"profile", "string", false, "smoothstep_quintic (default) | bump_exponential"},
        {"amplitude", "number", false, "plateau height, >= 0; default 1"},
    };
    return k;
}

inline const std::vector<KeySpec>& sector_keys() {
    static const std::vector<KeySpec> k{
        {"gamma", "number", true, "sector half-angle away from diagonal/axis, in (0, pi/2)"},
        {"delta_sector", "number", true, "radius of the sector sample region"},
        {"rays_b1", "array", false, "polar angles for wall-sector residual samples"},
        {"rays_b2", "array", false, "polar angles for axis-sector residual samples"},
        {"radii", "array", false, "sample radii; each must be <= delta_sector"},
        {"lambda_deltas", "array", false, "corner scales for the key-integral log fit"},
        {"diagonal_samples", "integer", false, "dyadic sample count for the outflow check"},
    };
    return k;
}

inline const std::vector<KeySpec>& solver_keys() {
    static const std::vector<KeySpec> k{
        {"grid_cells", "integer", true, "cells across the domain bounding box, >= 8"},
        {"quad_rel_tol", "number", false, "adaptive quadrature relative tolerance"},
        {"velocity_rel_tol", "number", false, "velocity quadrature relative tolerance"},
    };
    return k;
}

inline const std::vector<KeySpec>& evolution_keys() {
    static const std::vector<KeySpec> k{
        {"dt", "number", true, "time step before any speed-cap halving"},
        {"t_max", "number", true, "horizon; runs may end earlier on scale exhaustion"},
        {"cfl_cap", "number", false, "max |u| dt / h after halvings, in (0, 1]; default 0.8"},
        {"snapshot_every", "integer", false, "cadence (steps) of integrity/fit diagnostics"},
        {"interpolation", "string", false, "bicubic (default) | bilinear"},
        {"resymmetrize", "boolean", false, "re-impose exact odd symmetry each step"},
        {"scale_floor", "number", false, "stop when marker a falls to this scale; 0 disables"},
    };
    return k;
}

inline const std::vector<KeySpec>& output_keys() {
    static const std::vector<KeySpec> k{
        {"directory", "string", false, "artifact directory (CLI --out overrides)"},
        {"formats", "array", false, "subset of [csv, binary]; default [csv]"},
    };
    return k;
}

inline const std::vector<KeySpec>& top_keys() {
    static const std::vector<KeySpec> k{
        {"domain", "object", true, "domain geometry"},
        {"initial_data", "object", true, "odd ramp profile parameters"},
        {"sector", "object", true, "sector sampling for the residual bands"},
        {"solver", "object", true, "grid and quadrature settings"},
        {"evolution", "object", true, "transport settings"},
        {"output", "object", true, "artifact settings"},
        {"seed", "integer", true, "sampling seed for the validation suites"},
    };
    return k;
}

inline nlohmann::json to_json() {
    auto section = [](const std::vector<KeySpec>& keys) {
        nlohmann::json s;
        for (const auto& k : keys)
            s[k.name] = {{"type", k.type}, {"required", k.required}, {"note", k.note}};
        return s;
    };
    nlohmann::json j;
    for (const auto& k : top_keys())
        j[k.name] = {{"type", k.type}, {"required", k.required}, {"note", k.note}};
    j["domain"]["keys"] = section(domain_keys());
    j["initial_data"]["keys"] = section(initial_data_keys());
    j["sector"]["keys"] = section(sector_keys());
    j["solver"]["keys"] = section(solver_keys());
    j["evolution"]["keys"] = section(evolution_keys());
    j["output"]["keys"] = section(output_keys());
    return j;
}

}  // namespace schema

inline std::string print_schema() { return schema::to_json().dump(2) + "\n"; }

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::vector<schema::KeySpec>& keys,
                                const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const auto& k : keys)
            if (it.key() == k.name) known = true;
        if (!known)
            throw ConfigError("config: unknown key '" + (path.empty() ? "" : path + ".") +
                              it.key() + "'");
    }
    for (const auto& k : keys)
        if (k.required && !obj.contains(k.name))
            throw ConfigError("config: missing required key '" +
                              (path.empty() ? "" : path + ".") + k.name + "'");
}

inline double get_number(const nlohmann::json& obj, const char* key, const std::string& path,
                         double fallback, bool required = false) {
    if (!obj.contains(key)) {
        if (required) throw ConfigError("config: missing required key '" + path + "." + key + "'");
        return fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("config: " + path + "." + key + ": expected a number");
    return v.get<double>();
}

inline long get_integer(const nlohmann::json& obj, const char* key, const std::string& path,
                        long fallback, bool required = false) {
    if (!obj.contains(key)) {
        if (required) throw ConfigError("config: missing required key '" + path + "." + key + "'");
        return fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError("config: " + path + "." + key + ": expected an integer");
    return v.get<long>();
}

inline std::string get_string(const nlohmann::json& obj, const char* key, const std::string& path,
                              const std::string& fallback, bool required = false) {
    if (!obj.contains(key)) {
        if (required) throw ConfigError("config: missing required key '" + path + "." + key + "'");
        return fallback;
    }
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ConfigError("config: " + path + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline bool get_bool(const nlohmann::json& obj, const char* key, const std::string& path,
                     bool fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError("config: " + path + "." + key + ": expected a boolean");
    return v.get<bool>();
}

inline std::vector<double> get_number_array(const nlohmann::json& obj, const char* key,
                                            const std::string& path,
                                            std::vector<double> fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_array()) throw ConfigError("config: " + path + "." + key + ": expected an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            throw ConfigError("config: " + path + "." + key + ": expected numeric entries");
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& doc) {
    using namespace detail;
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown_keys(doc, schema::top_keys(), "");
    for (const auto& k : schema::top_keys())
        if (std::string(k.type) == "object" && !doc.at(k.name).is_object())
            throw ConfigError(std::string("config: ") + k.name + ": expected an object");

    ExperimentConfig c;
    c.doc = doc;
    c.hash = hash_hex(hash_text(doc.dump()));

    const auto& jd = doc.at("domain");
    reject_unknown_keys(jd, schema::domain_keys(), "domain");
    c.domain_kind = get_string(jd, "kind", "domain", "", true);
    if (c.domain_kind == "disk") {
        c.radius = get_number(jd, "radius", "domain", 0.0, true);
        if (!(c.radius > 0.0)) throw ConfigError("config: domain.radius must be positive");
    } else if (c.domain_kind == "ellipse") {
        c.semi_axis_x = get_number(jd, "semi_axis_x", "domain", 0.0, true);
        c.semi_axis_y = get_number(jd, "semi_axis_y", "domain", 0.0, true);
        if (!(c.semi_axis_x > 0.0) || !(c.semi_axis_y > 0.0))
            throw ConfigError("config: domain semi-axes must be positive");
    } else {
        throw ConfigError("config: domain.kind must be 'disk' or 'ellipse'");
    }
    c.validity_radius = get_number(jd, "validity_radius", "domain", 0.0);
    if (jd.contains("validity_radius") && !(c.validity_radius > 0.0))
        throw ConfigError("config: domain.validity_radius must be positive when given");

    const auto& ji = doc.at("initial_data");
    reject_unknown_keys(ji, schema::initial_data_keys(), "initial_data");
    c.initial.epsilon = get_number(ji, "epsilon", "initial_data", 0.0, true);
    c.initial.delta_strip = get_number(ji, "delta_strip", "initial_data", 0.0, true);
    c.initial.amplitude = get_number(ji, "amplitude", "initial_data", 1.0);
    const std::string prof = get_string(ji, "profile", "initial_data", "smoothstep_quintic");
    if (prof == "smoothstep_quintic")
        c.initial.profile = ProfileKind::smoothstep_quintic;
    else if (prof == "bump_exponential")
        c.initial.profile = ProfileKind::bump_exponential;
    else
        throw ConfigError("config: initial_data.profile: unknown profile '" + prof + "'");
    validate_initial_params(c.initial);

    const auto& js = doc.at("sector");
    reject_unknown_keys(js, schema::sector_keys(), "sector");
    SectorConfig defaults;
    c.sector.gamma = get_number(js, "gamma", "sector", 0.0, true);
    c.sector.delta = get_number(js, "delta_sector", "sector", 0.0, true);
    c.sector.rays_b1 = get_number_array(js, "rays_b1", "sector", defaults.rays_b1);
    c.sector.rays_b2 = get_number_array(js, "rays_b2", "sector", defaults.rays_b2);
    c.sector.radii = get_number_array(js, "radii", "sector", defaults.radii);
    c.sector.lambda_deltas = get_number_array(js, "lambda_deltas", "sector", defaults.lambda_deltas);
    c.sector.diagonal_samples =
        static_cast<int>(get_integer(js, "diagonal_samples", "sector", defaults.diagonal_samples));
    if (!(c.sector.gamma > 0.0 && c.sector.gamma < pi / 2.0))
        throw ConfigError("config: sector.gamma must lie in (0, pi/2)");
    if (!(c.sector.delta > 0.0)) throw ConfigError("config: sector.delta_sector must be positive");
    for (double r : c.sector.radii)
        if (!(r > 0.0 && r <= c.sector.delta))
            throw ConfigError("config: sector.radii entries must lie in (0, delta_sector]");
    for (double a : c.sector.rays_b1)
        if (!(a >= 0.0 && a < pi / 2.0 - c.sector.gamma))
            throw ConfigError("config: sector.rays_b1 angles must lie in [0, pi/2 - gamma)");
    for (double a : c.sector.rays_b2)
        if (!(a >= c.sector.gamma && a < pi / 2.0))
            throw ConfigError("config: sector.rays_b2 angles must lie in [gamma, pi/2)");
    for (double d : c.sector.lambda_deltas)
        if (!(d > 0.0)) throw ConfigError("config: sector.lambda_deltas must be positive");
    if (c.sector.diagonal_samples < 1)
        throw ConfigError("config: sector.diagonal_samples must be >= 1");

    const auto& jv = doc.at("solver");
    reject_unknown_keys(jv, schema::solver_keys(), "solver");
    c.solver.grid_cells = static_cast<int>(get_integer(jv, "grid_cells", "solver", 0, true));
    if (c.solver.grid_cells < 8) throw ConfigError("config: solver.grid_cells must be >= 8");
    c.solver.quad_rel_tol = get_number(jv, "quad_rel_tol", "solver", 1e-6);
    c.solver.velocity_rel_tol = get_number(jv, "velocity_rel_tol", "solver", 1e-3);
    if (!(c.solver.quad_rel_tol > 0.0) || !(c.solver.velocity_rel_tol > 0.0))
        throw ConfigError("config: solver tolerances must be positive");

    const auto& je = doc.at("evolution");
    reject_unknown_keys(je, schema::evolution_keys(), "evolution");
    c.evolution.dt = get_number(je, "dt", "evolution", 0.0, true);
    c.evolution.t_max = get_number(je, "t_max", "evolution", 0.0, true);
    c.evolution.cfl_cap = get_number(je, "cfl_cap", "evolution", 0.8);
    c.snapshot_every = static_cast<int>(get_integer(je, "snapshot_every", "evolution", 10));
    c.scale_floor = get_number(je, "scale_floor", "evolution", 0.0);
    const std::string interp = get_string(je, "interpolation", "evolution", "bicubic");
    if (interp == "bicubic")
        c.evolution.interpolation = InterpKind::bicubic;
    else if (interp == "bilinear")
        c.evolution.interpolation = InterpKind::bilinear;
    else
        throw ConfigError("config: evolution.interpolation must be 'bicubic' or 'bilinear'");
    c.evolution.resymmetrize = get_bool(je, "resymmetrize", "evolution", true);
    if (!(c.evolution.dt > 0.0)) throw ConfigError("config: evolution.dt must be positive");
    if (!(c.evolution.t_max >= c.evolution.dt))
        throw ConfigError("config: evolution.t_max must be at least dt");
    if (!(c.evolution.cfl_cap > 0.0 && c.evolution.cfl_cap <= 1.0))
        throw ConfigError("config: evolution.cfl_cap must lie in (0, 1]");
    if (c.snapshot_every < 1) throw ConfigError("config: evolution.snapshot_every must be >= 1");
    if (!(c.scale_floor >= 0.0))
        throw ConfigError("config: evolution.scale_floor must be nonnegative");

    const auto& jo = doc.at("output");
    reject_unknown_keys(jo, schema::output_keys(), "output");
    c.output.directory = get_string(jo, "directory", "output", "out");
    if (jo.contains("formats")) {
        if (!jo.at("formats").is_array())
            throw ConfigError("config: output.formats: expected an array");
        c.output.formats.clear();
        for (const auto& f : jo.at("formats")) {
            if (!f.is_string())
                throw ConfigError("config: output.formats: expected string entries");
            const std::string s = f.get<std::string>();
            if (s != "csv" && s != "binary")
                throw ConfigError("config: output.formats: unknown format '" + s + "'");
            c.output.formats.push_back(s);
        }
    }

    if (!doc.at("seed").is_number_integer())
        throw ConfigError("config: seed: expected an integer");
    c.seed = doc.at("seed").get<long>();
    if (c.seed < 0) throw ConfigError("config: seed must be nonnegative");

    // Cross-field: the strip bound must fit inside the certified near-origin
    // region of the configured domain.
    const Domain dom = c.make_domain();
    if (!(c.initial.delta_strip <= dom.validity_radius()))
        throw ConfigError("config: initial_data.delta_strip must not exceed the validity radius");
    if (!(c.sector.delta <= 2.0 * dom.validity_radius()))
        throw ConfigError("config: sector.delta_sector must not exceed twice the validity radius");

    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

}  // namespace ess
