#pragma once

// Run configuration files (JSON, versioned schema) and built-in presets.
//
// Schema version 1:
//
//   {
//     "schema_version": 1,
//     "model": {
//       "n": 9,
//       "r": [10, 20, ...]            | "r_linear":   {"base": 10, "step": 10},
//       "S": 0.1,
//       "tau": [0.23, ...]            | "tau_linear": {"first": 0.23, "last": 0.43},
//       "theta_ev": [1, 0.5, 0.25],
//       "sector_weights": [0.333.., 0.333.., 0.333..]
//     },
//     "initial":     {"mu": 31.6},
//     "enforcement": {"sigma": 0.0, "xi": 2.0},
//     "integrator":  {"dt": 1, "tol": 1e-11, "max_time": 1e7, "record_every": 1000},   (optional keys)
//     "output":      {"directory": "out", "formats": ["csv", "json"]}
//   }
//
// Unknown keys are rejected. Only integrator keys have defaults.

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinetax/dynamics.hpp"
#include "kinetax/errors.hpp"
#include "kinetax/model.hpp"
#include "kinetax/presets.hpp"

namespace kinetax {

inline constexpr int kSchemaVersion = 1;

struct OutputSettings {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "json"};

    bool wants(const std::string& fmt) const {
        return std::find(formats.begin(), formats.end(), fmt) != formats.end();
    }
    bool operator==(const OutputSettings&) const = default;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    ModelConfig model;
    double mu = 0.0;
    EnforcementParams enforcement;
    IntegratorSettings integrator;
    OutputSettings output;
    std::vector<std::string> warnings; // non-fatal findings from validation

    bool operator==(const RunConfig& o) const {
        return schema_version == o.schema_version && model == o.model && mu == o.mu &&
               enforcement == o.enforcement && integrator == o.integrator && output == o.output;
    }

    /// Validates every embedded invariant; refreshes `warnings`.
    void validate() {
        warnings = model.validate();
        enforcement.validate();
        integrator.validate();
        if (!(mu >= model.r.front() && mu <= model.r.back()))
            throw ConfigError("initial.mu: must lie in [r_1, r_n]");
        for (const auto& f : output.formats)
            if (f != "csv" && f != "json") throw ConfigError("output.formats: unknown format '" + f + "'");
    }
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ConfigError(path + "." + key + ": unknown key");
}

inline const json& require(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(path + "." + key + ": missing required key");
    return obj.at(key);
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    return v.get<double>();
}

inline std::vector<double> as_numbers(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline ModelConfig parse_model(const json& j) {
    const std::string path = "model";
    reject_unknown(j, path, {"n", "r", "r_linear", "S", "tau", "tau_linear", "theta_ev", "sector_weights"});
    const json& nv = require(j, path, "n");
    if (!nv.is_number_integer() || nv.get<long long>() < 2) throw ConfigError("model.n: expected an integer >= 2");
    const auto n = static_cast<std::size_t>(nv.get<long long>());

    ModelConfig m;
    if (j.contains("r") == j.contains("r_linear"))
        throw ConfigError("model: exactly one of 'r' or 'r_linear' is required");
    if (j.contains("r")) {
        m.r = as_numbers(j.at("r"), "model.r");
    } else {
        const json& g = j.at("r_linear");
        reject_unknown(g, "model.r_linear", {"base", "step"});
        m.r = linear_incomes(n, as_number(require(g, "model.r_linear", "base"), "model.r_linear.base"),
                             as_number(require(g, "model.r_linear", "step"), "model.r_linear.step"));
    }
    if (m.r.size() != n) throw ConfigError("model.r: expected " + std::to_string(n) + " incomes");

    m.S = as_number(require(j, path, "S"), "model.S");

    if (j.contains("tau") == j.contains("tau_linear"))
        throw ConfigError("model: exactly one of 'tau' or 'tau_linear' is required");
    if (j.contains("tau")) {
        m.tau = as_numbers(j.at("tau"), "model.tau");
    } else {
        const json& g = j.at("tau_linear");
        reject_unknown(g, "model.tau_linear", {"first", "last"});
        m.tau = linear_tax_schedule(n, as_number(require(g, "model.tau_linear", "first"), "model.tau_linear.first"),
                                    as_number(require(g, "model.tau_linear", "last"), "model.tau_linear.last"));
    }
    m.theta_ev = as_numbers(require(j, path, "theta_ev"), "model.theta_ev");
    m.sector_weights = as_numbers(require(j, path, "sector_weights"), "model.sector_weights");
    return m;
}

} // namespace detail

/// Parses and validates a configuration document.
inline RunConfig parse_config(const nlohmann::json& doc) {
    using detail::as_number;
    using detail::require;
    detail::reject_unknown(doc, "config", {"schema_version", "model", "initial", "enforcement", "integrator", "output"});

    RunConfig cfg;
    const auto& ver = require(doc, "config", "schema_version");
    if (!ver.is_number_integer() || ver.get<int>() != kSchemaVersion)
        throw ConfigError("config.schema_version: expected " + std::to_string(kSchemaVersion));
    cfg.schema_version = ver.get<int>();

    cfg.model = detail::parse_model(require(doc, "config", "model"));

    const auto& init = require(doc, "config", "initial");
    detail::reject_unknown(init, "initial", {"mu"});
    cfg.mu = as_number(require(init, "initial", "mu"), "initial.mu");

    const auto& enf = require(doc, "config", "enforcement");
    detail::reject_unknown(enf, "enforcement", {"sigma", "xi"});
    cfg.enforcement.sigma = as_number(require(enf, "enforcement", "sigma"), "enforcement.sigma");
    cfg.enforcement.xi = as_number(require(enf, "enforcement", "xi"), "enforcement.xi");

    if (doc.contains("integrator")) {
        const auto& in = doc.at("integrator");
        detail::reject_unknown(in, "integrator", {"dt", "tol", "max_time", "record_every"});
        if (in.contains("dt")) cfg.integrator.dt = as_number(in.at("dt"), "integrator.dt");
        if (in.contains("tol")) cfg.integrator.tol = as_number(in.at("tol"), "integrator.tol");
        if (in.contains("max_time")) cfg.integrator.max_time = as_number(in.at("max_time"), "integrator.max_time");
        if (in.contains("record_every")) {
            const auto& v = in.at("record_every");
            if (!v.is_number_integer() || v.get<long long>() < 1)
                throw ConfigError("integrator.record_every: expected a positive integer");
            cfg.integrator.record_every = static_cast<std::size_t>(v.get<long long>());
        }
    }

    const auto& out = require(doc, "config", "output");
    detail::reject_unknown(out, "output", {"directory", "formats"});
    const auto& dir = require(out, "output", "directory");
    if (!dir.is_string()) throw ConfigError("output.directory: expected a string");
    cfg.output.directory = dir.get<std::string>();
    const auto& fmts = require(out, "output", "formats");
    if (!fmts.is_array()) throw ConfigError("output.formats: expected an array of strings");
    cfg.output.formats.clear();
    for (const auto& f : fmts) {
        if (!f.is_string()) throw ConfigError("output.formats: expected an array of strings");
        cfg.output.formats.push_back(f.get<std::string>());
    }

    cfg.validate();
    return cfg;
}

/// Canonical document: explicit r and tau lists, every integrator key present.
inline nlohmann::ordered_json to_json(const RunConfig& cfg) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = cfg.schema_version;
    doc["model"]["n"] = cfg.model.n();
    doc["model"]["r"] = cfg.model.r;
    doc["model"]["S"] = cfg.model.S;
    doc["model"]["tau"] = cfg.model.tau;
    doc["model"]["theta_ev"] = cfg.model.theta_ev;
    doc["model"]["sector_weights"] = cfg.model.sector_weights;
    doc["initial"]["mu"] = cfg.mu;
    doc["enforcement"]["sigma"] = cfg.enforcement.sigma;
    doc["enforcement"]["xi"] = cfg.enforcement.xi;
    doc["integrator"]["dt"] = cfg.integrator.dt;
    doc["integrator"]["tol"] = cfg.integrator.tol;
    doc["integrator"]["max_time"] = cfg.integrator.max_time;
    doc["integrator"]["record_every"] = cfg.integrator.record_every;
    doc["output"]["directory"] = cfg.output.directory;
    doc["output"]["formats"] = cfg.output.formats;
    return doc;
}

inline std::vector<std::string> preset_names() { return {"paper.default", "paper.no-evasion", "scenario1", "scenario2"}; }

/// Built-in configurations. All use the table mean income kTableMeanIncome.
inline RunConfig preset_config(const std::string& name) {
    RunConfig cfg;
    cfg.mu = kTableMeanIncome;
    cfg.enforcement = {0.0, 2.0};
    if (name == "paper.default" || name == "scenario1") {
        cfg.model = scenario_model(1);
    } else if (name == "scenario2") {
        cfg.model = scenario_model(2);
    } else if (name == "paper.no-evasion") {
        cfg.model = paper_default_model();
        cfg.model.theta_ev = {1.0, 1.0, 1.0};
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    cfg.validate();
    return cfg;
}

/// Loads a preset by name, or a JSON configuration file.
inline RunConfig load_config(const std::string& path) {
    for (const auto& p : preset_names())
        if (path == p && !std::filesystem::exists(path)) return preset_config(path);

    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return parse_config(doc);
}

inline void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file '" + path + "'");
    out << to_json(cfg).dump(2) << "\n";
}

} // namespace kinetax
