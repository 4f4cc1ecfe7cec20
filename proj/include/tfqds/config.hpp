#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tfqds/optimizer.hpp"
#include "tfqds/params.hpp"

// JSON configuration: one self-describing document with Table-1 defaults
// for every omitted field. Unknown fields are rejected; validation errors
// name the violated invariant. See the README for the full schema.

namespace tfqds {

using json = nlohmann::ordered_json;

enum class SimulateExperiment { honest, repudiation, forge };

struct SimulateSpec {
    long long trials = 100;
    SimulateExperiment experiment = SimulateExperiment::honest;
    double p_guess = 0.5;  // forge model per-bit correctness
    int message = 0;
};

struct RunConfig {
    SystemParams system;
    ProtocolParams protocol;  // always seeds the optimizer as one extra start
    SecurityBudget budget;
    SearchSpace space;
    SweepSpec sweep_spec;
    SimulateSpec simulate_spec;
    uint64_t seed = 1;
    int effort = 2;
    bool as_printed = false;
    std::string report_path, csv_path, trace_path, emit_config_path;

    RunConfig() {
        sweep_spec.variable = SweepVariable::distance_km;
        sweep_spec.grid.clear();
        for (int i = 0; i <= 40; ++i) sweep_spec.grid.push_back(10.0 * i);
        sweep_spec.optimize_per_point = true;
    }
};

namespace detail {

class ConfigReader {
  public:
    ConfigReader(const json& j, std::string path) : node_(j), path_(std::move(path)) {}

    void reject_unknown(std::initializer_list<const char*> allowed) const {
        for (const auto& item : node_.items()) {
            bool known = false;
            for (const char* key : allowed)
                if (item.key() == key) known = true;
            if (!known)
                throw std::invalid_argument("unknown config field \"" + path_ + item.key() + "\"");
        }
    }

    bool has(const char* key) const { return node_.contains(key); }

    json child(const char* key) const { return node_.at(key); }

    template <class T>
    void get(const char* key, T& out) const {
        if (!node_.contains(key)) return;
        try {
            out = node_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument("config field \"" + path_ + key + "\": " + e.what());
        }
    }

    std::string path(const char* key) const { return path_ + key; }

  private:
    const json& node_;
    std::string path_;
};

inline void parse_interval(const json& j, const std::string& where, SearchSpace::Interval& out) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("config field \"" + where + "\" must be a [lo, hi] pair");
    out.lo = j[0].get<double>();
    out.hi = j[1].get<double>();
}

}  // namespace detail

inline RunConfig parse_config(const json& root) {
    if (!root.is_object()) throw std::invalid_argument("config root must be a JSON object");
    RunConfig cfg;
    detail::ConfigReader top(root, "");
    top.reject_unknown({"system", "protocol", "budget", "search_space", "sweep", "simulate",
                        "seed", "effort", "as_printed", "output"});

    if (top.has("system")) {
        detail::ConfigReader r(root.at("system"), "system.");
        r.reject_unknown({"alpha_db_per_km", "eta_d", "p_dc", "e_d", "distance_km"});
        r.get("alpha_db_per_km", cfg.system.alpha_db_per_km);
        r.get("eta_d", cfg.system.eta_d);
        r.get("p_dc", cfg.system.p_dc);
        r.get("e_d", cfg.system.e_d);
        r.get("distance_km", cfg.system.distance_km);
    }
    if (top.has("protocol")) {
        detail::ConfigReader r(root.at("protocol"), "protocol.");
        r.reject_unknown({"w", "v", "u", "p_w", "p_v", "p_z", "p_s", "m_slices", "n_pulses", "r_et"});
        r.get("w", cfg.protocol.w);
        r.get("v", cfg.protocol.v);
        r.get("u", cfg.protocol.u);
        r.get("p_w", cfg.protocol.p_w);
        r.get("p_v", cfg.protocol.p_v);
        r.get("p_z", cfg.protocol.p_z);
        r.get("p_s", cfg.protocol.p_s);
        r.get("m_slices", cfg.protocol.m_slices);
        r.get("n_pulses", cfg.protocol.n_pulses);
        r.get("r_et", cfg.protocol.r_et);
    }
    if (top.has("budget")) {
        detail::ConfigReader r(root.at("budget"), "budget.");
        r.reject_unknown({"eps_pe", "eps_sf", "g", "eps_target"});
        r.get("eps_pe", cfg.budget.eps_pe);
        r.get("eps_sf", cfg.budget.eps_sf);
        r.get("g", cfg.budget.g);
        r.get("eps_target", cfg.budget.eps_target);
    }
    if (top.has("search_space")) {
        detail::ConfigReader r(root.at("search_space"), "search_space.");
        r.reject_unknown({"w", "v", "u", "p_z", "p_s", "p_w", "p_v"});
        const json& s = root.at("search_space");
        if (s.contains("w")) detail::parse_interval(s.at("w"), "search_space.w", cfg.space.w);
        if (s.contains("v")) detail::parse_interval(s.at("v"), "search_space.v", cfg.space.v);
        if (s.contains("u")) detail::parse_interval(s.at("u"), "search_space.u", cfg.space.u);
        if (s.contains("p_z")) detail::parse_interval(s.at("p_z"), "search_space.p_z", cfg.space.p_z);
        if (s.contains("p_s")) detail::parse_interval(s.at("p_s"), "search_space.p_s", cfg.space.p_s);
        if (s.contains("p_w")) detail::parse_interval(s.at("p_w"), "search_space.p_w", cfg.space.p_w);
        if (s.contains("p_v")) detail::parse_interval(s.at("p_v"), "search_space.p_v", cfg.space.p_v);
    }
    if (top.has("sweep")) {
        detail::ConfigReader r(root.at("sweep"), "sweep.");
        r.reject_unknown({"variable", "from", "to", "step", "grid", "optimize"});
        std::string variable = "distance_km";
        r.get("variable", variable);
        if (variable == "distance_km")
            cfg.sweep_spec.variable = SweepVariable::distance_km;
        else if (variable == "e_d")
            cfg.sweep_spec.variable = SweepVariable::e_d;
        else
            throw std::invalid_argument("sweep.variable must be \"distance_km\" or \"e_d\"");
        if (r.has("grid")) {
            cfg.sweep_spec.grid = root.at("sweep").at("grid").get<std::vector<double>>();
        } else if (r.has("from") || r.has("to") || r.has("step")) {
            double from = 0.0, to = 0.0, step = 1.0;
            r.get("from", from);
            r.get("to", to);
            r.get("step", step);
            if (!(step > 0.0)) throw std::invalid_argument("sweep.step must be positive");
            cfg.sweep_spec.grid.clear();
            for (double x = from; x <= to + 1e-9 * step; x += step) cfg.sweep_spec.grid.push_back(x);
        }
        r.get("optimize", cfg.sweep_spec.optimize_per_point);
    }
    if (top.has("simulate")) {
        detail::ConfigReader r(root.at("simulate"), "simulate.");
        r.reject_unknown({"trials", "experiment", "p_guess", "message"});
        r.get("trials", cfg.simulate_spec.trials);
        std::string experiment = "honest";
        r.get("experiment", experiment);
        if (experiment == "honest")
            cfg.simulate_spec.experiment = SimulateExperiment::honest;
        else if (experiment == "repudiation")
            cfg.simulate_spec.experiment = SimulateExperiment::repudiation;
        else if (experiment == "forge")
            cfg.simulate_spec.experiment = SimulateExperiment::forge;
        else
            throw std::invalid_argument(
                "simulate.experiment must be \"honest\", \"repudiation\" or \"forge\"");
        r.get("p_guess", cfg.simulate_spec.p_guess);
        r.get("message", cfg.simulate_spec.message);
    }
    top.get("seed", cfg.seed);
    top.get("effort", cfg.effort);
    top.get("as_printed", cfg.as_printed);
    if (top.has("output")) {
        detail::ConfigReader r(root.at("output"), "output.");
        r.reject_unknown({"report", "csv", "trace", "effective_config"});
        r.get("report", cfg.report_path);
        r.get("csv", cfg.csv_path);
        r.get("trace", cfg.trace_path);
        r.get("effective_config", cfg.emit_config_path);
    }

    cfg.system.validate();
    cfg.protocol.validate();
    cfg.budget.validate();
    cfg.space.validate();
    cfg.sweep_spec.validate();
    if (cfg.effort < 1) throw std::invalid_argument("effort must be a positive integer");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string text = buffer.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) text = "{}";
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config parse error in " + path + ": " + e.what());
    }
    return parse_config(root);
}

// Fully materialized view of a configuration; re-loading it reproduces the
// run bit for bit.
inline json effective_config(const RunConfig& cfg) {
    json j;
    j["system"] = {{"alpha_db_per_km", cfg.system.alpha_db_per_km},
                   {"eta_d", cfg.system.eta_d},
                   {"p_dc", cfg.system.p_dc},
                   {"e_d", cfg.system.e_d},
                   {"distance_km", cfg.system.distance_km}};
    j["protocol"] = {{"w", cfg.protocol.w},
                     {"v", cfg.protocol.v},
                     {"u", cfg.protocol.u},
                     {"p_w", cfg.protocol.p_w},
                     {"p_v", cfg.protocol.p_v},
                     {"p_z", cfg.protocol.p_z},
                     {"p_s", cfg.protocol.p_s},
                     {"m_slices", cfg.protocol.m_slices},
                     {"n_pulses", cfg.protocol.n_pulses},
                     {"r_et", cfg.protocol.r_et}};
    j["budget"] = {{"eps_pe", cfg.budget.eps_pe},
                   {"eps_sf", cfg.budget.eps_sf},
                   {"g", cfg.budget.g},
                   {"eps_target", cfg.budget.eps_target}};
    j["search_space"] = {{"w", {cfg.space.w.lo, cfg.space.w.hi}},
                         {"v", {cfg.space.v.lo, cfg.space.v.hi}},
                         {"u", {cfg.space.u.lo, cfg.space.u.hi}},
                         {"p_z", {cfg.space.p_z.lo, cfg.space.p_z.hi}},
                         {"p_s", {cfg.space.p_s.lo, cfg.space.p_s.hi}},
                         {"p_w", {cfg.space.p_w.lo, cfg.space.p_w.hi}},
                         {"p_v", {cfg.space.p_v.lo, cfg.space.p_v.hi}}};
    j["sweep"] = {{"variable", cfg.sweep_spec.variable == SweepVariable::distance_km
                                   ? "distance_km"
                                   : "e_d"},
                  {"grid", cfg.sweep_spec.grid},
                  {"optimize", cfg.sweep_spec.optimize_per_point}};
    const char* experiment =
        cfg.simulate_spec.experiment == SimulateExperiment::honest
            ? "honest"
            : (cfg.simulate_spec.experiment == SimulateExperiment::repudiation ? "repudiation"
                                                                               : "forge");
    j["simulate"] = {{"trials", cfg.simulate_spec.trials},
                     {"experiment", experiment},
                     {"p_guess", cfg.simulate_spec.p_guess},
                     {"message", cfg.simulate_spec.message}};
    j["seed"] = cfg.seed;
    j["effort"] = cfg.effort;
    j["as_printed"] = cfg.as_printed;
    return j;
}

}  // namespace tfqds
