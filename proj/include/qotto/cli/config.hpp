#pragma once

// JSON experiment configuration. Unknown keys are rejected so typos surface
// instead of silently falling back to defaults.

#include "qotto/cycle.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace qotto::cli {

using nlohmann::json;

class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

inline std::vector<double> log_grid(double from, double to, int points) {
    if (points < 1 || !(from > 0.0) || !(to > 0.0)) throw ConfigError("grid: log grid needs points >= 1 and positive bounds");
    std::vector<double> g;
    const double a = std::log10(from);
    const double b = std::log10(to);
    for (int i = 0; i < points; ++i)
        g.push_back(points == 1 ? from : (i == points - 1 ? to : std::pow(10.0, a + (b - a) * i / (points - 1))));
    return g;
}

inline std::vector<double> linear_grid(double from, double to, int points) {
    if (points < 1) throw ConfigError("grid: points >= 1 violated");
    std::vector<double> g;
    for (int i = 0; i < points; ++i)
        g.push_back(points == 1 ? from : (i == points - 1 ? to : from + (to - from) * i / (points - 1)));
    return g;
}

struct TraceSettings {
    std::vector<double> alphas{1e-4, 1e-2, 1e-1};
    double t_end = 3000.0;
    int samples = 1501;
    bool brme = true;
};

struct ScanSettings {
    std::vector<double> alphas = log_grid(1e-4, 1e-2, 9);
    std::vector<double> tolerances{1e-6, 1e-7, 1e-8};
    bool gap_traces = false;
};

struct BathCheckSettings {
    int points = 201;
    double tolerance = 1e-5;
};

struct ExperimentConfig {
    CycleConfig cycle{};
    std::vector<double> coupling_alphas = log_grid(1e-5, 0.3, 25);
    std::vector<double> interrupted_alphas{1e-4, 1e-3, 1e-2};
    std::vector<double> stop_times = log_grid(10.0, 2000.0, 30);
    std::vector<double> omega_cs{0.35, 0.375, 0.4, 0.425, 0.45, 0.475};
    double frequency_alpha = 1e-3;
    TraceSettings trace{};
    ScanSettings scan{};
    BathCheckSettings bath_check{};
    unsigned long long seed = 0;
};

namespace detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

inline void read_number(const json& obj, const char* key, double& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(where + "." + key + ": finite value required");
}

inline void read_int(const json& obj, const char* key, int& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
    out = v.get<int>();
}

inline void read_bool(const json& obj, const char* key, bool& out, const std::string& where) {
    if (!obj.contains(key)) return;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
    out = v.get<bool>();
}

inline std::vector<double> read_grid(const json& v, const std::string& where) {
    if (v.is_array()) {
        std::vector<double> g;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(where + ": grid entries must be numbers");
            g.push_back(x.get<double>());
        }
        if (g.empty()) throw ConfigError(where + ": grid non-empty violated");
        for (std::size_t i = 1; i < g.size(); ++i)
            if (!(g[i] >= g[i - 1])) throw ConfigError(where + ": grid sorted ascending violated");
        return g;
    }
    if (v.is_object()) {
        if (v.contains("log_from")) {
            check_keys(v, where, {"log_from", "log_to", "points"});
            double a = 0, b = 0;
            int n = 0;
            read_number(v, "log_from", a, where);
            read_number(v, "log_to", b, where);
            read_int(v, "points", n, where);
            if (!(b >= a)) throw ConfigError(where + ": log_to >= log_from violated");
            return log_grid(a, b, n);
        }
        check_keys(v, where, {"from", "to", "points"});
        double a = 0, b = 0;
        int n = 0;
        read_number(v, "from", a, where);
        read_number(v, "to", b, where);
        read_int(v, "points", n, where);
        if (!(b >= a)) throw ConfigError(where + ": to >= from violated");
        return linear_grid(a, b, n);
    }
    throw ConfigError(where + ": expected an array or a grid object");
}

inline void read_bath(const json& obj, BathSpec& b, const std::string& where) {
    check_keys(obj, where, {"alpha", "omega0", "gamma_width", "beta"});
    read_number(obj, "alpha", b.alpha, where);
    read_number(obj, "omega0", b.omega0, where);
    read_number(obj, "gamma_width", b.gamma_width, where);
    read_number(obj, "beta", b.beta, where);
}

inline Mat2 coupling_operator(const std::string& name) {
    if (name == "sigma_z") return pauli_z();
    if (name == "sigma_x") return pauli_x();
    if (name == "sigma_y") return pauli_y();
    throw ConfigError("system.coupling: one of sigma_x, sigma_y, sigma_z required");
}

} // namespace detail

inline ExperimentConfig parse_config(const json& root) {
    using namespace detail;
    ExperimentConfig cfg;
    check_keys(root, "config",
               {"omega_h", "omega_c", "hot_bath", "cold_bath", "resonant", "system", "variant", "stop_time",
                "weak_alpha", "solver", "sweep", "trace", "equilibration_scan", "bath_check", "seed"});
    CycleConfig& c = cfg.cycle;
    read_number(root, "omega_h", c.omega_h, "config");
    read_number(root, "omega_c", c.omega_c, "config");
    if (root.contains("hot_bath")) read_bath(root.at("hot_bath"), c.hot_bath, "hot_bath");
    if (root.contains("cold_bath")) read_bath(root.at("cold_bath"), c.cold_bath, "cold_bath");
    read_bool(root, "resonant", c.resonant, "config");
    read_number(root, "stop_time", c.stop_time, "config");
    read_number(root, "weak_alpha", c.weak_alpha, "config");
    if (root.contains("variant")) {
        const auto& v = root.at("variant");
        const std::string s = v.is_string() ? v.get<std::string>() : "";
        if (s == "equilibrating") c.variant = CycleVariant::equilibrating;
        else if (s == "interrupted_hot") c.variant = CycleVariant::interrupted_hot;
        else if (s == "interrupted_cold") c.variant = CycleVariant::interrupted_cold;
        else throw ConfigError("config.variant: one of equilibrating, interrupted_hot, interrupted_cold required");
    }
    if (root.contains("system")) {
        const auto& s = root.at("system");
        check_keys(s, "system", {"r_x", "r_z", "include_identity_shift", "coupling"});
        read_number(s, "r_x", c.system.r_x, "system");
        read_number(s, "r_z", c.system.r_z, "system");
        read_bool(s, "include_identity_shift", c.system.include_identity_shift, "system");
        if (s.contains("coupling")) {
            if (!s.at("coupling").is_string()) throw ConfigError("system.coupling: expected a string");
            c.system.coupling = coupling_operator(s.at("coupling").get<std::string>());
        }
    }
    if (root.contains("solver")) {
        const auto& s = root.at("solver");
        check_keys(s, "solver",
                   {"hot_cutoff", "cold_cutoff", "depth", "truncation", "matsubara_tier_cap", "max_ados", "eps_tol",
                    "rtol", "atol", "t_max", "probe_factor", "samples_per_decade", "bisection_rtol"});
        SolverSettings& sv = c.solver;
        read_int(s, "hot_cutoff", sv.hot_cutoff, "solver");
        read_int(s, "cold_cutoff", sv.cold_cutoff, "solver");
        read_int(s, "depth", sv.depth, "solver");
        read_int(s, "matsubara_tier_cap", sv.matsubara_tier_cap, "solver");
        if (s.contains("truncation")) {
            const std::string t = s.at("truncation").is_string() ? s.at("truncation").get<std::string>() : "";
            if (t == "tier_sum") sv.scheme = TruncationScheme::tier_sum;
            else if (t == "per_index") sv.scheme = TruncationScheme::per_index;
            else throw ConfigError("solver.truncation: one of tier_sum, per_index required");
        }
        if (s.contains("max_ados")) {
            if (!s.at("max_ados").is_number_unsigned()) throw ConfigError("solver.max_ados: expected a positive integer");
            sv.max_ados = s.at("max_ados").get<std::size_t>();
        }
        EquilibrationOptions& eo = sv.equilibration;
        read_number(s, "eps_tol", eo.eps_tol, "solver");
        read_number(s, "rtol", eo.integrator.rtol, "solver");
        read_number(s, "atol", eo.integrator.atol, "solver");
        read_number(s, "t_max", eo.t_max, "solver");
        read_number(s, "probe_factor", eo.probe_factor, "solver");
        read_number(s, "bisection_rtol", eo.bisection_rtol, "solver");
        read_int(s, "samples_per_decade", eo.samples_per_decade, "solver");
    }
    if (root.contains("sweep")) {
        const auto& s = root.at("sweep");
        check_keys(s, "sweep", {"alphas", "interrupted_alphas", "stop_times", "omega_cs", "frequency_alpha"});
        if (s.contains("alphas")) cfg.coupling_alphas = read_grid(s.at("alphas"), "sweep.alphas");
        if (s.contains("interrupted_alphas"))
            cfg.interrupted_alphas = read_grid(s.at("interrupted_alphas"), "sweep.interrupted_alphas");
        if (s.contains("stop_times")) cfg.stop_times = read_grid(s.at("stop_times"), "sweep.stop_times");
        if (s.contains("omega_cs")) cfg.omega_cs = read_grid(s.at("omega_cs"), "sweep.omega_cs");
        read_number(s, "frequency_alpha", cfg.frequency_alpha, "sweep");
    }
    if (root.contains("trace")) {
        const auto& s = root.at("trace");
        check_keys(s, "trace", {"alphas", "t_end", "samples", "brme"});
        if (s.contains("alphas")) cfg.trace.alphas = read_grid(s.at("alphas"), "trace.alphas");
        read_number(s, "t_end", cfg.trace.t_end, "trace");
        read_int(s, "samples", cfg.trace.samples, "trace");
        read_bool(s, "brme", cfg.trace.brme, "trace");
    }
    if (root.contains("equilibration_scan")) {
        const auto& s = root.at("equilibration_scan");
        check_keys(s, "equilibration_scan", {"alphas", "tolerances", "gap_traces"});
        if (s.contains("alphas")) cfg.scan.alphas = read_grid(s.at("alphas"), "equilibration_scan.alphas");
        if (s.contains("tolerances")) {
            const auto& t = s.at("tolerances");
            if (!t.is_array() || t.empty()) throw ConfigError("equilibration_scan.tolerances: non-empty array required");
            cfg.scan.tolerances.clear();
            for (const auto& x : t) {
                if (!x.is_number()) throw ConfigError("equilibration_scan.tolerances: numbers required");
                cfg.scan.tolerances.push_back(x.get<double>());
            }
        }
        read_bool(s, "gap_traces", cfg.scan.gap_traces, "equilibration_scan");
    }
    if (root.contains("bath_check")) {
        const auto& s = root.at("bath_check");
        check_keys(s, "bath_check", {"points", "tolerance"});
        read_int(s, "points", cfg.bath_check.points, "bath_check");
        read_number(s, "tolerance", cfg.bath_check.tolerance, "bath_check");
    }
    if (root.contains("seed")) {
        if (!root.at("seed").is_number_unsigned()) throw ConfigError("config.seed: expected a non-negative integer");
        cfg.seed = root.at("seed").get<unsigned long long>();
    }

    // Physical invariants of the nested types.
    try {
        CycleConfig probe = c;
        if (probe.variant == CycleVariant::interrupted_hot) probe.cold_bath.alpha = probe.weak_alpha;
        if (probe.variant == CycleVariant::interrupted_cold) probe.hot_bath.alpha = probe.weak_alpha;
        probe.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.trace.samples < 2) throw ConfigError("trace.samples >= 2 violated");
    if (!(cfg.trace.t_end > 0.0)) throw ConfigError("trace.t_end > 0 violated");
    if (cfg.bath_check.points < 2) throw ConfigError("bath_check.points >= 2 violated");
    for (double a : cfg.coupling_alphas)
        if (!(a >= 0.0)) throw ConfigError("sweep.alphas: alpha >= 0 violated");
    for (double w : cfg.omega_cs)
        if (!(w > 0.0 && w < c.omega_h)) throw ConfigError("sweep.omega_cs: 0 < omega_c < omega_h violated");
    for (double t : cfg.stop_times)
        if (!(t >= 0.0)) throw ConfigError("sweep.stop_times: stop time >= 0 violated");
    for (double e : cfg.scan.tolerances)
        if (!(e > 0.0 && e < 1.0)) throw ConfigError("equilibration_scan.tolerances: eps in (0,1) violated");
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config(root);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace qotto::cli
