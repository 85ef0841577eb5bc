// config.cpp: JSON run configuration: strict parsing, canonical echo and resolution

#include "qpi/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

namespace qpi {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    require_object(j, where);
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

std::string path(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

double get_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + ": must be finite");
    return v;
}

long long get_integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return j.get<long long>();
}

bool get_bool(const json& j, const std::string& where) {
    if (!j.is_boolean()) throw ConfigError(where + ": expected true or false");
    return j.get<bool>();
}

std::string get_string(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    return j.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k)
        out.push_back(get_number(j[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

Eigen::MatrixXd get_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of rows");
    const std::size_t n = j.size();
    Eigen::MatrixXd m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = get_numbers(j[r], where + "[" + std::to_string(r) + "]");
        if (row.size() != n) throw ConfigError(where + ": matrix must be square");
        for (std::size_t c = 0; c < n; ++c) m(r, c) = row[c];
    }
    return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

template <class F>
auto wrap(const std::string& where, F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

SpectralDensity parse_spectral_density(const json& j, const std::string& where) {
    allow_keys(j, where, {"family", "eta", "omega_c"});
    SpectralDensity sd;
    if (j.contains("family"))
        sd.family = wrap(path(where, "family"),
                         [&] { return spectral_family_from_string(get_string(j["family"], path(where, "family"))); });
    if (j.contains("eta")) sd.eta = get_number(j["eta"], path(where, "eta"));
    if (j.contains("omega_c")) sd.omega_c = get_number(j["omega_c"], path(where, "omega_c"));
    wrap(where, [&] { sd.validate(); return 0; });
    return sd;
}

ReservoirConfig parse_reservoir(const json& j, const std::string& where) {
    allow_keys(j, where, {"name", "temperature_K", "spectral_density", "n_modes", "omega_max", "modes",
                          "coupling", "g_scale"});
    ReservoirConfig r;
    if (!j.contains("name")) throw ConfigError(where + ": 'name' is required");
    r.name = get_string(j["name"], path(where, "name"));
    if (j.contains("temperature_K")) r.temperature = get_number(j["temperature_K"], path(where, "temperature_K"));
    if (r.temperature < 0.0) throw ConfigError(path(where, "temperature_K") + ": must be non-negative");
    if (j.contains("spectral_density") && j.contains("modes"))
        throw ConfigError(where + ": give either 'spectral_density' or 'modes', not both");
    if (j.contains("modes")) {
        const auto& m = j["modes"];
        const std::string w = path(where, "modes");
        allow_keys(m, w, {"omega", "g"});
        if (!m.contains("omega") || !m.contains("g")) throw ConfigError(w + ": needs 'omega' and 'g'");
        r.mode_omegas = get_numbers(m["omega"], path(w, "omega"));
        r.mode_gs = get_numbers(m["g"], path(w, "g"));
        if (r.mode_omegas.size() != r.mode_gs.size() || r.mode_omegas.empty())
            throw ConfigError(w + ": 'omega' and 'g' must be non-empty and of equal length");
        r.n_modes = static_cast<int>(r.mode_omegas.size());
        if (j.contains("n_modes") || j.contains("omega_max"))
            throw ConfigError(where + ": 'n_modes'/'omega_max' apply only to a spectral density");
    } else {
        r.spectral_density = j.contains("spectral_density")
                                 ? parse_spectral_density(j["spectral_density"], path(where, "spectral_density"))
                                 : SpectralDensity{};
        if (j.contains("n_modes")) {
            const auto n = get_integer(j["n_modes"], path(where, "n_modes"));
            if (n < 1 || n > 1000000) throw ConfigError(path(where, "n_modes") + ": must be in [1, 1e6]");
            r.n_modes = static_cast<int>(n);
        }
        if (j.contains("omega_max")) {
            r.omega_max = get_number(j["omega_max"], path(where, "omega_max"));
            if (!(*r.omega_max > 0.0)) throw ConfigError(path(where, "omega_max") + ": must be positive");
        }
    }
    if (!j.contains("coupling")) throw ConfigError(where + ": 'coupling' matrix is required");
    r.coupling = get_matrix(j["coupling"], path(where, "coupling"));
    if (j.contains("g_scale")) r.g_scale = get_number(j["g_scale"], path(where, "g_scale"));
    return r;
}

void parse_ensemble(const json& j, RunConfig& cfg) {
    const std::string where = "ensemble";
    allow_keys(j, where, {"n_traj", "seed", "t_final", "dt", "record_interval", "steady_fraction", "sampler",
                          "renormalize", "norm_drift_budget", "splitting", "workers"});
    auto& e = cfg.ensemble;
    if (j.contains("n_traj")) {
        const auto n = get_integer(j["n_traj"], "ensemble.n_traj");
        if (n < 1 || n > 100000000) throw ConfigError("ensemble.n_traj: must be in [1, 1e8]");
        e.n_traj = static_cast<int>(n);
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("ensemble.seed: expected a non-negative integer");
        e.base_seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("t_final")) e.t_final = get_number(j["t_final"], "ensemble.t_final");
    if (j.contains("dt")) e.step.dt = get_number(j["dt"], "ensemble.dt");
    if (j.contains("record_interval")) e.record_interval = get_number(j["record_interval"], "ensemble.record_interval");
    if (j.contains("steady_fraction")) e.steady_fraction = get_number(j["steady_fraction"], "ensemble.steady_fraction");
    if (j.contains("sampler")) {
        const auto s = get_string(j["sampler"], "ensemble.sampler");
        if (s == "wigner") e.sampler = SamplerKind::Wigner;
        else if (s == "classical") e.sampler = SamplerKind::Classical;
        else throw ConfigError("ensemble.sampler: expected 'wigner' or 'classical'");
    }
    if (j.contains("splitting")) {
        try {
            e.step.splitting = quantum_splitting_from_string(get_string(j["splitting"], "ensemble.splitting"));
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(std::string("ensemble.splitting: ") + ex.what());
        }
    }
    if (j.contains("renormalize")) e.step.renormalize = get_bool(j["renormalize"], "ensemble.renormalize");
    if (j.contains("norm_drift_budget"))
        e.step.norm_drift_budget = get_number(j["norm_drift_budget"], "ensemble.norm_drift_budget");
    if (j.contains("workers")) {
        const auto w = get_integer(j["workers"], "ensemble.workers");
        if (w < 0) throw ConfigError("ensemble.workers: must be non-negative");
        e.workers = static_cast<int>(w);
    }
}

} // namespace

RunConfig parse_run_config(const json& doc) {
    allow_keys(doc, "config", {"scenario", "case", "n_modes", "correction", "system", "reservoirs", "ensemble",
                               "redfield", "diagnostics", "output_dir"});
    RunConfig cfg;
    if (!doc.contains("scenario")) throw ConfigError("config: 'scenario' is required");
    cfg.scenario = wrap("scenario", [&] { return scenario_from_string(get_string(doc["scenario"], "scenario")); });
    const bool custom = cfg.scenario == Scenario::Custom;

    if (doc.contains("case")) {
        if (cfg.scenario != Scenario::ThreeLevelOneBath)
            throw ConfigError("case: only valid for scenario three_level_one_bath");
        const auto c = get_integer(doc["case"], "case");
        if (c < 1 || c > 3) throw ConfigError("case: must be 1, 2 or 3");
        cfg.case_index = static_cast<int>(c);
    }
    if (doc.contains("n_modes")) {
        if (custom) throw ConfigError("n_modes: set per reservoir for custom scenarios");
        const auto n = get_integer(doc["n_modes"], "n_modes");
        if (n < 1 || n > 1000000) throw ConfigError("n_modes: must be in [1, 1e6]");
        cfg.n_modes = static_cast<int>(n);
    }
    if (doc.contains("correction"))
        cfg.correction =
            wrap("correction", [&] { return correction_kind_from_string(get_string(doc["correction"], "correction")); });

    if (custom) {
        if (!doc.contains("system") || !doc.contains("reservoirs"))
            throw ConfigError("custom scenario needs 'system' and 'reservoirs'");
        const auto& s = doc["system"];
        allow_keys(s, "system", {"epsilon_cm1", "J_cm1", "initial_state", "allow_dephasing"});
        if (!s.contains("epsilon_cm1")) throw ConfigError("system: 'epsilon_cm1' is required");
        cfg.epsilon_cm1 = get_numbers(s["epsilon_cm1"], "system.epsilon_cm1");
        const auto n = static_cast<Eigen::Index>(cfg.epsilon_cm1.size());
        if (n < 2) throw ConfigError("system.epsilon_cm1: need at least two levels");
        cfg.J_cm1 = Eigen::MatrixXcd::Zero(n, n);
        if (s.contains("J_cm1")) {
            const Eigen::MatrixXd J = get_matrix(s["J_cm1"], "system.J_cm1");
            if (J.rows() != n) throw ConfigError("system.J_cm1: dimension does not match epsilon_cm1");
            cfg.J_cm1 = J.cast<Complex>();
        }
        if (s.contains("allow_dephasing")) cfg.allow_dephasing = get_bool(s["allow_dephasing"], "system.allow_dephasing");
        if (s.contains("initial_state")) {
            cfg.initial_state = get_numbers(s["initial_state"], "system.initial_state");
            if (static_cast<Eigen::Index>(cfg.initial_state.size()) != n)
                throw ConfigError("system.initial_state: dimension does not match epsilon_cm1");
        }
        const auto& rs = doc["reservoirs"];
        if (!rs.is_array() || rs.empty()) throw ConfigError("reservoirs: expected a non-empty array");
        for (std::size_t k = 0; k < rs.size(); ++k)
            cfg.reservoirs.push_back(parse_reservoir(rs[k], "reservoirs[" + std::to_string(k) + "]"));
    } else if (doc.contains("system") || doc.contains("reservoirs")) {
        throw ConfigError("'system' and 'reservoirs' are only valid for scenario custom");
    }

    if (doc.contains("ensemble")) parse_ensemble(doc["ensemble"], cfg);
    wrap("ensemble", [&] { cfg.ensemble.validate(); return 0; });

    if (doc.contains("redfield")) {
        const auto& r = doc["redfield"];
        allow_keys(r, "redfield", {"enabled", "lamb_shift", "dt"});
        if (r.contains("enabled")) cfg.redfield_enabled = get_bool(r["enabled"], "redfield.enabled");
        if (r.contains("lamb_shift")) cfg.lamb_shift = get_bool(r["lamb_shift"], "redfield.lamb_shift");
        if (r.contains("dt")) cfg.redfield_dt = get_number(r["dt"], "redfield.dt");
        if (!(cfg.redfield_dt > 0.0)) throw ConfigError("redfield.dt: must be positive");
    }
    if (doc.contains("diagnostics")) {
        const auto& d = doc["diagnostics"];
        allow_keys(d, "diagnostics", {"n_samples", "wick_samples", "fdt_points", "seed"});
        auto positive = [&](const char* key, int& field) {
            if (!d.contains(key)) return;
            const auto v = get_integer(d[key], std::string("diagnostics.") + key);
            if (v < 2 || v > 100000000) throw ConfigError(std::string("diagnostics.") + key + ": must be in [2, 1e8]");
            field = static_cast<int>(v);
        };
        positive("n_samples", cfg.diagnostics.n_samples);
        positive("wick_samples", cfg.diagnostics.wick_samples);
        positive("fdt_points", cfg.diagnostics.fdt_points);
        if (d.contains("seed")) {
            if (!d["seed"].is_number_unsigned()) throw ConfigError("diagnostics.seed: expected a non-negative integer");
            cfg.diagnostics.seed = d["seed"].get<std::uint64_t>();
        }
    }
    if (doc.contains("output_dir")) cfg.output_dir = get_string(doc["output_dir"], "output_dir");
    if (cfg.output_dir.empty()) throw ConfigError("output_dir: must not be empty");

    // catch dimension and label errors before any computation
    resolve(cfg);
    return cfg;
}

RunConfig load_run_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file '" + file + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + file + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(doc);
}

json to_json(const RunConfig& cfg) {
    json doc;
    doc["scenario"] = to_string(cfg.scenario);
    if (cfg.scenario == Scenario::ThreeLevelOneBath) doc["case"] = cfg.case_index;
    doc["correction"] = to_string(cfg.correction);
    if (cfg.scenario == Scenario::Custom) {
        json sys;
        sys["epsilon_cm1"] = cfg.epsilon_cm1;
        sys["J_cm1"] = matrix_to_json(cfg.J_cm1.real());
        sys["allow_dephasing"] = cfg.allow_dephasing;
        if (!cfg.initial_state.empty()) sys["initial_state"] = cfg.initial_state;
        doc["system"] = sys;
        json rs = json::array();
        for (const auto& r : cfg.reservoirs) {
            json o;
            o["name"] = r.name;
            o["temperature_K"] = r.temperature;
            if (r.spectral_density) {
                o["spectral_density"] = {{"family", to_string(r.spectral_density->family)},
                                         {"eta", r.spectral_density->eta},
                                         {"omega_c", r.spectral_density->omega_c}};
                o["n_modes"] = r.n_modes;
                o["omega_max"] = r.omega_max.value_or(r.spectral_density->default_omega_max());
            } else {
                o["modes"] = {{"omega", r.mode_omegas}, {"g", r.mode_gs}};
            }
            o["coupling"] = matrix_to_json(r.coupling);
            o["g_scale"] = r.g_scale;
            rs.push_back(o);
        }
        doc["reservoirs"] = rs;
    } else {
        doc["n_modes"] = cfg.n_modes;
    }
    const auto& e = cfg.ensemble;
    doc["ensemble"] = {{"n_traj", e.n_traj},
                       {"seed", e.base_seed},
                       {"t_final", e.t_final},
                       {"dt", e.step.dt},
                       {"record_interval", e.record_interval},
                       {"steady_fraction", e.steady_fraction},
                       {"sampler", e.sampler == SamplerKind::Wigner ? "wigner" : "classical"},
                       {"splitting", to_string(e.step.splitting)},
                       {"renormalize", e.step.renormalize},
                       {"norm_drift_budget", e.step.norm_drift_budget}};
    doc["redfield"] = {{"enabled", cfg.redfield_enabled}, {"lamb_shift", cfg.lamb_shift}, {"dt", cfg.redfield_dt}};
    doc["diagnostics"] = {{"n_samples", cfg.diagnostics.n_samples},
                          {"wick_samples", cfg.diagnostics.wick_samples},
                          {"fdt_points", cfg.diagnostics.fdt_points},
                          {"seed", cfg.diagnostics.seed}};
    doc["output_dir"] = cfg.output_dir;
    return doc;
}

ResolvedRun resolve(const RunConfig& cfg) {
    ResolvedRun run;
    if (cfg.scenario != Scenario::Custom) {
        ScenarioSetup setup = wrap("scenario", [&] {
            return scenario_build(cfg.scenario, cfg.case_index, cfg.correction, cfg.n_modes);
        });
        run.name = setup.name;
        run.system = std::move(setup.system);
        run.baths = std::move(setup.baths);
        run.initial_state = std::move(setup.initial_state);
        for (const auto& b : run.baths) {
            ReservoirConfig r;
            r.name = b.label;
            r.temperature = b.temperature;
            r.spectral_density = b.source;
            r.n_modes = static_cast<int>(b.n_modes());
            r.omega_max = b.omega_max;
            for (const auto& c : run.system.couplings)
                if (c.reservoir == b.label) r.coupling = c.V;
            run.reservoirs.push_back(r);
        }
    } else {
        run.name = "custom";
        const auto n = static_cast<Eigen::Index>(cfg.epsilon_cm1.size());
        run.system = make_system(cfg.epsilon_cm1);
        run.system.J = cfg.J_cm1;
        run.system.allow_dephasing = cfg.allow_dephasing;
        std::set<std::string> names;
        for (std::size_t k = 0; k < cfg.reservoirs.size(); ++k) {
            const auto& r = cfg.reservoirs[k];
            const std::string where = "reservoirs[" + std::to_string(k) + "]";
            if (!names.insert(r.name).second) throw ConfigError(where + ": duplicate name '" + r.name + "'");
            if (r.coupling.rows() != n) throw ConfigError(where + ".coupling: dimension does not match the system");
            run.system.couplings.push_back({r.name, r.coupling});
            DiscretizedBath bath = wrap(where, [&] {
                if (r.spectral_density) {
                    const double wmax = r.omega_max.value_or(r.spectral_density->default_omega_max());
                    return discretize(*r.spectral_density, r.n_modes, wmax, r.temperature, r.name);
                }
                return explicit_bath(r.mode_omegas, r.mode_gs, r.temperature, r.name);
            });
            bath.gs *= r.g_scale;
            run.baths.push_back(std::move(bath));
            run.reservoirs.push_back(r);
        }
        wrap("system", [&] { run.system.validate(); return 0; });
        run.initial_state = Eigen::VectorXcd::Zero(n);
        if (cfg.initial_state.empty()) {
            run.initial_state(0) = 1.0;
        } else {
            for (Eigen::Index i = 0; i < n; ++i) run.initial_state(i) = cfg.initial_state[i];
            const double norm = run.initial_state.norm();
            if (!(norm > 0.0)) throw ConfigError("system.initial_state: must not be the zero vector");
            run.initial_state /= norm;
        }
    }
    run.ensemble = cfg.ensemble;
    run.ensemble.scenario = cfg.scenario;
    run.ensemble.step.correction_kind = cfg.correction;
    return run;
}

} // namespace qpi
