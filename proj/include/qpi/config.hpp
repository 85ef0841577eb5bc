// config.hpp: Run configuration documents (JSON) for the command-line driver

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpi/ensemble.hpp"

namespace qpi {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ReservoirConfig {
    std::string name;
    double temperature = 300.0;
    std::optional<SpectralDensity> spectral_density;
    int n_modes = 400;
    std::optional<double> omega_max;    // defaults per family
    std::vector<double> mode_omegas;    // explicit mode list instead of a spectral density
    std::vector<double> mode_gs;
    Eigen::MatrixXd coupling;
    double g_scale = 1.0;               // multiplies every g_i; used to inject faults in diagnostics
};

struct DiagnosticsConfig {
    int n_samples = 100000;
    int wick_samples = 1000000;
    int fdt_points = 20;
    std::uint64_t seed = 20240601;
};

struct RunConfig {
    Scenario scenario = Scenario::TwoLevelOneBath;
    int case_index = 1;
    int n_modes = 400;  // built-in scenarios only
    CorrectionKind correction = CorrectionKind::StandardHarmonic;

    // custom scenarios
    std::vector<double> epsilon_cm1;
    Eigen::MatrixXcd J_cm1;
    bool allow_dephasing = false;
    std::vector<double> initial_state;  // real amplitudes, normalized on resolve
    std::vector<ReservoirConfig> reservoirs;

    EnsembleConfig ensemble;
    bool redfield_enabled = true;
    bool lamb_shift = false;
    double redfield_dt = 1e-4;
    DiagnosticsConfig diagnostics;
    std::string output_dir = "out";
};

// Throws ConfigError on any schema violation, including unknown keys.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

// Canonical document with every default spelled out; parses back to the same RunConfig.
nlohmann::json to_json(const RunConfig& cfg);

struct ResolvedRun {
    std::string name;
    SystemSpec system;
    std::vector<DiscretizedBath> baths;
    std::vector<ReservoirConfig> reservoirs;  // one per bath, same order
    EnsembleConfig ensemble;
    Eigen::VectorXcd initial_state;
};

// Builds the system, baths and ensemble settings; throws ConfigError on inconsistent input.
ResolvedRun resolve(const RunConfig& cfg);

} // namespace qpi
