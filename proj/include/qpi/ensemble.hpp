// ensemble.hpp: Trajectory ensembles, reduced density matrices and the built-in scenarios

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpi/bath.hpp"
#include "qpi/ehrenfest.hpp"
#include "qpi/units.hpp"

namespace qpi {

enum class Scenario { TwoLevelOneBath, ThreeLevelOneBath, ThreeLevelTwoBath, Custom };

std::string to_string(Scenario scenario);
Scenario scenario_from_string(const std::string& name);

struct EnsembleConfig {
    int n_traj = 8000;
    std::uint64_t base_seed = 1;
    double t_final = 20.0;        // ps
    double record_interval = 0.1; // ps
    double steady_fraction = 0.25; // trailing share of the window used for steady-state estimates
    StepConfig step;
    SamplerKind sampler = SamplerKind::Wigner;
    Scenario scenario = Scenario::Custom;
    int workers = 0;  // 0 = hardware concurrency

    void validate() const;
};

struct NormDriftStats {
    double mean = 0.0;
    double max = 0.0;
    double max_abs_log_norm = 0.0;
    long stiff_steps = 0;
};

struct EnsembleResult {
    std::vector<double> grid;
    std::vector<Eigen::MatrixXcd> rho;       // mean psi psi^+ per grid point
    std::vector<Eigen::MatrixXd> stderr_re;  // standard error of Re rho_ij
    std::vector<Eigen::MatrixXd> stderr_im;
    std::vector<Eigen::MatrixXd> pop_cov;    // covariance of the mean populations
    Eigen::VectorXd tail_mean;               // per-trajectory window-averaged populations, ensemble mean
    Eigen::MatrixXd tail_cov;                // covariance of tail_mean
    double tail_start = 0.0;
    long n_traj = 0;
    long n_valid = 0;
    bool stderr_defined = false;             // false when fewer than two valid trajectories
    std::uint64_t base_seed = 0;
    NormDriftStats norm_drift;
    std::vector<std::string> invalid_diagnostics;

    int n_levels() const { return rho.empty() ? 0 : static_cast<int>(rho.front().rows()); }
};

class EnsembleFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Runs n_traj independent trajectories from Wigner (or classical) bath samples and psi0.
// Reduction happens in fixed blocks of trajectory indices merged in index order, so the
// output is bit-identical for any worker count.
EnsembleResult run_ensemble(const EhrenfestModel& model, const EnsembleConfig& cfg,
                            const Eigen::VectorXcd& psi0);

struct SeriesPoint {
    double t = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
    bool unreliable = false;
};

std::vector<SeriesPoint> population_difference(const EnsembleResult& result, int i, int j, bool normalized);

struct SteadyValue {
    double value = 0.0;
    double stderr_ = 0.0;
};

// Window-averaged population difference with its Monte-Carlo standard error.
SteadyValue steady_difference(const EnsembleResult& result, int i, int j, bool normalized);

struct ScenarioSetup {
    std::string name;
    SystemSpec system;
    std::vector<DiscretizedBath> baths;
    EnsembleConfig cfg;
    Eigen::VectorXcd initial_state;
};

// Built-in setups. case_index selects (V13, V23) = (1,1), (3,1), (1,3) for ThreeLevelOneBath.
ScenarioSetup scenario_build(Scenario scenario, int case_index = 1,
                             CorrectionKind kind = CorrectionKind::StandardHarmonic,
                             int n_modes = 400);

struct ConvergenceReport {
    double max_abs_diff = 0.0;          // over all grid points and matrix entries
    double max_pointwise_sigma = 0.0;
    Eigen::VectorXd tail_diff;          // per-level window-averaged population differences
    Eigen::VectorXd tail_sigma;
    double max_tail_sigma = 0.0;
    bool converged = true;              // max_tail_sigma <= 3
};

ConvergenceReport convergence_report(const EnsembleResult& half, const EnsembleResult& full);

} // namespace qpi
