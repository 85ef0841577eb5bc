// ehrenfest.hpp: Mean-field (Ehrenfest) trajectory propagation with detailed-balance-corrected couplings

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpi/bath.hpp"
#include "qpi/units.hpp"

namespace qpi {

// Frozen: psi advanced over the whole step under H_eff(Q(t)).
// Symmetric: half step under H_eff(Q(t)), Verlet position update, half step under H_eff(Q(t+dt)).
enum class QuantumSplitting { Frozen, Symmetric };

std::string to_string(QuantumSplitting splitting);
QuantumSplitting quantum_splitting_from_string(const std::string& name);

struct StepConfig {
    double dt = 1e-3;  // ps
    QuantumSplitting splitting = QuantumSplitting::Symmetric;
    bool renormalize = true;
    CorrectionKind correction_kind = CorrectionKind::StandardHarmonic;
    double norm_drift_budget = 0.5;  // limit on |log_norm|; norm_drift itself grows with t

    void validate() const;
};

// One reservoir as seen by the propagator: its modes, the original coupling V
// (drives the bath) and the corrected coupling M (drives the system).
struct Reservoir {
    DiscretizedBath bath;
    Eigen::MatrixXd V;
    ModifiedCoupling modified;
};

struct EhrenfestModel {
    Eigen::MatrixXcd H0;  // rad/ps
    std::vector<Reservoir> reservoirs;

    int n_levels() const { return static_cast<int>(H0.rows()); }
};

// Pairs each coupling of `system` with the bath whose label matches its reservoir id.
EhrenfestModel make_model(const SystemSpec& system, const std::vector<DiscretizedBath>& baths,
                          CorrectionKind kind);

struct TrajectoryState {
    Eigen::VectorXcd psi;
    std::vector<BathPhase> baths;
    double t = 0.0;
    double norm_drift = 0.0;  // sum over steps of |1 - |psi'|/|psi|| before renormalization
    double log_norm = 0.0;    // ln of the norm the state would carry without renormalization
    bool valid = true;
};

// Q = sum_i g_i q_i
double collective_coordinate(const BathPhase& phase, const DiscretizedBath& bath);

// H0 + sum_r M_r Q_r
Eigen::MatrixXcd effective_hamiltonian(const Eigen::MatrixXcd& H0,
                                       const std::vector<Eigen::MatrixXd>& couplings,
                                       const std::vector<double>& Qs);

Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& A);

// exp(-i H dt) psi, no renormalization
Eigen::VectorXcd step_quantum(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& H_eff, double dt);

// <psi|V|psi> / <psi|psi> with the unmodified V
double mean_field_displacement(const Eigen::VectorXcd& psi, const Eigen::MatrixXd& V);

// Velocity Verlet for H_i = p^2/2 + w^2 q^2/2 + g z q; z may differ at both ends of the step.
void step_classical(BathPhase& phase, const DiscretizedBath& bath, double z_begin, double z_end,
                    double dt);
BathPhase step_classical(const BathPhase& phase, const DiscretizedBath& bath, double z, double dt);

// <psi|H0|psi> + sum_r Q_r <V_r> + sum of mode energies (exact conserved quantity when M = V)
double ehrenfest_energy(const TrajectoryState& state, const EhrenfestModel& model);

struct RecordGrid {
    std::vector<double> times;
    std::vector<long> steps;

    // Points 0, interval, 2*interval, ... up to t_final; each must land on a step.
    static RecordGrid uniform(double t_final, double interval, double dt);
};

struct TrajectoryRecord {
    Eigen::MatrixXcd psi;  // n_levels x n_grid
    double norm_drift = 0.0;
    double log_norm = 0.0;
    long stiff_steps = 0;  // steps with |H_eff| dt >= 0.5, handled by substepping
    bool valid = true;
    std::string diagnostic;
};

// Reusable per-worker propagator; owns all scratch space so the inner loop does not allocate.
class TrajectoryPropagator {
public:
    TrajectoryPropagator(const EhrenfestModel& model, StepConfig cfg);

    TrajectoryRecord propagate(TrajectoryState& state, double t_final, const RecordGrid& grid);

    // One full step of the four-step loop.
    void step(TrajectoryState& state);

private:
    void quantum_step(Eigen::VectorXcd& psi, double dt);
    void assemble_hamiltonian(const TrajectoryState& state);
    bool advance_quantum(TrajectoryState& state, double dt);
    void refresh_displacements(const Eigen::VectorXcd& psi);

    const EhrenfestModel& model_;
    StepConfig cfg_;
    Eigen::MatrixXcd H_;
    Eigen::MatrixXcd A_;
    Eigen::VectorXcd term_, next_, acc_;
    std::vector<Eigen::MatrixXcd> M_;
    std::vector<Eigen::ArrayXd> w2_;
    std::vector<Eigen::ArrayXd> force_;  // acceleration at the start of the step
    std::vector<double> z_;
    long stiff_steps_ = 0;
    bool primed_ = false;
};

TrajectoryRecord propagate_trajectory(TrajectoryState& state, const EhrenfestModel& model,
                                      const StepConfig& cfg, double t_final, const RecordGrid& grid);

} // namespace qpi
