// ehrenfest.cpp: Four-step mean-field propagation loop

#include "qpi/ehrenfest.hpp"

#include <cmath>
#include <stdexcept>

namespace qpi {

namespace {

constexpr double kTaylorRadius = 0.5;
constexpr int kMaxTaylorTerms = 40;

double one_norm(const Eigen::MatrixXcd& A) {
    return A.cwiseAbs().colwise().sum().maxCoeff();
}

} // namespace

std::string to_string(QuantumSplitting splitting) {
    return splitting == QuantumSplitting::Frozen ? "frozen" : "symmetric";
}

QuantumSplitting quantum_splitting_from_string(const std::string& name) {
    if (name == "frozen") return QuantumSplitting::Frozen;
    if (name == "symmetric") return QuantumSplitting::Symmetric;
    throw std::invalid_argument("unknown quantum splitting '" + name + "' (expected frozen or symmetric)");
}

void StepConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(norm_drift_budget > 0.0)) throw std::invalid_argument("norm drift budget must be positive");
}

EhrenfestModel make_model(const SystemSpec& system, const std::vector<DiscretizedBath>& baths,
                          CorrectionKind kind) {
    EhrenfestModel model;
    model.H0 = build_hamiltonian0(system);
    for (const auto& coupling : system.couplings) {
        const DiscretizedBath* match = nullptr;
        for (const auto& b : baths) {
            if (b.label == coupling.reservoir) match = &b;
        }
        if (match == nullptr)
            throw std::invalid_argument("no bath provided for reservoir '" + coupling.reservoir + "'");
        match->validate();
        Reservoir r;
        r.bath = *match;
        r.V = coupling.V;
        r.modified = modify_coupling(coupling.V, system.epsilon, match->beta_hbar(), kind);
        model.reservoirs.push_back(std::move(r));
    }
    return model;
}

double collective_coordinate(const BathPhase& phase, const DiscretizedBath& bath) {
    return bath.gs.dot(phase.q);
}

Eigen::MatrixXcd effective_hamiltonian(const Eigen::MatrixXcd& H0,
                                       const std::vector<Eigen::MatrixXd>& couplings,
                                       const std::vector<double>& Qs) {
    if (couplings.size() != Qs.size())
        throw std::invalid_argument("need exactly one collective coordinate per reservoir");
    Eigen::MatrixXcd H = H0;
    for (std::size_t r = 0; r < couplings.size(); ++r) {
        if (couplings[r].rows() != H0.rows() || couplings[r].cols() != H0.cols())
            throw std::invalid_argument("coupling matrix dimension does not match H0");
        H += (couplings[r] * Qs[r]).cast<Complex>();
    }
    return H;
}

Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& A) {
    const double norm = one_norm(A);
    int squarings = 0;
    if (norm > kTaylorRadius) squarings = static_cast<int>(std::ceil(std::log2(norm / kTaylorRadius)));
    const Eigen::MatrixXcd B = A / std::ldexp(1.0, squarings);

    const auto n = A.rows();
    Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(n, n);
    Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(n, n);
    for (int k = 1; k <= kMaxTaylorTerms; ++k) {
        term = (term * B) / static_cast<double>(k);
        result += term;
        if (one_norm(term) <= 1e-18 * one_norm(result)) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

Eigen::VectorXcd step_quantum(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& H_eff, double dt) {
    if (H_eff.rows() != psi.size() || H_eff.cols() != psi.size())
        throw std::invalid_argument("Hamiltonian and state dimensions differ");
    return matrix_exponential(Complex(0.0, -dt) * H_eff) * psi;
}

double mean_field_displacement(const Eigen::VectorXcd& psi, const Eigen::MatrixXd& V) {
    const double norm2 = psi.squaredNorm();
    return (psi.adjoint() * V.cast<Complex>() * psi)(0, 0).real() / norm2;
}

void step_classical(BathPhase& phase, const DiscretizedBath& bath, double z_begin, double z_end,
                    double dt) {
    const Eigen::ArrayXd w2 = bath.omegas.array().square();
    const Eigen::ArrayXd a0 = -w2 * phase.q.array() - bath.gs.array() * z_begin;
    phase.q.array() += dt * phase.p.array() + 0.5 * dt * dt * a0;
    const Eigen::ArrayXd a1 = -w2 * phase.q.array() - bath.gs.array() * z_end;
    phase.p.array() += 0.5 * dt * (a0 + a1);
}

BathPhase step_classical(const BathPhase& phase, const DiscretizedBath& bath, double z, double dt) {
    BathPhase out = phase;
    step_classical(out, bath, z, z, dt);
    return out;
}

double ehrenfest_energy(const TrajectoryState& state, const EhrenfestModel& model) {
    const Eigen::VectorXcd& psi = state.psi;
    const double norm2 = psi.squaredNorm();
    double e = (psi.adjoint() * model.H0 * psi)(0, 0).real() / norm2;
    for (std::size_t r = 0; r < model.reservoirs.size(); ++r) {
        const auto& res = model.reservoirs[r];
        const auto& ph = state.baths[r];
        e += collective_coordinate(ph, res.bath) * mean_field_displacement(psi, res.V);
        e += 0.5 * (ph.p.squaredNorm() + (res.bath.omegas.array() * ph.q.array()).square().sum());
    }
    return e;
}

RecordGrid RecordGrid::uniform(double t_final, double interval, double dt) {
    if (!(interval > 0.0) || !(dt > 0.0) || !(t_final >= 0.0))
        throw std::invalid_argument("record grid needs positive interval and dt");
    RecordGrid grid;
    const long n = std::lround(t_final / interval);
    if (std::abs(static_cast<double>(n) * interval - t_final) > 1e-9 * std::max(1.0, t_final))
        throw std::invalid_argument("t_final must be a multiple of the record interval");
    for (long k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * interval;
        const long s = std::lround(t / dt);
        if (std::abs(static_cast<double>(s) * dt - t) > 1e-9 * std::max(1.0, t))
            throw std::invalid_argument("record interval must be a multiple of dt");
        grid.times.push_back(t);
        grid.steps.push_back(s);
    }
    return grid;
}

TrajectoryPropagator::TrajectoryPropagator(const EhrenfestModel& model, StepConfig cfg)
    : model_(model), cfg_(cfg) {
    cfg_.validate();
    const auto n = model.H0.rows();
    H_.resize(n, n);
    A_.resize(n, n);
    term_.resize(n);
    next_.resize(n);
    acc_.resize(n);
    for (const auto& r : model.reservoirs) {
        M_.push_back(r.modified.M.cast<Complex>());
        w2_.push_back(r.bath.omegas.array().square());
        force_.emplace_back(r.bath.n_modes());
        z_.push_back(0.0);
    }
}

void TrajectoryPropagator::refresh_displacements(const Eigen::VectorXcd& psi) {
    for (std::size_t r = 0; r < model_.reservoirs.size(); ++r)
        z_[r] = mean_field_displacement(psi, model_.reservoirs[r].V);
}

void TrajectoryPropagator::quantum_step(Eigen::VectorXcd& psi, double dt) {
    // action of exp(-i H dt) on psi by a Taylor series, substepped when |H| dt is large
    A_ = Complex(0.0, -dt) * H_;
    const double norm = one_norm(A_);
    int substeps = 1;
    if (norm >= kTaylorRadius) {
        substeps = static_cast<int>(std::ceil(norm / kTaylorRadius)) + 1;
        ++stiff_steps_;
        A_ /= static_cast<double>(substeps);
    }
    for (int s = 0; s < substeps; ++s) {
        acc_ = psi;
        term_ = psi;
        const double ref = psi.norm();
        for (int k = 1; k <= kMaxTaylorTerms; ++k) {
            next_.noalias() = A_ * term_;
            term_.swap(next_);
            term_ /= static_cast<double>(k);
            acc_ += term_;
            if (term_.norm() <= 1e-17 * ref) break;
        }
        psi.swap(acc_);
    }
}

void TrajectoryPropagator::step(TrajectoryState& state) {
    const auto n_res = model_.reservoirs.size();
    if (!primed_) {
        refresh_displacements(state.psi);
        for (std::size_t r = 0; r < n_res; ++r) {
            const auto& bath = model_.reservoirs[r].bath;
            force_[r] = -w2_[r] * state.baths[r].q.array() - bath.gs.array() * z_[r];
        }
        primed_ = true;
    }

    const double dt = cfg_.dt;
    if (cfg_.splitting == QuantumSplitting::Frozen) {
        // 1. effective system Hamiltonian from the current bath coordinates
        assemble_hamiltonian(state);
        // 2. propagate the system amplitude under the frozen Hamiltonian
        if (!advance_quantum(state, dt)) return;
    } else {
        assemble_hamiltonian(state);
        if (!advance_quantum(state, 0.5 * dt)) return;
        // positions only need the force at the start of the step
        for (std::size_t r = 0; r < n_res; ++r)
            state.baths[r].q.array() += dt * state.baths[r].p.array() + (0.5 * dt * dt) * force_[r];
        assemble_hamiltonian(state);
        if (!advance_quantum(state, 0.5 * dt)) return;
    }

    // 3. mean-field back-reaction with the original couplings
    refresh_displacements(state.psi);

    // 4. velocity Verlet for every mode
    const bool move_q = cfg_.splitting == QuantumSplitting::Frozen;
    for (std::size_t r = 0; r < n_res; ++r) {
        const auto& bath = model_.reservoirs[r].bath;
        auto q = state.baths[r].q.array();
        auto p = state.baths[r].p.array();
        if (move_q) q += dt * p + (0.5 * dt * dt) * force_[r];
        p += (0.5 * dt) * force_[r];
        force_[r] = -w2_[r] * q - bath.gs.array() * z_[r];
        p += (0.5 * dt) * force_[r];
    }
    state.t += dt;
}

void TrajectoryPropagator::assemble_hamiltonian(const TrajectoryState& state) {
    H_ = model_.H0;
    for (std::size_t r = 0; r < model_.reservoirs.size(); ++r)
        H_ += M_[r] * collective_coordinate(state.baths[r], model_.reservoirs[r].bath);
}

bool TrajectoryPropagator::advance_quantum(TrajectoryState& state, double dt) {
    const double before = cfg_.renormalize ? 1.0 : state.psi.norm();
    quantum_step(state.psi, dt);
    const double norm = state.psi.norm();
    if (!std::isfinite(norm) || norm == 0.0) {
        state.valid = false;
        return false;
    }
    const double ratio = norm / before;
    state.norm_drift += std::abs(1.0 - ratio);
    state.log_norm += std::log(ratio);
    if (cfg_.renormalize) state.psi /= norm;
    return true;
}

TrajectoryRecord TrajectoryPropagator::propagate(TrajectoryState& state, double t_final,
                                                 const RecordGrid& grid) {
    if (state.baths.size() != model_.reservoirs.size())
        throw std::invalid_argument("trajectory state has the wrong number of baths");
    for (std::size_t r = 0; r < state.baths.size(); ++r) {
        const auto m = model_.reservoirs[r].bath.n_modes();
        if (state.baths[r].q.size() != m || state.baths[r].p.size() != m)
            throw std::invalid_argument("bath phase length does not match its reservoir");
    }
    if (state.psi.size() != model_.H0.rows())
        throw std::invalid_argument("state vector has the wrong dimension");

    const long n_steps = std::lround(t_final / cfg_.dt);
    if (!grid.steps.empty() && grid.steps.back() > n_steps)
        throw std::invalid_argument("record grid extends past t_final");

    primed_ = false;
    stiff_steps_ = 0;
    TrajectoryRecord rec;
    rec.psi = Eigen::MatrixXcd::Zero(state.psi.size(), static_cast<Eigen::Index>(grid.steps.size()));

    std::size_t next_record = 0;
    for (long s = 0;; ++s) {
        while (next_record < grid.steps.size() && grid.steps[next_record] == s) {
            rec.psi.col(static_cast<Eigen::Index>(next_record)) = state.psi;
            ++next_record;
        }
        if (s == n_steps) break;
        step(state);
        if (!state.valid) {
            rec.diagnostic = "non-finite state vector at t = " + std::to_string(state.t);
            break;
        }
        if (std::abs(state.log_norm) > cfg_.norm_drift_budget) {
            state.valid = false;
            rec.diagnostic = "net norm drift |ln N| = " + std::to_string(std::abs(state.log_norm)) +
                             " exceeded the budget at t = " + std::to_string(state.t);
            break;
        }
    }
    rec.valid = state.valid;
    rec.norm_drift = state.norm_drift;
    rec.log_norm = state.log_norm;
    rec.stiff_steps = stiff_steps_;
    return rec;
}

TrajectoryRecord propagate_trajectory(TrajectoryState& state, const EhrenfestModel& model,
                                      const StepConfig& cfg, double t_final, const RecordGrid& grid) {
    TrajectoryPropagator prop(model, cfg);
    return prop.propagate(state, t_final, grid);
}

} // namespace qpi
