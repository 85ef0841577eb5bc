// units.cpp: Hamiltonian assembly and detailed-balance coupling factors

#include "qpi/units.hpp"

#include <stdexcept>

namespace qpi {

std::string to_string(CorrectionKind kind) {
    switch (kind) {
    case CorrectionKind::PaperLiteral: return "paper_literal";
    case CorrectionKind::StandardHarmonic: return "standard_harmonic";
    case CorrectionKind::None: return "none";
    }
    return "none";
}

CorrectionKind correction_kind_from_string(const std::string& name) {
    if (name == "paper_literal") return CorrectionKind::PaperLiteral;
    if (name == "standard_harmonic") return CorrectionKind::StandardHarmonic;
    if (name == "none") return CorrectionKind::None;
    throw std::invalid_argument("unknown correction kind '" + name +
                                "' (expected standard_harmonic, paper_literal or none)");
}

double quantum_correction_factor(double omega, double beta_hbar, CorrectionKind kind) {
    if (kind == CorrectionKind::None) return 1.0;
    // omega = 0 stays at the symmetric point even when beta_hbar is infinite
    const double x = (omega == 0.0 || beta_hbar == 0.0) ? 0.0 : beta_hbar * omega;
    const double boltz = std::exp(-x); // +inf for x -> -inf, both limits fall out of IEEE arithmetic
    if (kind == CorrectionKind::StandardHarmonic) return 2.0 / (1.0 + boltz);
    return 1.0 / (1.0 + 2.0 * boltz);
}

void SystemSpec::validate() const {
    const auto n = epsilon.size();
    if (n < 2) throw std::invalid_argument("system needs at least two levels");
    if (J.rows() != n || J.cols() != n)
        throw std::invalid_argument("J must be an n_levels x n_levels matrix");
    if ((J - J.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("J must be Hermitian");
    for (const auto& c : couplings) {
        if (c.V.rows() != n || c.V.cols() != n)
            throw std::invalid_argument("coupling matrix for reservoir '" + c.reservoir +
                                        "' has wrong dimensions");
        if ((c.V - c.V.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("coupling matrix for reservoir '" + c.reservoir +
                                        "' must be symmetric");
        if (!allow_dephasing && c.V.diagonal().cwiseAbs().maxCoeff() != 0.0)
            throw std::invalid_argument("coupling matrix for reservoir '" + c.reservoir +
                                        "' has diagonal (dephasing) entries; enable dephasing explicitly");
    }
}

SystemSpec make_system(const std::vector<double>& epsilon_cm1) {
    SystemSpec spec;
    spec.epsilon = Eigen::Map<const Eigen::VectorXd>(epsilon_cm1.data(),
                                                     static_cast<Eigen::Index>(epsilon_cm1.size()));
    spec.J = Eigen::MatrixXcd::Zero(spec.epsilon.size(), spec.epsilon.size());
    return spec;
}

Eigen::MatrixXcd build_hamiltonian0(const SystemSpec& spec) {
    spec.validate();
    const auto n = spec.epsilon.size();
    Eigen::MatrixXcd H(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            H(i, j) = (i == j) ? Complex(UnitContext::to_angfreq(spec.epsilon(i)), 0.0)
                               : spec.J(i, j) * UnitContext::cm1_to_angfreq;
        }
    }
    return H;
}

ModifiedCoupling modify_coupling(const Eigen::MatrixXd& V,
                                 const Eigen::VectorXd& epsilon_cm1,
                                 double beta_hbar,
                                 CorrectionKind kind) {
    if (V.rows() != epsilon_cm1.size() || V.cols() != epsilon_cm1.size())
        throw std::invalid_argument("coupling matrix and level energies disagree in size");
    ModifiedCoupling out;
    out.base = V;
    out.beta_hbar = beta_hbar;
    out.factor_kind = kind;
    out.M = V;
    if (kind == CorrectionKind::None) return out;
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
        for (Eigen::Index j = 0; j < V.cols(); ++j) {
            const double omega = UnitContext::to_angfreq(epsilon_cm1(j) - epsilon_cm1(i));
            out.M(i, j) = V(i, j) * std::sqrt(quantum_correction_factor(omega, beta_hbar, kind));
        }
    }
    return out;
}

} // namespace qpi
