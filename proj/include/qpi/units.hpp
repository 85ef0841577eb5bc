// units.hpp: Unit conversions, the N-level system Hamiltonian and detailed-balance coupling factors

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qpi {

using Complex = std::complex<double>;

// Internal units: hbar = 1, energies as angular frequencies in rad/ps, time in ps.
// Inputs arrive in cm^-1 and kelvin.
struct UnitContext {
    static constexpr double cm1_to_angfreq = 0.18836515673088532; // 2*pi*c, c in cm/ps
    static constexpr double kB = 0.695034800;                      // cm^-1 per kelvin

    static constexpr double to_angfreq(double cm1) { return cm1 * cm1_to_angfreq; }
    static constexpr double to_cm1(double angfreq) { return angfreq / cm1_to_angfreq; }

    // kT in rad/ps
    static constexpr double thermal_energy(double kelvin) { return kB * kelvin * cm1_to_angfreq; }

    // hbar*beta in ps; +inf at T = 0
    static double beta_hbar(double kelvin) {
        if (kelvin <= 0.0) return std::numeric_limits<double>::infinity();
        return 1.0 / thermal_energy(kelvin);
    }
};

enum class CorrectionKind { PaperLiteral, StandardHarmonic, None };

std::string to_string(CorrectionKind kind);
CorrectionKind correction_kind_from_string(const std::string& name);

// Multiplier turning a symmetric classical spectrum into one with quantum
// asymmetry. PaperLiteral: 1/(1+2e^{-x}); StandardHarmonic: 2/(1+e^{-x}); x = beta*hbar*omega.
double quantum_correction_factor(double omega, double beta_hbar, CorrectionKind kind);

struct ReservoirCoupling {
    std::string reservoir;
    Eigen::MatrixXd V; // real symmetric, dimensionless pattern
};

struct SystemSpec {
    Eigen::VectorXd epsilon;               // level energies, cm^-1
    Eigen::MatrixXcd J;                    // coherent couplings, cm^-1 (diagonal ignored)
    std::vector<ReservoirCoupling> couplings;
    bool allow_dephasing = false;          // permit nonzero diagonal in V

    int n_levels() const { return static_cast<int>(epsilon.size()); }

    // Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

SystemSpec make_system(const std::vector<double>& epsilon_cm1);

// H0 in rad/ps: diag(eps) + offdiag(J), converted from cm^-1.
Eigen::MatrixXcd build_hamiltonian0(const SystemSpec& spec);

struct ModifiedCoupling {
    Eigen::MatrixXd M;     // generally non-symmetric
    Eigen::MatrixXd base;  // source V
    double beta_hbar = 0.0;
    CorrectionKind factor_kind = CorrectionKind::None;
};

// M_ij = V_ij * sqrt(Q(w)) with w = (eps_j - eps_i)/hbar, the energy handed to the
// bath when amplitude moves j -> i. Downhill elements are enhanced, uphill suppressed.
ModifiedCoupling modify_coupling(const Eigen::MatrixXd& V,
                                 const Eigen::VectorXd& epsilon_cm1,
                                 double beta_hbar,
                                 CorrectionKind kind);

} // namespace qpi
