// redfield.hpp: Bloch-Redfield reference dynamics and Boltzmann steady-state references

#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpi/bath.hpp"
#include "qpi/units.hpp"

namespace qpi {

// Bath correlation spectrum C(w) = Q(w) * C_cl(w), C_cl(w) = 2 kT J(|w|)/|w|.
// Positive w is energy released into the bath.
struct CorrelationSpectrum {
    SpectralDensity sd;
    double temperature = 300.0;
    CorrectionKind correction_kind = CorrectionKind::StandardHarmonic;

    double classical(double omega) const;
    double value(double omega) const;

    // Im of the half-sided transform: (1/2pi) PV integral C(w')/(w - w') dw'
    double principal_part(double omega) const;

    // Gamma(w) = integral_0^inf C(t) e^{iwt} dt = C(w)/2 + i * principal_part(w)
    Complex half_fourier(double omega, bool include_imaginary) const;
};

double correlation_value(const CorrelationSpectrum& spec, double omega);

struct RatePair {
    double k_up = 0.0;    // lower -> upper level, 1/ps
    double k_down = 0.0;  // upper -> lower level
};

// Golden-rule rates k = |V12|^2 C(w) between two levels given in cm^-1.
RatePair golden_rule_rates(double eps1_cm1, double eps2_cm1, double V12, const CorrelationSpectrum& spec);

struct RedfieldReservoir {
    std::string label;
    Eigen::MatrixXd V;  // working (site) basis
    CorrelationSpectrum spectrum;
};

struct RedfieldOptions {
    bool lamb_shift = false;  // keep Im Gamma in the dissipator
};

// Non-secular Redfield generator in the eigenbasis of H0.
//   d rho/dt = -i[H, rho] - sum_r ([V_r, L_r rho] - [V_r, rho L_r^+]),
//   (L_r)_mn = (V_r)_mn Gamma_r(E_n - E_m)
class RedfieldModel {
public:
    RedfieldModel(const Eigen::MatrixXcd& H0, std::vector<RedfieldReservoir> reservoirs,
                  RedfieldOptions options = {});

    int n_levels() const { return static_cast<int>(energies_.size()); }
    const Eigen::VectorXd& energies() const { return energies_; }
    const Eigen::MatrixXcd& basis() const { return basis_; }
    const Eigen::MatrixXcd& liouvillian() const { return liouvillian_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    // R_{ij,kl}(w) = V_ij V_kl Gamma(w) for reservoir r, indices in the eigenbasis
    Complex tensor_element(std::size_t r, int i, int j, int k, int l, double omega) const;

    // Transition frequency E_i - E_j in rad/ps
    double omega(int i, int j) const { return energies_(i) - energies_(j); }

    Eigen::MatrixXcd derivative(const Eigen::MatrixXcd& rho_eig) const;

    Eigen::MatrixXcd to_eigenbasis(const Eigen::MatrixXcd& rho_site) const;
    Eigen::MatrixXcd to_site(const Eigen::MatrixXcd& rho_eig) const;

    // Zero-eigenvalue state of the generator with unit trace, site basis.
    Eigen::MatrixXcd steady_state() const;

private:
    Eigen::VectorXd energies_;
    Eigen::MatrixXcd basis_;
    std::vector<RedfieldReservoir> reservoirs_;
    std::vector<Eigen::MatrixXcd> V_eig_;
    std::vector<Eigen::MatrixXcd> Lambda_;
    Eigen::MatrixXcd liouvillian_;
    RedfieldOptions options_;
    std::vector<std::string> warnings_;
};

// Pairs each coupling of `system` with the spectrum of the same reservoir label.
RedfieldModel assemble_tensor(const SystemSpec& system, const std::vector<std::string>& labels,
                              const std::vector<CorrelationSpectrum>& spectra,
                              RedfieldOptions options = {});

struct RhoTrajectory {
    std::vector<double> times;
    std::vector<Eigen::MatrixXcd> rho;  // site basis
    double dt_used = 0.0;
    int halvings = 0;
};

// Fixed-step RK4 on the generator, recording on `times` (ascending, starting at 0).
// Population excursions beyond 1e-6 outside [0,1] halve dt and restart.
RhoTrajectory integrate_rho(const RedfieldModel& model, const Eigen::MatrixXcd& rho0_site,
                            const std::vector<double>& times, double dt, int max_halvings = 8);

Eigen::VectorXd boltzmann_reference(const Eigen::VectorXd& epsilon_cm1, double temperature);

struct TwoTemperatureReference {
    Eigen::Vector3d populations;  // normalized to unit sum
    double normalized_difference = 0.0;  // (rho1 - rho2)/(rho1 + rho2)
};

// Level 1 <-> 3 thermalized by the hot reservoir, 3 <-> 2 by the cold one.
TwoTemperatureReference two_temperature_reference(double eps1_cm1, double eps2_cm1, double eps3_cm1,
                                                  double t_hot, double t_cold);

inline double normalized_difference(double a, double b) { return (a - b) / (a + b); }

} // namespace qpi
