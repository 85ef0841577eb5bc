// bath.hpp: Harmonic reservoirs: spectral densities, discretization, thermal sampling and noise diagnostics

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpi/rng.hpp"

namespace qpi {

enum class SpectralFamily { OhmicExp, DrudeLorentz };

std::string to_string(SpectralFamily family);
SpectralFamily spectral_family_from_string(const std::string& name);

struct SpectralDensity {
    SpectralFamily family = SpectralFamily::OhmicExp;
    double eta = 10.0;      // dimensionless
    double omega_c = 10.0;  // rad/ps

    void validate() const;

    // J(omega) for omega >= 0, rad/ps
    double operator()(double omega) const;

    // J(omega)/omega; finite at omega = 0
    double over_omega(double omega) const;

    // (1/pi) * integral_0^upper J(w)/w dw; upper = +inf gives the full reorganization energy
    double reorganization_energy(double upper = std::numeric_limits<double>::infinity()) const;

    // Cutoff retaining all but `loss` of the reorganization energy.
    double default_omega_max() const;
};

struct DiscretizedBath {
    Eigen::VectorXd omegas;  // rad/ps, strictly increasing
    Eigen::VectorXd gs;      // rad/ps
    double temperature = 300.0;
    std::string label;
    std::optional<SpectralDensity> source; // empty for explicit mode lists
    double omega_max = 0.0;

    Eigen::Index n_modes() const { return omegas.size(); }
    double beta_hbar() const;
    double thermal_energy() const;

    // 1/2 sum g_i^2 / omega_i^2
    double reorganization_energy() const;

    void validate() const;
};

DiscretizedBath discretize(const SpectralDensity& sd, int n_modes, double omega_max,
                           double temperature = 300.0, std::string label = {});

DiscretizedBath explicit_bath(std::vector<double> omegas, std::vector<double> gs,
                              double temperature, std::string label = {});

struct SumRuleCheck {
    double discrete = 0.0;
    double continuum = 0.0;
    double relative_error = 0.0;
    bool passed = false;
};

SumRuleCheck check_sum_rule(const DiscretizedBath& bath, double rel_tol = 0.01);

struct BathPhase {
    Eigen::VectorXd q; // dimensionless position
    Eigen::VectorXd p; // dimensionless momentum
};

struct PhaseVariances {
    Eigen::VectorXd q;
    Eigen::VectorXd p;
};

// Gaussian widths implied by the thermal Wigner function of each mode.
PhaseVariances wigner_variances(const DiscretizedBath& bath);
PhaseVariances classical_variances(const DiscretizedBath& bath);

BathPhase wigner_sample(const DiscretizedBath& bath, RandomStream& rng);
BathPhase classical_sample(const DiscretizedBath& bath, RandomStream& rng);

enum class SamplerKind { Wigner, Classical };

// K(t) = sum_i g_i^2/omega_i^2 cos(omega_i t)
double memory_kernel(const DiscretizedBath& bath, double t);

// (2/pi) integral_0^inf J(w) cos(w t)/w dw, closed form for both families
double continuum_memory_kernel(const SpectralDensity& sd, double t);

struct CorrelationRow {
    double t = 0.0;
    double estimate = 0.0;
    double target = 0.0;
    double stderr_ = 0.0;

    double deviation_sigma() const;
};

struct CorrelationReport {
    std::vector<CorrelationRow> rows;
    double max_deviation_sigma = 0.0;
};

// Monte-Carlo estimate of <F(t)F(0)> for the free bath against kT*K(t).
CorrelationReport force_autocorrelation_check(const DiscretizedBath& bath, int n_samples,
                                              const std::vector<double>& t_grid,
                                              RandomStream& rng,
                                              SamplerKind sampler = SamplerKind::Classical);

class NonPsdCovariance : public std::runtime_error {
public:
    NonPsdCovariance(double eigenvalue, Eigen::Index index);
    double eigenvalue() const { return eigenvalue_; }

private:
    double eigenvalue_;
};

// Covariance decomposition of the Toeplitz matrix T_ij = c(|i-j|). Each column of
// the result is one stationary series of length covariance.size().
Eigen::MatrixXd gaussian_noise_series(const Eigen::VectorXd& covariance, int n_series,
                                      RandomStream& rng);

struct WickCheck {
    double four_point = 0.0;
    double pair_sum = 0.0;
    double stderr_ = 0.0;
    double deviation_sigma = 0.0;
};

// <x0x1x2x3> against the sum over pairings; samples are columns of a 4 x n matrix.
WickCheck wick_four_point_check(const Eigen::MatrixXd& samples);

} // namespace qpi
