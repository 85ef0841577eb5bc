// redfield.cpp: Redfield generator assembly, integration and reference populations

#include "qpi/redfield.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace qpi {

namespace {

constexpr double kPopulationTolerance = 1e-6;

Eigen::VectorXcd vec(const Eigen::MatrixXcd& m) {
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, Eigen::Index n) {
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n);
}

} // namespace

double CorrelationSpectrum::classical(double omega) const {
    return 2.0 * UnitContext::thermal_energy(temperature) * sd.over_omega(std::abs(omega));
}

double CorrelationSpectrum::value(double omega) const {
    return quantum_correction_factor(omega, UnitContext::beta_hbar(temperature), correction_kind) *
           classical(omega);
}

double CorrelationSpectrum::principal_part(double omega) const {
    gsl_set_error_handler_off();
    const double span = sd.family == SpectralFamily::OhmicExp ? 80.0 * sd.omega_c : 2000.0 * sd.omega_c;
    const double lo = -std::abs(omega) - span;
    const double hi = std::abs(omega) + span;

    gsl_function f;
    f.function = [](double x, void* self) { return static_cast<const CorrelationSpectrum*>(self)->value(x); };
    f.params = const_cast<CorrelationSpectrum*>(this);

    constexpr std::size_t kLimit = 2000;
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(kLimit);
    double result = 0.0, abserr = 0.0;
    const int status = gsl_integration_qawc(&f, lo, hi, omega, 1e-10, 1e-9, kLimit, ws, &result, &abserr);
    gsl_integration_workspace_free(ws);
    if (status != GSL_SUCCESS && status != GSL_EROUND)
        throw std::runtime_error(std::string("principal-value integral failed: ") + gsl_strerror(status));
    // integral C(x)/(w - x) = -integral C(x)/(x - w)
    return -result / (2.0 * std::numbers::pi);
}

Complex CorrelationSpectrum::half_fourier(double omega, bool include_imaginary) const {
    return {0.5 * value(omega), include_imaginary ? principal_part(omega) : 0.0};
}

double correlation_value(const CorrelationSpectrum& spec, double omega) { return spec.value(omega); }

RatePair golden_rule_rates(double eps1_cm1, double eps2_cm1, double V12, const CorrelationSpectrum& spec) {
    if (eps1_cm1 == eps2_cm1) throw std::invalid_argument("golden-rule rates need distinct level energies");
    const double gap = UnitContext::to_angfreq(std::abs(eps2_cm1 - eps1_cm1));
    return {V12 * V12 * spec.value(-gap), V12 * V12 * spec.value(gap)};
}

RedfieldModel::RedfieldModel(const Eigen::MatrixXcd& H0, std::vector<RedfieldReservoir> reservoirs,
                             RedfieldOptions options)
    : reservoirs_(std::move(reservoirs)), options_(options) {
    const auto n = H0.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H0);
    energies_ = eig.eigenvalues();
    basis_ = eig.eigenvectors();
    // keep the site labelling when H0 is already diagonal
    if ((H0 - Eigen::MatrixXcd(H0.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0) {
        energies_ = H0.diagonal().real();
        basis_ = Eigen::MatrixXcd::Identity(n, n);
    }

    for (const auto& r : reservoirs_) {
        if (r.V.rows() != n || r.V.cols() != n)
            throw std::invalid_argument("Redfield coupling for '" + r.label + "' has wrong dimensions");
        const Eigen::MatrixXcd Ve = basis_.adjoint() * r.V.cast<Complex>() * basis_;
        Eigen::MatrixXcd Lam(n, n);
        for (Eigen::Index m = 0; m < n; ++m) {
            for (Eigen::Index k = 0; k < n; ++k) {
                Lam(m, k) = Ve(m, k) == Complex(0.0)
                                ? Complex(0.0)
                                : Ve(m, k) * r.spectrum.half_fourier(energies_(k) - energies_(m),
                                                                     options_.lamb_shift);
                if (m != k && std::abs(Ve(m, k)) > 0.0 &&
                    std::abs(energies_(m) - energies_(k)) < 1e-12 * std::max(1.0, energies_.cwiseAbs().maxCoeff()))
                    warnings_.push_back("degenerate levels " + std::to_string(m) + "," + std::to_string(k) +
                                        " coupled by reservoir '" + r.label + "'");
            }
        }
        V_eig_.push_back(Ve);
        Lambda_.push_back(Lam);
    }

    const Eigen::Index n2 = n * n;
    liouvillian_.resize(n2, n2);
    for (Eigen::Index c = 0; c < n2; ++c) {
        Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(n, n);
        unit(c % n, c / n) = 1.0;
        liouvillian_.col(c) = vec(derivative(unit));
    }
}

Complex RedfieldModel::tensor_element(std::size_t r, int i, int j, int k, int l, double omega) const {
    return V_eig_.at(r)(i, j) * V_eig_.at(r)(k, l) *
           reservoirs_.at(r).spectrum.half_fourier(omega, options_.lamb_shift);
}

Eigen::MatrixXcd RedfieldModel::derivative(const Eigen::MatrixXcd& rho) const {
    const auto n = rho.rows();
    Eigen::MatrixXcd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            out(i, j) = Complex(0.0, -(energies_(i) - energies_(j))) * rho(i, j);
    for (std::size_t r = 0; r < V_eig_.size(); ++r) {
        const Eigen::MatrixXcd& V = V_eig_[r];
        const Eigen::MatrixXcd a = Lambda_[r] * rho;
        const Eigen::MatrixXcd b = rho * Lambda_[r].adjoint();
        out -= V * a - a * V;
        out += V * b - b * V;
    }
    return out;
}

Eigen::MatrixXcd RedfieldModel::to_eigenbasis(const Eigen::MatrixXcd& rho_site) const {
    return basis_.adjoint() * rho_site * basis_;
}

Eigen::MatrixXcd RedfieldModel::to_site(const Eigen::MatrixXcd& rho_eig) const {
    return basis_ * rho_eig * basis_.adjoint();
}

Eigen::MatrixXcd RedfieldModel::steady_state() const {
    const Eigen::Index n = energies_.size();
    Eigen::MatrixXcd A = liouvillian_;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n * n);
    // swap the first equation for the trace condition
    A.row(0).setZero();
    for (Eigen::Index p = 0; p < n; ++p) A(0, p + n * p) = 1.0;
    rhs(0) = 1.0;
    const Eigen::VectorXcd x = A.fullPivLu().solve(rhs);
    return to_site(unvec(x, n));
}

RedfieldModel assemble_tensor(const SystemSpec& system, const std::vector<std::string>& labels,
                              const std::vector<CorrelationSpectrum>& spectra, RedfieldOptions options) {
    if (labels.size() != spectra.size()) throw std::invalid_argument("one spectrum per label required");
    std::vector<RedfieldReservoir> reservoirs;
    for (const auto& c : system.couplings) {
        std::size_t idx = labels.size();
        for (std::size_t k = 0; k < labels.size(); ++k)
            if (labels[k] == c.reservoir) idx = k;
        if (idx == labels.size())
            throw std::invalid_argument("no correlation spectrum for reservoir '" + c.reservoir + "'");
        reservoirs.push_back({c.reservoir, c.V, spectra[idx]});
    }
    return RedfieldModel(build_hamiltonian0(system), std::move(reservoirs), options);
}

RhoTrajectory integrate_rho(const RedfieldModel& model, const Eigen::MatrixXcd& rho0_site,
                            const std::vector<double>& times, double dt, int max_halvings) {
    const Eigen::Index n = model.n_levels();
    if (rho0_site.rows() != n || rho0_site.cols() != n)
        throw std::invalid_argument("initial density matrix has wrong dimensions");
    if ((rho0_site - rho0_site.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("initial density matrix must be Hermitian");
    if (std::abs(rho0_site.trace() - Complex(1.0)) > 1e-12)
        throw std::invalid_argument("initial density matrix must have unit trace");
    if (times.empty() || times.front() != 0.0) throw std::invalid_argument("record times must start at 0");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");

    const Eigen::MatrixXcd& L = model.liouvillian();
    for (int attempt = 0; attempt <= max_halvings; ++attempt) {
        const double h_target = dt / std::ldexp(1.0, attempt);
        RhoTrajectory out;
        out.dt_used = h_target;
        out.halvings = attempt;
        Eigen::VectorXcd y = vec(model.to_eigenbasis(rho0_site));
        bool stable = true;
        double t = 0.0;
        for (double target : times) {
            const double span = target - t;
            if (span < -1e-12) throw std::invalid_argument("record times must be ascending");
            const long steps = span > 0.0 ? static_cast<long>(std::ceil(span / h_target - 1e-9)) : 0;
            const double h = steps > 0 ? span / static_cast<double>(steps) : 0.0;
            for (long s = 0; s < steps; ++s) {
                const Eigen::VectorXcd k1 = L * y;
                const Eigen::VectorXcd k2 = L * (y + 0.5 * h * k1);
                const Eigen::VectorXcd k3 = L * (y + 0.5 * h * k2);
                const Eigen::VectorXcd k4 = L * (y + h * k3);
                y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            t = target;
            const Eigen::MatrixXcd rho = model.to_site(unvec(y, n));
            for (Eigen::Index p = 0; p < n; ++p) {
                const double pop = rho(p, p).real();
                if (!std::isfinite(pop) || pop < -kPopulationTolerance || pop > 1.0 + kPopulationTolerance)
                    stable = false;
            }
            if (!stable) break;
            out.times.push_back(target);
            out.rho.push_back(rho);
        }
        if (stable) return out;
    }
    throw std::runtime_error("Redfield integration unstable after " + std::to_string(max_halvings) +
                             " step halvings");
}

Eigen::VectorXd boltzmann_reference(const Eigen::VectorXd& epsilon_cm1, double temperature) {
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    const double kT = UnitContext::kB * temperature;
    const double e0 = epsilon_cm1.minCoeff();
    Eigen::VectorXd w = (-(epsilon_cm1.array() - e0) / kT).exp();
    return w / w.sum();
}

TwoTemperatureReference two_temperature_reference(double eps1_cm1, double eps2_cm1, double eps3_cm1,
                                                  double t_hot, double t_cold) {
    if (!(t_hot > 0.0) || !(t_cold > 0.0)) throw std::invalid_argument("temperatures must be positive");
    const double beta_hot = 1.0 / (UnitContext::kB * t_hot);
    const double beta_cold = 1.0 / (UnitContext::kB * t_cold);
    const double rho1 = 1.0;
    const double rho3 = rho1 * std::exp(-beta_hot * (eps3_cm1 - eps1_cm1));
    const double rho2 = rho3 * std::exp(-beta_cold * (eps2_cm1 - eps3_cm1));
    TwoTemperatureReference out;
    out.populations = Eigen::Vector3d(rho1, rho2, rho3) / (rho1 + rho2 + rho3);
    out.normalized_difference = normalized_difference(rho1, rho2);
    return out;
}

} // namespace qpi
