// bath.cpp: Harmonic reservoir construction, sampling and statistics

#include "qpi/bath.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qpi/units.hpp"

namespace qpi {

namespace {

constexpr double kPi = std::numbers::pi;

// fraction of the reorganization energy a default cutoff may drop
constexpr double kDefaultTruncationLoss = 0.005;

BathPhase sample_with(const PhaseVariances& var, RandomStream& rng) {
    BathPhase phase;
    phase.q.resize(var.q.size());
    phase.p.resize(var.p.size());
    // q and p drawn per mode in a fixed interleaved order
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < var.q.size(); ++i) {
        phase.q(i) = std::sqrt(var.q(i)) * normal(rng);
        phase.p(i) = std::sqrt(var.p(i)) * normal(rng);
    }
    return phase;
}

} // namespace

std::string to_string(SpectralFamily family) {
    return family == SpectralFamily::OhmicExp ? "ohmic_exp" : "drude_lorentz";
}

SpectralFamily spectral_family_from_string(const std::string& name) {
    if (name == "ohmic_exp") return SpectralFamily::OhmicExp;
    if (name == "drude_lorentz") return SpectralFamily::DrudeLorentz;
    throw std::invalid_argument("unknown spectral density family '" + name +
                                "' (expected ohmic_exp or drude_lorentz)");
}

void SpectralDensity::validate() const {
    if (!(eta > 0.0)) throw std::invalid_argument("spectral density eta must be positive");
    if (!(omega_c > 0.0)) throw std::invalid_argument("spectral density omega_c must be positive");
}

double SpectralDensity::operator()(double omega) const {
    return omega * over_omega(omega);
}

double SpectralDensity::over_omega(double omega) const {
    if (family == SpectralFamily::OhmicExp) return eta * std::exp(-omega / omega_c);
    return 2.0 * eta * omega_c / (omega * omega + omega_c * omega_c);
}

double SpectralDensity::reorganization_energy(double upper) const {
    if (family == SpectralFamily::OhmicExp) {
        const double covered = std::isinf(upper) ? 1.0 : -std::expm1(-upper / omega_c);
        return eta * omega_c / kPi * covered;
    }
    const double angle = std::isinf(upper) ? kPi / 2.0 : std::atan(upper / omega_c);
    return 2.0 * eta / kPi * angle;
}

double SpectralDensity::default_omega_max() const {
    if (family == SpectralFamily::OhmicExp) return 5.0 * omega_c;
    // a Lorentzian tail decays slowly; push the cutoff until the loss is small
    return omega_c * std::tan((1.0 - kDefaultTruncationLoss) * kPi / 2.0);
}

double DiscretizedBath::beta_hbar() const { return UnitContext::beta_hbar(temperature); }

double DiscretizedBath::thermal_energy() const { return UnitContext::thermal_energy(temperature); }

double DiscretizedBath::reorganization_energy() const {
    return 0.5 * (gs.array().square() / omegas.array().square()).sum();
}

void DiscretizedBath::validate() const {
    if (omegas.size() == 0) throw std::invalid_argument("bath '" + label + "' has no modes");
    if (omegas.size() != gs.size())
        throw std::invalid_argument("bath '" + label + "' has mismatched omega/g lengths");
    for (Eigen::Index i = 0; i < omegas.size(); ++i) {
        if (!(omegas(i) > 0.0))
            throw std::invalid_argument("bath '" + label + "' has a non-positive mode frequency");
        if (i > 0 && !(omegas(i) > omegas(i - 1)))
            throw std::invalid_argument("bath '" + label + "' mode frequencies must be strictly increasing");
    }
    if (!(temperature > 0.0))
        throw std::invalid_argument("bath '" + label + "' temperature must be positive");
}

DiscretizedBath discretize(const SpectralDensity& sd, int n_modes, double omega_max,
                           double temperature, std::string label) {
    sd.validate();
    if (n_modes < 1) throw std::invalid_argument("n_modes must be at least 1");
    if (!(omega_max > 0.0)) throw std::invalid_argument("omega_max must be positive");

    DiscretizedBath bath;
    bath.omegas.resize(n_modes);
    bath.gs.resize(n_modes);
    bath.temperature = temperature;
    bath.label = std::move(label);
    bath.source = sd;
    bath.omega_max = omega_max;

    // Each mode carries an equal share of the truncated reorganization energy and
    // sits at the upper edge of its share; for OhmicExp this is the closed form
    // w_i = -wc log[1 - (i/N)(1 - e^{-wm/wc})], g_i = w_i sqrt((2 eta/pi)(wc/N)(1 - e^{-wm/wc})).
    const double n = static_cast<double>(n_modes);
    const double per_mode = sd.reorganization_energy(omega_max) / n;
    const double g_over_w = std::sqrt(2.0 * per_mode);
    for (int i = 1; i <= n_modes; ++i) {
        const double frac = static_cast<double>(i) / n;
        double w = 0.0;
        if (sd.family == SpectralFamily::OhmicExp) {
            const double arg = 1.0 - frac * (-std::expm1(-omega_max / sd.omega_c));
            if (!(arg > 0.0)) throw std::logic_error("discretization log argument is not positive");
            w = -sd.omega_c * std::log(arg);
        } else {
            w = sd.omega_c * std::tan(frac * std::atan(omega_max / sd.omega_c));
        }
        if (i == n_modes) w = omega_max;
        bath.omegas(i - 1) = w;
        bath.gs(i - 1) = w * g_over_w;
    }
    bath.validate();
    return bath;
}

DiscretizedBath explicit_bath(std::vector<double> omegas, std::vector<double> gs,
                              double temperature, std::string label) {
    DiscretizedBath bath;
    bath.omegas = Eigen::Map<Eigen::VectorXd>(omegas.data(), static_cast<Eigen::Index>(omegas.size()));
    bath.gs = Eigen::Map<Eigen::VectorXd>(gs.data(), static_cast<Eigen::Index>(gs.size()));
    bath.temperature = temperature;
    bath.label = std::move(label);
    bath.omega_max = omegas.empty() ? 0.0 : omegas.back();
    bath.validate();
    return bath;
}

SumRuleCheck check_sum_rule(const DiscretizedBath& bath, double rel_tol) {
    if (!bath.source) throw std::invalid_argument("sum rule needs a continuous spectral density");
    SumRuleCheck out;
    out.discrete = bath.reorganization_energy();
    out.continuum = bath.source->reorganization_energy();
    out.relative_error = std::abs(out.discrete - out.continuum) / out.continuum;
    out.passed = out.relative_error <= rel_tol;
    return out;
}

PhaseVariances wigner_variances(const DiscretizedBath& bath) {
    const double bh = bath.beta_hbar();
    PhaseVariances v;
    v.q.resize(bath.n_modes());
    v.p.resize(bath.n_modes());
    for (Eigen::Index i = 0; i < bath.n_modes(); ++i) {
        const double w = bath.omegas(i);
        const double th = std::tanh(0.5 * bh * w);
        v.q(i) = 1.0 / (2.0 * w * th);
        v.p(i) = w / (2.0 * th);
    }
    return v;
}

PhaseVariances classical_variances(const DiscretizedBath& bath) {
    const double kT = bath.thermal_energy();
    PhaseVariances v;
    v.q = kT / bath.omegas.array().square();
    v.p = Eigen::VectorXd::Constant(bath.n_modes(), kT);
    return v;
}

BathPhase wigner_sample(const DiscretizedBath& bath, RandomStream& rng) {
    if (!(bath.temperature > 0.0)) throw std::invalid_argument("Wigner sampling needs T > 0");
    return sample_with(wigner_variances(bath), rng);
}

BathPhase classical_sample(const DiscretizedBath& bath, RandomStream& rng) {
    if (!(bath.temperature > 0.0)) throw std::invalid_argument("classical sampling needs T > 0");
    return sample_with(classical_variances(bath), rng);
}

double memory_kernel(const DiscretizedBath& bath, double t) {
    double k = 0.0;
    for (Eigen::Index i = 0; i < bath.n_modes(); ++i) {
        const double r = bath.gs(i) / bath.omegas(i);
        k += r * r * std::cos(bath.omegas(i) * t);
    }
    return k;
}

double continuum_memory_kernel(const SpectralDensity& sd, double t) {
    if (sd.family == SpectralFamily::OhmicExp) {
        const double x = sd.omega_c * t;
        return 2.0 / kPi * sd.eta * sd.omega_c / (1.0 + x * x);
    }
    return 2.0 * sd.eta * std::exp(-sd.omega_c * std::abs(t));
}

double CorrelationRow::deviation_sigma() const {
    const double diff = std::abs(estimate - target);
    if (stderr_ > 0.0) return diff / stderr_;
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

CorrelationReport force_autocorrelation_check(const DiscretizedBath& bath, int n_samples,
                                              const std::vector<double>& t_grid,
                                              RandomStream& rng, SamplerKind sampler) {
    if (n_samples < 2) throw std::invalid_argument("need at least two samples");
    const Eigen::Index m = bath.n_modes();
    const auto nt = static_cast<Eigen::Index>(t_grid.size());

    // F(t_k) = sum_i g_i q_i cos(w_i t_k) + (g_i p_i / w_i) sin(w_i t_k)
    Eigen::MatrixXd cos_tab(nt, m), sin_tab(nt, m);
    for (Eigen::Index k = 0; k < nt; ++k) {
        for (Eigen::Index i = 0; i < m; ++i) {
            cos_tab(k, i) = bath.gs(i) * std::cos(bath.omegas(i) * t_grid[k]);
            sin_tab(k, i) = bath.gs(i) / bath.omegas(i) * std::sin(bath.omegas(i) * t_grid[k]);
        }
    }

    constexpr Eigen::Index kBatch = 4096;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(nt);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(nt);
    Eigen::MatrixXd qs(m, kBatch), ps(m, kBatch);
    Eigen::Index done = 0;
    while (done < n_samples) {
        const Eigen::Index batch = std::min<Eigen::Index>(kBatch, n_samples - done);
        for (Eigen::Index s = 0; s < batch; ++s) {
            const BathPhase ph = sampler == SamplerKind::Wigner ? wigner_sample(bath, rng)
                                                                : classical_sample(bath, rng);
            qs.col(s) = ph.q;
            ps.col(s) = ph.p;
        }
        const Eigen::MatrixXd F = cos_tab * qs.leftCols(batch) + sin_tab * ps.leftCols(batch);
        const Eigen::RowVectorXd F0 = bath.gs.transpose() * qs.leftCols(batch);
        for (Eigen::Index k = 0; k < nt; ++k) {
            const Eigen::ArrayXd prod = F.row(k).array() * F0.array();
            sum(k) += prod.sum();
            sumsq(k) += prod.square().sum();
        }
        done += batch;
    }

    CorrelationReport report;
    const double n = static_cast<double>(n_samples);
    const double kT = bath.thermal_energy();
    for (Eigen::Index k = 0; k < nt; ++k) {
        CorrelationRow row;
        row.t = t_grid[k];
        row.estimate = sum(k) / n;
        const double var = (sumsq(k) / n - row.estimate * row.estimate) * n / (n - 1.0);
        row.stderr_ = std::sqrt(std::max(var, 0.0) / n);
        row.target = kT * memory_kernel(bath, row.t);
        report.max_deviation_sigma = std::max(report.max_deviation_sigma, row.deviation_sigma());
        report.rows.push_back(row);
    }
    return report;
}

NonPsdCovariance::NonPsdCovariance(double eigenvalue, Eigen::Index index)
    : std::runtime_error("covariance is not positive semidefinite: eigenvalue " +
                         std::to_string(eigenvalue) + " (index " + std::to_string(index) + ")"),
      eigenvalue_(eigenvalue) {}

Eigen::MatrixXd gaussian_noise_series(const Eigen::VectorXd& covariance, int n_series,
                                      RandomStream& rng) {
    const Eigen::Index n = covariance.size();
    if (n == 0) throw std::invalid_argument("empty covariance");
    Eigen::MatrixXd T(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) T(i, j) = covariance(std::abs(i - j));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    Eigen::Index min_index = 0;
    const double min_eig = lambda.minCoeff(&min_index);
    const double scale = std::max(std::abs(lambda.maxCoeff()), 1e-300);
    if (min_eig < -1e-10 * scale) throw NonPsdCovariance(min_eig, min_index);

    const Eigen::MatrixXd L = eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Eigen::MatrixXd xi(n, n_series);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index s = 0; s < n_series; ++s)
        for (Eigen::Index k = 0; k < n; ++k) xi(k, s) = normal(rng);
    return L * xi;
}

WickCheck wick_four_point_check(const Eigen::MatrixXd& samples) {
    if (samples.rows() != 4) throw std::invalid_argument("Wick check needs 4 x n samples");
    const double n = static_cast<double>(samples.cols());
    auto pair = [&](int a, int b) { return (samples.row(a).array() * samples.row(b).array()).mean(); };
    const Eigen::ArrayXd prod = samples.row(0).array() * samples.row(1).array() *
                                samples.row(2).array() * samples.row(3).array();
    WickCheck out;
    out.four_point = prod.mean();
    out.pair_sum = pair(0, 1) * pair(2, 3) + pair(0, 2) * pair(1, 3) + pair(0, 3) * pair(1, 2);
    const double var = (prod - out.four_point).square().sum() / (n - 1.0);
    out.stderr_ = std::sqrt(var / n);
    out.deviation_sigma = std::abs(out.four_point - out.pair_sum) / out.stderr_;
    return out;
}

} // namespace qpi
