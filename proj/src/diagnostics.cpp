// diagnostics.cpp: Sum rule, memory kernel, sampler moments, FDT, noise and Wick checks

#include "qpi/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "qpi/rng.hpp"

namespace qpi {

namespace {

constexpr int kNoiseLength = 16;
constexpr int kNoiseModes = 5;

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// Natural time scale of the bath: 2 pi / omega_c, or the median mode period for explicit lists.
double time_span(const DiscretizedBath& bath) {
    if (bath.source) return 2.0 * std::numbers::pi / bath.source->omega_c;
    return 2.0 * std::numbers::pi / bath.omegas(bath.n_modes() / 2);
}

CheckResult sum_rule(const DiscretizedBath& bath, const DiagnosticsOptions& opt) {
    CheckResult r{"sum_rule", true, false, {}, {{"estimate", "target", "relative_error"}, {}}};
    if (!bath.source) {
        r.skipped = true;
        r.detail = "explicit mode list has no continuum to compare against";
        return r;
    }
    const SumRuleCheck s = check_sum_rule(bath, opt.sum_rule_tolerance);
    r.passed = s.passed;
    r.table.rows.push_back({s.discrete, s.continuum, s.relative_error});
    r.detail = "relative error " + fmt(s.relative_error) + " (limit " + fmt(opt.sum_rule_tolerance) + ")";
    return r;
}

CheckResult memory_kernel_check(const DiscretizedBath& bath, const DiagnosticsOptions& opt) {
    CheckResult r{"memory_kernel", true, false, {}, {{"t", "estimate", "target", "stderr"}, {}}};
    if (bath.n_modes() == 1) {
        r.skipped = true;
        r.detail = "skipped: a single mode cannot resolve the continuum kernel";
        return r;
    }
    if (!bath.source) {
        r.skipped = true;
        r.detail = "skipped: explicit mode list has no continuum kernel";
        return r;
    }
    const double span = time_span(bath);
    const double scale = continuum_memory_kernel(*bath.source, 0.0);
    constexpr int kPoints = 50;
    double worst = 0.0;
    for (int k = 0; k < kPoints; ++k) {
        const double t = span * k / (kPoints - 1);
        const double est = memory_kernel(bath, t);
        const double target = continuum_memory_kernel(*bath.source, t);
        worst = std::max(worst, std::abs(est - target) / scale);
        r.table.rows.push_back({t, est, target, 0.0});
    }
    r.passed = worst <= opt.kernel_tolerance;
    r.detail = "max |K - K_cont| / K_cont(0) = " + fmt(worst) + " (limit " + fmt(opt.kernel_tolerance) + ")";
    return r;
}

// Moments of a few representative modes and of the collective coordinate sum g_i q_i.
CheckResult moments_check(const DiscretizedBath& bath, const DiagnosticsOptions& opt, SamplerKind kind,
                          RandomStream rng) {
    const bool wigner = kind == SamplerKind::Wigner;
    CheckResult r{wigner ? "wigner_moments" : "classical_moments", true, false, {},
                  {{"mode", "statistic", "estimate", "target", "stderr"}, {}}};
    const PhaseVariances var = wigner ? wigner_variances(bath) : classical_variances(bath);
    const Eigen::Index m = bath.n_modes();
    const std::set<Eigen::Index> picks{0, m / 2, m - 1};

    struct Acc {
        double s = 0, s2 = 0;
        void add(double x) { s += x; s2 += x * x; }
    };
    // per picked mode: q, p, qp, q^2, p^2; collective: Q, Q^2
    std::vector<std::array<Acc, 5>> acc(picks.size());
    Acc Q1, Q2;
    for (int n = 0; n < opt.n_samples; ++n) {
        const BathPhase ph = wigner ? wigner_sample(bath, rng) : classical_sample(bath, rng);
        std::size_t k = 0;
        for (Eigen::Index i : picks) {
            const double q = ph.q(i), p = ph.p(i);
            acc[k][0].add(q);
            acc[k][1].add(p);
            acc[k][2].add(q * p);
            acc[k][3].add(q * q);
            acc[k][4].add(p * p);
            ++k;
        }
        const double Q = bath.gs.dot(ph.q);
        Q1.add(Q);
        Q2.add(Q * Q);
    }
    const double n = opt.n_samples;
    double worst = 0.0;
    auto emit = [&](double mode, int stat, const Acc& a, double target) {
        const double mean = a.s / n;
        const double se = std::sqrt(std::max(a.s2 / n - mean * mean, 0.0) / (n - 1.0));
        const double dev = se > 0.0 ? std::abs(mean - target) / se : (mean == target ? 0.0 : INFINITY);
        worst = std::max(worst, dev);
        r.table.rows.push_back({mode, static_cast<double>(stat), mean, target, se});
    };
    std::size_t k = 0;
    for (Eigen::Index i : picks) {
        emit(static_cast<double>(i), 0, acc[k][0], 0.0);
        emit(static_cast<double>(i), 1, acc[k][1], 0.0);
        emit(static_cast<double>(i), 2, acc[k][2], 0.0);
        emit(static_cast<double>(i), 3, acc[k][3], var.q(i));
        emit(static_cast<double>(i), 4, acc[k][4], var.p(i));
        ++k;
    }
    emit(-1.0, 0, Q1, 0.0);
    emit(-1.0, 3, Q2, (bath.gs.array().square() * var.q.array()).sum());
    r.passed = worst <= opt.sigma_limit;
    r.detail = "max deviation " + fmt(worst) + " sigma over " + std::to_string(r.table.rows.size()) + " moments";
    return r;
}

CheckResult fdt_check(const DiscretizedBath& bath, const DiagnosticsOptions& opt, RandomStream rng) {
    CheckResult r{"fdt", true, false, {}, {{"t", "estimate", "target", "stderr"}, {}}};
    std::vector<double> grid(opt.fdt_points);
    for (int k = 0; k < opt.fdt_points; ++k) grid[k] = time_span(bath) * k / (opt.fdt_points - 1);
    const CorrelationReport rep = force_autocorrelation_check(bath, opt.n_samples, grid, rng, SamplerKind::Classical);
    for (const auto& row : rep.rows) r.table.rows.push_back({row.t, row.estimate, row.target, row.stderr_});
    r.passed = rep.max_deviation_sigma <= opt.sigma_limit;
    r.detail = "max deviation " + fmt(rep.max_deviation_sigma) + " sigma on " + std::to_string(grid.size()) + " points";
    return r;
}

// Coarse bath whose kernel drives the colored-noise checks.
DiscretizedBath noise_bath(const DiscretizedBath& bath) {
    if (bath.source && bath.n_modes() > kNoiseModes)
        return discretize(*bath.source, kNoiseModes, bath.omega_max, bath.temperature, bath.label);
    return bath;
}

Eigen::VectorXd noise_covariance(const DiscretizedBath& coarse, double spacing, int length) {
    Eigen::VectorXd c(length);
    for (int k = 0; k < length; ++k) c(k) = coarse.thermal_energy() * memory_kernel(coarse, k * spacing);
    return c;
}

// Sample covariance <x_0 x_k> of each lag against its target.
double lag_table(const Eigen::MatrixXd& series, const Eigen::VectorXd& target, double spacing, CsvTable& table) {
    double worst = 0.0;
    const double n = static_cast<double>(series.cols());
    for (Eigen::Index k = 0; k < target.size(); ++k) {
        const Eigen::ArrayXd prod = series.row(0).array() * series.row(k).array();
        const double mean = prod.mean();
        const double se = std::sqrt((prod - mean).square().sum() / (n - 1.0) / n);
        worst = std::max(worst, std::abs(mean - target(k)) / se);
        table.rows.push_back({k * spacing, mean, target(k), se});
    }
    return worst;
}

CheckResult colored_noise_check(const DiscretizedBath& bath, const DiagnosticsOptions& opt, RandomStream rng) {
    CheckResult r{"noise_covariance", true, false, {}, {{"t", "estimate", "target", "stderr"}, {}}};
    const DiscretizedBath coarse = noise_bath(bath);
    const double spacing = time_span(bath) / (kNoiseLength - 1);
    const Eigen::VectorXd c = noise_covariance(coarse, spacing, kNoiseLength);
    try {
        const Eigen::MatrixXd x = gaussian_noise_series(c, opt.n_samples, rng);
        const double worst = lag_table(x, c, spacing, r.table);
        r.passed = worst <= opt.sigma_limit;
        r.detail = "max deviation " + fmt(worst) + " sigma over " + std::to_string(kNoiseLength) + " lags (" +
                   std::to_string(coarse.n_modes()) + "-mode kernel)";
    } catch (const NonPsdCovariance& e) {
        r.passed = false;
        r.detail = std::string("covariance not positive semidefinite: ") + e.what();
    }
    return r;
}

CheckResult white_noise_check(const DiagnosticsOptions& opt, RandomStream rng) {
    CheckResult r{"white_noise", true, false, {}, {{"t", "estimate", "target", "stderr"}, {}}};
    Eigen::VectorXd c = Eigen::VectorXd::Zero(kNoiseLength);
    c(0) = 1.0;
    const Eigen::MatrixXd x = gaussian_noise_series(c, opt.n_samples, rng);
    const double worst = lag_table(x, c, 1.0, r.table);
    r.passed = worst <= opt.sigma_limit;
    r.detail = "max deviation " + fmt(worst) + " sigma over " + std::to_string(kNoiseLength) + " lags";
    return r;
}

CheckResult wick_check(const DiscretizedBath& bath, const DiagnosticsOptions& opt, RandomStream rng) {
    CheckResult r{"wick", true, false, {}, {{"estimate", "target", "stderr"}, {}}};
    const DiscretizedBath coarse = noise_bath(bath);
    const double spacing = time_span(bath) / (kNoiseLength - 1);
    // four unequal times so every pairing contributes differently
    constexpr int kLags[4] = {0, 1, 3, 6};
    const Eigen::VectorXd c = noise_covariance(coarse, spacing, kLags[3] + 1);
    const Eigen::MatrixXd x = gaussian_noise_series(c, opt.wick_samples, rng);
    Eigen::MatrixXd picks(4, x.cols());
    for (int k = 0; k < 4; ++k) picks.row(k) = x.row(kLags[k]);
    const WickCheck w = wick_four_point_check(picks);
    r.table.rows.push_back({w.four_point, w.pair_sum, w.stderr_});
    r.passed = w.deviation_sigma <= opt.sigma_limit;
    r.detail = "four-point vs pairings: " + fmt(w.deviation_sigma) + " sigma";
    return r;
}

} // namespace

std::vector<CheckResult> run_bath_diagnostics(const DiscretizedBath& bath, const DiagnosticsOptions& opt,
                                              std::uint64_t stream_index) {
    bath.validate();
    auto stream = [&](std::uint64_t check) { return make_stream(derive_seed(opt.seed, check, stream_index)); };
    std::vector<CheckResult> out;
    out.push_back(sum_rule(bath, opt));
    out.push_back(memory_kernel_check(bath, opt));
    out.push_back(moments_check(bath, opt, SamplerKind::Wigner, stream(1)));
    out.push_back(moments_check(bath, opt, SamplerKind::Classical, stream(2)));
    out.push_back(fdt_check(bath, opt, stream(3)));
    out.push_back(colored_noise_check(bath, opt, stream(4)));
    out.push_back(white_noise_check(opt, stream(5)));
    out.push_back(wick_check(bath, opt, stream(6)));
    return out;
}

} // namespace qpi
