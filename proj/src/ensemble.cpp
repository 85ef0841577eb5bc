// ensemble.cpp: Parallel trajectory ensembles with deterministic reduction

#include "qpi/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "qpi/rng.hpp"

namespace qpi {

namespace {

constexpr int kBlockSize = 32;
constexpr double kMaxInvalidFraction = 0.01;

struct Accumulator {
    std::vector<Eigen::MatrixXcd> sum;
    std::vector<Eigen::MatrixXd> sumsq_re, sumsq_im;
    std::vector<Eigen::MatrixXd> pop_outer;
    Eigen::VectorXd tail_sum;
    Eigen::MatrixXd tail_outer;
    long count = 0;
    long invalid = 0;
    double drift_sum = 0.0, drift_max = 0.0, log_norm_max = 0.0;
    long stiff = 0;
    std::vector<std::string> diagnostics;

    Accumulator(Eigen::Index n, std::size_t n_grid)
        : sum(n_grid, Eigen::MatrixXcd::Zero(n, n)),
          sumsq_re(n_grid, Eigen::MatrixXd::Zero(n, n)),
          sumsq_im(n_grid, Eigen::MatrixXd::Zero(n, n)),
          pop_outer(n_grid, Eigen::MatrixXd::Zero(n, n)),
          tail_sum(Eigen::VectorXd::Zero(n)),
          tail_outer(Eigen::MatrixXd::Zero(n, n)) {}

    void merge(const Accumulator& o) {
        for (std::size_t g = 0; g < sum.size(); ++g) {
            sum[g] += o.sum[g];
            sumsq_re[g] += o.sumsq_re[g];
            sumsq_im[g] += o.sumsq_im[g];
            pop_outer[g] += o.pop_outer[g];
        }
        tail_sum += o.tail_sum;
        tail_outer += o.tail_outer;
        count += o.count;
        invalid += o.invalid;
        drift_sum += o.drift_sum;
        drift_max = std::max(drift_max, o.drift_max);
        log_norm_max = std::max(log_norm_max, o.log_norm_max);
        stiff += o.stiff;
        for (const auto& d : o.diagnostics)
            if (diagnostics.size() < 10) diagnostics.push_back(d);
    }
};

void run_block(int block, const EhrenfestModel& model, const EnsembleConfig& cfg,
               const Eigen::VectorXcd& psi0, const RecordGrid& grid, std::size_t tail_begin,
               TrajectoryPropagator& prop, Accumulator& acc) {
    const int first = block * kBlockSize;
    const int last = std::min(cfg.n_traj, first + kBlockSize);
    const auto n = psi0.size();
    const double tail_points = static_cast<double>(grid.times.size() - tail_begin);
    for (int traj = first; traj < last; ++traj) {
        TrajectoryState state;
        state.psi = psi0;
        for (std::size_t r = 0; r < model.reservoirs.size(); ++r) {
            RandomStream rng = make_stream(derive_seed(cfg.base_seed, static_cast<std::uint64_t>(traj), r));
            const auto& bath = model.reservoirs[r].bath;
            state.baths.push_back(cfg.sampler == SamplerKind::Wigner ? wigner_sample(bath, rng)
                                                                     : classical_sample(bath, rng));
        }
        const TrajectoryRecord rec = prop.propagate(state, cfg.t_final, grid);
        if (!rec.valid) {
            ++acc.invalid;
            if (acc.diagnostics.size() < 10)
                acc.diagnostics.push_back("trajectory " + std::to_string(traj) + ": " + rec.diagnostic);
            continue;
        }
        Eigen::VectorXd tail = Eigen::VectorXd::Zero(n);
        for (std::size_t g = 0; g < grid.times.size(); ++g) {
            const Eigen::VectorXcd psi = rec.psi.col(static_cast<Eigen::Index>(g)).normalized();
            const Eigen::MatrixXcd outer = psi * psi.adjoint();
            acc.sum[g] += outer;
            acc.sumsq_re[g] += outer.real().cwiseAbs2();
            acc.sumsq_im[g] += outer.imag().cwiseAbs2();
            const Eigen::VectorXd pops = psi.cwiseAbs2();
            acc.pop_outer[g] += pops * pops.transpose();
            if (g >= tail_begin) tail += pops;
        }
        tail /= tail_points;
        acc.tail_sum += tail;
        acc.tail_outer += tail * tail.transpose();
        ++acc.count;
        acc.drift_sum += rec.norm_drift;
        acc.drift_max = std::max(acc.drift_max, rec.norm_drift);
        acc.log_norm_max = std::max(acc.log_norm_max, std::abs(rec.log_norm));
        acc.stiff += rec.stiff_steps;
    }
}

double checked_sqrt(double v) { return std::sqrt(std::max(v, 0.0)); }

} // namespace

std::string to_string(Scenario scenario) {
    switch (scenario) {
    case Scenario::TwoLevelOneBath: return "two_level_paper";
    case Scenario::ThreeLevelOneBath: return "three_level_one_bath";
    case Scenario::ThreeLevelTwoBath: return "three_level_two_bath";
    case Scenario::Custom: return "custom";
    }
    return "custom";
}

Scenario scenario_from_string(const std::string& name) {
    if (name == "two_level_paper") return Scenario::TwoLevelOneBath;
    if (name == "three_level_one_bath") return Scenario::ThreeLevelOneBath;
    if (name == "three_level_two_bath") return Scenario::ThreeLevelTwoBath;
    if (name == "custom") return Scenario::Custom;
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

void EnsembleConfig::validate() const {
    if (n_traj < 1) throw std::invalid_argument("n_traj must be at least 1");
    if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be positive");
    if (!(steady_fraction > 0.0 && steady_fraction <= 1.0))
        throw std::invalid_argument("steady_fraction must lie in (0, 1]");
    if (workers < 0) throw std::invalid_argument("workers must be non-negative");
    step.validate();
}

EnsembleResult run_ensemble(const EhrenfestModel& model, const EnsembleConfig& cfg,
                            const Eigen::VectorXcd& psi0) {
    cfg.validate();
    if (psi0.size() != model.H0.rows()) throw std::invalid_argument("initial state has wrong dimension");
    if (std::abs(psi0.norm() - 1.0) > 1e-10) throw std::invalid_argument("initial state must be normalized");

    const RecordGrid grid = RecordGrid::uniform(cfg.t_final, cfg.record_interval, cfg.step.dt);
    const double tail_start = cfg.t_final * (1.0 - cfg.steady_fraction);
    std::size_t tail_begin = 0;
    while (tail_begin < grid.times.size() && grid.times[tail_begin] < tail_start - 1e-9) ++tail_begin;

    const auto n = psi0.size();
    const int n_blocks = (cfg.n_traj + kBlockSize - 1) / kBlockSize;
    std::vector<Accumulator> blocks(static_cast<std::size_t>(n_blocks), Accumulator(n, grid.times.size()));

    int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, n_blocks);

    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        try {
            TrajectoryPropagator prop(model, cfg.step);
            for (int b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1))
                run_block(b, model, cfg, psi0, grid, tail_begin, prop, blocks[static_cast<std::size_t>(b)]);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(n_blocks);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    Accumulator total(n, grid.times.size());
    for (const auto& b : blocks) total.merge(b);

    EnsembleResult res;
    res.grid = grid.times;
    res.n_traj = cfg.n_traj;
    res.n_valid = total.count;
    res.base_seed = cfg.base_seed;
    res.tail_start = grid.times.empty() ? 0.0 : grid.times[std::min(tail_begin, grid.times.size() - 1)];
    res.invalid_diagnostics = total.diagnostics;

    if (static_cast<double>(total.invalid) > kMaxInvalidFraction * cfg.n_traj) {
        std::string msg = std::to_string(total.invalid) + " of " + std::to_string(cfg.n_traj) +
                          " trajectories invalid";
        for (const auto& d : total.diagnostics) msg += "\n  " + d;
        throw EnsembleFailure(msg);
    }
    if (total.count == 0) throw EnsembleFailure("no valid trajectories");

    const double m = static_cast<double>(total.count);
    res.stderr_defined = total.count >= 2;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t g = 0; g < grid.times.size(); ++g) {
        const Eigen::MatrixXcd mean = total.sum[g] / m;
        res.rho.push_back(mean);
        Eigen::MatrixXd se_re(n, n), se_im(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!res.stderr_defined) {
                    se_re(i, j) = se_im(i, j) = nan;
                    continue;
                }
                const double vr = (total.sumsq_re[g](i, j) / m - std::norm(mean(i, j).real())) * m / (m - 1.0);
                const double vi = (total.sumsq_im[g](i, j) / m - std::norm(mean(i, j).imag())) * m / (m - 1.0);
                se_re(i, j) = checked_sqrt(vr / m);
                se_im(i, j) = checked_sqrt(vi / m);
            }
        }
        res.stderr_re.push_back(se_re);
        res.stderr_im.push_back(se_im);
        const Eigen::VectorXd pmean = mean.diagonal().real();
        if (res.stderr_defined)
            res.pop_cov.push_back((total.pop_outer[g] / m - pmean * pmean.transpose()) / (m - 1.0));
        else
            res.pop_cov.push_back(Eigen::MatrixXd::Constant(n, n, nan));
    }
    res.tail_mean = total.tail_sum / m;
    res.tail_cov = res.stderr_defined
                       ? Eigen::MatrixXd((total.tail_outer / m - res.tail_mean * res.tail_mean.transpose()) / (m - 1.0))
                       : Eigen::MatrixXd::Constant(n, n, nan);
    res.norm_drift.mean = total.drift_sum / m;
    res.norm_drift.max = total.drift_max;
    res.norm_drift.max_abs_log_norm = total.log_norm_max;
    res.norm_drift.stiff_steps = total.stiff;
    return res;
}

namespace {

void check_levels(const EnsembleResult& result, int i, int j) {
    const int n = result.n_levels();
    if (i < 0 || j < 0 || i >= n || j >= n) throw std::invalid_argument("level index out of range");
}

// value and standard error of (a - b) or (a - b)/(a + b) from the covariance of (a, b)
SteadyValue difference_with_error(double a, double b, double vaa, double vbb, double vab, bool normalized) {
    SteadyValue out;
    if (!normalized) {
        out.value = a - b;
        out.stderr_ = checked_sqrt(vaa + vbb - 2.0 * vab);
        return out;
    }
    const double s = a + b;
    out.value = (a - b) / s;
    const double ga = 2.0 * b / (s * s);
    const double gb = -2.0 * a / (s * s);
    out.stderr_ = checked_sqrt(ga * ga * vaa + gb * gb * vbb + 2.0 * ga * gb * vab);
    return out;
}

} // namespace

std::vector<SeriesPoint> population_difference(const EnsembleResult& result, int i, int j, bool normalized) {
    check_levels(result, i, j);
    std::vector<SeriesPoint> out;
    for (std::size_t g = 0; g < result.grid.size(); ++g) {
        const double a = result.rho[g](i, i).real();
        const double b = result.rho[g](j, j).real();
        const auto& c = result.pop_cov[g];
        const SteadyValue v = difference_with_error(a, b, c(i, i), c(j, j), c(i, j), normalized);
        SeriesPoint p;
        p.t = result.grid[g];
        p.value = v.value;
        p.stderr_ = v.stderr_;
        if (normalized) {
            const double sum_se = checked_sqrt(c(i, i) + c(j, j) + 2.0 * c(i, j));
            p.unreliable = !(a + b > 0.0 && a + b >= 10.0 * sum_se);
        }
        out.push_back(p);
    }
    return out;
}

SteadyValue steady_difference(const EnsembleResult& result, int i, int j, bool normalized) {
    check_levels(result, i, j);
    const auto& c = result.tail_cov;
    return difference_with_error(result.tail_mean(i), result.tail_mean(j), c(i, i), c(j, j), c(i, j),
                                 normalized);
}

ScenarioSetup scenario_build(Scenario scenario, int case_index, CorrectionKind kind, int n_modes) {
    ScenarioSetup setup;
    setup.name = to_string(scenario);
    setup.cfg.scenario = scenario;
    setup.cfg.step.correction_kind = kind;

    SpectralDensity sd;  // OhmicExp, eta = 10, omega_c = 10 rad/ps
    const double omega_max = sd.default_omega_max();

    switch (scenario) {
    case Scenario::TwoLevelOneBath: {
        setup.system = make_system({0.0, 100.0});
        Eigen::MatrixXd V(2, 2);
        V << 0.0, 1.0, 1.0, 0.0;
        setup.system.couplings.push_back({"phonon", V});
        setup.baths.push_back(discretize(sd, n_modes, omega_max, 300.0, "phonon"));
        break;
    }
    case Scenario::ThreeLevelOneBath: {
        static const double kCases[3][2] = {{1.0, 1.0}, {3.0, 1.0}, {1.0, 3.0}};
        if (case_index < 1 || case_index > 3) throw std::invalid_argument("three-level case must be 1, 2 or 3");
        const double v13 = kCases[case_index - 1][0];
        const double v23 = kCases[case_index - 1][1];
        setup.name += "_case" + std::to_string(case_index);
        setup.system = make_system({0.0, 100.0, 120.0});
        Eigen::MatrixXd V = Eigen::MatrixXd::Zero(3, 3);
        V(0, 2) = V(2, 0) = v13;
        V(1, 2) = V(2, 1) = v23;
        setup.system.couplings.push_back({"phonon", V});
        setup.baths.push_back(discretize(sd, n_modes, omega_max, 300.0, "phonon"));
        break;
    }
    case Scenario::ThreeLevelTwoBath: {
        setup.system = make_system({0.0, 100.0, 120.0});
        Eigen::MatrixXd V13 = Eigen::MatrixXd::Zero(3, 3);
        Eigen::MatrixXd V23 = Eigen::MatrixXd::Zero(3, 3);
        V13(0, 2) = V13(2, 0) = 1.0;
        V23(1, 2) = V23(2, 1) = 1.0;
        setup.system.couplings.push_back({"hot", V13});
        setup.system.couplings.push_back({"cold", V23});
        setup.baths.push_back(discretize(sd, n_modes, omega_max, 6000.0, "hot"));
        setup.baths.push_back(discretize(sd, n_modes, omega_max, 300.0, "cold"));
        break;
    }
    case Scenario::Custom:
        throw std::invalid_argument("custom scenarios come from a run configuration");
    }
    setup.initial_state = Eigen::VectorXcd::Zero(setup.system.n_levels());
    setup.initial_state(0) = 1.0;
    return setup;
}

ConvergenceReport convergence_report(const EnsembleResult& half, const EnsembleResult& full) {
    if (half.base_seed == full.base_seed)
        throw std::invalid_argument("convergence check needs ensembles with disjoint seeds");
    if (half.grid != full.grid) throw std::invalid_argument("ensembles use different time grids");
    if (half.n_levels() != full.n_levels()) throw std::invalid_argument("ensembles differ in dimension");

    ConvergenceReport rep;
    auto sigma = [](double diff, double se) {
        if (diff == 0.0) return 0.0;
        return se > 0.0 ? std::abs(diff) / se : std::numeric_limits<double>::infinity();
    };
    const int n = half.n_levels();
    for (std::size_t g = 0; g < half.grid.size(); ++g) {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const Complex d = half.rho[g](i, j) - full.rho[g](i, j);
                rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(d));
                const double se_re = std::hypot(half.stderr_re[g](i, j), full.stderr_re[g](i, j));
                const double se_im = std::hypot(half.stderr_im[g](i, j), full.stderr_im[g](i, j));
                rep.max_pointwise_sigma = std::max({rep.max_pointwise_sigma, sigma(d.real(), se_re),
                                                    sigma(d.imag(), se_im)});
            }
        }
    }
    rep.tail_diff = half.tail_mean - full.tail_mean;
    rep.tail_sigma.resize(n);
    for (int i = 0; i < n; ++i) {
        const double se = std::sqrt(std::max(half.tail_cov(i, i), 0.0) + std::max(full.tail_cov(i, i), 0.0));
        rep.tail_sigma(i) = sigma(rep.tail_diff(i), se);
        rep.max_tail_sigma = std::max(rep.max_tail_sigma, rep.tail_sigma(i));
    }
    rep.converged = rep.max_tail_sigma <= 3.0;
    return rep;
}

} // namespace qpi
