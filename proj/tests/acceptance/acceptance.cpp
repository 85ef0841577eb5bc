// acceptance.cpp: end-to-end acceptance suite; prints one PASS/FAIL line per criterion

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpi/diagnostics.hpp"
#include "qpi/ensemble.hpp"
#include "qpi/redfield.hpp"

using namespace qpi;

namespace {

constexpr double kBoltzmann2Level = 0.23531;  // tanh(beta*Delta/2), Delta = 100 cm^-1, T = 300 K
constexpr double kTwoTemperature = -0.0336;

int g_workers = 0;

struct Outcome {
    bool passed = false;
    std::string detail;
    std::vector<std::string> notes;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

SteadyValue run_scenario(Scenario sc, int case_index, CorrectionKind kind, bool normalized, std::string* note) {
    const ScenarioSetup s = scenario_build(sc, case_index, kind);
    const EhrenfestModel m = make_model(s.system, s.baths, kind);
    EnsembleConfig cfg = s.cfg;
    cfg.workers = g_workers;
    const auto t0 = std::chrono::steady_clock::now();
    const EnsembleResult r = run_ensemble(m, cfg, s.initial_state);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (note) {
        std::ostringstream o;
        o << s.name << " [" << to_string(kind) << "]: " << r.n_valid << "/" << r.n_traj << " trajectories, "
          << fmt("%.0f", sec) << " s, tail window from " << r.tail_start << " ps";
        *note = o.str();
    }
    return steady_difference(r, 0, 1, normalized);
}

Outcome criterion_1() {
    Outcome o;
    std::string note;
    const SteadyValue v = run_scenario(Scenario::TwoLevelOneBath, 1, CorrectionKind::StandardHarmonic, false, &note);
    o.passed = std::abs(v.value - kBoltzmann2Level) <= 0.05;
    o.detail = fmt("two-level, StandardHarmonic: steady rho1-rho2 = %.4f +- %.4f, target %.5f +- 0.05", v.value,
                   v.stderr_, kBoltzmann2Level);
    o.notes.push_back(note);
    // supplementary: the 1/(1 + 2 exp(-x)) factor in place of the default
    const SteadyValue lit = run_scenario(Scenario::TwoLevelOneBath, 1, CorrectionKind::PaperLiteral, false, &note);
    o.notes.push_back(note);
    o.notes.push_back(fmt("supplementary (PaperLiteral factor): steady rho1-rho2 = %.4f +- %.4f, deviation %+.4f", lit.value,
                          lit.stderr_, lit.value - kBoltzmann2Level) +
                      (std::abs(lit.value - kBoltzmann2Level) <= 0.05 ? " (within band)" : " (outside band)"));
    return o;
}

Outcome criterion_2() {
    Outcome o;
    std::string note;
    const SteadyValue v = run_scenario(Scenario::TwoLevelOneBath, 1, CorrectionKind::None, false, &note);
    o.passed = std::abs(v.value) <= 0.05;
    o.detail = fmt("two-level, no correction: steady rho1-rho2 = %.4f +- %.4f, target 0 +- 0.05", v.value, v.stderr_);
    o.notes.push_back(note);
    return o;
}

Outcome criterion_3() {
    Outcome o;
    std::string note;
    const SteadyValue v = run_scenario(Scenario::ThreeLevelOneBath, 1, CorrectionKind::StandardHarmonic, true, &note);
    o.passed = std::abs(v.value - kBoltzmann2Level) <= 0.06;
    o.detail = fmt("three-level case 1: steady (rho1-rho2)/(rho1+rho2) = %.4f +- %.4f, target %.5f +- 0.06", v.value,
                   v.stderr_, kBoltzmann2Level);
    o.notes.push_back(note);
    return o;
}

Outcome criterion_4() {
    Outcome o;
    o.passed = true;
    std::ostringstream d;
    d << "three-level cases 2 and 3 deviate from Boltzmann by > 3 sigma:";
    for (int c : {2, 3}) {
        std::string note;
        const SteadyValue v = run_scenario(Scenario::ThreeLevelOneBath, c, CorrectionKind::StandardHarmonic, true, &note);
        const double dev = v.value - kBoltzmann2Level;
        const double sig = dev / v.stderr_;
        o.passed = o.passed && std::abs(sig) > 3.0;
        d << fmt(" case %.0f %.4f +- %.4f (signed deviation %+.4f,", c, v.value, v.stderr_, dev)
          << fmt(" %+.1f sigma);", sig);
        o.notes.push_back(note);
    }
    o.detail = d.str();
    return o;
}

Outcome criterion_5() {
    Outcome o;
    std::string note;
    const SteadyValue v = run_scenario(Scenario::ThreeLevelTwoBath, 1, CorrectionKind::StandardHarmonic, true, &note);
    const double below = (kBoltzmann2Level - v.value) / v.stderr_;
    const TwoTemperatureReference ref = two_temperature_reference(0.0, 100.0, 120.0, 6000.0, 300.0);
    o.passed = below > 3.0;
    o.detail = fmt("two-temperature: steady normalized difference %.4f +- %.4f, %.1f sigma below Boltzmann %.5f",
                   v.value, v.stderr_, below, kBoltzmann2Level);
    o.notes.push_back(note);
    o.notes.push_back(fmt("chain reference %.4f (expected %.4f); deviation from it %+.4f (%+.1f sigma), reported only",
                          ref.normalized_difference, kTwoTemperature, v.value - ref.normalized_difference,
                          (v.value - ref.normalized_difference) / v.stderr_));
    return o;
}

Outcome criterion_6() {
    Outcome o;
    o.passed = true;
    const double sweep[5][2] = {{100.0, 300.0}, {50.0, 150.0}, {200.0, 300.0}, {100.0, 600.0}, {300.0, 1000.0}};
    double worst_pop = 0.0, worst_rate = 0.0;
    for (const auto& [delta, T] : sweep) {
        SystemSpec s = make_system({0.0, delta});
        Eigen::MatrixXd V(2, 2);
        V << 0, 1, 1, 0;
        s.couplings.push_back({"phonon", V});
        CorrelationSpectrum spec;
        spec.temperature = T;
        const RedfieldModel m = assemble_tensor(s, {"phonon"}, {spec});

        const Eigen::MatrixXcd ss = m.steady_state();
        const Eigen::VectorXd boltz = boltzmann_reference(s.epsilon, T);
        const double pop_err = std::max(std::abs(ss(0, 0).real() - boltz(0)), std::abs(ss(1, 1).real() - boltz(1)));

        // relaxation of rho_11 from the upper level, read off the integrated trajectory
        const RatePair k = golden_rule_rates(0.0, delta, 1.0, spec);
        const double rate = k.k_up + k.k_down;
        const double p_inf = k.k_down / rate;
        const double t = 1.0 / rate;
        Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(2, 2);
        rho0(1, 1) = 1.0;
        const RhoTrajectory tr = integrate_rho(m, rho0, {0.0, t}, t / 2000.0);
        const double measured = -std::log(1.0 - tr.rho.back()(0, 0).real() / p_inf) / t;
        const double rate_err = std::abs(measured - rate) / rate;

        worst_pop = std::max(worst_pop, pop_err);
        worst_rate = std::max(worst_rate, rate_err);
        o.notes.push_back(fmt("Delta %.0f cm^-1, T %.0f K: |rho - Boltzmann| %.1e, rate %.4g /ps", delta, T, pop_err,
                              rate) +
                          fmt(" (relative error %.1e)", rate_err));
    }
    o.passed = worst_pop <= 1e-8 && worst_rate <= 1e-6;
    o.detail = fmt("Redfield oracle: max |steady - Boltzmann| = %.2e (limit 1e-8), max relaxation-rate error %.2e "
                   "(limit 1e-6)",
                   worst_pop, worst_rate);
    return o;
}

// ---- criterion 7 property suites -------------------------------------------

struct Property {
    std::string name;
    std::function<std::pair<bool, std::string>()> run;
};

EhrenfestModel default_two_level(CorrectionKind kind) {
    const ScenarioSetup s = scenario_build(Scenario::TwoLevelOneBath, 1, kind);
    return make_model(s.system, s.baths, kind);
}

TrajectoryState sampled_state(const EhrenfestModel& m, std::uint64_t seed) {
    TrajectoryState st;
    st.psi = Eigen::VectorXcd::Zero(m.n_levels());
    st.psi(0) = 1.0;
    for (std::size_t r = 0; r < m.reservoirs.size(); ++r) {
        RandomStream rng = make_stream(derive_seed(seed, 0, r));
        st.baths.push_back(wigner_sample(m.reservoirs[r].bath, rng));
    }
    return st;
}

std::pair<bool, std::string> norm_conservation() {
    const EhrenfestModel m = default_two_level(CorrectionKind::None);
    TrajectoryState st = sampled_state(m, 17);
    StepConfig cfg;
    cfg.renormalize = false;
    cfg.correction_kind = CorrectionKind::None;
    TrajectoryPropagator prop(m, cfg);
    double worst = 0.0;
    for (int s = 0; s < 10000; ++s) {
        prop.step(st);
        worst = std::max(worst, std::abs(st.psi.norm() - 1.0));
    }
    return {worst < 1e-8, fmt("max |norm - 1| over 1e4 steps = %.2e (limit 1e-8)", worst)};
}

std::pair<bool, std::string> energy_drift() {
    const EhrenfestModel m = default_two_level(CorrectionKind::None);
    double worst = 0.0;
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        TrajectoryState st = sampled_state(m, seed);
        StepConfig cfg;
        cfg.correction_kind = CorrectionKind::None;
        TrajectoryPropagator prop(m, cfg);
        const double e0 = ehrenfest_energy(st, m);
        for (int s = 0; s < 10000; ++s) {
            prop.step(st);
            worst = std::max(worst, std::abs(ehrenfest_energy(st, m) - e0) / std::abs(e0));
        }
    }
    return {worst < 1e-4, fmt("max relative energy deviation over 10 ps (3 trajectories) = %.2e (limit 1e-4)", worst)};
}

std::pair<bool, std::string> verlet_oracle() {
    const DiscretizedBath b = explicit_bath({0.5, 1.0}, {1.5, 0.8}, 300.0);
    BathPhase ph{Eigen::Vector2d(0.4, -0.2), Eigen::Vector2d(0.1, 0.3)};
    const double z = 0.3;
    for (int s = 0; s < 100; ++s) ph = step_classical(ph, b, z, 1e-3);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        // RK4 at dt/100 on q'' = -w^2 q - g z
        double q = i == 0 ? 0.4 : -0.2, p = i == 0 ? 0.1 : 0.3;
        const double w = b.omegas(i), g = b.gs(i), h = 1e-5;
        auto acc = [&](double x) { return -w * w * x - g * z; };
        for (int s = 0; s < 10000; ++s) {
            const double k1q = p, k1p = acc(q);
            const double k2q = p + 0.5 * h * k1p, k2p = acc(q + 0.5 * h * k1q);
            const double k3q = p + 0.5 * h * k2p, k3p = acc(q + 0.5 * h * k2q);
            const double k4q = p + h * k3p, k4p = acc(q + h * k3q);
            q += h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
            p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        }
        worst = std::max({worst, std::abs(ph.q(i) - q), std::abs(ph.p(i) - p)});
    }
    return {worst < 1e-8, fmt("Verlet (100 steps) vs RK4 at dt/100: max deviation %.2e (limit 1e-8)", worst)};
}

std::pair<bool, std::string> rabi() {
    const double J = 20.0, delta = 100.0;
    SystemSpec s = make_system({0.0, delta});
    s.J(0, 1) = s.J(1, 0) = J;
    const EhrenfestModel m = make_model(s, {}, CorrectionKind::None);
    TrajectoryState st;
    st.psi = Eigen::Vector2cd(1.0, 0.0);
    const RecordGrid grid = RecordGrid::uniform(2.0, 0.01, 1e-3);
    const TrajectoryRecord rec = propagate_trajectory(st, m, {}, 2.0, grid);
    const double j = UnitContext::to_angfreq(J), d = UnitContext::to_angfreq(delta);
    const double omega = std::sqrt(d * d + 4.0 * j * j);
    double worst = 0.0;
    for (std::size_t g = 0; g < grid.times.size(); ++g) {
        const double sn = std::sin(0.5 * omega * grid.times[g]);
        worst = std::max(worst, std::abs(std::norm(rec.psi(1, g)) - 4.0 * j * j / (omega * omega) * sn * sn));
    }
    return {worst < 1e-4, fmt("detuned Rabi vs closed form: max population error %.2e (limit 1e-4)", worst)};
}

std::pair<bool, std::string> determinism() {
    const ScenarioSetup s = scenario_build(Scenario::ThreeLevelTwoBath);
    const EhrenfestModel m = make_model(s.system, s.baths, CorrectionKind::StandardHarmonic);
    EnsembleConfig cfg = s.cfg;
    cfg.n_traj = 160;
    cfg.t_final = 2.0;
    std::vector<EnsembleResult> rs;
    for (int w : {1, 4, 16}) {
        cfg.workers = w;
        rs.push_back(run_ensemble(m, cfg, s.initial_state));
    }
    bool same = true;
    for (std::size_t k = 1; k < rs.size(); ++k)
        for (std::size_t g = 0; g < rs[0].grid.size(); ++g) {
            same = same && std::memcmp(rs[0].rho[g].data(), rs[k].rho[g].data(), sizeof(Complex) * rs[0].rho[g].size()) == 0;
            same = same && std::memcmp(rs[0].stderr_re[g].data(), rs[k].stderr_re[g].data(),
                                       sizeof(double) * rs[0].stderr_re[g].size()) == 0;
        }
    return {same, std::string("160-trajectory ensembles with 1, 4 and 16 workers are ") +
                      (same ? "bit-identical" : "NOT bit-identical")};
}

Outcome criterion_7() {
    std::vector<Property> props{{"norm conservation", norm_conservation},
                                {"energy drift", energy_drift},
                                {"Verlet oracle", verlet_oracle},
                                {"Rabi", rabi},
                                {"bit-determinism", determinism}};

    // bath checks on the default two-level bath at 1e5 samples
    const ScenarioSetup reference = scenario_build(Scenario::TwoLevelOneBath);
    DiagnosticsOptions dopt;
    const std::vector<CheckResult> checks = run_bath_diagnostics(reference.baths.front(), dopt, 0);
    const std::set<std::string> wanted{"wigner_moments", "classical_moments", "fdt", "sum_rule", "wick"};
    std::set<std::string> seen;
    for (const auto& c : checks) {
        if (!wanted.count(c.name)) continue;
        seen.insert(c.name);
        props.push_back({c.name, [c] { return std::make_pair(c.passed && !c.skipped, c.detail); }});
    }
    for (const auto& w : wanted)
        if (!seen.count(w)) props.push_back({w, [] { return std::make_pair(false, std::string("check missing")); }});

    Outcome o;
    o.passed = true;
    int failed = 0;
    for (const auto& p : props) {
        const auto [ok, detail] = p.run();
        o.passed = o.passed && ok;
        failed += !ok;
        o.notes.push_back(std::string(ok ? "[ok]   " : "[FAIL] ") + p.name + ": " + detail);
    }
    o.detail = "property suites: " + std::to_string(props.size() - failed) + "/" + std::to_string(props.size()) +
               " pass";
    return o;
}

} // namespace

int main(int argc, char** argv) {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    CLI::App app{"Acceptance suite"};
    std::vector<int> only;
    app.add_option("--only", only, "Run only these criteria (1-7)");
    app.add_option("--workers", g_workers, "Worker threads for the ensembles (0 = available parallelism)");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<Outcome()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4,
                                                         criterion_5, criterion_6, criterion_7};
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome o;
        try {
            o = criteria[k]();
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail = std::string("error: ") + e.what();
        }
        failures += !o.passed;
        std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << "\n";
        for (const auto& n : o.notes) std::cout << "     " << n << "\n";
        std::cout.flush();
    }
    return failures == 0 ? 0 : 1;
}
