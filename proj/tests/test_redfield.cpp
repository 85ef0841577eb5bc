// test_redfield.cpp: correlation spectra, Redfield generator, integration and steady-state references

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qpi/redfield.hpp"

using namespace qpi;

namespace {

constexpr double kKb = 0.6950348;             // cm^-1 per K
constexpr double kCm1 = 0.18836515673088532;  // rad/ps per cm^-1

SpectralDensity drude(double eta = 10.0, double omega_c = 10.0) {
    SpectralDensity sd;
    sd.family = SpectralFamily::DrudeLorentz;
    sd.eta = eta;
    sd.omega_c = omega_c;
    return sd;
}

CorrelationSpectrum ohmic_spectrum(double T, CorrectionKind kind = CorrectionKind::StandardHarmonic) {
    CorrelationSpectrum c;
    c.temperature = T;
    c.correction_kind = kind;
    return c;
}

// C(w) written out by hand for the ohmic family
double hand_ohmic_spectrum(double w, double T, double eta, double wc) {
    const double kT = kKb * T * kCm1;
    const double x = w / kT;
    return 2.0 / (1.0 + std::exp(-x)) * 2.0 * kT * eta * std::exp(-std::abs(w) / wc);
}

SystemSpec two_level(double delta_cm1, double v12 = 1.0) {
    SystemSpec s = make_system({0.0, delta_cm1});
    Eigen::MatrixXd V(2, 2);
    V << 0, v12, v12, 0;
    s.couplings.push_back({"phonon", V});
    return s;
}

RedfieldModel two_level_model(double delta_cm1, double T, double v12 = 1.0, bool lamb = false) {
    return assemble_tensor(two_level(delta_cm1, v12), {"phonon"}, {ohmic_spectrum(T)}, {lamb});
}

Eigen::MatrixXcd pure(int n, int k) {
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n, n);
    r(k, k) = 1.0;
    return r;
}

std::vector<double> uniform_times(double t_final, double step) {
    std::vector<double> t;
    const int n = static_cast<int>(std::lround(t_final / step));
    for (int k = 0; k <= n; ++k) t.push_back(k * step);
    return t;
}

Eigen::MatrixXcd random_density(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = Complex(g(rng), g(rng));
    Eigen::MatrixXcd rho = A * A.adjoint();
    return rho / rho.trace();
}

// Index-form Redfield generator built from the four-index tensor
//   G_abcd = V_ab V_cd Gamma(E_d - E_c),
//   R_abcd = G_dbac + G*_cabd - delta_bd sum_e G_aeec - delta_ac sum_e G*_beed.
Eigen::MatrixXcd tensor_derivative(const Eigen::VectorXd& E, const std::vector<Eigen::MatrixXd>& Vs,
                                   const std::vector<CorrelationSpectrum>& spectra, bool lamb,
                                   const Eigen::MatrixXcd& rho) {
    const int n = static_cast<int>(E.size());
    Eigen::MatrixXcd out(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) out(a, b) = Complex(0.0, -(E(a) - E(b))) * rho(a, b);
    for (std::size_t r = 0; r < Vs.size(); ++r) {
        const Eigen::MatrixXd& V = Vs[r];
        auto G = [&](int a, int b, int c, int d) {
            return V(a, b) * V(c, d) * spectra[r].half_fourier(E(d) - E(c), lamb);
        };
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d) {
                        Complex R = G(d, b, a, c) + std::conj(G(c, a, b, d));
                        for (int e = 0; e < n; ++e) {
                            if (b == d) R -= G(a, e, e, c);
                            if (a == c) R -= std::conj(G(b, e, e, d));
                        }
                        out(a, b) += R * rho(c, d);
                    }
    }
    return out;
}

} // namespace

TEST_CASE("correlation spectrum") {
    const CorrelationSpectrum c = ohmic_spectrum(300.0);

    SUBCASE("matches the hand-written ohmic spectrum") {
        for (double w : {-50.0, -18.8, -1.0, 0.3, 5.0, 18.8, 60.0})
            CHECK(c.value(w) == doctest::Approx(hand_ohmic_spectrum(w, 300.0, 10.0, 10.0)).epsilon(1e-12));
    }
    SUBCASE("zero-frequency limit is 2 kT eta") {
        const double kT = kKb * 300.0 * kCm1;
        CHECK(c.value(0.0) == doctest::Approx(2.0 * kT * 10.0).epsilon(1e-14));
        CHECK(correlation_value(c, 1e-9) == doctest::Approx(2.0 * kT * 10.0).epsilon(1e-9));
    }
    SUBCASE("classical part is even and linear in T") {
        const CorrelationSpectrum hot = ohmic_spectrum(600.0);
        for (double w : {0.1, 3.0, 30.0}) {
            CHECK(c.classical(w) == c.classical(-w));
            CHECK(hot.classical(w) == doctest::Approx(2.0 * c.classical(w)).epsilon(1e-14));
        }
    }
    SUBCASE("detailed-balance ratio at 100 cm^-1 and 300 K") {
        const double w = 100.0 * kCm1;
        CHECK(w == doctest::Approx(18.8365).epsilon(1e-5));
        CHECK(c.value(w) / c.value(-w) == doctest::Approx(1.61541).epsilon(1e-5));
    }
    SUBCASE("detailed balance holds pointwise for random frequencies") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-80.0, 80.0);
        const double beta = 1.0 / (kKb * 300.0 * kCm1);
        for (int k = 0; k < 100; ++k) {
            const double w = u(rng);
            CHECK(c.value(w) / c.value(-w) == doctest::Approx(std::exp(beta * w)).epsilon(1e-12));
        }
    }
    SUBCASE("no correction keeps the spectrum symmetric") {
        const CorrelationSpectrum none = ohmic_spectrum(300.0, CorrectionKind::None);
        CHECK(none.value(7.0) == none.value(-7.0));
        CHECK(none.value(7.0) == none.classical(7.0));
    }
    SUBCASE("half-Fourier real part is C/2 and the imaginary part is optional") {
        const Complex g = c.half_fourier(12.0, false);
        CHECK(g.real() == doctest::Approx(0.5 * c.value(12.0)).epsilon(1e-15));
        CHECK(g.imag() == 0.0);
        CHECK(c.half_fourier(12.0, true).imag() != 0.0);
    }
}

TEST_CASE("principal part of a Lorentzian spectrum matches its Hilbert transform") {
    // C(x) = A * 2 wc / (x^2 + wc^2) with A = 2 kT eta; (1/2pi) PV int C(x)/(w - x) dx = A w / (w^2 + wc^2)
    CorrelationSpectrum c;
    c.sd = drude(10.0, 10.0);
    c.temperature = 300.0;
    c.correction_kind = CorrectionKind::None;
    const double A = 2.0 * kKb * 300.0 * kCm1 * 10.0;
    for (double w : {0.5, 5.0, 10.0, 18.8365, 40.0}) {
        CHECK(c.principal_part(w) == doctest::Approx(A * w / (w * w + 100.0)).epsilon(1e-6));
        CHECK(c.principal_part(-w) == doctest::Approx(-c.principal_part(w)).epsilon(1e-9));
    }
    CHECK(std::abs(c.principal_part(0.0)) < 1e-6 * A);
}

TEST_CASE("principal part of the corrected ohmic spectrum against subtracted quadrature") {
    // PV int C(x)/(w - x) dx = int [C(x) - C(w)]/(w - x) dx over an interval symmetric about w
    const CorrelationSpectrum c = ohmic_spectrum(300.0);
    for (double w : {-18.8365, 3.0, 18.8365}) {
        const double L = 400.0;
        const int n = 400000;
        const double h = 2.0 * L / n;
        const double cw = c.value(w);
        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
            const double x = w - L + (k + 0.5) * h;  // midpoints avoid x = w
            sum += (c.value(x) - cw) / (w - x);
        }
        const double expected = sum * h / (2.0 * std::numbers::pi);
        CHECK(c.principal_part(w) == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("golden-rule rates") {
    const CorrelationSpectrum c = ohmic_spectrum(300.0);
    SUBCASE("ratio is the Boltzmann factor") {
        const RatePair k = golden_rule_rates(0.0, 100.0, 1.0, c);
        CHECK(k.k_up / k.k_down == doctest::Approx(0.61904).epsilon(1e-5));
        CHECK(k.k_up / k.k_down == doctest::Approx(std::exp(-100.0 / (kKb * 300.0))).epsilon(1e-12));
        CHECK(k.k_down == doctest::Approx(hand_ohmic_spectrum(100.0 * kCm1, 300.0, 10.0, 10.0)).epsilon(1e-12));
    }
    SUBCASE("quadratic in the coupling") {
        const RatePair a = golden_rule_rates(0.0, 100.0, 1.0, c);
        const RatePair b = golden_rule_rates(0.0, 100.0, 0.5, c);
        CHECK(b.k_down == doctest::Approx(0.25 * a.k_down).epsilon(1e-14));
        const RatePair z = golden_rule_rates(0.0, 100.0, 0.0, c);
        CHECK(z.k_up == 0.0);
        CHECK(z.k_down == 0.0);
    }
    SUBCASE("high temperature equalizes the rates") {
        const RatePair k = golden_rule_rates(0.0, 100.0, 1.0, ohmic_spectrum(1e9));
        CHECK(k.k_up / k.k_down == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("level order does not matter") {
        const RatePair a = golden_rule_rates(0.0, 100.0, 1.0, c);
        const RatePair b = golden_rule_rates(100.0, 0.0, 1.0, c);
        CHECK(a.k_up == b.k_up);
        CHECK(a.k_down == b.k_down);
    }
    CHECK_THROWS_AS(golden_rule_rates(5.0, 5.0, 1.0, c), std::invalid_argument);
}

TEST_CASE("two-level population block equals the golden-rule rates") {
    for (double delta : {30.0, 100.0, 250.0}) {
        const RedfieldModel m = two_level_model(delta, 300.0, 0.7);
        const RatePair k = golden_rule_rates(0.0, delta, 0.7, ohmic_spectrum(300.0));
        const Eigen::MatrixXcd& L = m.liouvillian();
        // column-major vec: (0,0) -> 0, (1,1) -> 3
        CHECK(L(0, 3).real() == doctest::Approx(k.k_down).epsilon(1e-13));
        CHECK(L(3, 0).real() == doctest::Approx(k.k_up).epsilon(1e-13));
        CHECK(L(0, 0).real() == doctest::Approx(-k.k_up).epsilon(1e-13));
        CHECK(L(3, 3).real() == doctest::Approx(-k.k_down).epsilon(1e-13));
        // populations do not feed coherences when V has no diagonal
        CHECK(std::abs(L(1, 0)) < 1e-13);
        CHECK(std::abs(L(2, 3)) < 1e-13);
    }
}

TEST_CASE("generator matches the index-form Redfield tensor") {
    SystemSpec s = make_system({0.0, 100.0, 120.0});
    Eigen::MatrixXd V1 = Eigen::MatrixXd::Zero(3, 3), V2 = Eigen::MatrixXd::Zero(3, 3);
    V1(0, 2) = V1(2, 0) = 1.0;
    V2(1, 2) = V2(2, 1) = 0.8;
    s.couplings.push_back({"hot", V1});
    s.couplings.push_back({"cold", V2});
    const std::vector<CorrelationSpectrum> spectra{ohmic_spectrum(6000.0), ohmic_spectrum(300.0)};
    std::mt19937_64 rng(5);
    for (bool lamb : {false, true}) {
        const RedfieldModel m = assemble_tensor(s, {"hot", "cold"}, spectra, {lamb});
        for (int trial = 0; trial < 3; ++trial) {
            const Eigen::MatrixXcd rho = random_density(3, rng);
            const Eigen::MatrixXcd expected = tensor_derivative(m.energies(), {V1, V2}, spectra, lamb, rho);
            CHECK((m.derivative(rho) - expected).cwiseAbs().maxCoeff() < 1e-10 * expected.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("three-level tensor spot check") {
    SystemSpec s = make_system({0.0, 100.0, 120.0});
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(3, 3);
    V(0, 2) = V(2, 0) = 1.0;
    V(1, 2) = V(2, 1) = 1.0;
    s.couplings.push_back({"phonon", V});
    const CorrelationSpectrum c = ohmic_spectrum(300.0);
    const RedfieldModel m = assemble_tensor(s, {"phonon"}, {c});
    // R_{13,32}(w_23) = V_13 V_32 C(w_23)/2 with levels counted from 1
    const double w = m.omega(1, 2);
    CHECK(w == doctest::Approx(-20.0 * kCm1).epsilon(1e-12));
    const Complex r = m.tensor_element(0, 0, 2, 2, 1, w);
    CHECK(r.real() == doctest::Approx(0.5 * hand_ohmic_spectrum(w, 300.0, 10.0, 10.0)).epsilon(1e-12));
    CHECK(r.imag() == 0.0);
    CHECK(m.tensor_element(0, 0, 1, 2, 1, w) == Complex(0.0));
    CHECK(m.warnings().empty());
}

TEST_CASE("zero coupling gives pure coherent evolution") {
    const RedfieldModel m = two_level_model(100.0, 300.0, 0.0);
    Eigen::MatrixXcd rho0(2, 2);
    rho0 << 0.7, Complex(0.2, 0.1), Complex(0.2, -0.1), 0.3;
    const auto times = uniform_times(1.0, 0.1);
    const RhoTrajectory tr = integrate_rho(m, rho0, times, 1e-4);
    const double w12 = -100.0 * kCm1;
    for (std::size_t g = 0; g < times.size(); ++g) {
        CHECK(tr.rho[g](0, 0).real() == doctest::Approx(0.7).epsilon(1e-12));
        const Complex expected = rho0(0, 1) * std::exp(Complex(0.0, -w12 * times[g]));
        CHECK(std::abs(tr.rho[g](0, 1) - expected) < 1e-10);
    }
    const RhoTrajectory still = integrate_rho(m, pure(2, 1), times, 1e-3);
    for (const auto& r : still.rho) CHECK((r - pure(2, 1)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("two-level relaxation follows the closed-form kinetics") {
    for (double T : {150.0, 300.0}) {
        const RedfieldModel m = two_level_model(100.0, T);
        const RatePair k = golden_rule_rates(0.0, 100.0, 1.0, ohmic_spectrum(T));
        const double rate = k.k_up + k.k_down;
        const double p_inf = k.k_down / rate;
        const auto times = uniform_times(0.02, 0.002);
        const RhoTrajectory tr = integrate_rho(m, pure(2, 1), times, 1e-5);
        for (std::size_t g = 0; g < times.size(); ++g) {
            const double expected = p_inf * (1.0 - std::exp(-rate * times[g]));
            CHECK(tr.rho[g](0, 0).real() == doctest::Approx(expected).epsilon(1e-9));
        }
        // rate recovered from the integrated decay
        const double t = times.back();
        const double recovered = -std::log(1.0 - tr.rho.back()(0, 0).real() / p_inf) / t;
        CHECK(recovered == doctest::Approx(rate).epsilon(1e-6));
    }
}

TEST_CASE("two-level steady state equals Boltzmann across a parameter sweep") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(10.0, 400.0), ut(50.0, 1000.0), uv(0.1, 3.0);
    for (int k = 0; k < 20; ++k) {
        const double delta = ud(rng), T = ut(rng), v = uv(rng);
        const RedfieldModel m = two_level_model(delta, T, v);
        const Eigen::MatrixXcd rho = m.steady_state();
        const double p1 = 1.0 / (1.0 + std::exp(-delta / (kKb * T)));
        INFO("delta " << delta << " T " << T << " V " << v);
        CHECK(std::abs(rho(0, 0).real() - p1) < 1e-8);
        CHECK(std::abs(rho(1, 1).real() - (1.0 - p1)) < 1e-8);
        CHECK(std::abs(rho(0, 1)) < 1e-8);
    }
}

TEST_CASE("integration preserves trace and Hermiticity over 20 ps") {
    SystemSpec s = make_system({0.0, 100.0, 120.0});
    s.J(0, 1) = s.J(1, 0) = 15.0;
    Eigen::MatrixXd V1 = Eigen::MatrixXd::Zero(3, 3), V2 = Eigen::MatrixXd::Zero(3, 3);
    V1(0, 2) = V1(2, 0) = 1.0;
    V2(1, 2) = V2(2, 1) = 1.0;
    s.couplings.push_back({"hot", V1});
    s.couplings.push_back({"cold", V2});
    const RedfieldModel m = assemble_tensor(s, {"hot", "cold"}, {ohmic_spectrum(6000.0), ohmic_spectrum(300.0)});
    std::mt19937_64 rng(8);
    const RhoTrajectory tr = integrate_rho(m, random_density(3, rng), uniform_times(20.0, 0.1), 1e-4);
    double worst_trace = 0.0, worst_herm = 0.0;
    for (const auto& r : tr.rho) {
        worst_trace = std::max(worst_trace, std::abs(r.trace() - Complex(1.0)));
        worst_herm = std::max(worst_herm, (r - r.adjoint()).cwiseAbs().maxCoeff());
    }
    CHECK(worst_trace < 1e-9);
    CHECK(worst_herm < 1e-9);
    CHECK(tr.halvings == 0);
    // the trajectory settles onto the generator's null vector
    CHECK((tr.rho.back() - m.steady_state()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("unstable steps are halved") {
    const RedfieldModel m = two_level_model(100.0, 300.0);
    const RatePair k = golden_rule_rates(0.0, 100.0, 1.0, ohmic_spectrum(300.0));
    const double dt = 4.0 / (k.k_up + k.k_down);  // beyond the RK4 stability edge
    const RhoTrajectory tr = integrate_rho(m, pure(2, 1), uniform_times(1.0, 0.1), dt);
    CHECK(tr.halvings > 0);
    CHECK(tr.dt_used < dt);
    const double p1 = 1.0 / (1.0 + std::exp(-100.0 / (kKb * 300.0)));
    CHECK(tr.rho.back()(0, 0).real() == doctest::Approx(p1).epsilon(1e-6));
    CHECK_THROWS_AS(integrate_rho(m, pure(2, 1), uniform_times(1.0, 0.1), 1.0, 1), std::runtime_error);
}

TEST_CASE("integration input checks") {
    const RedfieldModel m = two_level_model(100.0, 300.0);
    Eigen::MatrixXcd bad = pure(2, 0);
    bad(0, 1) = 0.1;
    CHECK_THROWS_AS(integrate_rho(m, bad, {0.0, 1.0}, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(integrate_rho(m, 2.0 * pure(2, 0), {0.0, 1.0}, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(integrate_rho(m, pure(3, 0), {0.0, 1.0}, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(integrate_rho(m, pure(2, 0), {0.5, 1.0}, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(integrate_rho(m, pure(2, 0), {0.0, 1.0, 0.5}, 1e-3), std::invalid_argument);
    CHECK_THROWS_AS(integrate_rho(m, pure(2, 0), {0.0, 1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("degenerate coupled levels produce a warning") {
    SystemSpec s = make_system({0.0, 0.0, 100.0});
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(3, 3);
    V(0, 1) = V(1, 0) = 1.0;
    s.couplings.push_back({"phonon", V});
    const RedfieldModel m = assemble_tensor(s, {"phonon"}, {ohmic_spectrum(300.0)});
    REQUIRE_FALSE(m.warnings().empty());
    CHECK(m.warnings().front().find("degenerate") != std::string::npos);
    CHECK_THROWS_AS(assemble_tensor(s, {"other"}, {ohmic_spectrum(300.0)}), std::invalid_argument);
}

TEST_CASE("Boltzmann and two-temperature references") {
    SUBCASE("two-level normalized difference is tanh(beta delta / 2)") {
        const Eigen::VectorXd p = boltzmann_reference(Eigen::Vector2d(0.0, 100.0), 300.0);
        CHECK(p.sum() == doctest::Approx(1.0));
        CHECK(normalized_difference(p(0), p(1)) == doctest::Approx(0.23531).epsilon(1e-5));
        CHECK(normalized_difference(p(0), p(1)) == doctest::Approx(std::tanh(100.0 / (2.0 * kKb * 300.0))));
    }
    SUBCASE("equal energies give uniform populations") {
        const Eigen::VectorXd p = boltzmann_reference(Eigen::Vector3d(50.0, 50.0, 50.0), 300.0);
        for (int i = 0; i < 3; ++i) CHECK(p(i) == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("three-level populations ignore the middle level in the normalized difference") {
        const Eigen::VectorXd p = boltzmann_reference(Eigen::Vector3d(0.0, 100.0, 120.0), 300.0);
        CHECK(normalized_difference(p(0), p(1)) == doctest::Approx(0.23531).epsilon(1e-5));
    }
    SUBCASE("two-temperature chain inverts levels 1 and 2") {
        const TwoTemperatureReference r = two_temperature_reference(0.0, 100.0, 120.0, 6000.0, 300.0);
        CHECK(r.normalized_difference == doctest::Approx(-0.0336).epsilon(1e-3));
        const double r3 = std::exp(-120.0 / (kKb * 6000.0));
        const double r2 = r3 * std::exp(20.0 / (kKb * 300.0));
        CHECK(r.normalized_difference == doctest::Approx((1.0 - r2) / (1.0 + r2)).epsilon(1e-12));
        CHECK(r.populations.sum() == doctest::Approx(1.0));
        CHECK(r.populations(1) > r.populations(0));
    }
    SUBCASE("equal temperatures reduce to Boltzmann") {
        const TwoTemperatureReference r = two_temperature_reference(0.0, 100.0, 120.0, 300.0, 300.0);
        const Eigen::VectorXd p = boltzmann_reference(Eigen::Vector3d(0.0, 100.0, 120.0), 300.0);
        CHECK((r.populations - p).cwiseAbs().maxCoeff() < 1e-14);
    }
    CHECK_THROWS_AS(boltzmann_reference(Eigen::Vector2d(0.0, 1.0), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(two_temperature_reference(0.0, 1.0, 2.0, -1.0, 300.0), std::invalid_argument);
}
