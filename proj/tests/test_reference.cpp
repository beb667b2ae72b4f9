#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <stdexcept>

#include "pathfit/reference.hpp"
#include "pathfit/systems.hpp"

using pathfit::PhaseState;
using pathfit::StepConfig;
using pathfit::Vec;

TEST_CASE("two-body oracle conserves energy and angular momentum", "[reference]") {
    auto kepler = pathfit::kepler_model();
    std::mt19937 rng(881001);
    std::uniform_real_distribution<double> time(-2.0 * M_PI, 6.0 * M_PI);

    for (double eps : {0.0, 0.3, 0.5, 0.9, 0.99}) {
        const double l_expected = std::sqrt(1.0 - eps * eps);
        for (int i = 0; i < 200; ++i) {
            const auto s = pathfit::kepler_exact_state(eps, time(rng));
            const double e = pathfit::energy_of(kepler, s.q, s.p, s.t);
            const double l = kepler.angular_momentum(s.q, s.p)[0];
            INFO("eps=" << eps << " t=" << s.t);
            REQUIRE(std::abs(e - (-0.5)) <= 1e-12);
            REQUIRE(std::abs(l - l_expected) <= 1e-12);
        }
    }
}

TEST_CASE("oracle endpoints: start, period closure, opposite apsis", "[reference]") {
    for (double eps : {0.0, 0.5, 0.9}) {
        const auto s0 = pathfit::kepler_initial_state(eps);
        const auto at0 = pathfit::kepler_exact_state(eps, 0.0);
        CHECK((at0.q - s0.q).lpNorm<Eigen::Infinity>() <= 1e-15);
        CHECK((at0.p - s0.p).lpNorm<Eigen::Infinity>() <= 1e-13);

        const auto atT = pathfit::kepler_exact_state(eps, 2.0 * M_PI);
        CHECK((atT.q - s0.q).lpNorm<Eigen::Infinity>() <= 1e-12);
        CHECK((atT.p - s0.p).lpNorm<Eigen::Infinity>() <= 1e-12);
    }

    const double eps = 0.5;
    const auto apo = pathfit::kepler_exact_state(eps, M_PI);
    CHECK(apo.q[0] == Catch::Approx(-1.5).margin(1e-14));
    CHECK(apo.q[1] == Catch::Approx(0.0).margin(1e-14));
    CHECK(apo.p[0] == Catch::Approx(0.0).margin(1e-14));
    CHECK(apo.p[1] == Catch::Approx(-std::sqrt(0.5 / 1.5)).margin(1e-14));
}

TEST_CASE("Kepler equation solve stays at 1e-14 near a sharp perihelion", "[reference]") {
    const double eps = 0.99;
    for (double t : {1e-8, 1e-4, 0.01, 0.1, M_PI - 1e-8, 2.0 * M_PI - 1e-8}) {
        const auto s = pathfit::kepler_exact_state(eps, t);
        // Recover E from the returned position and check the defining equation.
        const double cosE = s.q[0] + eps;
        const double sinE = s.q[1] / std::sqrt(1.0 - eps * eps);
        const double E = std::atan2(sinE, cosE);
        const double wrapped = E < 0.0 ? E + 2.0 * M_PI : E;
        double mean = std::fmod(t, 2.0 * M_PI);
        CHECK(std::abs(wrapped - eps * std::sin(wrapped) - mean) <= 1e-13);
    }
}

TEST_CASE("oracle rejects eccentricities outside [0,1)", "[reference]") {
    CHECK_THROWS_AS(pathfit::kepler_exact_state(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(pathfit::kepler_exact_state(-0.1, 0.0), std::invalid_argument);
}

TEST_CASE("baseline step matches the truncated oscillator Taylor series", "[reference]") {
    auto model = pathfit::harmonic_model();
    PhaseState s;
    s.t = 0.0;
    s.q = Vec::Constant(1, 1.0);
    s.p = Vec::Constant(1, 0.0);
    const double h = 0.01;
    const auto next = pathfit::rk4_step(model, s, h);

    // On a linear system the 4-stage update is exactly the degree-4 Taylor
    // polynomial of the flow.
    const double q_taylor = 1.0 - h * h / 2.0 + h * h * h * h / 24.0;
    const double p_taylor = -(h - h * h * h / 6.0);
    CHECK(next.q[0] == Catch::Approx(q_taylor).margin(1e-16));
    CHECK(next.p[0] == Catch::Approx(p_taylor).margin(1e-16));
    CHECK(next.q[0] == Catch::Approx(std::cos(h)).margin(1e-11));
    CHECK(next.p[0] == Catch::Approx(-std::sin(h)).margin(1e-11));
}

TEST_CASE("baseline step drifts a free particle exactly", "[reference]") {
    pathfit::LagrangianModel free;
    free.dim = 2;
    free.value = [](const Vec&, const Vec& v, double) { return 0.5 * v.squaredNorm(); };
    free.grad_q = [](const Vec& q, const Vec&, double) { return Vec::Zero(q.size()).eval(); };
    free.grad_v = [](const Vec&, const Vec& v, double) { return v; };
    free.hess_vq = [](const Vec& q, const Vec&, double) {
        return pathfit::Mat::Zero(q.size(), q.size()).eval();
    };
    free.hess_vv = [](const Vec& q, const Vec&, double) {
        return pathfit::Mat::Identity(q.size(), q.size()).eval();
    };
    free.grad_vt = [](const Vec& q, const Vec&, double) { return Vec::Zero(q.size()).eval(); };

    PhaseState s;
    s.t = 0.0;
    s.q = Vec(2);
    s.q << 0.3, -1.1;
    s.p = Vec(2);
    s.p << 0.7, 0.2;
    const auto next = pathfit::rk4_step(free, s, 0.25);
    CHECK((next.q - (s.q + 0.25 * s.p)).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((next.p - s.p).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("one-period position error against the oracle shrinks with degree", "[reference]") {
    auto kepler = pathfit::kepler_model();
    const double eps = 0.5, h = 0.05;
    const auto n_steps = static_cast<long long>(std::ceil(2.0 * M_PI / h));

    double previous = std::numeric_limits<double>::infinity();
    for (int S : {3, 5, 7}) {
        const auto traj = pathfit::integrate_fixed(kepler, pathfit::kepler_initial_state(eps), h,
                                                   n_steps, StepConfig::make(S));
        double max_err = 0.0;
        for (const auto& s : traj.states) {
            const auto exact = pathfit::kepler_exact_state(eps, s.t);
            max_err = std::max(max_err, (s.q - exact.q).lpNorm<Eigen::Infinity>());
        }
        INFO("S=" << S << " max position error " << max_err);
        CHECK(max_err < previous);
        previous = max_err;
    }
}

TEST_CASE("baseline energy drifts secularly while the fitted path stays bounded",
          "[reference]") {
    auto kepler = pathfit::kepler_model();
    const double eps = 0.5, h = 0.05;
    const auto per_period = static_cast<long long>(std::ceil(2.0 * M_PI / h));
    const long long periods = 10;
    const auto s0 = pathfit::kepler_initial_state(eps);

    auto period_max = [per_period](const pathfit::Trajectory& t, long long k) {
        double m = 0.0;
        for (long long i = k * per_period; i < (k + 1) * per_period &&
                                           i < static_cast<long long>(t.diagnostics.size());
             ++i)
            m = std::max(m, t.diagnostics[static_cast<size_t>(i)].rel_energy_error);
        return m;
    };

    const auto rk4 = pathfit::rk4_integrate(kepler, s0, h, periods * per_period);
    const auto var = pathfit::integrate_fixed(kepler, s0, h, periods * per_period,
                                              StepConfig::make(5));

    const double rk4_ratio = period_max(rk4, periods - 1) / period_max(rk4, 0);
    const double var_ratio = period_max(var, periods - 1) / period_max(var, 0);
    INFO("rk4 ratio " << rk4_ratio << ", variational ratio " << var_ratio);
    CHECK(rk4_ratio >= 3.0);
    CHECK(var_ratio <= 1.5);
}

TEST_CASE("baseline drivers validate their preconditions", "[reference]") {
    auto model = pathfit::harmonic_model();
    PhaseState s;
    s.t = 0.0;
    s.q = Vec::Constant(1, 1.0);
    s.p = Vec::Constant(1, 0.0);
    CHECK_THROWS_AS(pathfit::rk4_step(model, s, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(pathfit::rk4_integrate(model, s, 0.1, 0), std::invalid_argument);

    PhaseState wrong = s;
    wrong.q = Vec::Zero(3);
    wrong.p = Vec::Zero(3);
    CHECK_THROWS_AS(pathfit::rk4_step(model, wrong, 0.1), std::invalid_argument);
}
