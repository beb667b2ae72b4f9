#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pathfit/stepper.hpp"
#include "pathfit/systems.hpp"

using pathfit::Enforcement;
using pathfit::Mat;
using pathfit::NodeFamily;
using pathfit::PhaseState;
using pathfit::StepConfig;
using pathfit::Vec;

namespace {

PhaseState harmonic_state(double q, double p) {
    PhaseState s;
    s.t = 0.0;
    s.q = Vec::Constant(1, q);
    s.p = Vec::Constant(1, p);
    return s;
}

// Closed-form cubic update for L = v^2/2 - q^2/2 with the residual enforced
// at both step ends, derived by eliminating the curvature coefficients:
//   q1 = (6 h p + q (6 - 2 h^2)) / (6 + h^2)
double harmonic_cubic_update(double q, double p, double h) {
    return (6.0 * h * p + q * (6.0 - 2.0 * h * h)) / (6.0 + h * h);
}

}  // namespace

TEST_CASE("endpoint cubic on the oscillator reproduces the closed-form update", "[stepper]") {
    auto model = pathfit::harmonic_model();
    const auto config = StepConfig::make(3, Enforcement::endpoints);
    std::mt19937 rng(11001);
    std::uniform_real_distribution<double> amp(-2.0, 2.0);
    std::uniform_real_distribution<double> step_size(0.005, 0.1);
    for (int rep = 0; rep < 100; ++rep) {
        const double q = amp(rng), p = amp(rng), h = step_size(rng);
        const auto out = pathfit::step(model, harmonic_state(q, p), h, config);

        const double q1 = harmonic_cubic_update(q, p, h);
        INFO("q=" << q << " p=" << p << " h=" << h);
        CHECK(std::abs(out.next.q[0] - q1) <= 1e-12);

        // Recover the curvature coefficients of the monomial form from the
        // fitted Bernstein controls and compare with the closed forms
        //   x = h^2/3 (q + q1/2),  y = h^2/6 (q1 - q).
        const double p1c = out.path.controls(1, 0);
        const double p2c = out.path.controls(2, 0);
        const double x = 3.0 * p1c - 2.0 * q - out.next.q[0];
        const double y = 3.0 * p2c - q - 2.0 * out.next.q[0] - x;
        CHECK(std::abs(x - h * h / 3.0 * (q + 0.5 * q1)) <= 1e-10);
        CHECK(std::abs(y - h * h / 6.0 * (q1 - q)) <= 1e-10);

        // End momentum read off the path equals the mirrored closed form.
        const double p1 = (q1 - q) / h - h / 3.0 * (q1 + 0.5 * q);
        CHECK(std::abs(out.next.p[0] - p1) <= 1e-10);
    }
}

TEST_CASE("oscillator unit step from (1, 0) lands on the published value", "[stepper]") {
    auto model = pathfit::harmonic_model();
    const auto out =
        pathfit::step(model, harmonic_state(1.0, 0.0), 0.01, StepConfig::make(3, Enforcement::endpoints));
    CHECK(out.next.q[0] == Catch::Approx(harmonic_cubic_update(1.0, 0.0, 0.01)).margin(1e-14));
    // (6 - 2h^2) / (6 + h^2) at h = 0.01, evaluated in extended precision.
    CHECK(out.next.q[0] == Catch::Approx(0.9999500008333194).margin(1e-12));
}

TEST_CASE("step map is linear for a quadratic Lagrangian", "[stepper]") {
    auto model = pathfit::harmonic_model();
    const auto config = StepConfig::make(4);
    std::mt19937 rng(11002);
    std::uniform_real_distribution<double> amp(-1.5, 1.5);
    for (int rep = 0; rep < 20; ++rep) {
        const double alpha = amp(rng), beta = amp(rng);
        const PhaseState z1 = harmonic_state(amp(rng), amp(rng));
        const PhaseState z2 = harmonic_state(amp(rng), amp(rng));
        PhaseState mix;
        mix.t = 0.0;
        mix.q = alpha * z1.q + beta * z2.q;
        mix.p = alpha * z1.p + beta * z2.p;
        const double h = 0.05;
        const auto f1 = pathfit::step(model, z1, h, config);
        const auto f2 = pathfit::step(model, z2, h, config);
        const auto fm = pathfit::step(model, mix, h, config);
        CHECK(std::abs(fm.next.q[0] - (alpha * f1.next.q[0] + beta * f2.next.q[0])) <= 1e-10);
        CHECK(std::abs(fm.next.p[0] - (alpha * f1.next.p[0] + beta * f2.next.p[0])) <= 1e-10);
    }
}

TEST_CASE("straight-line seed residual blocks match hand evaluation", "[stepper]") {
    // For the oscillator a straight-line path has zero acceleration, so the
    // EL residual reduces to -q(t), and the start-momentum block vanishes
    // when the line is seeded with v = p.
    auto model = pathfit::harmonic_model();
    const int S = 4;
    const auto grid = pathfit::CollocationGrid::make(S);
    const double q0 = 0.8, p0 = -0.3, h = 0.2;

    pathfit::BernsteinPath path;
    path.t_start = 0.0;
    path.h = h;
    path.controls = Mat(S + 1, 1);
    for (int j = 0; j <= S; ++j) path.controls(j, 0) = q0 + grid.nodes[j] * h * p0;

    const Vec r = pathfit::assemble_residual(model, harmonic_state(q0, p0), path, grid);
    REQUIRE(r.size() == S);
    CHECK(std::abs(r[0]) <= 1e-14);
    for (int k = 0; k < S - 1; ++k) {
        const double t = grid.nodes[grid.enforced[k]] * h;
        CHECK(r[k + 1] == Catch::Approx(-(q0 + t * p0)).margin(1e-12));
    }
}

TEST_CASE("assemble_residual validates shapes", "[stepper]") {
    auto model = pathfit::harmonic_model();
    const auto grid = pathfit::CollocationGrid::make(3);
    pathfit::BernsteinPath path;
    path.t_start = 0.0;
    path.h = 0.1;
    path.controls = Mat::Zero(3, 1);  // degree 2, grid expects 3
    CHECK_THROWS_AS(pathfit::assemble_residual(model, harmonic_state(1, 0), path, grid),
                    std::invalid_argument);
}

TEST_CASE("converged steps satisfy the residual conditions", "[stepper]") {
    auto kepler = pathfit::kepler_model();
    const auto config = StepConfig::make(5);
    const auto state = pathfit::kepler_initial_state(0.5);
    const auto out = pathfit::step(kepler, state, 0.05, config);
    const Vec raw = pathfit::assemble_residual(kepler, state, out.path, config.grid);
    // The effective tolerance may sit at the round-off floor of the
    // acceleration evaluation (eps * S^2 |controls| / h^2), never above 1e-10
    // at this step size.
    CHECK(out.residual_norm <= out.residual_tolerance);
    CHECK(out.residual_tolerance <= 1e-10);
    CHECK(raw.lpNorm<Eigen::Infinity>() <= 1e-9);

    // The fitted path interpolates both step endpoints.
    CHECK((out.path.position(0.0) - state.q).lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK((out.path.position(0.05) - out.next.q).lpNorm<Eigen::Infinity>() <= 1e-14);
    CHECK(out.next.t == 0.05);
}

TEST_CASE("Newton stays under ten iterations on the benchmark systems", "[stepper]") {
    auto harmonic = pathfit::harmonic_model();
    auto kepler = pathfit::kepler_model();

    CHECK(pathfit::step(harmonic, harmonic_state(1.0, 0.0), 0.01,
                        StepConfig::make(3, Enforcement::endpoints))
              .newton_iterations <= 10);
    CHECK(pathfit::step(harmonic, harmonic_state(1.0, 0.0), 0.01, StepConfig::make(3))
              .newton_iterations <= 10);

    for (int S : {5, 7}) {
        const auto out = pathfit::step(kepler, pathfit::kepler_initial_state(0.5), 0.05,
                                       StepConfig::make(S));
        INFO("S=" << S);
        CHECK(out.newton_iterations <= 10);
    }

    const auto cheb = pathfit::step(kepler, pathfit::kepler_initial_state(0.5), 0.05,
                                    StepConfig::make(5, Enforcement::interior,
                                                     NodeFamily::chebyshev_lobatto));
    CHECK(cheb.newton_iterations <= 10);
    CHECK(cheb.residual_norm <= cheb.residual_tolerance);
    CHECK(cheb.residual_tolerance <= 1e-10);

    auto solar = pathfit::outer_solar_model();
    const auto out = pathfit::step(solar, pathfit::outer_solar_initial_state(), 50.0,
                                   StepConfig::make(6));
    CHECK(out.newton_iterations <= 10);
    CHECK(out.residual_norm <= 1e-12);
}

TEST_CASE("step is deterministic", "[stepper]") {
    auto kepler = pathfit::kepler_model();
    const auto config = StepConfig::make(6);
    const auto s = pathfit::kepler_initial_state(0.3);
    const auto a = pathfit::step(kepler, s, 0.07, config);
    const auto b = pathfit::step(kepler, s, 0.07, config);
    CHECK(a.next.q == b.next.q);
    CHECK(a.next.p == b.next.p);
    CHECK(a.newton_iterations == b.newton_iterations);
}

TEST_CASE("symplecticity defect is tiny on the benchmark steps", "[stepper]") {
    auto harmonic = pathfit::harmonic_model();
    auto kepler = pathfit::kepler_model();

    CHECK(pathfit::symplecticity_defect(harmonic, harmonic_state(0.7, -0.4), 0.01,
                                        StepConfig::make(3)) <= 1e-6);
    CHECK(pathfit::symplecticity_defect(kepler, pathfit::kepler_initial_state(0.5), 0.05,
                                        StepConfig::make(5)) <= 1e-5);
    // Near-identity map: h -> 0 proxy. The end velocity is read off the
    // stored absolute controls, so its noise scales like eps * |q| / h; h = 1e-3
    // keeps that floor near 1e-7 while the map is within 2e-3 of identity.
    CHECK(pathfit::symplecticity_defect(harmonic, harmonic_state(0.3, 0.9), 1e-3,
                                        StepConfig::make(3)) <= 1e-6);
}

TEST_CASE("step rejects invalid arguments", "[stepper]") {
    auto model = pathfit::harmonic_model();
    CHECK_THROWS_AS(pathfit::step(model, harmonic_state(1, 0), 0.0, StepConfig::make(3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(pathfit::step(model, harmonic_state(1, 0), -0.1, StepConfig::make(3)),
                    std::invalid_argument);

    PhaseState wrong;
    wrong.t = 0.0;
    wrong.q = Vec::Zero(2);
    wrong.p = Vec::Zero(2);
    CHECK_THROWS_AS(pathfit::step(model, wrong, 0.1, StepConfig::make(3)), std::invalid_argument);

    StepConfig bad_tol = StepConfig::make(3);
    bad_tol.newton_tol = 0.0;
    CHECK_THROWS_AS(pathfit::step(model, harmonic_state(1, 0), 0.1, bad_tol),
                    std::invalid_argument);
}

TEST_CASE("an unreachable iteration budget raises a convergence error", "[stepper]") {
    auto kepler = pathfit::kepler_model();
    StepConfig starved = StepConfig::make(7);
    starved.max_newton_iterations = 1;
    starved.newton_tol = 1e-15;
    try {
        pathfit::step(kepler, pathfit::kepler_initial_state(0.9), 1.5, starved);
        FAIL("expected ConvergenceError");
    } catch (const pathfit::ConvergenceError& err) {
        CHECK(err.iterations <= 1);
        CHECK(err.residual_norm > 0.0);
    }
}
