#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "pathfit/integrator.hpp"
#include "pathfit/lagrangian.hpp"
#include "pathfit/types.hpp"

namespace pathfit {

/// Exact two-body state at time t for the unit-semi-major-axis orbit started
/// at perihelion (energy -1/2, angular momentum sqrt(1 - eps^2), period 2 pi).
/// The eccentric anomaly solves E - eps sin E = M by Newton, bisection-guarded
/// on [0, 2 pi] where the left side is strictly increasing, to 1e-14.
///
/// This oracle shares no code with the variational stepper; it exists to
/// measure the stepper's error.
inline PhaseState kepler_exact_state(double eps, double t) {
    if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("kepler_exact_state: eccentricity must lie in [0, 1)");

    const double two_pi = 2.0 * M_PI;
    double mean = std::fmod(t, two_pi);
    if (mean < 0.0) mean += two_pi;

    double lo = 0.0, hi = two_pi;
    double E = mean + eps * std::sin(mean);
    for (int it = 0; it < 100; ++it) {
        const double f = E - eps * std::sin(E) - mean;
        if (std::abs(f) <= 1e-14) break;
        (f > 0.0 ? hi : lo) = E;
        const double newton = E - f / (1.0 - eps * std::cos(E));
        E = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
    }

    const double b = std::sqrt(1.0 - eps * eps);
    const double cosE = std::cos(E), sinE = std::sin(E);
    const double Edot = 1.0 / (1.0 - eps * cosE);

    PhaseState s;
    s.t = t;
    s.q = Vec(2);
    s.q << cosE - eps, b * sinE;
    s.p = Vec(2);
    s.p << -sinE * Edot, b * cosE * Edot;
    return s;
}

/// One classical explicit fourth-order step of Hamilton's equations
/// qdot = v(q, p), pdot = dL/dq evaluated at that velocity. Baseline method
/// for drift comparisons; no structure preservation is claimed.
inline PhaseState rk4_step(const LagrangianModel& model, const PhaseState& state, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("rk4_step: step size must be positive");
    if (state.q.size() != model.dim || state.p.size() != model.dim)
        throw std::invalid_argument("rk4_step: state dimension does not match the model");

    struct Slope {
        Vec dq, dp;
    };
    auto slope = [&](double t, const Vec& q, const Vec& p) -> Slope {
        const Vec v = velocity_from_momentum(model, q, p, t);
        return {v, model.grad_q(q, v, t)};
    };

    const double t = state.t;
    const Slope k1 = slope(t, state.q, state.p);
    const Slope k2 = slope(t + 0.5 * h, state.q + 0.5 * h * k1.dq, state.p + 0.5 * h * k1.dp);
    const Slope k3 = slope(t + 0.5 * h, state.q + 0.5 * h * k2.dq, state.p + 0.5 * h * k2.dp);
    const Slope k4 = slope(t + h, state.q + h * k3.dq, state.p + h * k3.dp);

    PhaseState next;
    next.t = t + h;
    next.q = state.q + (h / 6.0) * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
    next.p = state.p + (h / 6.0) * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    return next;
}

/// Fixed-step baseline run with the same trajectory bookkeeping as the
/// variational drivers (newton_iterations is 0 for every explicit step).
inline Trajectory rk4_integrate(const LagrangianModel& model, const PhaseState& initial, double h,
                                long long n_steps, int keep_every = 1) {
    if (n_steps < 1) throw std::invalid_argument("rk4_integrate: need at least one step");
    if (!(h > 0.0)) throw std::invalid_argument("rk4_integrate: step size must be positive");
    if (keep_every < 1) throw std::invalid_argument("rk4_integrate: keep_every must be >= 1");

    detail::RecordingSink sink(model, initial, keep_every);
    PhaseState current = initial;
    for (long long i = 1; i <= n_steps; ++i) {
        PhaseState next;
        try {
            next = rk4_step(model, current, h);
        } catch (const SingularConfigurationError& e) {
            throw IntegrationError(IntegrationError::Kind::step_failure,
                                   std::string("rk4_integrate: step ") + std::to_string(i) +
                                       " failed: " + e.what(),
                                   std::move(sink.traj));
        }
        const StepDiagnostics fresh = diagnostics(model, next, sink.ref);
        sink.record(next, 0, h, fresh, i == n_steps);
        current = next;
    }
    return sink.traj;
}

}  // namespace pathfit
