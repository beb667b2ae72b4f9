#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pathfit/lagrangian.hpp"
#include "pathfit/stepper.hpp"
#include "pathfit/types.hpp"

namespace pathfit {

/// Conserved-quantity values frozen at the start of a run; later states are
/// measured against these. A scale of max(|value|, tiny) guards the division
/// when a reference happens to vanish.
struct InvariantReference {
    double energy = 0.0;
    double energy_scale = 1.0;
    bool has_angular = false;
    Vec angular_momentum;
    double angular_scale = 1.0;
    bool has_linear = false;
    Vec linear_momentum;
    double linear_scale = 1.0;
};

inline InvariantReference reference_invariants(const LagrangianModel& model,
                                               const PhaseState& state) {
    const Vec v = velocity_from_momentum(model, state.q, state.p, state.t);
    const double tiny = std::numeric_limits<double>::min();
    InvariantReference ref;
    ref.energy = energy_of(model, state.q, v, state.t);
    ref.energy_scale = std::max(std::abs(ref.energy), tiny);
    if (model.angular_momentum) {
        ref.has_angular = true;
        ref.angular_momentum = model.angular_momentum(state.q, v);
        ref.angular_scale = std::max(ref.angular_momentum.norm(), tiny);
    }
    if (model.linear_momentum) {
        ref.has_linear = true;
        ref.linear_momentum = model.linear_momentum(v);
        ref.linear_scale = std::max(ref.linear_momentum.norm(), tiny);
    }
    return ref;
}

/// Per-interval record attached to a trajectory. With storage decimation an
/// interval spans several raw steps; the error fields then hold the window
/// maxima, h_used the size of the last step, newton_iterations the window
/// maximum. Momentum errors are NaN when the model has no evaluator.
struct StepDiagnostics {
    double h_used = 0.0;
    double rel_energy_error = 0.0;
    double rel_angular_momentum_error = std::numeric_limits<double>::quiet_NaN();
    double rel_linear_momentum_error = std::numeric_limits<double>::quiet_NaN();
    int newton_iterations = 0;
};

/// Relative departures of the state's conserved quantities from the frozen
/// reference values (norm-compared for vector invariants).
inline StepDiagnostics diagnostics(const LagrangianModel& model, const PhaseState& state,
                                   const InvariantReference& ref) {
    const Vec v = velocity_from_momentum(model, state.q, state.p, state.t);
    StepDiagnostics d;
    d.rel_energy_error = std::abs(energy_of(model, state.q, v, state.t) - ref.energy) /
                         ref.energy_scale;
    if (ref.has_angular && model.angular_momentum)
        d.rel_angular_momentum_error =
            (model.angular_momentum(state.q, v) - ref.angular_momentum).norm() /
            ref.angular_scale;
    if (ref.has_linear && model.linear_momentum)
        d.rel_linear_momentum_error =
            (model.linear_momentum(v) - ref.linear_momentum).norm() / ref.linear_scale;
    return d;
}

struct Trajectory {
    std::vector<PhaseState> states;            ///< stored states, times strictly increasing
    std::vector<StepDiagnostics> diagnostics;  ///< one per stored interval
    long long total_steps = 0;                 ///< raw steps taken, decimated or not
    double max_rel_energy_error = 0.0;         ///< maxima over every raw step
    double max_rel_angular_momentum_error = std::numeric_limits<double>::quiet_NaN();
    double max_rel_linear_momentum_error = std::numeric_limits<double>::quiet_NaN();
};

class IntegrationError : public std::runtime_error {
  public:
    enum class Kind {
        step_failure,  ///< the nonlinear solve failed and no retry is possible
        stiffness,     ///< adaptive step size fell below h_min
        step_limit,    ///< adaptive run exceeded the configured step budget
    };

    IntegrationError(Kind k, const std::string& message, Trajectory partial_trajectory)
        : std::runtime_error(message), kind(k), partial(std::move(partial_trajectory)) {}

    Kind kind;
    Trajectory partial;  ///< everything stored before the failure
};

/// Step-size controller bounds for the energy-error-adaptive driver. The
/// criterion is global: every accepted state must keep |E - E0|/|E0| within
/// energy_tol. max_steps = 0 means unbounded.
struct AdaptiveConfig {
    double energy_tol = 1e-7;
    double h_init = 1e-2;
    double h_min = 1e-9;
    double h_max = 1.0;
    double shrink = 0.5;
    int grow_patience = 5;
    double grow = 1.3;
    long long max_steps = 0;
    double increment_fraction = 0.01;  ///< band fraction one step may newly consume
};

namespace detail {

/// Window accumulator shared by both drivers: tracks per-step diagnostics,
/// folds them into trajectory-level maxima, and emits one aggregated record
/// per stored state.
struct RecordingSink {
    Trajectory traj;
    const InvariantReference ref;
    int keep_every;
    int window = 0;
    StepDiagnostics pending;

    RecordingSink(const LagrangianModel& model, const PhaseState& initial, int keep)
        : ref(reference_invariants(model, initial)), keep_every(keep) {
        traj.states.push_back(initial);
        if (ref.has_angular) traj.max_rel_angular_momentum_error = 0.0;
        if (ref.has_linear) traj.max_rel_linear_momentum_error = 0.0;
        reset_window();
    }

    void reset_window() {
        window = 0;
        pending = StepDiagnostics{};
        if (ref.has_angular) pending.rel_angular_momentum_error = 0.0;
        if (ref.has_linear) pending.rel_linear_momentum_error = 0.0;
    }

    /// Fold one raw step in; store the state when the window is full or the
    /// caller forces a flush (run end, failure).
    void record(const PhaseState& next, int newton_iterations, double h,
                const StepDiagnostics& fresh, bool force_store) {
        ++traj.total_steps;
        ++window;
        pending.h_used = h;
        pending.rel_energy_error = std::max(pending.rel_energy_error, fresh.rel_energy_error);
        pending.newton_iterations = std::max(pending.newton_iterations, newton_iterations);
        traj.max_rel_energy_error =
            std::max(traj.max_rel_energy_error, fresh.rel_energy_error);
        if (ref.has_angular) {
            pending.rel_angular_momentum_error = std::max(pending.rel_angular_momentum_error,
                                                          fresh.rel_angular_momentum_error);
            traj.max_rel_angular_momentum_error = std::max(
                traj.max_rel_angular_momentum_error, fresh.rel_angular_momentum_error);
        }
        if (ref.has_linear) {
            pending.rel_linear_momentum_error = std::max(pending.rel_linear_momentum_error,
                                                         fresh.rel_linear_momentum_error);
            traj.max_rel_linear_momentum_error = std::max(traj.max_rel_linear_momentum_error,
                                                          fresh.rel_linear_momentum_error);
        }
        if (window >= keep_every || force_store) {
            traj.states.push_back(next);
            traj.diagnostics.push_back(pending);
            reset_window();
        }
    }
};

}  // namespace detail

/// March n_steps equal steps of size h. On a step failure the completed
/// prefix is attached to the thrown IntegrationError. keep_every thins the
/// stored states; diagnostics are still evaluated on every raw step.
inline Trajectory integrate_fixed(const LagrangianModel& model, const PhaseState& initial,
                                  double h, long long n_steps, const StepConfig& config,
                                  int keep_every = 1) {
    if (n_steps < 1) throw std::invalid_argument("integrate_fixed: need at least one step");
    if (!(h > 0.0)) throw std::invalid_argument("integrate_fixed: step size must be positive");
    if (keep_every < 1) throw std::invalid_argument("integrate_fixed: keep_every must be >= 1");

    detail::RecordingSink sink(model, initial, keep_every);
    PhaseState current = initial;
    for (long long i = 1; i <= n_steps; ++i) {
        StepOutcome out;
        try {
            out = step(model, current, h, config);
        } catch (const ConvergenceError& e) {
            throw IntegrationError(IntegrationError::Kind::step_failure,
                                   std::string("integrate_fixed: step ") + std::to_string(i) +
                                       " failed: " + e.what(),
                                   std::move(sink.traj));
        } catch (const SingularConfigurationError& e) {
            throw IntegrationError(IntegrationError::Kind::step_failure,
                                   std::string("integrate_fixed: step ") + std::to_string(i) +
                                       " failed: " + e.what(),
                                   std::move(sink.traj));
        }
        const StepDiagnostics fresh = diagnostics(model, out.next, sink.ref);
        sink.record(out.next, out.newton_iterations, h, fresh, i == n_steps);
        current = out.next;
    }
    return sink.traj;
}

/// March from initial.t to t_end keeping the global relative energy error
/// within config.energy_tol. A violating (or non-converging) trial step is
/// retried with h * shrink; grow_patience consecutive accepts scale h by
/// grow, capped at h_max; the last step is clamped to land on t_end. The
/// step size falling below h_min is reported as stiffness failure.
///
/// A trial step is also rejected when it would raise the energy error by more
/// than increment_fraction * energy_tol over the current state's. The band
/// criterion alone deadlocks on a rising branch of the energy oscillation
/// (entering a close approach): large steps bank nearly the whole band, after
/// which no step size recovers, since the banked offset is frozen into the
/// state and shrinking h only raises the 1/h evaluation noise. Rejection
/// restores the pre-step state, so capping the per-step increment keeps the
/// banked total of the whole branch under the band instead.
inline Trajectory integrate_adaptive(const LagrangianModel& model, const PhaseState& initial,
                                     double t_end, const AdaptiveConfig& adaptive,
                                     const StepConfig& config, int keep_every = 1) {
    if (!(t_end > initial.t))
        throw std::invalid_argument("integrate_adaptive: t_end must exceed the initial time");
    if (!(adaptive.h_min > 0.0 && adaptive.h_min <= adaptive.h_init &&
          adaptive.h_init <= adaptive.h_max))
        throw std::invalid_argument("integrate_adaptive: need 0 < h_min <= h_init <= h_max");
    if (!(adaptive.energy_tol > 0.0))
        throw std::invalid_argument("integrate_adaptive: energy_tol must be positive");
    if (!(adaptive.shrink > 0.0 && adaptive.shrink < 1.0))
        throw std::invalid_argument("integrate_adaptive: shrink must lie in (0, 1)");
    if (!(adaptive.grow >= 1.0))
        throw std::invalid_argument("integrate_adaptive: grow must be >= 1");
    if (adaptive.grow_patience < 1)
        throw std::invalid_argument("integrate_adaptive: grow_patience must be >= 1");
    if (!(adaptive.increment_fraction > 0.0 && adaptive.increment_fraction <= 1.0))
        throw std::invalid_argument("integrate_adaptive: increment_fraction must be in (0, 1]");
    if (keep_every < 1)
        throw std::invalid_argument("integrate_adaptive: keep_every must be >= 1");

    detail::RecordingSink sink(model, initial, keep_every);
    PhaseState current = initial;
    double h = adaptive.h_init;
    int streak = 0;
    double banked = 0.0;  // relative energy error of the current state
    // Margin under which the remaining span counts as consumed.
    const double span_eps = 1e-12 * std::max(1.0, std::abs(t_end));

    while (t_end - current.t > span_eps) {
        if (adaptive.max_steps > 0 && sink.traj.total_steps >= adaptive.max_steps) {
            if (sink.window > 0) {
                sink.traj.states.push_back(current);
                sink.traj.diagnostics.push_back(sink.pending);
            }
            throw IntegrationError(IntegrationError::Kind::step_limit,
                                   "integrate_adaptive: step budget exhausted",
                                   std::move(sink.traj));
        }

        const double remaining = t_end - current.t;
        const double h_try = std::min(h, remaining);
        const bool final_step = h_try >= remaining - span_eps;

        bool accepted = false;
        StepOutcome out;
        StepDiagnostics fresh;
        std::string failure;
        try {
            out = step(model, current, h_try, config);
            fresh = diagnostics(model, out.next, sink.ref);
            const double cap = adaptive.increment_fraction * adaptive.energy_tol;
            accepted = fresh.rel_energy_error <= adaptive.energy_tol &&
                       fresh.rel_energy_error <= banked + cap;
        } catch (const ConvergenceError& e) {
            failure = e.what();
        } catch (const SingularConfigurationError& e) {
            failure = e.what();
        }

        if (!accepted) {
            streak = 0;
            h = h_try * adaptive.shrink;
            if (h < adaptive.h_min) {
                if (sink.window > 0) {
                    sink.traj.states.push_back(current);
                    sink.traj.diagnostics.push_back(sink.pending);
                }
                std::string message =
                    "integrate_adaptive: step size fell below h_min at t = " +
                    std::to_string(current.t);
                if (!failure.empty()) message += " (last solver failure: " + failure + ")";
                throw IntegrationError(IntegrationError::Kind::stiffness, message,
                                       std::move(sink.traj));
            }
            continue;
        }

        sink.record(out.next, out.newton_iterations, h_try, fresh, final_step);
        current = out.next;
        banked = fresh.rel_energy_error;
        if (++streak >= adaptive.grow_patience) {
            h = std::min(h * adaptive.grow, adaptive.h_max);
            streak = 0;
        }
    }
    return sink.traj;
}

}  // namespace pathfit
