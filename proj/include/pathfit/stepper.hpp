#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pathfit/lagrangian.hpp"
#include "pathfit/path.hpp"
#include "pathfit/types.hpp"

namespace pathfit {

/// Per-step solver settings. The grid fixes the polynomial degree S; the
/// solve then has S unknown controls against one momentum condition plus
/// S-1 enforced residual conditions.
struct StepConfig {
    CollocationGrid grid = CollocationGrid::make(5);
    double newton_tol = 1e-12;
    int max_newton_iterations = 50;

    int degree() const { return grid.degree(); }

    static StepConfig make(int degree, Enforcement mode = Enforcement::interior,
                           NodeFamily family = NodeFamily::uniform) {
        StepConfig c;
        c.grid = CollocationGrid::make(degree, mode, family);
        return c;
    }
};

/// Result of one accepted step.
struct StepOutcome {
    PhaseState next;
    BernsteinPath path;       ///< the fitted polynomial covering [t, t+h]
    int newton_iterations = 0;
    double residual_norm = 0.0;       ///< preconditioned max-norm at acceptance
    double residual_tolerance = 0.0;  ///< effective tolerance the solve met
};

/// Stacked step conditions for a candidate path, in the raw model units:
/// block 0 is the start-momentum mismatch dL/dv(q(t_k), v(t_k), t_k) - p_k,
/// the following blocks are the Euler-Lagrange residuals at the enforced
/// nodes in grid order. Size is S * dim.
inline Vec assemble_residual(const LagrangianModel& model, const PhaseState& state,
                             const BernsteinPath& path, const CollocationGrid& grid) {
    validate_grid(grid);
    const int d = model.dim;
    const int S = grid.degree();
    if (path.degree() != S) throw std::invalid_argument("assemble_residual: path/grid degree mismatch");
    if (path.dim() != d) throw std::invalid_argument("assemble_residual: path/model dimension mismatch");

    Vec out(S * d);
    const double t0 = path.t_start;
    out.head(d) = model.grad_v(path.position(t0), path.velocity(t0), t0) - state.p;
    for (int k = 0; k < S - 1; ++k) {
        const double t = t0 + grid.nodes[grid.enforced[k]] * path.h;
        out.segment((k + 1) * d, d) = el_residual(model, path, t);
    }
    return out;
}

namespace detail {

/// Residual evaluation hot path: basis rows pre-tabulated at the nodes, all
/// blocks left-multiplied by the inverse velocity Hessian of the start state
/// so momentum rows carry velocity units and residual rows acceleration
/// units. Masses spanning many orders of magnitude then share one absolute
/// tolerance.
struct StepSystem {
    const LagrangianModel& model;
    const CollocationGrid& grid;
    CollocationBasis basis;
    Eigen::PartialPivLU<Mat> precond;
    double t0 = 0.0;
    double h = 0.0;
    Vec p0;

    StepSystem(const LagrangianModel& m, const CollocationGrid& g, const PhaseState& state,
               const Vec& v0, double step)
        : model(m), grid(g), basis(tabulate_basis(g)), t0(state.t), h(step), p0(state.p) {
        precond.compute(model.hess_vv(state.q, v0, state.t));
    }

    Vec operator()(const Mat& controls) const {
        const int d = model.dim;
        const int S = grid.degree();
        Vec out(S * d);
        {
            const Vec q = controls.transpose() * basis.value.row(0).transpose();
            const Vec v = controls.transpose() * basis.first.row(0).transpose() / h;
            out.head(d) = precond.solve(model.grad_v(q, v, t0) - p0);
        }
        for (int k = 0; k < S - 1; ++k) {
            const int idx = grid.enforced[k];
            const double t = t0 + grid.nodes[idx] * h;
            const Vec q = controls.transpose() * basis.value.row(idx).transpose();
            const Vec v = controls.transpose() * basis.first.row(idx).transpose() / h;
            const Vec a = controls.transpose() * basis.second.row(idx).transpose() / (h * h);
            const Vec el = model.grad_q(q, v, t) - (model.hess_vq(q, v, t) * v +
                                                    model.hess_vv(q, v, t) * a +
                                                    model.grad_vt(q, v, t));
            out.segment((k + 1) * d, d) = precond.solve(el);
        }
        return out;
    }

    /// Round-off scale of the residual evaluation. The acceleration at each
    /// enforced node is a signed combination of controls divided by h^2, so
    /// its absolute accumulation |C|^T |b''| / h^2 bounds the cancellation
    /// error (per unit eps) that no solver can push the residual below.
    double roundoff_scale(const Mat& controls) const {
        const Mat abs_controls = controls.cwiseAbs();
        double scale = 0.0;
        for (int k = 0; k < grid.degree() - 1; ++k) {
            const int idx = grid.enforced[k];
            const Vec accum =
                abs_controls.transpose() * basis.second.row(idx).transpose().cwiseAbs() / (h * h);
            scale = std::max(scale, accum.lpNorm<Eigen::Infinity>());
        }
        return scale;
    }
};

inline double safe_norm(const Vec& r) {
    const double n = r.lpNorm<Eigen::Infinity>();
    return std::isfinite(n) ? n : std::numeric_limits<double>::infinity();
}

}  // namespace detail

/// Advance one step of size h from the given state.
///
/// The unknowns are the controls x^1..x^S of the trial path (x^0 is pinned to
/// q_k). Newton-type iteration: the Jacobian comes from forward differences
/// of the assembled residual with sqrt(eps) * max(1, |u|) column steps, is
/// reused while the residual contracts strongly, and each update is halved up
/// to eight times until the residual norm drops. Convergence requires the
/// preconditioned residual to fall below newton_tol * max(1, seed norm), with
/// a floor at the round-off level of the evaluation itself: the acceleration
/// term is a cancelling sum of controls over h^2, so for small h the residual
/// bottoms out near eps * |C|^T |b''| / h^2 while the controls are already
/// machine-accurate (the same 1/h^2 factor divides their sensitivity).
inline StepOutcome step(const LagrangianModel& model, const PhaseState& state, double h,
                        const StepConfig& config) {
    if (!(h > 0.0)) throw std::invalid_argument("step: step size must be positive");
    if (state.q.size() != model.dim || state.p.size() != model.dim)
        throw std::invalid_argument("step: state dimension does not match the model");
    if (!(config.newton_tol > 0.0)) throw std::invalid_argument("step: newton_tol must be positive");
    if (config.max_newton_iterations < 1)
        throw std::invalid_argument("step: max_newton_iterations must be at least 1");
    validate_grid(config.grid);

    const int d = model.dim;
    const int S = config.degree();
    const int n = S * d;

    const Vec v0 = velocity_from_momentum(model, state.q, state.p, state.t);
    const detail::StepSystem system(model, config.grid, state, v0, h);

    // Straight-line seed x^j = q_k + c_j h v_k.
    Mat controls(S + 1, d);
    for (int j = 0; j <= S; ++j)
        controls.row(j) = (state.q + config.grid.nodes[j] * h * v0).transpose();

    auto entry = [&](int k) -> double& { return controls(1 + k / d, k % d); };

    Vec residual = system(controls);
    double norm = detail::safe_norm(residual);
    if (!std::isfinite(norm))
        throw ConvergenceError("step: residual not finite at the straight-line seed", norm, 0);
    const double eps = std::numeric_limits<double>::epsilon();
    const double floor = 8.0 * eps * (system.roundoff_scale(controls) + norm + 1.0);
    const double tol = std::max(config.newton_tol * std::max(1.0, norm), floor);

    Mat jacobian(n, n);
    Eigen::PartialPivLU<Mat> lu;
    bool jacobian_fresh = false;
    bool want_refresh = true;
    int iterations = 0;
    const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());

    while (norm > tol) {
        if (iterations >= config.max_newton_iterations)
            throw ConvergenceError("step: Newton hit the iteration limit", norm, iterations);

        if (want_refresh) {
            for (int k = 0; k < n; ++k) {
                double& u = entry(k);
                const double saved = u;
                const double delta = sqrt_eps * std::max(1.0, std::abs(saved));
                u = saved + delta;
                Vec shifted;
                try {
                    shifted = system(controls);
                } catch (const SingularConfigurationError&) {
                    u = saved;
                    throw ConvergenceError("step: Jacobian probe hit a singular configuration",
                                           norm, iterations);
                }
                u = saved;
                jacobian.col(k) = (shifted - residual) / delta;
            }
            lu.compute(jacobian);
            jacobian_fresh = true;
            want_refresh = false;
        }

        const Vec delta = lu.solve(-residual);
        double lambda = 1.0;
        bool accepted = false;
        Mat trial_controls;
        Vec trial_residual;
        double trial_norm = 0.0;
        for (int halvings = 0; halvings <= 8; ++halvings) {
            trial_controls = controls;
            for (int k = 0; k < n; ++k)
                trial_controls(1 + k / d, k % d) += lambda * delta[k];
            bool valid = true;
            try {
                trial_residual = system(trial_controls);
                trial_norm = detail::safe_norm(trial_residual);
            } catch (const SingularConfigurationError&) {
                valid = false;
            }
            if (valid && trial_norm < norm) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }

        if (!accepted) {
            if (!jacobian_fresh) {
                // The reused Jacobian is too stale to make progress; rebuild
                // at the current iterate and retry.
                want_refresh = true;
                continue;
            }
            // A freshly factored Jacobian could not reduce the residual even
            // with the smallest damped update: give up, the caller may retry
            // with a smaller h.
            throw ConvergenceError("step: damped Newton stalled", norm, iterations);
        }

        const double contraction = trial_norm / norm;
        controls.swap(trial_controls);
        residual.swap(trial_residual);
        norm = trial_norm;
        ++iterations;
        jacobian_fresh = false;
        want_refresh = (lambda < 1.0) || (contraction > 0.3);
    }

    StepOutcome out;
    out.path.t_start = state.t;
    out.path.h = h;
    out.path.controls = controls;
    out.newton_iterations = iterations;
    out.residual_norm = norm;
    out.residual_tolerance = tol;
    out.next.t = state.t + h;
    out.next.q = controls.row(S).transpose();
    {
        const Vec v_end = controls.transpose() * system.basis.first.row(S).transpose() / h;
        out.next.p = model.grad_v(out.next.q, v_end, out.next.t);
    }
    return out;
}

/// Max-norm departure of the step map from symplecticity: assemble the
/// Jacobian D of (q, p) -> (q', p') by central differences and return
/// max |D^T Omega D - Omega|. Zero for the exact flow of any Lagrangian
/// system; for the discrete map this measures solver and differencing noise.
inline double symplecticity_defect(const LagrangianModel& model, const PhaseState& state, double h,
                                   const StepConfig& config) {
    const int d = model.dim;
    const int n = 2 * d;

    auto flow = [&](const Vec& z) {
        PhaseState s;
        s.t = state.t;
        s.q = z.head(d);
        s.p = z.tail(d);
        const StepOutcome out = step(model, s, h, config);
        Vec w(n);
        w << out.next.q, out.next.p;
        return w;
    };

    Vec z0(n);
    z0 << state.q, state.p;

    const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
    Mat jac(n, n);
    for (int i = 0; i < n; ++i) {
        const double delta = cbrt_eps * std::max(1.0, std::abs(z0[i]));
        Vec zp = z0, zm = z0;
        zp[i] += delta;
        zm[i] -= delta;
        jac.col(i) = (flow(zp) - flow(zm)) / (2.0 * delta);
    }

    Mat omega = Mat::Zero(n, n);
    omega.topRightCorner(d, d) = Mat::Identity(d, d);
    omega.bottomLeftCorner(d, d) = -Mat::Identity(d, d);

    return (jac.transpose() * omega * jac - omega).cwiseAbs().maxCoeff();
}

}  // namespace pathfit
