#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "pathfit/types.hpp"

namespace pathfit {

/// Mechanical system described by a Lagrangian L(q, v, t) together with the
/// partial derivatives the collocation equations consume. The three
/// invariant evaluators are optional; diagnostics skip whatever is absent.
struct LagrangianModel {
    int dim = 0;

    std::function<double(const Vec&, const Vec&, double)> value;  ///< L(q, v, t)
    std::function<Vec(const Vec&, const Vec&, double)> grad_q;    ///< dL/dq
    std::function<Vec(const Vec&, const Vec&, double)> grad_v;    ///< dL/dv
    std::function<Mat(const Vec&, const Vec&, double)> hess_vq;   ///< d2L/dv_i dq_j
    std::function<Mat(const Vec&, const Vec&, double)> hess_vv;   ///< d2L/dv_i dv_j
    std::function<Vec(const Vec&, const Vec&, double)> grad_vt;   ///< d2L/dv_i dt

    std::function<double(const Vec&, const Vec&, double)> energy;
    std::function<Vec(const Vec&, const Vec&)> angular_momentum;
    std::function<Vec(const Vec&)> linear_momentum;
};

/// Invert the Legendre transform: find v with dL/dv(q, v, t) = p.
/// Newton with the velocity Hessian as Jacobian; one update suffices when
/// dL/dv is linear in v, which covers every built-in system.
inline Vec velocity_from_momentum(const LagrangianModel& model, const Vec& q, const Vec& p,
                                  double t) {
    Vec v = Vec::Zero(model.dim);
    const double tol = 1e-13 * std::max(1.0, p.lpNorm<Eigen::Infinity>());
    double gap = 0.0;
    for (int it = 0; it < 25; ++it) {
        const Vec g = model.grad_v(q, v, t) - p;
        gap = g.lpNorm<Eigen::Infinity>();
        if (gap <= tol) return v;
        v -= model.hess_vv(q, v, t).partialPivLu().solve(g);
    }
    throw ConvergenceError("velocity_from_momentum: Legendre inversion stalled", gap, 25);
}

/// Total energy. Uses the model's closed form when present, otherwise the
/// Legendre expression v . dL/dv - L.
inline double energy_of(const LagrangianModel& model, const Vec& q, const Vec& v, double t) {
    if (model.energy) return model.energy(q, v, t);
    return model.grad_v(q, v, t).dot(v) - model.value(q, v, t);
}

/// Build a full model from a Lagrangian value alone. Every partial is a
/// central difference with the given step, second partials a nested central
/// difference, so expect accuracy around step^2 on smooth systems.
inline LagrangianModel finite_difference_model(
    std::function<double(const Vec&, const Vec&, double)> value, int dim, double step = 1e-4) {
    if (dim <= 0) throw std::invalid_argument("finite_difference_model: dim must be positive");
    if (!(step > 0.0)) throw std::invalid_argument("finite_difference_model: step must be positive");

    LagrangianModel m;
    m.dim = dim;
    m.value = value;

    auto shifted = [](const Vec& base, int i, double d) {
        Vec out = base;
        out[i] += d;
        return out;
    };

    m.grad_q = [value, dim, step, shifted](const Vec& q, const Vec& v, double t) {
        Vec g(dim);
        for (int i = 0; i < dim; ++i)
            g[i] = (value(shifted(q, i, step), v, t) - value(shifted(q, i, -step), v, t)) /
                   (2.0 * step);
        return g;
    };
    m.grad_v = [value, dim, step, shifted](const Vec& q, const Vec& v, double t) {
        Vec g(dim);
        for (int i = 0; i < dim; ++i)
            g[i] = (value(q, shifted(v, i, step), t) - value(q, shifted(v, i, -step), t)) /
                   (2.0 * step);
        return g;
    };
    m.hess_vq = [value, dim, step, shifted](const Vec& q, const Vec& v, double t) {
        Mat h(dim, dim);
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) {
                const double pp = value(shifted(q, j, step), shifted(v, i, step), t);
                const double pm = value(shifted(q, j, step), shifted(v, i, -step), t);
                const double mp = value(shifted(q, j, -step), shifted(v, i, step), t);
                const double mm = value(shifted(q, j, -step), shifted(v, i, -step), t);
                h(i, j) = (pp - pm - mp + mm) / (4.0 * step * step);
            }
        }
        return h;
    };
    m.hess_vv = [value, dim, step, shifted](const Vec& q, const Vec& v, double t) {
        Mat h(dim, dim);
        for (int i = 0; i < dim; ++i) {
            for (int j = i; j < dim; ++j) {
                double second;
                if (i == j) {
                    second = (value(q, shifted(v, i, step), t) - 2.0 * value(q, v, t) +
                              value(q, shifted(v, i, -step), t)) /
                             (step * step);
                } else {
                    const double pp = value(q, shifted(shifted(v, i, step), j, step), t);
                    const double pm = value(q, shifted(shifted(v, i, step), j, -step), t);
                    const double mp = value(q, shifted(shifted(v, i, -step), j, step), t);
                    const double mm = value(q, shifted(shifted(v, i, -step), j, -step), t);
                    second = (pp - pm - mp + mm) / (4.0 * step * step);
                }
                h(i, j) = second;
                h(j, i) = second;
            }
        }
        return h;
    };
    m.grad_vt = [value, dim, step, shifted](const Vec& q, const Vec& v, double t) {
        Vec g(dim);
        for (int i = 0; i < dim; ++i) {
            const double pp = value(q, shifted(v, i, step), t + step);
            const double pm = value(q, shifted(v, i, -step), t + step);
            const double mp = value(q, shifted(v, i, step), t - step);
            const double mm = value(q, shifted(v, i, -step), t - step);
            g[i] = (pp - pm - mp + mm) / (4.0 * step * step);
        }
        return g;
    };
    return m;
}

}  // namespace pathfit
