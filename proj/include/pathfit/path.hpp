#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pathfit/bernstein.hpp"
#include "pathfit/lagrangian.hpp"
#include "pathfit/types.hpp"

namespace pathfit {

/// Which nodes carry an Euler-Lagrange condition. A step with degree S has
/// S unknown controls and one momentum condition, leaving S-1 residual
/// conditions to place on the grid.
enum class Enforcement {
    interior,   ///< nodes 1..S-1, the general scheme
    endpoints,  ///< S-1 spread nodes including both ends; at S=3 exactly {0, 3}
};

/// How the S+1 nodes are distributed over [0, 1].
enum class NodeFamily {
    uniform,
    chebyshev_lobatto,
};

/// Collocation layout for one step: node locations c_0 = 0 < ... < c_S = 1
/// in step-relative time, plus the indices of the enforced nodes.
struct CollocationGrid {
    std::vector<double> nodes;
    std::vector<int> enforced;

    int degree() const { return static_cast<int>(nodes.size()) - 1; }

    static CollocationGrid make(int degree, Enforcement mode = Enforcement::interior,
                                NodeFamily family = NodeFamily::uniform);
};

inline std::vector<double> uniform_nodes(int degree) {
    if (degree < 2) throw std::invalid_argument("uniform_nodes: degree must be at least 2");
    std::vector<double> c(degree + 1);
    for (int j = 0; j <= degree; ++j) c[j] = static_cast<double>(j) / degree;
    c.front() = 0.0;
    c.back() = 1.0;
    return c;
}

inline std::vector<double> chebyshev_lobatto_nodes(int degree) {
    if (degree < 2) throw std::invalid_argument("chebyshev_lobatto_nodes: degree must be at least 2");
    std::vector<double> c(degree + 1);
    const double pi = 3.14159265358979323846;
    for (int j = 0; j <= degree; ++j) c[j] = 0.5 * (1.0 - std::cos(pi * j / degree));
    c.front() = 0.0;
    c.back() = 1.0;
    return c;
}

inline std::vector<int> interior_enforcement(int degree) {
    if (degree < 2) throw std::invalid_argument("interior_enforcement: degree must be at least 2");
    std::vector<int> e;
    for (int j = 1; j <= degree - 1; ++j) e.push_back(j);
    return e;
}

/// S-1 enforcement indices containing both endpoints, spread as evenly as
/// the integer grid allows: round(i * S / (S-2)) for i = 0..S-2.
inline std::vector<int> endpoint_enforcement(int degree) {
    if (degree < 3)
        throw std::invalid_argument("endpoint_enforcement: degree must be at least 3");
    std::vector<int> e;
    for (int i = 0; i <= degree - 2; ++i)
        e.push_back(static_cast<int>(std::llround(double(i) * degree / (degree - 2))));
    return e;
}

inline CollocationGrid CollocationGrid::make(int degree, Enforcement mode, NodeFamily family) {
    CollocationGrid g;
    g.nodes = family == NodeFamily::uniform ? uniform_nodes(degree) : chebyshev_lobatto_nodes(degree);
    g.enforced =
        mode == Enforcement::interior ? interior_enforcement(degree) : endpoint_enforcement(degree);
    return g;
}

/// Grid sanity: endpoints pinned, strictly increasing nodes, enforcement
/// indices valid, strictly increasing, and exactly S-1 of them.
inline void validate_grid(const CollocationGrid& grid) {
    const int S = grid.degree();
    if (S < 2) throw std::invalid_argument("collocation grid: degree must be at least 2");
    if (grid.nodes.front() != 0.0 || grid.nodes.back() != 1.0)
        throw std::invalid_argument("collocation grid: endpoints must sit at 0 and 1");
    for (int j = 1; j <= S; ++j)
        if (!(grid.nodes[j] > grid.nodes[j - 1]))
            throw std::invalid_argument("collocation grid: nodes must increase strictly");
    if (static_cast<int>(grid.enforced.size()) != S - 1)
        throw std::invalid_argument("collocation grid: need exactly degree-1 enforced nodes");
    int prev = -1;
    for (int idx : grid.enforced) {
        if (idx <= prev || idx < 0 || idx > S)
            throw std::invalid_argument("collocation grid: enforcement indices out of order or range");
        prev = idx;
    }
}

/// Polynomial trial path of one step, stored as Bernstein controls.
/// Row j of controls is the control point x^j; the path interpolates row 0
/// at t_start and the last row at t_start + h.
struct BernsteinPath {
    double t_start = 0.0;
    double h = 0.0;
    Mat controls;  // (S+1) x dim

    int degree() const { return static_cast<int>(controls.rows()) - 1; }
    int dim() const { return static_cast<int>(controls.cols()); }

    double local_time(double t) const { return (t - t_start) / h; }

    Vec position(double t) const {
        check();
        const std::vector<double> row = bernstein_row(degree(), local_time(t));
        return weighted(row);
    }

    /// dq/dt; the 1/h factor converts the step-relative derivative.
    Vec velocity(double t) const {
        check();
        const std::vector<double> row = bernstein_derivative_row(degree(), local_time(t));
        return weighted(row) / h;
    }

    /// d2q/dt2 with the matching 1/h^2 factor.
    Vec acceleration(double t) const {
        check();
        const std::vector<double> row = bernstein_second_derivative_row(degree(), local_time(t));
        return weighted(row) / (h * h);
    }

  private:
    void check() const {
        if (!(h > 0.0)) throw std::invalid_argument("BernsteinPath: step size must be positive");
        if (controls.rows() < 1) throw std::invalid_argument("BernsteinPath: no controls");
    }

    Vec weighted(const std::vector<double>& row) const {
        Vec out = Vec::Zero(controls.cols());
        for (int j = 0; j < controls.rows(); ++j) out += row[j] * controls.row(j).transpose();
        return out;
    }
};

/// Euler-Lagrange residual of the model along the path at absolute time t:
///   dL/dq - d/dt(dL/dv)
/// with the total time derivative expanded through the chain rule, so the
/// path must supply position, velocity, and acceleration.
inline Vec el_residual(const LagrangianModel& model, const BernsteinPath& path, double t) {
    const Vec q = path.position(t);
    const Vec v = path.velocity(t);
    const Vec a = path.acceleration(t);
    return model.grad_q(q, v, t) -
           (model.hess_vq(q, v, t) * v + model.hess_vv(q, v, t) * a + model.grad_vt(q, v, t));
}

/// Basis rows tabulated at the grid nodes, so per-node path evaluation inside
/// the solver is three dot products instead of three recursions.
/// value(i, j) = b_{j,S}(c_i); first and second hold the step-relative
/// derivative rows (the 1/h factors are applied by the consumer).
struct CollocationBasis {
    Mat value;
    Mat first;
    Mat second;
};

inline CollocationBasis tabulate_basis(const CollocationGrid& grid) {
    validate_grid(grid);
    const int S = grid.degree();
    CollocationBasis b;
    b.value = Mat(S + 1, S + 1);
    b.first = Mat(S + 1, S + 1);
    b.second = Mat(S + 1, S + 1);
    for (int i = 0; i <= S; ++i) {
        const std::vector<double> v0 = bernstein_row(S, grid.nodes[i]);
        const std::vector<double> v1 = bernstein_derivative_row(S, grid.nodes[i]);
        const std::vector<double> v2 = bernstein_second_derivative_row(S, grid.nodes[i]);
        for (int j = 0; j <= S; ++j) {
            b.value(i, j) = v0[j];
            b.first(i, j) = v1[j];
            b.second(i, j) = v2[j];
        }
    }
    return b;
}

}  // namespace pathfit
