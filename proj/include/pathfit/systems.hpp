#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "pathfit/lagrangian.hpp"
#include "pathfit/types.hpp"

namespace pathfit {

// ---------------------------------------------------------------------------
// Harmonic oscillator, unit mass and frequency: L = v^2/2 - q^2/2.
// ---------------------------------------------------------------------------

inline LagrangianModel harmonic_model() {
    LagrangianModel m;
    m.dim = 1;
    m.value = [](const Vec& q, const Vec& v, double) {
        return 0.5 * v[0] * v[0] - 0.5 * q[0] * q[0];
    };
    m.grad_q = [](const Vec& q, const Vec&, double) { return Vec(-q); };
    m.grad_v = [](const Vec&, const Vec& v, double) { return v; };
    m.hess_vq = [](const Vec&, const Vec&, double) { return Mat::Zero(1, 1); };
    m.hess_vv = [](const Vec&, const Vec&, double) { return Mat::Identity(1, 1); };
    m.grad_vt = [](const Vec&, const Vec&, double) { return Vec::Zero(1); };
    m.energy = [](const Vec& q, const Vec& v, double) {
        return 0.5 * v[0] * v[0] + 0.5 * q[0] * q[0];
    };
    return m;
}

// ---------------------------------------------------------------------------
// Planar Kepler problem, unit mass and gravitational parameter:
//   L = |v|^2/2 + 1/|q|
// Orbits with semi-major axis 1 have period 2 pi; energy is -1/2 on them.
// ---------------------------------------------------------------------------

inline LagrangianModel kepler_model() {
    LagrangianModel m;
    m.dim = 2;
    auto checked_radius = [](const Vec& q) {
        const double r = q.norm();
        if (r < 1e-300) throw SingularConfigurationError("kepler: |q| = 0");
        return r;
    };
    m.value = [checked_radius](const Vec& q, const Vec& v, double) {
        return 0.5 * v.squaredNorm() + 1.0 / checked_radius(q);
    };
    m.grad_q = [checked_radius](const Vec& q, const Vec&, double) {
        const double r = checked_radius(q);
        return Vec(-q / (r * r * r));
    };
    m.grad_v = [](const Vec&, const Vec& v, double) { return v; };
    m.hess_vq = [](const Vec&, const Vec&, double) { return Mat::Zero(2, 2); };
    m.hess_vv = [](const Vec&, const Vec&, double) { return Mat::Identity(2, 2); };
    m.grad_vt = [](const Vec&, const Vec&, double) { return Vec::Zero(2); };
    m.energy = [checked_radius](const Vec& q, const Vec& v, double) {
        return 0.5 * v.squaredNorm() - 1.0 / checked_radius(q);
    };
    m.angular_momentum = [](const Vec& q, const Vec& v) {
        Vec l(1);
        l[0] = q[0] * v[1] - q[1] * v[0];
        return l;
    };
    return m;
}

/// Perihelion state of the eccentricity-eps orbit with semi-major axis 1:
///   q = (1 - eps, 0),  v = (0, sqrt((1 + eps) / (1 - eps))).
inline PhaseState kepler_initial_state(double eccentricity) {
    if (!(eccentricity >= 0.0 && eccentricity < 1.0))
        throw std::invalid_argument("kepler_initial_state: eccentricity must lie in [0, 1)");
    PhaseState s;
    s.t = 0.0;
    s.q = Vec::Zero(2);
    s.p = Vec::Zero(2);
    s.q[0] = 1.0 - eccentricity;
    s.p[1] = std::sqrt((1.0 + eccentricity) / (1.0 - eccentricity));
    return s;
}

// ---------------------------------------------------------------------------
// Outer solar system: sun (with the inner planets lumped in), Jupiter,
// Saturn, Uranus, Neptune, Pluto. Units: AU, days, solar masses.
// Coordinates are flattened body-major: body i owns entries [3i, 3i+3).
// ---------------------------------------------------------------------------

namespace solar {

inline constexpr int body_count = 6;
inline constexpr double gravitational_constant = 2.95912208286e-4;

inline constexpr std::array<double, body_count> masses = {
    1.00000597682,     // sun + inner planets
    9.54786104043e-4,  // jupiter
    2.85583733151e-4,  // saturn
    4.37273164546e-5,  // uranus
    5.17759138449e-5,  // neptune
    1.0 / 1.3e8,       // pluto
};

inline constexpr std::array<std::array<double, 3>, body_count> initial_positions = {{
    {0.0, 0.0, 0.0},
    {-3.5023653, -3.8169847, -1.5507963},
    {9.0755314, -3.0458353, -1.6483708},
    {8.3101420, -16.2901086, -7.2521278},
    {11.4707666, -25.7294829, -10.8169456},
    {-15.5387357, -25.2225594, -3.1902382},
}};

inline constexpr std::array<std::array<double, 3>, body_count> initial_velocities = {{
    {0.0, 0.0, 0.0},
    {0.00565429, -0.00412490, -0.00190589},
    {0.00168318, 0.00483525, 0.00192462},
    {0.00354178, 0.00137102, 0.00055029},
    {0.00288930, 0.00114527, 0.00039677},
    {0.00276725, -0.00170702, -0.00136504},
}};

}  // namespace solar

/// N-body Lagrangian over the six bodies above:
///   L = sum_i m_i |v_i|^2 / 2 + G sum_{i<k} m_i m_k / |q_i - q_k|
inline LagrangianModel outer_solar_model() {
    using solar::body_count;
    using solar::gravitational_constant;
    using solar::masses;

    static constexpr int dim = 3 * body_count;

    auto pair_distance = [](const Vec& q, int i, int k) {
        const double dx = q[3 * i] - q[3 * k];
        const double dy = q[3 * i + 1] - q[3 * k + 1];
        const double dz = q[3 * i + 2] - q[3 * k + 2];
        const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (r < 1e-300) throw SingularConfigurationError("outer_solar: coincident bodies");
        return r;
    };

    LagrangianModel m;
    m.dim = dim;
    m.value = [pair_distance](const Vec& q, const Vec& v, double) {
        double kinetic = 0.0;
        for (int i = 0; i < body_count; ++i)
            kinetic += 0.5 * masses[i] * v.segment<3>(3 * i).squaredNorm();
        double coupling = 0.0;
        for (int i = 0; i < body_count; ++i)
            for (int k = i + 1; k < body_count; ++k)
                coupling += masses[i] * masses[k] / pair_distance(q, i, k);
        return kinetic + gravitational_constant * coupling;
    };
    m.grad_q = [pair_distance](const Vec& q, const Vec&, double) {
        Vec g = Vec::Zero(dim);
        for (int i = 0; i < body_count; ++i) {
            for (int k = i + 1; k < body_count; ++k) {
                const double r = pair_distance(q, i, k);
                const double w = gravitational_constant * masses[i] * masses[k] / (r * r * r);
                for (int c = 0; c < 3; ++c) {
                    const double d = q[3 * i + c] - q[3 * k + c];
                    g[3 * i + c] -= w * d;
                    g[3 * k + c] += w * d;
                }
            }
        }
        return g;
    };
    m.grad_v = [](const Vec&, const Vec& v, double) {
        Vec p(dim);
        for (int i = 0; i < body_count; ++i) p.segment<3>(3 * i) = masses[i] * v.segment<3>(3 * i);
        return p;
    };
    m.hess_vq = [](const Vec&, const Vec&, double) { return Mat::Zero(dim, dim); };
    m.hess_vv = [](const Vec&, const Vec&, double) {
        Mat h = Mat::Zero(dim, dim);
        for (int i = 0; i < body_count; ++i)
            for (int c = 0; c < 3; ++c) h(3 * i + c, 3 * i + c) = masses[i];
        return h;
    };
    m.grad_vt = [](const Vec&, const Vec&, double) { return Vec::Zero(dim); };
    m.energy = [pair_distance](const Vec& q, const Vec& v, double) {
        double kinetic = 0.0;
        for (int i = 0; i < body_count; ++i)
            kinetic += 0.5 * masses[i] * v.segment<3>(3 * i).squaredNorm();
        double coupling = 0.0;
        for (int i = 0; i < body_count; ++i)
            for (int k = i + 1; k < body_count; ++k)
                coupling += masses[i] * masses[k] / pair_distance(q, i, k);
        return kinetic - gravitational_constant * coupling;
    };
    m.angular_momentum = [](const Vec& q, const Vec& v) {
        Vec l = Vec::Zero(3);
        for (int i = 0; i < body_count; ++i) {
            const auto qi = q.segment<3>(3 * i);
            const auto vi = v.segment<3>(3 * i);
            l[0] += masses[i] * (qi[1] * vi[2] - qi[2] * vi[1]);
            l[1] += masses[i] * (qi[2] * vi[0] - qi[0] * vi[2]);
            l[2] += masses[i] * (qi[0] * vi[1] - qi[1] * vi[0]);
        }
        return l;
    };
    m.linear_momentum = [](const Vec& v) {
        Vec p = Vec::Zero(3);
        for (int i = 0; i < body_count; ++i) p += masses[i] * v.segment<3>(3 * i);
        return p;
    };
    return m;
}

/// Published epoch state of the six bodies; momenta are m_i v_i.
inline PhaseState outer_solar_initial_state() {
    PhaseState s;
    s.t = 0.0;
    s.q = Vec::Zero(3 * solar::body_count);
    s.p = Vec::Zero(3 * solar::body_count);
    for (int i = 0; i < solar::body_count; ++i) {
        for (int c = 0; c < 3; ++c) {
            s.q[3 * i + c] = solar::initial_positions[i][c];
            s.p[3 * i + c] = solar::masses[i] * solar::initial_velocities[i][c];
        }
    }
    return s;
}

}  // namespace pathfit
