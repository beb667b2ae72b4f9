#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pathfit {

// ---------------------------------------------------------------------------
// Bernstein basis of degree n on [0, 1]
//
//   b_{j,n}(x) = C(n,j) x^j (1-x)^{n-j},   0 <= j <= n, zero otherwise
//
// Values come from the de Casteljau degree recursion, so no binomial
// coefficient is ever materialized and every intermediate is a convex
// combination for x in [0, 1]. The recursion is plain polynomial arithmetic
// and remains valid for arguments outside the unit interval.
// ---------------------------------------------------------------------------

/// All degree-n basis values at x: row[j] = b_{j,n}(x).
inline std::vector<double> bernstein_row(int n, double x) {
    if (n < 0) throw std::invalid_argument("bernstein_row: degree must be non-negative");
    std::vector<double> row(static_cast<std::size_t>(n) + 1, 0.0);
    row[0] = 1.0;
    const double u = 1.0 - x;
    for (int m = 1; m <= n; ++m) {
        row[m] = x * row[m - 1];
        for (int k = m - 1; k >= 1; --k) row[k] = x * row[k - 1] + u * row[k];
        row[0] *= u;
    }
    return row;
}

/// b_{j,n}(x); zero when j falls outside [0, n].
inline double bernstein_value(int j, int n, double x) {
    if (n < 0) throw std::invalid_argument("bernstein_value: degree must be non-negative");
    if (j < 0 || j > n) return 0.0;
    return bernstein_row(n, x)[static_cast<std::size_t>(j)];
}

/// First derivative via the lower-degree difference
///   b'_{j,n} = n (b_{j-1,n-1} - b_{j,n-1}).
inline double bernstein_derivative(int j, int n, double x) {
    if (n < 0) throw std::invalid_argument("bernstein_derivative: degree must be non-negative");
    if (j < 0 || j > n || n == 0) return 0.0;
    const std::vector<double> low = bernstein_row(n - 1, x);
    auto at = [&](int k) { return (k >= 0 && k <= n - 1) ? low[static_cast<std::size_t>(k)] : 0.0; };
    return static_cast<double>(n) * (at(j - 1) - at(j));
}

/// Second derivative via the degree-(n-2) second difference
///   b''_{j,n} = n (n-1) (b_{j-2,n-2} - 2 b_{j-1,n-2} + b_{j,n-2}).
inline double bernstein_second_derivative(int j, int n, double x) {
    if (n < 0) throw std::invalid_argument("bernstein_second_derivative: degree must be non-negative");
    if (j < 0 || j > n || n < 2) return 0.0;
    const std::vector<double> low = bernstein_row(n - 2, x);
    auto at = [&](int k) { return (k >= 0 && k <= n - 2) ? low[static_cast<std::size_t>(k)] : 0.0; };
    return static_cast<double>(n) * (n - 1) * (at(j - 2) - 2.0 * at(j - 1) + at(j));
}

/// Row of first derivatives, d/dx b_{j,n}(x) for j = 0..n.
inline std::vector<double> bernstein_derivative_row(int n, double x) {
    if (n < 0) throw std::invalid_argument("bernstein_derivative_row: degree must be non-negative");
    std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
    if (n == 0) return out;
    const std::vector<double> low = bernstein_row(n - 1, x);
    auto at = [&](int k) { return (k >= 0 && k <= n - 1) ? low[static_cast<std::size_t>(k)] : 0.0; };
    for (int j = 0; j <= n; ++j) out[static_cast<std::size_t>(j)] = n * (at(j - 1) - at(j));
    return out;
}

/// Row of second derivatives, d^2/dx^2 b_{j,n}(x) for j = 0..n.
inline std::vector<double> bernstein_second_derivative_row(int n, double x) {
    if (n < 0) throw std::invalid_argument("bernstein_second_derivative_row: degree must be non-negative");
    std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
    if (n < 2) return out;
    const std::vector<double> low = bernstein_row(n - 2, x);
    auto at = [&](int k) { return (k >= 0 && k <= n - 2) ? low[static_cast<std::size_t>(k)] : 0.0; };
    for (int j = 0; j <= n; ++j)
        out[static_cast<std::size_t>(j)] =
            static_cast<double>(n) * (n - 1) * (at(j - 2) - 2.0 * at(j - 1) + at(j));
    return out;
}

/// Bernstein approximant built from equally spaced samples f(j/n):
///   B_n(f)(x) = sum_j samples[j] b_{j,n}(x).
/// Interpolates f at both endpoints and converges uniformly on [0, 1] for
/// continuous f as the sample count grows.
inline double bernstein_approximant(const std::vector<double>& samples, double x) {
    if (samples.empty()) throw std::invalid_argument("bernstein_approximant: needs at least one sample");
    const int n = static_cast<int>(samples.size()) - 1;
    const std::vector<double> row = bernstein_row(n, x);
    double acc = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) acc += samples[j] * row[j];
    return acc;
}

}  // namespace pathfit
