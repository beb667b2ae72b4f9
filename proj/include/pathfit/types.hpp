#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace pathfit {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Point of the discrete flow: time, configuration, conjugate momentum.
struct PhaseState {
    double t = 0.0;
    Vec q;
    Vec p;
};

/// A Lagrangian was evaluated at a configuration where it is undefined
/// (two-body collision, vanishing separation).
class SingularConfigurationError : public std::runtime_error {
  public:
    explicit SingularConfigurationError(const std::string& what)
        : std::runtime_error(what) {}
};

/// A Newton solve stopped above its residual tolerance.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what), residual_norm(residual), iterations(iterations) {}

    double residual_norm;  ///< max-norm of the last residual seen
    int iterations;        ///< Newton updates performed before giving up
};

}  // namespace pathfit
