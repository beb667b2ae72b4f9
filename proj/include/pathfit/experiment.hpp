#pragma once

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathfit/integrator.hpp"
#include "pathfit/io.hpp"
#include "pathfit/systems.hpp"

namespace pathfit {

enum class SystemKind { harmonic, kepler, outer_solar };
enum class RunMode { fixed, adaptive };
enum class OutputFormat { csv, json };

inline std::string system_name(SystemKind k) {
    switch (k) {
        case SystemKind::harmonic: return "harmonic";
        case SystemKind::kepler: return "kepler";
        case SystemKind::outer_solar: return "outer-solar";
    }
    throw std::logic_error("system_name: unknown system");
}

inline std::string mode_name(RunMode m) {
    return m == RunMode::fixed ? "fixed" : "adaptive";
}

/// Orbital period used to translate --periods into a time span. The two
/// closed-form systems have period 2 pi (unit frequency; unit semi-major
/// axis). The N-body system has no single period: callers must give t_end.
inline double period_of(SystemKind k) {
    if (k == SystemKind::outer_solar)
        throw std::invalid_argument(
            "period_of: the N-body system has no closed-form period; specify t_end");
    return 2.0 * M_PI;
}

/// Everything needed to reproduce one run. Exactly one of t_end / n_periods
/// must be positive; in fixed mode h must be positive.
struct ExperimentConfig {
    SystemKind system = SystemKind::kepler;
    double eps = 0.5;  ///< eccentricity, two-body system only
    int S = 5;
    Enforcement enforcement = Enforcement::interior;
    NodeFamily nodes = NodeFamily::uniform;
    RunMode mode = RunMode::fixed;
    double h = 0.05;           ///< fixed-mode step size
    AdaptiveConfig adaptive;   ///< adaptive-mode controller bounds
    double t_end = 0.0;
    double n_periods = 0.0;
    int keep_every = 1;
};

struct SystemSetup {
    LagrangianModel model;
    PhaseState initial;
};

inline SystemSetup make_system(const ExperimentConfig& config) {
    SystemSetup s;
    switch (config.system) {
        case SystemKind::harmonic: {
            s.model = harmonic_model();
            s.initial.t = 0.0;
            s.initial.q = Vec::Constant(1, 1.0);
            s.initial.p = Vec::Constant(1, 0.0);
            return s;
        }
        case SystemKind::kepler: {
            s.model = kepler_model();
            s.initial = kepler_initial_state(config.eps);
            return s;
        }
        case SystemKind::outer_solar: {
            s.model = outer_solar_model();
            s.initial = outer_solar_initial_state();
            return s;
        }
    }
    throw std::logic_error("make_system: unknown system");
}

inline double resolve_t_end(const ExperimentConfig& config) {
    const bool has_t = config.t_end > 0.0;
    const bool has_p = config.n_periods > 0.0;
    if (has_t == has_p)
        throw std::invalid_argument(
            "resolve_t_end: exactly one of t_end / n_periods must be positive");
    return has_t ? config.t_end : config.n_periods * period_of(config.system);
}

struct ExperimentResult {
    Trajectory trajectory;
    RunSummary summary;
};

inline RunSummary summarize(const ExperimentConfig& config, const Trajectory& traj,
                            double wall_seconds) {
    RunSummary s;
    s.system = system_name(config.system);
    s.S = config.S;
    s.mode = mode_name(config.mode);
    s.steps = traj.total_steps;
    s.max_rel_e_err = traj.max_rel_energy_error;
    s.max_rel_l_err = traj.max_rel_angular_momentum_error;
    s.wall_seconds = wall_seconds;
    return s;
}

/// Run one configured experiment. Integration failures propagate as
/// IntegrationError (the partial trajectory rides along); configuration
/// problems throw invalid_argument before any stepping.
inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    const SystemSetup sys = make_system(config);
    const double t_end = resolve_t_end(config);
    const StepConfig step_config = StepConfig::make(config.S, config.enforcement, config.nodes);

    const auto t0 = std::chrono::steady_clock::now();
    Trajectory traj;
    if (config.mode == RunMode::fixed) {
        if (!(config.h > 0.0))
            throw std::invalid_argument("run_experiment: fixed mode needs h > 0");
        const double span = t_end - sys.initial.t;
        const double ratio = span / config.h;
        const long long rounded = std::llround(ratio);
        const long long n_steps = (rounded >= 1 && std::abs(ratio - static_cast<double>(rounded)) <
                                                       1e-9 * std::max(1.0, ratio))
                                      ? rounded
                                      : static_cast<long long>(std::ceil(ratio));
        traj = integrate_fixed(sys.model, sys.initial, config.h, std::max(n_steps, 1LL),
                               step_config, config.keep_every);
    } else {
        traj = integrate_adaptive(sys.model, sys.initial, t_end, config.adaptive, step_config,
                                  config.keep_every);
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double wall = std::chrono::duration<double>(t1 - t0).count();

    ExperimentResult result;
    result.summary = summarize(config, traj, wall);
    result.trajectory = std::move(traj);
    return result;
}

/// One adaptive period of the two-body problem per requested degree,
/// reporting the accepted-step count. A controller failure (stiffness, step
/// budget) marks the row incomplete instead of aborting the scan.
struct ScanRow {
    int S = 0;
    long long steps = 0;
    bool completed = false;
    std::string error;
};

inline std::vector<ScanRow> step_count_scan(double eps, double energy_tol,
                                            const std::vector<int>& degrees,
                                            AdaptiveConfig adaptive,
                                            Enforcement enforcement = Enforcement::interior,
                                            NodeFamily nodes = NodeFamily::uniform) {
    if (degrees.empty()) throw std::invalid_argument("step_count_scan: empty degree list");
    auto model = kepler_model();
    const PhaseState initial = kepler_initial_state(eps);
    adaptive.energy_tol = energy_tol;

    std::vector<ScanRow> rows;
    rows.reserve(degrees.size());
    for (int S : degrees) {
        ScanRow row;
        row.S = S;
        try {
            const auto traj = integrate_adaptive(model, initial, 2.0 * M_PI, adaptive,
                                                 StepConfig::make(S, enforcement, nodes),
                                                 /*keep_every=*/1 << 20);
            row.steps = traj.total_steps;
            row.completed = true;
        } catch (const IntegrationError& e) {
            row.steps = e.partial.total_steps;
            row.completed = false;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

enum class SweepParameter { S, h, energy_tol, eps };

inline std::string sweep_parameter_name(SweepParameter p) {
    switch (p) {
        case SweepParameter::S: return "S";
        case SweepParameter::h: return "h";
        case SweepParameter::energy_tol: return "energy_tol";
        case SweepParameter::eps: return "eps";
    }
    throw std::logic_error("sweep_parameter_name: unknown parameter");
}

struct SweepRow {
    double value = 0.0;
    bool completed = false;
    RunSummary summary;
    std::string error;
};

/// Re-run the base configuration once per value of the swept parameter, in
/// the given order. Integration failures are recorded per row (with the
/// partial run's counts) and the sweep continues.
inline std::vector<SweepRow> sweep_parameter(const ExperimentConfig& base, SweepParameter param,
                                             const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("sweep_parameter: empty value list");

    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (double value : values) {
        ExperimentConfig config = base;
        switch (param) {
            case SweepParameter::S: {
                const long long s = std::llround(value);
                if (std::abs(value - static_cast<double>(s)) > 1e-9)
                    throw std::invalid_argument("sweep_parameter: S values must be integers");
                config.S = static_cast<int>(s);
                break;
            }
            case SweepParameter::h:
                config.h = value;
                break;
            case SweepParameter::energy_tol:
                config.adaptive.energy_tol = value;
                break;
            case SweepParameter::eps:
                config.eps = value;
                break;
        }

        SweepRow row;
        row.value = value;
        try {
            row.summary = run_experiment(config).summary;
            row.completed = true;
        } catch (const IntegrationError& e) {
            row.summary = summarize(config, e.partial, 0.0);
            row.completed = false;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace pathfit
