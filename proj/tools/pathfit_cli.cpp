// Experiment runner: reproduces the oscillator, two-body and outer-solar
// benchmark runs as CSV/JSON files plus a one-line JSON summary on stdout.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pathfit/experiment.hpp"
#include "pathfit/io.hpp"

namespace {

struct RunFlags {
    std::string system = "kepler";
    double eps = 0.5;
    int S = 5;
    std::string enforcement = "internal";
    std::string nodes = "uniform";
    std::string mode = "fixed";
    double h = 0.05;
    double energy_tol = 1e-7;
    double h_init = 1e-3;
    double h_min = 1e-9;
    double h_max = 0.5;
    long long max_steps = 0;
    double increment_fraction = 0.01;
    double periods = 0.0;
    double t_end = 0.0;
    int keep_every = 1;
    std::string format = "csv";
    std::string output;
};

pathfit::SystemKind parse_system(const std::string& name) {
    if (name == "harmonic") return pathfit::SystemKind::harmonic;
    if (name == "kepler") return pathfit::SystemKind::kepler;
    if (name == "outer-solar") return pathfit::SystemKind::outer_solar;
    throw CLI::ValidationError("--system", "unknown system '" + name + "'");
}

pathfit::ExperimentConfig build_config(const RunFlags& f, const CLI::App& cmd) {
    pathfit::ExperimentConfig c;
    c.system = parse_system(f.system);
    c.eps = f.eps;
    c.S = f.S;
    c.enforcement = f.enforcement == "endpoints" ? pathfit::Enforcement::endpoints
                                                 : pathfit::Enforcement::interior;
    c.nodes = f.nodes == "chebyshev-lobatto" ? pathfit::NodeFamily::chebyshev_lobatto
                                             : pathfit::NodeFamily::uniform;
    c.mode = f.mode == "adaptive" ? pathfit::RunMode::adaptive : pathfit::RunMode::fixed;
    c.h = f.h;
    c.adaptive.energy_tol = f.energy_tol;
    c.adaptive.h_init = f.h_init;
    c.adaptive.h_min = f.h_min;
    c.adaptive.h_max = f.h_max;
    c.adaptive.max_steps = f.max_steps;
    c.adaptive.increment_fraction = f.increment_fraction;
    c.keep_every = f.keep_every;

    const bool adaptive_flags = cmd.count("--energy-tol") || cmd.count("--h-init") ||
                                cmd.count("--h-min") || cmd.count("--h-max");
    if (c.mode == pathfit::RunMode::fixed && adaptive_flags)
        throw CLI::ValidationError("--mode", "fixed mode takes --h, not the adaptive block");
    if (c.mode == pathfit::RunMode::adaptive && cmd.count("--h"))
        throw CLI::ValidationError("--mode", "adaptive mode takes the adaptive block, not --h");

    if (cmd.count("--t-end") && cmd.count("--periods"))
        throw CLI::ValidationError("--t-end", "give exactly one of --t-end / --periods");
    c.t_end = f.t_end;
    c.n_periods = f.periods;
    if (!cmd.count("--t-end") && !cmd.count("--periods")) c.n_periods = 1.0;
    return c;
}

void add_run_flags(CLI::App& cmd, RunFlags& f, bool with_mode_block,
                   bool with_output_block) {
    cmd.set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
    cmd.option_defaults()->always_capture_default();
    cmd.add_option("--system", f.system, "System: harmonic, kepler, outer-solar")
        ->check(CLI::IsMember({"harmonic", "kepler", "outer-solar"}));
    cmd.add_option("--eps", f.eps, "Orbit eccentricity (kepler only)");
    cmd.add_option("--S", f.S, "Polynomial degree of the fitted path");
    cmd.add_option("--enforcement", f.enforcement, "Residual node placement")
        ->check(CLI::IsMember({"internal", "endpoints"}));
    cmd.add_option("--nodes", f.nodes, "Collocation node family")
        ->check(CLI::IsMember({"uniform", "chebyshev-lobatto"}));
    if (with_mode_block) {
        cmd.add_option("--mode", f.mode, "Stepping mode")
            ->check(CLI::IsMember({"fixed", "adaptive"}));
        cmd.add_option("--h", f.h, "Fixed-mode step size");
    }
    cmd.add_option("--energy-tol", f.energy_tol, "Adaptive relative energy tolerance");
    cmd.add_option("--h-init", f.h_init, "Adaptive initial step");
    cmd.add_option("--h-min", f.h_min, "Adaptive smallest step before stiffness failure");
    cmd.add_option("--h-max", f.h_max, "Adaptive largest step");
    cmd.add_option("--max-steps", f.max_steps, "Adaptive step budget (0 = unbounded)");
    cmd.add_option("--increment-fraction", f.increment_fraction,
                   "Band fraction one adaptive step may newly consume");
    if (with_mode_block) {
        cmd.add_option("--periods", f.periods, "Run length in orbital periods");
        cmd.add_option("--t-end", f.t_end, "Run length as an absolute end time");
    }
    if (with_output_block) {
        cmd.add_option("--keep-every", f.keep_every, "Store every k-th step");
        cmd.add_option("--format", f.format, "Trajectory file format")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd.add_option("--output,-o", f.output, "Trajectory file path (default derived)");
    }
}

int do_run(const RunFlags& flags, const CLI::App& cmd) {
    const pathfit::ExperimentConfig config = build_config(flags, cmd);
    std::string output = flags.output;
    if (output.empty()) output = flags.format == "json" ? "trajectory.json" : "trajectory.csv";

    auto write_trajectory = [&](const pathfit::Trajectory& traj) {
        if (flags.format == "json") {
            pathfit::write_text_file(output, pathfit::trajectory_to_json(traj).dump(2) + "\n");
        } else {
            std::ostringstream text;
            pathfit::write_trajectory_csv(text, traj);
            pathfit::write_text_file(output, text.str());
        }
    };

    try {
        const auto result = pathfit::run_experiment(config);
        write_trajectory(result.trajectory);
        std::cout << pathfit::summary_to_json(result.summary).dump() << "\n";
        return 0;
    } catch (const pathfit::IntegrationError& e) {
        if (e.partial.states.size() > 1) write_trajectory(e.partial);
        std::cerr << "run: " << e.what() << " (partial trajectory in " << output << ")\n";
        std::cout << pathfit::summary_to_json(pathfit::summarize(config, e.partial, 0.0)).dump()
                  << "\n";
        return 3;
    }
}

int do_table1(const RunFlags& flags, const std::vector<int>& degrees,
              const std::string& output) {
    pathfit::AdaptiveConfig adaptive;
    adaptive.h_init = flags.h_init;
    adaptive.h_min = flags.h_min;
    adaptive.h_max = flags.h_max;
    adaptive.max_steps = flags.max_steps;
    adaptive.increment_fraction = flags.increment_fraction;

    const auto enforcement = flags.enforcement == "endpoints" ? pathfit::Enforcement::endpoints
                                                              : pathfit::Enforcement::interior;
    const auto nodes = flags.nodes == "chebyshev-lobatto"
                           ? pathfit::NodeFamily::chebyshev_lobatto
                           : pathfit::NodeFamily::uniform;
    const auto rows =
        pathfit::step_count_scan(flags.eps, flags.energy_tol, degrees, adaptive, enforcement,
                                 nodes);

    std::ostringstream csv;
    csv << "S,steps,completed\n";
    std::printf("%4s %10s\n", "S", "steps");
    for (const auto& row : rows) {
        if (row.completed) {
            std::printf("%4d %10lld\n", row.S, row.steps);
        } else {
            const std::string cell = ">" + std::to_string(row.steps);
            std::printf("%4d %10s\n", row.S, cell.c_str());
        }
        csv << row.S << "," << row.steps << "," << (row.completed ? 1 : 0) << "\n";
    }
    pathfit::write_text_file(output, csv.str());
    return 0;
}

int do_sweep(const RunFlags& flags, const CLI::App& cmd, const std::string& param_name,
             const std::vector<double>& values, const std::string& output) {
    const pathfit::ExperimentConfig base = build_config(flags, cmd);
    pathfit::SweepParameter param;
    if (param_name == "S")
        param = pathfit::SweepParameter::S;
    else if (param_name == "h")
        param = pathfit::SweepParameter::h;
    else if (param_name == "energy_tol")
        param = pathfit::SweepParameter::energy_tol;
    else if (param_name == "eps")
        param = pathfit::SweepParameter::eps;
    else
        throw CLI::ValidationError("--param", "unknown parameter '" + param_name + "'");

    const auto rows = pathfit::sweep_parameter(base, param, values);

    std::ostringstream csv;
    csv << "param,value,system,S,mode,steps,max_rel_e_err,max_rel_l_err,completed\n";
    std::printf("%16s %10s %14s %14s\n", param_name.c_str(), "steps", "max_rel_e_err",
                "max_rel_l_err");
    for (const auto& row : rows) {
        const auto& s = row.summary;
        std::printf("%16s %10lld %14.3e %14.3e%s\n", pathfit::format_g17(row.value).c_str(),
                    s.steps, s.max_rel_e_err, s.max_rel_l_err, row.completed ? "" : "  FAILED");
        csv << param_name << "," << pathfit::format_g17(row.value) << "," << s.system << ","
            << s.S << "," << s.mode << "," << s.steps << ","
            << pathfit::format_g17(s.max_rel_e_err) << ","
            << pathfit::format_g17(s.max_rel_l_err) << "," << (row.completed ? 1 : 0) << "\n";
    }
    pathfit::write_text_file(output, csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational integrator benchmarks: fitted-path stepping experiments"};
    app.require_subcommand(1);
    // Flat key=value config, keys prefixed by the subcommand (run.S=7);
    // command-line flags override file values.
    app.set_config("--config", "", "Read flag values from a key=value file");

    RunFlags run_flags;
    CLI::App* run_cmd = app.add_subcommand("run", "Integrate one configuration");
    add_run_flags(*run_cmd, run_flags, /*with_mode_block=*/true, /*with_output_block=*/true);

    RunFlags table_flags;
    table_flags.eps = 0.99;
    table_flags.max_steps = 10000;
    std::vector<int> table_degrees = {5, 6, 7, 8, 9, 10, 11, 12};
    std::string table_output = "table1.csv";
    CLI::App* table_cmd =
        app.add_subcommand("table1", "Adaptive step counts for one orbit across degrees");
    add_run_flags(*table_cmd, table_flags, /*with_mode_block=*/false,
                  /*with_output_block=*/false);
    table_cmd->add_option("--S-list", table_degrees, "Degrees to scan")->delimiter(',');
    table_cmd->add_option("--output,-o", table_output, "CSV path")->capture_default_str();

    RunFlags sweep_flags;
    std::string sweep_param = "S";
    std::vector<double> sweep_values;
    std::string sweep_output = "sweep.csv";
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Re-run one configuration across parameter values");
    add_run_flags(*sweep_cmd, sweep_flags, /*with_mode_block=*/true,
                  /*with_output_block=*/false);
    sweep_cmd->add_option("--param", sweep_param, "Swept parameter")
        ->check(CLI::IsMember({"S", "h", "energy_tol", "eps"}))
        ->capture_default_str();
    sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")
        ->delimiter(',')
        ->required();
    sweep_cmd->add_option("--output,-o", sweep_output, "CSV path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // normalize CLI11's per-error exit codes to the documented usage-error code
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run_cmd->parsed()) return do_run(run_flags, *run_cmd);
        if (table_cmd->parsed()) return do_table1(table_flags, table_degrees, table_output);
        if (sweep_cmd->parsed())
            return do_sweep(sweep_flags, *sweep_cmd, sweep_param, sweep_values, sweep_output);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
