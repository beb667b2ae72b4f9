#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pathfit/integrator.hpp"
#include "pathfit/types.hpp"

namespace pathfit {

/// 17 significant digits: enough for exact double round-trips, so identical
/// runs produce bitwise-identical files.
inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Column names for a trajectory of the given configuration dimension:
/// t, q0..q{d-1}, p0..p{d-1}, h, rel_e_err, rel_l_err, newton_iters.
inline std::vector<std::string> trajectory_columns(int dim) {
    if (dim < 1) throw std::invalid_argument("trajectory_columns: dimension must be positive");
    std::vector<std::string> cols;
    cols.push_back("t");
    for (int i = 0; i < dim; ++i) cols.push_back("q" + std::to_string(i));
    for (int i = 0; i < dim; ++i) cols.push_back("p" + std::to_string(i));
    cols.push_back("h");
    cols.push_back("rel_e_err");
    cols.push_back("rel_l_err");
    cols.push_back("newton_iters");
    return cols;
}

/// One CSV row per stored step: the state reached plus the diagnostics of the
/// interval that produced it. The initial state appears only implicitly (as
/// the start of the first interval). rel_l_err is nan when the model defines
/// no angular momentum.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    if (traj.states.empty()) throw std::invalid_argument("write_trajectory_csv: empty trajectory");
    const int dim = static_cast<int>(traj.states.front().q.size());
    const auto cols = trajectory_columns(dim);
    for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (size_t i = 0; i + 1 < traj.states.size(); ++i) {
        const PhaseState& s = traj.states[i + 1];
        const StepDiagnostics& d = traj.diagnostics[i];
        out << format_g17(s.t);
        for (int k = 0; k < dim; ++k) out << "," << format_g17(s.q[k]);
        for (int k = 0; k < dim; ++k) out << "," << format_g17(s.p[k]);
        out << "," << format_g17(d.h_used);
        out << "," << format_g17(d.rel_energy_error);
        out << "," << format_g17(d.rel_angular_momentum_error);
        out << "," << d.newton_iterations << "\n";
    }
}

/// Same rows as the CSV, wrapped as {"columns": [...], "rows": [[...], ...]}.
/// NaN entries serialize as null (JSON has no NaN literal).
inline nlohmann::json trajectory_to_json(const Trajectory& traj) {
    if (traj.states.empty()) throw std::invalid_argument("trajectory_to_json: empty trajectory");
    const int dim = static_cast<int>(traj.states.front().q.size());
    nlohmann::json j;
    j["columns"] = trajectory_columns(dim);
    nlohmann::json rows = nlohmann::json::array();
    for (size_t i = 0; i + 1 < traj.states.size(); ++i) {
        const PhaseState& s = traj.states[i + 1];
        const StepDiagnostics& d = traj.diagnostics[i];
        nlohmann::json row = nlohmann::json::array();
        row.push_back(s.t);
        for (int k = 0; k < dim; ++k) row.push_back(s.q[k]);
        for (int k = 0; k < dim; ++k) row.push_back(s.p[k]);
        row.push_back(d.h_used);
        row.push_back(d.rel_energy_error);
        row.push_back(d.rel_angular_momentum_error);
        row.push_back(d.newton_iterations);
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j;
}

/// Headline numbers of one experiment. wall_seconds is reported on stdout
/// only, never in output files, which stay bitwise reproducible.
struct RunSummary {
    std::string system;
    int S = 0;
    std::string mode;
    long long steps = 0;
    double max_rel_e_err = 0.0;
    double max_rel_l_err = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;
};

inline nlohmann::json summary_to_json(const RunSummary& s) {
    nlohmann::json j;
    j["system"] = s.system;
    j["S"] = s.S;
    j["mode"] = s.mode;
    j["steps"] = s.steps;
    j["max_rel_e_err"] = s.max_rel_e_err;
    j["max_rel_l_err"] = s.max_rel_l_err;
    j["wall_seconds"] = s.wall_seconds;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
    out << contents;
    if (!out) throw std::runtime_error("write_text_file: write failed for " + path);
}

}  // namespace pathfit
