#pragma once
// Deterministic text I/O: locale-independent number formatting, the flat
// key-value config format, CSV rendering and scenario report serialization.
// Identical inputs always produce byte-identical files.
//
// Config grammar (one entry per line):
//   key = value
// Keys are dotted lowercase section paths ("model.sigma"). Values run to the
// end of the line (trimmed). '#' starts a comment; blank lines are skipped.
// Doubles are written with 17 significant digits so every value round-trips
// exactly. Piecewise rates use "v" (constant) or "v0@0,v1@t1,..." with
// strictly increasing start times.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "llob/impact_solver.hpp"
#include "llob/model.hpp"
#include "llob/pde_solver.hpp"
#include "llob/scenarios.hpp"

namespace llob::io {

/// Shortest text that still round-trips: 17 significant digits, '.' radix,
/// independent of the global locale.
std::string format_double(double v);

using KeyValues = std::map<std::string, std::string>;

/// Parse config text; malformed lines throw ValidationError naming the line.
KeyValues parse_config_text(const std::string& text);
KeyValues read_config_file(const std::string& path);
std::string serialize_config(const KeyValues& kv);

/// "v" or "v0@0,v1@t1,..." <-> PiecewiseRate.
PiecewiseRate parse_rate_spec(const std::string& spec);
std::string serialize_rate_spec(const PiecewiseRate& rate);

/// Everything one run needs, serializable as a flat config. Defaults are a
/// valid run; file values and flag overrides are layered on top. Every run
/// writes its resolved config next to its outputs.
struct RunConfig {
    // model
    double sigma = 1.0;
    double kappa = 0.0;
    double lam = 0.0;
    std::string nu = "0";
    double L = 1.0;
    // impact solver
    std::string variant = "llob";  // llob | depcan | meanrev
    bool weighted_deposition = false;
    int n_steps = 1024;
    double picard_tol = 1e-10;
    int picard_max_iter = 400;
    double damping = 1.0;
    // book grid
    double M = 10.0;
    int P = 250;
    double dT = 0.1;
    // execution profile: preset name (zero|constant|const-large|roundtrip|
    // ramp) or a path to a two-column t,m CSV
    std::string profile = "constant";
    double m0 = 0.5;
    double t_switch = 0.5;
    // run
    double T = 1.0;
    std::uint64_t seed = 1;
    double vol = 0.0;
    int snapshot_stride = 0;
    bool sources = false;
    bool mollified = false;
    bool centered = false;
    double boundary_guard = 0.9;
    std::string out_dir = ".";
    std::string format = "csv";
    // scenario
    std::string scenario_id;
    KeyValues scenario_overrides;  // config keys "scenario.set.<key>"

    KeyValues to_kv() const;
    static RunConfig from_kv(const KeyValues& kv);

    ModelParams params() const;
    SolverConfig solver() const;
    pde::GridSpec grid() const;
    KernelVariant kernel() const;
};

/// Render columns to CSV text: header line, then one row per index,
/// '\n' line ends, 17-significant-digit numbers.
std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Scenario report as pretty-printed JSON (stable key order).
std::string report_to_json(const scenarios::ScenarioReport& report);

/// report.json plus one CSV per table, written under dir (created if
/// needed).
void write_report(const scenarios::ScenarioReport& report,
                  const std::string& dir);

/// Two-column t,m CSV (optional header line) -> step profile on a uniform
/// n_steps grid over [0, T]. Sample times must start at 0 and increase.
ExecutionProfile profile_from_csv(const std::string& path, double T,
                                  int n_steps);

/// Build the profile named by cfg.profile (preset or CSV path).
ExecutionProfile make_profile(const RunConfig& cfg);

}  // namespace llob::io
