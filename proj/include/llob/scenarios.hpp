#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "llob/impact_solver.hpp"
#include "llob/model.hpp"
#include "llob/pde_solver.hpp"

namespace llob::scenarios {

/// A named column-major table of doubles, ready for CSV export.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  /// One vector per column; all columns have equal length.
  std::vector<std::vector<double>> data;

  std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
};

/// Result record of one scenario run.
///
/// The pass verdict is a pure function of `tables` and `summary`; rerunning
/// with the same id and parameter record reproduces the report bit for bit.
struct ScenarioReport {
  std::string id;
  /// Resolved parameter record (defaults merged with overrides), as strings.
  std::map<std::string, std::string> params;
  std::vector<Table> tables;
  /// Ordered scalar summary statistics.
  std::vector<std::pair<std::string, double>> summary;
  bool pass = false;
  /// One line per verdict check, "ok:"/"FAIL:" prefixed.
  std::vector<std::string> notes;

  /// Look up a summary value by key; throws std::out_of_range if absent.
  double summary_value(const std::string& key) const;
};

/// Ordinary least squares fit diagnostics.
struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// OLS fit on the given points. Requires at least 3 points.
FitResult fit_linear(const std::vector<double>& x, const std::vector<double>& y);

/// OLS fit of log(y) against log(x); all entries must be positive.
FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Flat string key/value parameter record (same shape as a config file).
using KeyValues = std::map<std::string, std::string>;

/// Terminal-impact scaling across trading rates: per-rate trajectory fits of
/// log y against log Q plus a terminal table across the rate grid.
ScenarioReport run_sqrt_law(const ModelParams& params,
                            const std::vector<double>& rates, double T,
                            const SolverConfig& config);

/// Cost-of-execution scaling across total volume at one fixed rate, with a
/// small-rate control solve compared against the closed-form cost.
ScenarioReport run_cost_scaling(const ModelParams& params,
                                const std::vector<double>& volumes, double m0,
                                const SolverConfig& config);

/// Two-phase round trip under piecewise cancellation rates: reports solver
/// cost, the equal-rate control, the flat-book closed form, and agreement
/// with the linearized trajectory at small rate.
ScenarioReport run_manipulation(const ModelParams& base, double nu_asia,
                                double nu_ny, double t_switch, double m0,
                                double T, const SolverConfig& config);

/// Terminal impact across log grids of D (base kernel) and kappa
/// (mean-reverting kernel); verdict requires both sweeps nonincreasing and
/// the kappa endpoint consistent with the kappa-free kernel.
ScenarioReport run_monotonicity(const ModelParams& base,
                                const std::vector<double>& D_grid,
                                const std::vector<double>& kappa_grid,
                                double m0, double T,
                                const SolverConfig& config);

/// Parameter block for the reference-price tracking scenario.
struct TrackingConfig {
  std::vector<double> mc_kappas{0.1, 1.0, 5.0};
  int mc_steps = 512;
  double mc_T = 1.0;
  int n_seeds = 256;
  std::uint64_t seed = 20260818;
  std::vector<double> pde_kappas{0.1, 0.5, 2.0};
  double pde_T = 2.0;
  double pde_vol = 0.5;
  pde::GridSpec grid{6.0, 600, 1e-3};
};

/// Book simulation without a metaorder: how closely the book price follows
/// the lagged anchor, plus a Monte Carlo check of the mispricing variance.
ScenarioReport run_tracking(const ModelParams& base,
                            const TrackingConfig& config);

/// Mean-reverting kernel at small rate against the closed-form concave
/// impact curve: sup-norm deviation, short-time exponent, plateau ratio.
ScenarioReport run_arcsine(const ModelParams& params, double m0, double T,
                           const SolverConfig& config);

/// Same constant metaorder through the book simulator and the integral-
/// equation solver on matched grids; deviation must be small and shrink
/// under simultaneous refinement.
ScenarioReport run_cross_validation(const ModelParams& params, double m0,
                                    double T, const pde::GridSpec& fine,
                                    const pde::GridSpec& coarse,
                                    const SolverConfig& config);

/// Registered scenario ids, sorted.
std::vector<std::string> scenario_ids();

/// Default parameter record for a registered scenario.
/// Throws ValidationError for an unknown id.
KeyValues scenario_preset(const std::string& id);

/// Run a registered scenario with its preset parameters, optionally
/// overridden key by key. Unknown ids and unknown keys throw
/// ValidationError.
ScenarioReport run_scenario(const std::string& id,
                            const KeyValues& overrides = {});

}  // namespace llob::scenarios
