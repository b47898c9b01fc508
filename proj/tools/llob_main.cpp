// Command-line front end: impact (integral-equation solver), book (direct
// density simulation), scenario (registered experiment suites) and analytic
// (closed-form evaluations). Every run is a pure function of its arguments,
// config file and seed; rerunning writes byte-identical files.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "llob/analytic.hpp"
#include "llob/io.hpp"
#include "llob/scenarios.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path,
                    "flat key-value config file");
    cmd->add_option("--out", args.out_dir,
                    "output directory (default: $LLOB_OUTPUT_DIR or '.')");
    cmd->add_option("--set", args.sets,
                    "override a single config key, e.g. --set model.L=2");
}

llob::io::RunConfig resolve_config(const CommonArgs& args) {
    llob::io::KeyValues kv = llob::io::RunConfig{}.to_kv();
    if (const char* env = std::getenv("LLOB_OUTPUT_DIR"))
        kv["run.out_dir"] = env;
    if (!args.config_path.empty())
        for (const auto& [k, v] : llob::io::read_config_file(args.config_path))
            kv[k] = v;
    for (const std::string& s : args.sets) {
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw llob::ValidationError("--set expects key=value, got '" + s +
                                        "'");
        kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    if (!args.out_dir.empty()) kv["run.out_dir"] = args.out_dir;
    return llob::io::RunConfig::from_kv(kv);
}

void write_resolved(const llob::io::RunConfig& cfg, const std::string& dir) {
    llob::io::write_text_file(
        (std::filesystem::path(dir) / "resolved.cfg").string(),
        llob::io::serialize_config(cfg.to_kv()));
}

int cmd_impact(const CommonArgs& args) {
    auto cfg = resolve_config(args);
    auto profile = llob::io::make_profile(cfg);
    auto traj = llob::solve_impact(profile, cfg.kernel(), cfg.solver());

    const int n = traj.n_steps();
    auto grid_profile = llob::resample_to(profile, n);
    auto path = (cfg.vol > 0.0)
                    ? llob::brownian_path(cfg.T, n, cfg.vol, cfg.seed)
                    : llob::ReferencePath::zero(cfg.T, n);
    traj = llob::to_original_frame(traj, path, cfg.kappa);

    std::vector<double> t(n + 1), m(n + 1), Q(n + 1);
    for (int k = 0; k <= n; ++k) {
        t[k] = traj.t(k);
        m[k] = grid_profile.rate(k);
        Q[k] = grid_profile.cumulative_volume(k);
    }
    const std::string csv = llob::io::render_csv(
        {"t", "y", "x", "m", "Q", "cost"},
        {t, traj.y(), traj.x(), m, Q, traj.cost_running()});
    llob::io::write_text_file(
        (std::filesystem::path(cfg.out_dir) / "trajectory.csv").string(), csv);
    write_resolved(cfg, cfg.out_dir);
    std::fprintf(stderr, "wrote %s/trajectory.csv (%d nodes)\n",
                 cfg.out_dir.c_str(), n + 1);
    return kExitOk;
}

int cmd_book(const CommonArgs& args, const std::string& preset) {
    CommonArgs effective = args;
    if (!preset.empty()) {
        if (preset != "relax")
            throw llob::ValidationError("unknown book preset: '" + preset +
                                        "' (known: relax)");
        // Slow relaxation of a steep linear book toward its stationary
        // profile under mean reversion; snapshots the final state.
        std::vector<std::string> base = {
            "model.sigma=1",     "model.kappa=0.05", "model.L=50",
            "grid.M=10",         "grid.P=250",       "grid.dT=0.1",
            "run.T=150",         "profile.kind=zero", "run.vol=0",
            "run.snapshot_stride=1500"};
        effective.sets.insert(effective.sets.begin(), base.begin(),
                              base.end());
    }
    auto cfg = resolve_config(effective);
    const int n = static_cast<int>(std::llround(cfg.T / cfg.dT));
    if (n < 1 || std::abs(n * cfg.dT - cfg.T) > 1e-9 * std::max(1.0, cfg.T))
        throw llob::ValidationError("grid.dT must divide run.T");

    llob::io::RunConfig prof_cfg = cfg;
    prof_cfg.n_steps = n;
    auto profile = llob::io::make_profile(prof_cfg);
    auto path = (cfg.vol > 0.0)
                    ? llob::brownian_path(cfg.T, n, cfg.vol, cfg.seed)
                    : llob::ReferencePath::zero(cfg.T, n);
    auto params = cfg.params();
    auto init = llob::pde::make_linear_book(cfg.grid(), cfg.L);
    llob::pde::SimOptions opt;
    opt.sources = cfg.sources;
    opt.mollified_injection = cfg.mollified;
    opt.centered_advection = cfg.centered;
    opt.snapshot_stride = cfg.snapshot_stride;
    opt.boundary_guard = cfg.boundary_guard;

    auto run = llob::pde::simulate(init, params, profile, path, opt);

    const std::string csv = llob::io::render_csv(
        {"t", "p", "B", "f"}, {run.t, run.price, run.B, run.f});
    std::filesystem::path base(cfg.out_dir);
    llob::io::write_text_file((base / "price.csv").string(), csv);
    for (std::size_t i = 0; i < run.snapshots.size(); ++i) {
        const auto& s = run.snapshots[i];
        std::vector<double> xs(s.P() + 1);
        for (int j = 0; j <= s.P(); ++j) xs[j] = s.x(j);
        char name[32];
        std::snprintf(name, sizeof(name), "book_%04zu.csv", i);
        llob::io::write_text_file((base / name).string(),
                                  llob::io::render_csv({"x", "phi"},
                                                       {xs, s.phi()}));
    }
    write_resolved(cfg, cfg.out_dir);
    std::fprintf(stderr, "wrote %s/price.csv (%d steps, %zu snapshots)\n",
                 cfg.out_dir.c_str(), n, run.snapshots.size());
    return kExitOk;
}

int run_one_scenario(const std::string& id,
                     const llob::scenarios::KeyValues& overrides,
                     const std::string& out_root) {
    auto report = llob::scenarios::run_scenario(id, overrides);
    const std::string dir =
        (std::filesystem::path(out_root) / report.id).string();
    llob::io::write_report(report, dir);
    llob::io::write_text_file(
        (std::filesystem::path(dir) / "resolved.cfg").string(),
        llob::io::serialize_config(report.params));
    std::fprintf(stderr, "scenario %-16s %s\n", report.id.c_str(),
                 report.pass ? "pass" : "FAIL");
    for (const auto& note : report.notes)
        std::fprintf(stderr, "  %s\n", note.c_str());
    return report.pass ? kExitOk : 1;
}

int cmd_scenario(const std::string& id_arg, const std::string& preset,
                 const CommonArgs& args) {
    auto cfg = resolve_config(args);
    const auto ids = llob::scenarios::scenario_ids();

    if (id_arg == "list") {
        for (const auto& id : ids) std::printf("%s\n", id.c_str());
        return kExitOk;
    }

    llob::scenarios::KeyValues overrides = cfg.scenario_overrides;
    for (const std::string& s : args.sets) {
        // --set keys without a config section are scenario overrides.
        std::size_t eq = s.find('=');
        std::string key = s.substr(0, eq);
        if (key.rfind("scenario.set.", 0) == 0)
            overrides[key.substr(13)] = s.substr(eq + 1);
    }
    if (!preset.empty()) {
        if (preset == "equal-nu" && id_arg == "manipulation") {
            auto base = llob::scenarios::scenario_preset("manipulation");
            overrides["nu.asia"] = overrides.count("nu.ny")
                                       ? overrides["nu.ny"]
                                       : base["nu.ny"];
        } else {
            throw llob::ValidationError("unknown preset '" + preset +
                                        "' for scenario '" + id_arg + "'");
        }
    }

    if (id_arg == "all") {
        // Presets and overrides apply to single-scenario runs only.
        int rc = kExitOk;
        for (const auto& id : ids)
            if (run_one_scenario(id, {}, cfg.out_dir) != kExitOk) rc = 1;
        return rc;
    }

    bool known = false;
    for (const auto& id : ids) known = known || (id == id_arg);
    if (!known) {
        std::fprintf(stderr, "unknown scenario id: '%s'\nknown ids:\n",
                     id_arg.c_str());
        for (const auto& id : ids) std::fprintf(stderr, "  %s\n", id.c_str());
        return kExitValidation;
    }
    return run_one_scenario(id_arg, overrides, cfg.out_dir);
}

struct AnalyticArgs {
    std::string mode;
    std::string regime = "exact";
    double m0_over_J = 1.0;
    std::vector<double> t{1.0};
    double s = 0.0;
    double kappa = 0.0;
    double m0 = 1.0;
    double sigma = 1.0;
    double L = 1.0;
    double T = 1.0;
    double y = 0.0;
    double nu = 0.0;
    double lam = 0.0;
};

int cmd_analytic(const AnalyticArgs& a) {
    using namespace llob;
    analytic::Regime regime = analytic::Regime::exact_root;
    if (a.regime == "small") regime = analytic::Regime::small_rate;
    else if (a.regime == "large") regime = analytic::Regime::large_rate;
    else if (a.regime != "exact")
        throw ValidationError("regime must be exact, small or large");

    auto print = [](double v) {
        std::printf("%s\n", io::format_double(v).c_str());
    };

    if (a.mode == "A") {
        print(analytic::amplitude(a.m0_over_J, regime).A);
    } else if (a.mode == "arcsine") {
        auto p = make_params(a.sigma, a.kappa, 0.0, 0.0, a.L);
        for (double t : a.t) print(analytic::arcsine_propagator(t, a.m0, p));
    } else if (a.mode == "stationary") {
        auto p = make_params(a.sigma, 0.0, a.lam, a.nu, a.L);
        print(analytic::stationary_phi_llob(a.y, p));
    } else if (a.mode == "mispricing") {
        for (double t : a.t) print(analytic::mispricing_variance(a.kappa, t));
    } else if (a.mode == "cost") {
        auto p = make_params(a.sigma, 0.0, 0.0, 0.0, a.L);
        print(analytic::cost_constant_rate(a.m0, a.T, p, regime));
    } else if (a.mode == "C") {
        for (double t : a.t) print(analytic::C_of(a.s, t, a.kappa));
    } else {
        throw ValidationError("unknown analytic mode: '" + a.mode +
                              "' (A, arcsine, stationary, mispricing, cost, C)");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent-book market impact toolkit"};
    app.require_subcommand(1);

    CommonArgs impact_args;
    std::string impact_variant, impact_profile;
    auto* impact = app.add_subcommand(
        "impact", "solve the impact integral equation for a schedule");
    add_common(impact, impact_args);
    impact->add_option("--variant", impact_variant,
                       "kernel: llob, depcan or meanrev");
    impact->add_option("--profile", impact_profile,
                       "profile preset (zero, constant, const-large, "
                       "roundtrip, ramp) or a t,m CSV path");

    CommonArgs book_args;
    std::string book_preset;
    auto* book = app.add_subcommand(
        "book", "simulate the latent-book density directly");
    add_common(book, book_args);
    book->add_option("--preset", book_preset,
                     "named book experiment (relax)");

    CommonArgs scen_args;
    std::string scen_id, scen_preset;
    auto* scen = app.add_subcommand(
        "scenario", "run a registered scenario (or 'list', or 'all')");
    add_common(scen, scen_args);
    scen->add_option("id", scen_id, "scenario id, 'list' or 'all'")
        ->required();
    scen->add_option("--preset", scen_preset,
                     "scenario variant (manipulation: equal-nu)");

    AnalyticArgs an;
    auto* analytic = app.add_subcommand(
        "analytic", "evaluate a closed form; one value per line");
    analytic->add_option("mode", an.mode,
                         "A, arcsine, stationary, mispricing, cost or C")
        ->required();
    analytic->add_option("--m0-over-J", an.m0_over_J, "rate ratio for A");
    analytic->add_option("--regime", an.regime, "exact, small or large");
    analytic->add_option("--t", an.t, "time argument(s)");
    analytic->add_option("--s", an.s, "start time");
    analytic->add_option("--kappa", an.kappa, "mean-reversion rate");
    analytic->add_option("--m0", an.m0, "trading rate");
    analytic->add_option("--sigma", an.sigma, "volatility");
    analytic->add_option("--L", an.L, "book slope");
    analytic->add_option("--T", an.T, "horizon");
    analytic->add_option("--y", an.y, "price coordinate");
    analytic->add_option("--nu", an.nu, "cancellation rate");
    analytic->add_option("--lam", an.lam, "deposition rate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (impact->parsed()) {
            if (!impact_variant.empty())
                impact_args.sets.push_back("solver.variant=" + impact_variant);
            if (!impact_profile.empty())
                impact_args.sets.push_back("profile.kind=" + impact_profile);
            return cmd_impact(impact_args);
        }
        if (book->parsed()) return cmd_book(book_args, book_preset);
        if (scen->parsed()) return cmd_scenario(scen_id, scen_preset, scen_args);
        if (analytic->parsed()) return cmd_analytic(an);
    } catch (const llob::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const llob::ConvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    } catch (const llob::pde::SimError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
