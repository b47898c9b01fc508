#include "llob/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <system_error>

#include "llob/analytic.hpp"

namespace llob::scenarios {
namespace {

std::string fmt17(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ',';
        out += fmt17(vs[i]);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw ValidationError("bad numeric value for " + key + ": '" + s + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& s) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError("bad integer value for " + key + ": '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& s) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError("bad integer value for " + key + ": '" + s + "'");
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::size_t end = (comma == std::string::npos) ? s.size() : comma;
        out.push_back(parse_double(key, s.substr(pos, end - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ValidationError("empty list for " + key);
    return out;
}

/// Append a verdict line and fold it into the report's pass flag.
void check(ScenarioReport& rep, bool ok, const std::string& what) {
    rep.notes.push_back(std::string(ok ? "ok: " : "FAIL: ") + what);
    rep.pass = rep.pass && ok;
}

void put(ScenarioReport& rep, const std::string& key, double v) {
    rep.summary.emplace_back(key, v);
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double rms_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

bool nonincreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] * (1.0 + 1e-9)) return false;
    return true;
}

SolverConfig with_steps(const SolverConfig& c, int n) {
    SolverConfig out = c;
    out.n_steps = n;
    return out;
}

}  // namespace

double ScenarioReport::summary_value(const std::string& key) const {
    for (const auto& [k, v] : summary)
        if (k == key) return v;
    throw std::out_of_range("no summary value named '" + key + "'");
}

FitResult fit_linear(const std::vector<double>& x,
                     const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3)
        throw ValidationError("fit needs at least 3 points of equal count");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw ValidationError("fit abscissae are degenerate");
    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

FitResult fit_loglog(const std::vector<double>& x,
                     const std::vector<double>& y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw ValidationError("log-log fit requires positive values");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_linear(lx, ly);
}

ScenarioReport run_sqrt_law(const ModelParams& params,
                            const std::vector<double>& rates, double T,
                            const SolverConfig& config) {
    ScenarioReport rep;
    rep.id = "sqrt-law";
    rep.pass = true;
    rep.params["model.sigma"] = fmt17(params.sigma);
    rep.params["model.L"] = fmt17(params.L);
    rep.params["run.T"] = fmt17(T);
    rep.params["solver.n_steps"] = std::to_string(config.n_steps);
    rep.params["solver.picard_tol"] = fmt17(config.picard_tol);
    rep.params["sweep.rates"] = fmt_list(rates);

    Table per_rate{"per_rate",
                   {"rate_over_J", "m0", "slope", "r2", "prefactor_fit",
                    "y_T", "prefactor_T"},
                   std::vector<std::vector<double>>(7)};
    // Trajectory fits skip the first two nonzero nodes: the smallest-volume
    // points carry the marching scheme's startup error, not the scaling law.
    const int k0 = 3;
    rep.params["fit.excluded_smallest"] = "2";
    double slope_lo = 1e300, slope_hi = -1e300, r2_min = 1.0;
    double pref_small = 0.0, pref_large = 0.0;
    double m0_small = 0.0;
    std::vector<double> traj_t, traj_small, traj_large;

    for (std::size_t ir = 0; ir < rates.size(); ++ir) {
        const double r = rates[ir];
        const double m0 = r * params.J;
        auto profile = ExecutionProfile::constant(m0, T, config.n_steps);
        auto traj = solve_impact(profile, KernelVariant::llob(params), config);

        std::vector<double> Q, Y;
        for (int k = k0; k <= profile.n_steps(); ++k) {
            Q.push_back(m0 * profile.t(k));
            Y.push_back(traj.y()[k]);
        }
        auto fit = fit_loglog(Q, Y);
        const double y_T = traj.y().back();
        const double pref_T = y_T / std::sqrt(m0 * T);

        per_rate.data[0].push_back(r);
        per_rate.data[1].push_back(m0);
        per_rate.data[2].push_back(fit.slope);
        per_rate.data[3].push_back(fit.r2);
        per_rate.data[4].push_back(std::exp(fit.intercept));
        per_rate.data[5].push_back(y_T);
        per_rate.data[6].push_back(pref_T);

        slope_lo = std::min(slope_lo, fit.slope);
        slope_hi = std::max(slope_hi, fit.slope);
        r2_min = std::min(r2_min, fit.r2);
        if (ir == 0) {
            pref_small = std::exp(fit.intercept);
            m0_small = m0;
            traj_t.assign(profile.n_steps() + 1, 0.0);
            for (int k = 0; k <= profile.n_steps(); ++k) traj_t[k] = profile.t(k);
            traj_small = traj.y();
        }
        if (ir + 1 == rates.size()) {
            pref_large = pref_T;
            traj_large = traj.y();
        }
    }
    rep.tables.push_back(std::move(per_rate));
    rep.tables.push_back(Table{"trajectories",
                               {"t", "y_smallest_rate", "y_largest_rate"},
                               {traj_t, traj_small, traj_large}});

    // Oracle prefactors at the grid ends.
    const double oracle_small =
        analytic::impact_small_rate(T, m0_small, params) / std::sqrt(m0_small * T);
    const double dev_small = std::abs(pref_small / oracle_small - 1.0);
    const double dev_large =
        std::abs(pref_large / std::sqrt(2.0 / params.L) - 1.0);

    put(rep, "slope_min", slope_lo);
    put(rep, "slope_max", slope_hi);
    put(rep, "r2_min", r2_min);
    put(rep, "small_prefactor_dev", dev_small);
    put(rep, "large_prefactor_dev", dev_large);

    check(rep, slope_lo >= 0.45 && slope_hi <= 0.55,
          "fitted exponents within [0.45, 0.55] across the rate grid");
    check(rep, r2_min >= 0.99, "log-log fit R^2 >= 0.99 for every rate");
    check(rep, dev_large < 0.05,
          "largest-rate terminal prefactor within 5% of sqrt(2/L)");
    check(rep, dev_small < 0.02,
          "smallest-rate prefactor within 2% of the linear-theory value");
    return rep;
}

ScenarioReport run_cost_scaling(const ModelParams& params,
                                const std::vector<double>& volumes, double m0,
                                const SolverConfig& config) {
    ScenarioReport rep;
    rep.id = "cost-scaling";
    rep.pass = true;
    rep.params["model.sigma"] = fmt17(params.sigma);
    rep.params["model.L"] = fmt17(params.L);
    rep.params["profile.m0"] = fmt17(m0);
    rep.params["solver.n_steps"] = std::to_string(config.n_steps);
    rep.params["sweep.volumes"] = fmt_list(volumes);

    std::vector<double> Q_sorted = volumes;
    std::sort(Q_sorted.begin(), Q_sorted.end());
    if (!(m0 > 0.0) || !(Q_sorted.front() > 0.0))
        throw ValidationError("cost scaling needs positive m0 and volumes");

    // Each volume is executed on its own fully resolved grid; reading all
    // costs off one long trajectory would leave the small volumes with only
    // a handful of marching nodes and bend the fitted exponent.
    Table vol_table{"volumes", {"Q", "t", "cost"}, {{}, {}, {}}};
    std::vector<double> Qs, Cs;
    for (double Q : Q_sorted) {
        const double t = Q / m0;
        auto profile = ExecutionProfile::constant(m0, t, config.n_steps);
        auto traj = solve_impact(profile, KernelVariant::llob(params), config);
        vol_table.data[0].push_back(Q);
        vol_table.data[1].push_back(t);
        vol_table.data[2].push_back(traj.total_cost());
        Qs.push_back(Q);
        Cs.push_back(traj.total_cost());
    }
    rep.tables.push_back(std::move(vol_table));

    // The two smallest volumes sit closest to the marching scheme's startup
    // transient; they stay in the table but are excluded from the fit.
    if (Qs.size() < 5)
        throw ValidationError("cost scaling needs at least 5 volumes");
    std::vector<double> Q_fit(Qs.begin() + 2, Qs.end());
    std::vector<double> C_fit(Cs.begin() + 2, Cs.end());
    auto fit = fit_loglog(Q_fit, C_fit);
    rep.params["fit.excluded_smallest"] = "2";

    const double pref_ref =
        (2.0 * std::sqrt(2.0) / 3.0) / std::sqrt(params.L);
    const double pref_fit = Cs.back() / std::pow(Qs.back(), 1.5);
    const double pref_dev = std::abs(pref_fit / pref_ref - 1.0);

    // Small-rate control: one slow execution against the closed-form cost.
    const double m0_small = 1e-3 * params.J;
    const double T_small = 1.0;
    auto prof_small =
        ExecutionProfile::constant(m0_small, T_small, config.n_steps);
    auto traj_small =
        solve_impact(prof_small, KernelVariant::llob(params), config);
    const double C_small = traj_small.total_cost();
    const double C_oracle = analytic::cost_constant_rate(
        m0_small, T_small, params, analytic::Regime::exact_root);
    const double small_dev = std::abs(C_small / C_oracle - 1.0);

    put(rep, "slope", fit.slope);
    put(rep, "r2", fit.r2);
    put(rep, "prefactor_T", pref_fit);
    put(rep, "prefactor_dev", pref_dev);
    put(rep, "small_rate_cost", C_small);
    put(rep, "small_rate_oracle", C_oracle);
    put(rep, "small_rate_dev", small_dev);

    check(rep, fit.slope >= 1.45 && fit.slope <= 1.55,
          "cost exponent within [1.45, 1.55]");
    check(rep, fit.r2 >= 0.99, "log-log fit R^2 >= 0.99");
    check(rep, small_dev < 0.03,
          "small-rate cost within 3% of the closed form");
    return rep;
}

ScenarioReport run_manipulation(const ModelParams& base, double nu_asia,
                                double nu_ny, double t_switch, double m0,
                                double T, const SolverConfig& config) {
    ScenarioReport rep;
    rep.id = "manipulation";
    rep.pass = true;
    rep.params["model.sigma"] = fmt17(base.sigma);
    rep.params["model.L"] = fmt17(base.L);
    rep.params["nu.asia"] = fmt17(nu_asia);
    rep.params["nu.ny"] = fmt17(nu_ny);
    rep.params["profile.m0"] = fmt17(m0);
    rep.params["profile.t_switch"] = fmt17(t_switch);
    rep.params["run.T"] = fmt17(T);
    rep.params["solver.n_steps"] = std::to_string(config.n_steps);

    PiecewiseRate nu_pw({0.0, t_switch}, {nu_asia, nu_ny});
    auto params_pw = make_params(base.sigma, 0.0, 0.0, nu_pw, base.L);
    auto params_eq = make_params(base.sigma, 0.0, 0.0, nu_ny, base.L);

    auto profile = ExecutionProfile::round_trip(m0, t_switch, T,
                                                config.n_steps);
    auto traj_pw =
        solve_impact(profile, KernelVariant::dep_can(params_pw), config);
    auto traj_eq =
        solve_impact(profile, KernelVariant::dep_can(params_eq), config);

    // Flat-book closed form: impact proportional to the growth-weighted
    // volume, with no diffusive relaxation at all.
    const int n = profile.n_steps();
    const double dt = profile.dt();
    auto phase_int = [](double nu, double a, double b) {
        // int_a^b e^{nu s} ds, stable at nu = 0.
        if (nu == 0.0) return b - a;
        return (std::expm1(nu * b) - std::expm1(nu * a)) / nu;
    };
    std::vector<double> y_flat(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        const double t = profile.t(k);
        const double buy = phase_int(nu_asia, 0.0, std::min(t, t_switch));
        const double sell =
            (t > t_switch) ? phase_int(nu_ny, t_switch, t) : 0.0;
        y_flat[k] = (m0 / base.L) * (buy - sell);
    }
    const double cost_flat = running_cost(profile, y_flat).back();

    // Small-rate linear agreement: same kernel and growth weight, Gaussian
    // factor dropped. Product integration, midpoint weights.
    const double m0_lin = 1e-2 * base.J;
    auto prof_lin =
        ExecutionProfile::round_trip(m0_lin, t_switch, T, config.n_steps);
    auto traj_lin =
        solve_impact(prof_lin, KernelVariant::dep_can(params_pw), config);
    std::vector<double> mass(n + 1, 0.0);
    for (int d = 1; d <= n; ++d)
        mass[d] = 2.0 *
                  (std::sqrt(dt * d) - std::sqrt(dt * (d - 1))) /
                  std::sqrt(4.0 * M_PI * base.D);
    std::vector<double> y_lin(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) {
            const double smid = (j + 0.5) * dt;
            acc += prof_lin.rate(j) * std::exp(nu_pw.at(smid) * smid) *
                   mass[k - j];
        }
        y_lin[k] = acc / base.L;
    }
    double dev_lin = 0.0;
    const double scale_lin = max_abs(y_lin);
    for (int k = 0; k <= n; ++k)
        dev_lin = std::max(dev_lin, std::abs(traj_lin.y()[k] - y_lin[k]));
    dev_lin /= scale_lin;

    std::vector<double> ts(n + 1), ms(n + 1);
    for (int k = 0; k <= n; ++k) {
        ts[k] = profile.t(k);
        ms[k] = profile.rate(k);
    }
    rep.tables.push_back(Table{
        "trajectory",
        {"t", "m", "y_piecewise", "y_equal_nu", "y_flat_book"},
        {ts, ms, traj_pw.y(), traj_eq.y(), y_flat}});
    rep.tables.push_back(Table{"linear_check",
                               {"t", "y_solver", "y_linear"},
                               {ts, traj_lin.y(), y_lin}});

    const double cost_pw = traj_pw.total_cost();
    const double cost_eq = traj_eq.total_cost();
    put(rep, "cost_piecewise", cost_pw);
    put(rep, "cost_equal_nu", cost_eq);
    put(rep, "cost_flat_book", cost_flat);
    put(rep, "terminal_y_piecewise", traj_pw.y().back());
    put(rep, "linear_dev", dev_lin);

    check(rep, cost_eq >= 0.0, "equal-nu round trip costs nothing or more");
    if (nu_asia == nu_ny) {
        // Constant cancellation rate: the growth weight is nondecreasing,
        // so no round trip can be profitable under either impact model.
        check(rep, cost_pw >= 0.0, "constant-nu round trip is not profitable");
        check(rep, cost_flat >= 0.0, "flat-book closed form agrees on the sign");
    } else {
        // A dropping cancellation rate makes the flat-book round trip
        // profitable: buys keep their large growth weight while sells are
        // booked cheaply. With the diffusive kernel the proposition does not
        // survive — the price falls back through the freshly consumed region
        // as soon as the selling starts — so the full solver's cost is
        // reported for transparency but the profitability claim is only
        // asserted for the flat-book benchmark that carries it.
        check(rep, cost_flat < 0.0,
              "flat-book round trip under dropping nu is profitable");
        rep.notes.push_back(
            std::string("note: diffusive-kernel cost stays ") +
            (cost_pw >= 0.0 ? "nonnegative" : "negative") +
            " on the same schedule (" + fmt17(cost_pw) + ")");
    }
    check(rep, dev_lin < 0.03,
          "small-rate solver within 3% of the linear trajectory");
    return rep;
}

ScenarioReport run_monotonicity(const ModelParams& base,
                                const std::vector<double>& D_grid,
                                const std::vector<double>& kappa_grid,
                                double m0, double T,
                                const SolverConfig& config) {
    ScenarioReport rep;
    rep.id = "monotonicity";
    rep.pass = true;
    rep.params["model.sigma"] = fmt17(base.sigma);
    rep.params["model.L"] = fmt17(base.L);
    rep.params["profile.m0"] = fmt17(m0);
    rep.params["run.T"] = fmt17(T);
    rep.params["solver.n_steps"] = std::to_string(config.n_steps);
    rep.params["sweep.D"] = fmt_list(D_grid);
    rep.params["sweep.kappa"] = fmt_list(kappa_grid);

    auto profile = ExecutionProfile::constant(m0, T, config.n_steps);

    Table d_sweep{"d_sweep", {"D", "sigma", "y_T"}, {{}, {}, {}}};
    std::vector<double> yD;
    for (double D : D_grid) {
        auto p = make_params(std::sqrt(2.0 * D), 0.0, 0.0, 0.0, base.L);
        auto traj = solve_impact(profile, KernelVariant::llob(p), config);
        d_sweep.data[0].push_back(D);
        d_sweep.data[1].push_back(p.sigma);
        d_sweep.data[2].push_back(traj.y().back());
        yD.push_back(traj.y().back());
    }
    rep.tables.push_back(std::move(d_sweep));

    std::vector<double> kappas = kappa_grid;
    std::sort(kappas.begin(), kappas.end());
    Table k_sweep{"kappa_sweep", {"kappa", "y_T"}, {{}, {}}};
    std::vector<double> yK;
    for (double kappa : kappas) {
        auto p = make_params(base.sigma, kappa, 0.0, 0.0, base.L);
        auto traj = solve_impact(profile, KernelVariant::mean_rev(p), config);
        k_sweep.data[0].push_back(kappa);
        k_sweep.data[1].push_back(traj.y().back());
        yK.push_back(traj.y().back());
    }
    rep.tables.push_back(std::move(k_sweep));

    auto p0 = make_params(base.sigma, 0.0, 0.0, 0.0, base.L);
    auto traj0 = solve_impact(profile, KernelVariant::llob(p0), config);
    const double y_ref = traj0.y().back();
    const double endpoint_dev = std::abs(yK.front() / y_ref - 1.0);

    put(rep, "y_T_llob", y_ref);
    put(rep, "kappa_endpoint_dev", endpoint_dev);

    check(rep, nonincreasing(yD), "terminal impact nonincreasing in D");
    check(rep, nonincreasing(yK), "terminal impact nonincreasing in kappa");
    check(rep, endpoint_dev < 0.01,
          "smallest-kappa impact within 1% of the kappa-free kernel");
    return rep;
}

ScenarioReport run_tracking(const ModelParams& base,
                            const TrackingConfig& tc) {
    ScenarioReport rep;
    rep.id = "tracking";
    rep.pass = true;
    rep.params["model.sigma"] = fmt17(base.sigma);
    rep.params["model.L"] = fmt17(base.L);
    rep.params["mc.kappas"] = fmt_list(tc.mc_kappas);
    rep.params["mc.steps"] = std::to_string(tc.mc_steps);
    rep.params["mc.T"] = fmt17(tc.mc_T);
    rep.params["mc.n_seeds"] = std::to_string(tc.n_seeds);
    rep.params["run.seed"] = std::to_string(tc.seed);
    rep.params["pde.kappas"] = fmt_list(tc.pde_kappas);
    rep.params["pde.T"] = fmt17(tc.pde_T);
    rep.params["pde.vol"] = fmt17(tc.pde_vol);
    rep.params["grid.M"] = fmt17(tc.grid.M);
    rep.params["grid.P"] = std::to_string(tc.grid.P);
    rep.params["grid.dT"] = fmt17(tc.grid.dT);

    // Monte Carlo: terminal mispricing variance against the closed form.
    Table mc{"mispricing_mc",
             {"kappa", "var_sample", "var_theory", "z"},
             {{}, {}, {}, {}}};
    double z_worst = 0.0;
    for (double kappa : tc.mc_kappas) {
        std::vector<double> devs;
        devs.reserve(tc.n_seeds);
        for (int i = 0; i < tc.n_seeds; ++i) {
            auto path = brownian_path(tc.mc_T, tc.mc_steps, 1.0,
                                      tc.seed + static_cast<std::uint64_t>(i));
            auto f = analytic::f_of_t(path, kappa);
            devs.push_back(path.values().back() - f.back());
        }
        double mean = 0.0;
        for (double d : devs) mean += d;
        mean /= static_cast<double>(devs.size());
        double s2 = 0.0;
        for (double d : devs) s2 += (d - mean) * (d - mean);
        s2 /= static_cast<double>(devs.size() - 1);
        const double theory = analytic::mispricing_variance(kappa, tc.mc_T);
        const double se =
            theory * std::sqrt(2.0 / static_cast<double>(tc.n_seeds - 1));
        const double z = (s2 - theory) / se;
        mc.data[0].push_back(kappa);
        mc.data[1].push_back(s2);
        mc.data[2].push_back(theory);
        mc.data[3].push_back(z);
        z_worst = std::max(z_worst, std::abs(z));
    }
    rep.tables.push_back(std::move(mc));

    // Book simulation without a metaorder: the extracted price should hug
    // the lagged anchor f, and hug B itself more tightly as kappa grows.
    const int n_pde =
        static_cast<int>(std::llround(tc.pde_T / tc.grid.dT));
    auto profile = ExecutionProfile::constant(0.0, tc.pde_T, n_pde);
    Table pde_t{"pde_tracking", {"kappa", "rms_p_f", "rms_p_B"}, {{}, {}, {}}};
    std::vector<double> rms_pb;
    double rms_pf_last = 0.0;
    for (double kappa : tc.pde_kappas) {
        auto p = make_params(base.sigma, kappa, 0.0, 0.0, base.L);
        auto path = brownian_path(tc.pde_T, n_pde, tc.pde_vol, tc.seed);
        auto init = pde::make_linear_book(tc.grid, base.L);
        auto run = pde::simulate(init, p, profile, path, pde::SimOptions{});
        const double rpf = rms_diff(run.price, run.f);
        const double rpb = rms_diff(run.price, run.B);
        pde_t.data[0].push_back(kappa);
        pde_t.data[1].push_back(rpf);
        pde_t.data[2].push_back(rpb);
        rms_pb.push_back(rpb);
        rms_pf_last = rpf;
    }
    rep.tables.push_back(std::move(pde_t));

    put(rep, "z_max_abs", z_worst);
    put(rep, "rms_p_f_last", rms_pf_last);
    put(rep, "rms_p_B_first", rms_pb.front());
    put(rep, "rms_p_B_last", rms_pb.back());

    check(rep, z_worst <= 3.0,
          "sampled mispricing variance within 3 standard errors");
    check(rep, rms_pf_last < rms_pb.back(),
          "price follows the lagged anchor closer than the reference");
    check(rep, rms_pb.back() < rms_pb.front(),
          "stronger reversion shrinks the price-to-reference gap");
    return rep;
}

ScenarioReport run_arcsine(const ModelParams& params, double m0, double T,
                           const SolverConfig& config) {
    ScenarioReport rep;
    rep.id = "arcsine";
    rep.pass = true;
    rep.params["model.sigma"] = fmt17(params.sigma);
    rep.params["model.L"] = fmt17(params.L);
    rep.params["model.kappa"] = fmt17(params.kappa);
    rep.params["profile.m0"] = fmt17(m0);
    rep.params["run.T"] = fmt17(T);
    rep.params["solver.n_steps"] = std::to_string(config.n_steps);

    auto profile = ExecutionProfile::constant(m0, T, config.n_steps);
    auto traj = solve_impact(profile, KernelVariant::mean_rev(params), config);

    const int n = profile.n_steps();
    std::vector<double> ts(n + 1), ref(n + 1);
    for (int k = 0; k <= n; ++k) {
        ts[k] = profile.t(k);
        ref[k] = analytic::arcsine_propagator(ts[k], m0, params);
    }
    rep.tables.push_back(
        Table{"trajectory", {"t", "y", "y_closed_form"}, {ts, traj.y(), ref}});

    double dev = 0.0;
    const double scale = max_abs(ref);
    for (int k = 0; k <= n; ++k)
        dev = std::max(dev, std::abs(traj.y()[k] - ref[k]));
    dev /= scale;

    const double plateau = analytic::arcsine_plateau(m0, params);
    const double plateau_ratio = traj.y().back() / plateau;

    std::vector<double> ft, fy;
    for (int k = 3; k <= n && profile.t(k) * params.kappa <= 0.1; ++k) {
        ft.push_back(profile.t(k));
        fy.push_back(traj.y()[k]);
    }
    auto fit = fit_loglog(ft, fy);

    put(rep, "sup_dev", dev);
    put(rep, "plateau_ratio", plateau_ratio);
    put(rep, "short_time_slope", fit.slope);
    put(rep, "short_time_r2", fit.r2);

    check(rep, dev < 0.02, "solver within 2% of the closed form everywhere");
    check(rep, plateau_ratio >= 0.98 && plateau_ratio <= 1.02,
          "terminal value within 2% of the saturation level");
    check(rep, fit.slope >= 0.45 && fit.slope <= 0.55,
          "short-time exponent within [0.45, 0.55]");
    return rep;
}

ScenarioReport run_cross_validation(const ModelParams& params, double m0,
                                    double T, const pde::GridSpec& fine,
                                    const pde::GridSpec& coarse,
                                    const SolverConfig& config) {
    ScenarioReport rep;
    rep.id = "cross-validation";
    rep.pass = true;
    rep.params["model.sigma"] = fmt17(params.sigma);
    rep.params["model.L"] = fmt17(params.L);
    rep.params["profile.m0"] = fmt17(m0);
    rep.params["run.T"] = fmt17(T);
    rep.params["fine.M"] = fmt17(fine.M);
    rep.params["fine.P"] = std::to_string(fine.P);
    rep.params["fine.dT"] = fmt17(fine.dT);
    rep.params["coarse.M"] = fmt17(coarse.M);
    rep.params["coarse.P"] = std::to_string(coarse.P);
    rep.params["coarse.dT"] = fmt17(coarse.dT);

    auto run_pair = [&](const pde::GridSpec& g, std::vector<double>* t_out,
                        std::vector<double>* p_out, std::vector<double>* y_out) {
        const int n = static_cast<int>(std::llround(T / g.dT));
        if (std::abs(n * g.dT - T) > 1e-9 * T)
            throw ValidationError("grid dT must divide the horizon T");
        auto profile = ExecutionProfile::constant(m0, T, n);
        auto path = ReferencePath::zero(T, n);
        auto init = pde::make_linear_book(g, params.L);
        // The integral equation is the exact consequence of the
        // continuum dynamics driven by a point source at the price, so the
        // apples-to-apples discretization on the book side is the mollified
        // injection; cell consumption carries an extra O(sqrt(m0 dT / L))
        // front-notch offset that is not part of either continuum object.
        pde::SimOptions opt;
        opt.mollified_injection = true;
        auto run = pde::simulate(init, params, profile, path, opt);
        auto traj = solve_impact(profile, KernelVariant::llob(params),
                                 with_steps(config, n));
        double dev = 0.0;
        const double scale = max_abs(traj.y());
        for (int k = 0; k <= n; ++k)
            dev = std::max(dev, std::abs(run.price[k] - traj.y()[k]));
        if (t_out) {
            *t_out = run.t;
            *p_out = run.price;
            *y_out = traj.y();
        }
        return dev / scale;
    };

    std::vector<double> ts, ps, ys;
    const double dev_fine = run_pair(fine, &ts, &ps, &ys);
    const double dev_coarse = run_pair(coarse, nullptr, nullptr, nullptr);

    rep.tables.push_back(Table{
        "trajectory", {"t", "price_book", "y_integral"}, {ts, ps, ys}});

    put(rep, "dev_fine", dev_fine);
    put(rep, "dev_coarse", dev_coarse);

    check(rep, dev_fine < 0.05,
          "book and integral-equation prices within 5% of the impact scale");
    check(rep, dev_fine < dev_coarse, "deviation shrinks under refinement");
    return rep;
}

namespace {

const std::vector<std::pair<std::string, KeyValues>>& registry() {
    static const std::vector<std::pair<std::string, KeyValues>> reg = {
        {"arcsine",
         {{"model.sigma", "1"},
          {"model.L", "50"},
          {"model.kappa", "1"},
          {"profile.m0", "0.05"},
          {"run.T", "6"},
          {"solver.n_steps", "2048"},
          {"solver.picard_tol", "1e-13"},
          {"solver.picard_max_iter", "400"},
          {"solver.damping", "1"}}},
        {"cost-scaling",
         {{"model.sigma", "1.4142135623730951"},
          {"model.L", "1"},
          {"profile.m0", "100"},
          {"run.T", "1"},
          {"sweep.n_volumes", "10"},
          {"solver.n_steps", "4096"},
          {"solver.picard_tol", "1e-8"},
          {"solver.picard_max_iter", "400"},
          {"solver.damping", "1"}}},
        {"cross-validation",
         {{"model.sigma", "1.4142135623730951"},
          {"model.L", "1"},
          {"profile.m0", "2"},
          {"run.T", "1"},
          {"fine.M", "8"},
          {"fine.P", "1600"},
          {"fine.dT", "0.0005"},
          {"coarse.M", "8"},
          {"coarse.P", "800"},
          {"coarse.dT", "0.001"},
          {"solver.picard_tol", "1e-10"},
          {"solver.picard_max_iter", "400"},
          {"solver.damping", "1"}}},
        {"manipulation",
         {{"model.sigma", "1"},
          {"model.L", "1"},
          {"nu.asia", "0.5"},
          {"nu.ny", "0.05"},
          {"profile.m0", "0.05"},
          {"profile.t_switch", "2"},
          {"run.T", "4"},
          {"solver.n_steps", "2048"},
          {"solver.picard_tol", "1e-9"},
          {"solver.picard_max_iter", "600"},
          {"solver.damping", "1"}}},
        {"monotonicity",
         {{"model.sigma", "1.4142135623730951"},
          {"model.L", "1"},
          {"profile.m0", "1"},
          {"run.T", "1"},
          {"sweep.D", "0.125,0.25,0.5,1,2,4,8,16"},
          {"sweep.kappa",
           "0.001,0.0029619645340680789,0.0087731233077810624,"
           "0.025985264452188192,0.076965044961377194,0.22796768148460641,"
           "0.67522814064074919,2"},
          {"solver.n_steps", "1024"},
          {"solver.picard_tol", "1e-10"},
          {"solver.picard_max_iter", "400"},
          {"solver.damping", "1"}}},
        {"sqrt-law",
         {{"model.sigma", "1.4142135623730951"},
          {"model.L", "1"},
          {"run.T", "1"},
          {"sweep.rates",
           "0.01,0.031622776601683791,0.1,0.31622776601683794,1,"
           "3.1622776601683795,10,31.622776601683793,100"},
          {"solver.n_steps", "2048"},
          {"solver.picard_tol", "1e-9"},
          {"solver.picard_max_iter", "500"},
          {"solver.damping", "1"}}},
        {"tracking",
         {{"model.sigma", "1"},
          {"model.L", "1"},
          {"mc.kappas", "0.1,1,5"},
          {"mc.steps", "512"},
          {"mc.T", "1"},
          {"mc.n_seeds", "256"},
          {"run.seed", "20260818"},
          {"pde.kappas", "0.1,0.5,2"},
          {"pde.T", "2"},
          {"pde.vol", "0.5"},
          {"grid.M", "6"},
          {"grid.P", "600"},
          {"grid.dT", "0.001"}}},
    };
    return reg;
}

SolverConfig solver_from(const KeyValues& kv) {
    SolverConfig c;
    c.n_steps = parse_int("solver.n_steps", kv.at("solver.n_steps"));
    c.picard_tol = parse_double("solver.picard_tol", kv.at("solver.picard_tol"));
    c.picard_max_iter =
        parse_int("solver.picard_max_iter", kv.at("solver.picard_max_iter"));
    c.damping = parse_double("solver.damping", kv.at("solver.damping"));
    return c;
}

}  // namespace

std::vector<std::string> scenario_ids() {
    std::vector<std::string> ids;
    for (const auto& [id, kv] : registry()) ids.push_back(id);
    return ids;
}

KeyValues scenario_preset(const std::string& id) {
    for (const auto& [rid, kv] : registry())
        if (rid == id) return kv;
    throw ValidationError("unknown scenario id: '" + id + "'");
}

ScenarioReport run_scenario(const std::string& id,
                            const KeyValues& overrides) {
    KeyValues kv = scenario_preset(id);
    for (const auto& [k, v] : overrides) {
        auto it = kv.find(k);
        if (it == kv.end())
            throw ValidationError("unknown override key for scenario '" + id +
                                  "': " + k);
        it->second = v;
    }
    auto num = [&](const char* key) { return parse_double(key, kv.at(key)); };

    ScenarioReport rep;
    if (id == "sqrt-law") {
        auto p = make_params(num("model.sigma"), 0.0, 0.0, 0.0, num("model.L"));
        rep = run_sqrt_law(p, parse_list("sweep.rates", kv.at("sweep.rates")),
                           num("run.T"), solver_from(kv));
    } else if (id == "cost-scaling") {
        auto p = make_params(num("model.sigma"), 0.0, 0.0, 0.0, num("model.L"));
        const double m0 = num("profile.m0");
        const double Q_max = m0 * num("run.T");
        const int n_vol = parse_int("sweep.n_volumes", kv.at("sweep.n_volumes"));
        std::vector<double> volumes;
        for (int i = 0; i < n_vol; ++i)
            volumes.push_back(Q_max / static_cast<double>(1 << i));
        rep = run_cost_scaling(p, volumes, m0, solver_from(kv));
    } else if (id == "cross-validation") {
        auto p = make_params(num("model.sigma"), 0.0, 0.0, 0.0, num("model.L"));
        pde::GridSpec fine{num("fine.M"), parse_int("fine.P", kv.at("fine.P")),
                           num("fine.dT")};
        pde::GridSpec coarse{num("coarse.M"),
                             parse_int("coarse.P", kv.at("coarse.P")),
                             num("coarse.dT")};
        SolverConfig c;
        c.picard_tol = num("solver.picard_tol");
        c.picard_max_iter =
            parse_int("solver.picard_max_iter", kv.at("solver.picard_max_iter"));
        c.damping = num("solver.damping");
        rep = run_cross_validation(p, num("profile.m0"), num("run.T"), fine,
                                   coarse, c);
    } else if (id == "manipulation") {
        auto p = make_params(num("model.sigma"), 0.0, 0.0, 0.0, num("model.L"));
        rep = run_manipulation(p, num("nu.asia"), num("nu.ny"),
                               num("profile.t_switch"), num("profile.m0"),
                               num("run.T"), solver_from(kv));
    } else if (id == "monotonicity") {
        auto p = make_params(num("model.sigma"), 0.0, 0.0, 0.0, num("model.L"));
        rep = run_monotonicity(p, parse_list("sweep.D", kv.at("sweep.D")),
                               parse_list("sweep.kappa", kv.at("sweep.kappa")),
                               num("profile.m0"), num("run.T"),
                               solver_from(kv));
    } else if (id == "tracking") {
        auto p = make_params(num("model.sigma"), 0.0, 0.0, 0.0, num("model.L"));
        TrackingConfig tc;
        tc.mc_kappas = parse_list("mc.kappas", kv.at("mc.kappas"));
        tc.mc_steps = parse_int("mc.steps", kv.at("mc.steps"));
        tc.mc_T = num("mc.T");
        tc.n_seeds = parse_int("mc.n_seeds", kv.at("mc.n_seeds"));
        tc.seed = parse_u64("run.seed", kv.at("run.seed"));
        tc.pde_kappas = parse_list("pde.kappas", kv.at("pde.kappas"));
        tc.pde_T = num("pde.T");
        tc.pde_vol = num("pde.vol");
        tc.grid = pde::GridSpec{num("grid.M"),
                                parse_int("grid.P", kv.at("grid.P")),
                                num("grid.dT")};
        rep = run_tracking(p, tc);
    } else if (id == "arcsine") {
        auto p = make_params(num("model.sigma"), num("model.kappa"), 0.0, 0.0,
                             num("model.L"));
        rep = run_arcsine(p, num("profile.m0"), num("run.T"), solver_from(kv));
    }
    rep.params = kv;
    return rep;
}

}  // namespace llob::scenarios
