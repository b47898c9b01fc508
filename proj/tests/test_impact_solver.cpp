#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "llob/analytic.hpp"
#include "llob/impact_solver.hpp"
#include "llob/model.hpp"

using namespace llob;

namespace {

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double sup_abs(const std::vector<double>& a) {
    double d = 0.0;
    for (double v : a) d = std::max(d, std::abs(v));
    return d;
}

}  // namespace

TEST_CASE("config and variant validation") {
    auto p = make_params(1.0, 0.0, 0.0, 0.0, 1.0);
    auto prof = ExecutionProfile::constant(0.5, 1.0, 8);
    SolverConfig bad;
    bad.n_steps = 1;
    CHECK_THROWS_AS(solve_impact(prof, KernelVariant::llob(p), bad),
                    ValidationError);
    bad = SolverConfig{};
    bad.picard_tol = 0.0;
    CHECK_THROWS_AS(solve_impact(prof, KernelVariant::llob(p), bad),
                    ValidationError);
    bad = SolverConfig{};
    bad.damping = 1.5;
    CHECK_THROWS_AS(solve_impact(prof, KernelVariant::llob(p), bad),
                    ValidationError);
    CHECK_THROWS_AS(KernelVariant::mean_rev(p), ValidationError);  // kappa = 0
}

TEST_CASE("zero schedule stays at zero with zero cost") {
    auto p = make_params(1.0, 0.0, 0.0, 0.0, 1.0);
    SolverConfig cfg;
    cfg.n_steps = 64;
    auto traj = solve_impact(ExecutionProfile::constant(0.0, 1.0, 64),
                             KernelVariant::llob(p), cfg);
    for (double v : traj.y()) CHECK(v == 0.0);
    CHECK(traj.total_cost() == 0.0);
}

TEST_CASE("impact is antisymmetric in the schedule sign") {
    auto p = make_params(1.4, 0.0, 0.0, 0.0, 2.0);
    SolverConfig cfg;
    cfg.n_steps = 256;
    auto buy = solve_impact(ExecutionProfile::constant(2.0, 1.0, 256),
                            KernelVariant::llob(p), cfg);
    auto sell = solve_impact(ExecutionProfile::constant(-2.0, 1.0, 256),
                             KernelVariant::llob(p), cfg);
    for (int k = 0; k <= 256; ++k)
        CHECK(buy.y()[k] == doctest::Approx(-sell.y()[k]).epsilon(1e-13));
    // both directions pay the same cost
    CHECK(buy.total_cost() ==
          doctest::Approx(sell.total_cost()).epsilon(1e-12));
}

TEST_CASE("deposition/cancellation kernel reduces to the base kernel") {
    auto p = make_params(1.0, 0.0, 0.0, 0.0, 1.0);
    SolverConfig cfg;
    cfg.n_steps = 128;
    auto prof = ExecutionProfile::round_trip(0.8, 0.5, 1.0, 128);
    auto base = solve_impact(prof, KernelVariant::llob(p), cfg);
    auto dc = solve_impact(prof, KernelVariant::dep_can(p), cfg);
    auto dcw = solve_impact(prof, KernelVariant::dep_can(p, true), cfg);
    CHECK(sup_diff(base.y(), dc.y()) < 1e-14);
    CHECK(sup_diff(base.y(), dcw.y()) < 1e-14);
}

TEST_CASE("deposition term matters once lam > 0") {
    auto p = make_params(1.0, 0.0, 0.5, 0.2, 1.0);
    SolverConfig cfg;
    cfg.n_steps = 128;
    auto prof = ExecutionProfile::constant(0.5, 1.0, 128);
    auto plain = solve_impact(prof, KernelVariant::dep_can(p), cfg);
    auto weighted = solve_impact(prof, KernelVariant::dep_can(p, true), cfg);
    auto base = solve_impact(
        prof, KernelVariant::llob(make_params(1.0, 0.0, 0.0, 0.0, 1.0)), cfg);
    CHECK(sup_diff(plain.y(), base.y()) > 1e-4);
    CHECK(sup_diff(plain.y(), weighted.y()) > 1e-6);
}

TEST_CASE("mean-reverting kernel joins the base kernel as kappa -> 0") {
    auto p0 = make_params(1.0, 0.0, 0.0, 0.0, 1.0);
    auto pk = make_params(1.0, 1e-6, 0.0, 0.0, 1.0);
    SolverConfig cfg;
    cfg.n_steps = 512;
    auto prof = ExecutionProfile::constant(1.0, 1.0, 512);
    auto base = solve_impact(prof, KernelVariant::llob(p0), cfg);
    auto mr = solve_impact(prof, KernelVariant::mean_rev(pk), cfg);
    CHECK(sup_diff(base.y(), mr.y()) < 5e-3 * sup_abs(base.y()));
}

TEST_CASE("small schedules respond linearly") {
    auto p = make_params(1.0, 0.0, 0.0, 0.0, 1.0);
    SolverConfig cfg;
    cfg.n_steps = 256;
    const double eps = 1e-6 * p.J;
    auto y1 = solve_impact(ExecutionProfile::constant(eps, 1.0, 256),
                           KernelVariant::llob(p), cfg)
                  .y();
    auto y2 = solve_impact(ExecutionProfile::constant(2.0 * eps, 1.0, 256),
                           KernelVariant::llob(p), cfg)
                  .y();
    double dev = 0.0;
    for (int k = 1; k <= 256; ++k)
        dev = std::max(dev, std::abs(y2[k] - 2.0 * y1[k]));
    CHECK(dev < 1e-4 * sup_abs(y2));

    // and the linear response matches the closed-form propagator
    auto lin = analytic::linear_propagator_llob(
        ExecutionProfile::constant(eps, 1.0, 256), p);
    CHECK(sup_diff(y1, lin) < 1e-3 * sup_abs(lin));
}

TEST_CASE("marching error shrinks at first order or better") {
    auto p = make_params(1.0, 0.0, 0.0, 0.0, 1.0);
    auto prof = ExecutionProfile::constant(2.0, 1.0, 4096);
    SolverConfig cfg;
    cfg.n_steps = 4096;
    const double ref = solve_impact(prof, KernelVariant::llob(p), cfg)
                           .y()
                           .back();
    double err[2];
    int ns[2] = {256, 512};
    for (int i = 0; i < 2; ++i) {
        cfg.n_steps = ns[i];
        err[i] = std::abs(
            solve_impact(prof, KernelVariant::llob(p), cfg).y().back() - ref);
    }
    CHECK(err[0] / err[1] >= 1.8);
}

TEST_CASE("independent quadrature residual is small after convergence") {
    auto p = make_params(1.0, 0.0, 0.0, 0.0, 1.0);
    SolverConfig cfg;
    cfg.n_steps = 1024;
    auto prof = ExecutionProfile::constant(1.0, 1.0, 1024);
    auto traj = solve_impact(prof, KernelVariant::llob(p), cfg);
    CHECK(residual(traj, prof, KernelVariant::llob(p)) <
          1e-2 * sup_abs(traj.y()));

    // and it shrinks with the grid
    cfg.n_steps = 256;
    auto coarse = solve_impact(prof, KernelVariant::llob(p), cfg);
    CHECK(residual(traj, prof, KernelVariant::llob(p)) <
          residual(coarse, resample_to(prof, 256), KernelVariant::llob(p)));
}

TEST_CASE("profiles on a different grid are resampled to the solver grid") {
    auto p = make_params(1.0, 0.0, 0.0, 0.0, 1.0);
    SolverConfig cfg;
    cfg.n_steps = 128;
    auto prof = ExecutionProfile::constant(0.5, 1.0, 100);
    auto traj = solve_impact(prof, KernelVariant::llob(p), cfg);
    CHECK(traj.n_steps() == 128);
}

TEST_CASE("base-kernel round trips never profit") {
    auto p = make_params(1.0, 0.0, 0.0, 0.0, 1.0);
    SolverConfig cfg;
    cfg.n_steps = 512;
    for (double m0 : {0.1, 1.0, 10.0}) {
        auto traj =
            solve_impact(ExecutionProfile::round_trip(m0, 0.5, 1.0, 512),
                         KernelVariant::llob(p), cfg);
        CHECK(traj.total_cost() >= 0.0);
    }
}

TEST_CASE("non-convergence raises a diagnosable error") {
    auto p = make_params(1.0, 0.0, 0.0, 0.0, 1.0);
    SolverConfig cfg;
    cfg.n_steps = 64;
    cfg.picard_max_iter = 1;
    cfg.picard_tol = 1e-14;
    try {
        solve_impact(ExecutionProfile::constant(100.0, 1.0, 64),
                     KernelVariant::llob(p), cfg);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.node_index >= 1);
        CHECK(e.iterations == 1);
        CHECK(e.residual > 0.0);
    }
}

TEST_CASE("frame map: identity at kappa 0, exact transform otherwise") {
    auto p = make_params(1.0, 0.3, 0.0, 0.0, 1.0);
    SolverConfig cfg;
    cfg.n_steps = 64;
    auto prof = ExecutionProfile::constant(0.5, 1.0, 64);
    auto traj = solve_impact(prof, KernelVariant::mean_rev(p), cfg);

    auto zero = ReferencePath::zero(1.0, 64);
    auto same = to_original_frame(traj, zero, 0.0);
    CHECK(sup_diff(same.x(), traj.y()) == 0.0);

    auto path = brownian_path(1.0, 64, 0.4, 11);
    auto mapped = to_original_frame(traj, path, p.kappa);
    auto f = analytic::f_of_t(path, p.kappa);
    for (int k = 0; k <= 64; ++k) {
        const double want =
            std::exp(-p.kappa * traj.t(k)) * traj.y()[k] + f[k];
        CHECK(mapped.x()[k] == doctest::Approx(want).epsilon(1e-12));
    }
    // y and the cost series are carried through unchanged
    CHECK(sup_diff(mapped.y(), traj.y()) == 0.0);
    CHECK(mapped.total_cost() == traj.total_cost());

    auto off = ReferencePath::zero(1.0, 32);
    CHECK_THROWS_AS(to_original_frame(traj, off, p.kappa), ValidationError);
}

TEST_CASE("constant-rate impact follows the self-similar square root") {
    auto p = make_params(std::sqrt(2.0), 0.0, 0.0, 0.0, 1.0);  // D = J = 1
    const double r = 2.0;
    SolverConfig cfg;
    cfg.n_steps = 1024;
    auto traj = solve_impact(ExecutionProfile::constant(r, 1.0, 1024),
                             KernelVariant::llob(p), cfg);
    const double A = analytic::solve_A(r).A;
    // collapse: y(t) / sqrt(D t) is flat at A over the latter half
    for (int k = 512; k <= 1024; k += 128) {
        const double t = traj.t(k);
        CHECK(traj.y()[k] / std::sqrt(p.D * t) ==
              doctest::Approx(A).epsilon(0.01));
    }
}
