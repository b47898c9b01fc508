#pragma once
// Closed-form and semi-analytic results for the latent-book impact models:
// stationary book shapes, diffusion kernels, the self-similar impact
// amplitude, linear (small-rate) propagators, constant-rate execution cost
// and the mean-reverting frame map. These serve as oracles for the
// numerical solvers and as the backing for the `analytic` CLI subcommand.

#include <vector>

#include "llob/model.hpp"

namespace llob::analytic {

/// Which closed-form branch of the self-similar amplitude is requested.
enum class Regime { exact_root, small_rate, large_rate };

/// Self-similar impact amplitude: impact grows as A * sqrt(D t) at constant
/// trading rate, with A fixed by the rate-to-scale ratio m0/J.
struct SelfSimilarFit {
    double A;
    Regime regime;
};

/// Right-hand side of the amplitude fixed-point equation
///   A = r * int_0^1 du (4 pi (1-u))^(-1/2)
///             * exp(-A^2 (1 - sqrt u) / (4 (1 + sqrt u))),
/// evaluated after the substitution u = 1 - v^2, v = cos(theta), which
/// removes the endpoint singularity and leaves an analytic integrand.
double self_similar_rhs(double A, double m0_over_J);

/// |A - rhs(A)|: fixed-point residual of a candidate amplitude.
double self_similar_residual(double A, double m0_over_J);

/// Exact amplitude: bracketed bisection on (0, sqrt(2 r) + 1) followed by a
/// Newton polish. Residual of the result is below 1e-10.
SelfSimilarFit solve_A(double m0_over_J);

/// Closed-form amplitude branches: m0/(J sqrt(pi)) for small rates,
/// sqrt(2 m0/J) for large rates; exact_root delegates to solve_A.
SelfSimilarFit amplitude(double m0_over_J, Regime regime);

/// Stationary signed density of the flat-frame book with deposition lam and
/// cancellation nu: odd in y, slope -lam/sqrt(nu D) = -L at the origin,
/// saturating at -(lam/nu) far above the price. Requires constant nu > 0.
double stationary_phi_llob(double y, const ModelParams& p);

/// Stationary signed density of the mean-reverting book:
/// c0 + c1 * int_{-inf}^y exp(-kappa x^2 / sigma^2) dx. Requires kappa > 0.
double stationary_phi_mr(double y, const ModelParams& p, double c0, double c1);

/// Diffusion kernel with cancellation decay:
/// exp(-nu tau) (4 pi D tau)^(-1/2) exp(-y^2/(4 D tau)), tau > 0.
/// The cancellation rate is taken at its initial (constant) value.
double heat_kernel(double y, double tau, const ModelParams& p);

/// Lag variance of the mean-reverting frame between times s <= t:
/// (exp(2 kappa t) - exp(2 kappa s)) / (2 kappa), exactly t - s at kappa=0.
double C_of(double s, double t, double kappa);

/// Small-rate impact at constant rate m0: (1/sqrt(pi)) (m0/J) sqrt(D t).
double impact_small_rate(double t, double m0, const ModelParams& p);

/// Large-rate impact after executing volume Q: sqrt(2 Q / L).
double impact_large_rate(double Q, const ModelParams& p);

/// Small-rate (linear) impact of an arbitrary schedule in the flat book:
/// y_t = (1/L) int_0^t m_s (4 pi D (t-s))^(-1/2) ds, evaluated at the
/// profile nodes by product integration (the square-root kernel integrated
/// exactly per step, m per-step constant). Exact for constant m.
std::vector<double> linear_propagator_llob(const ExecutionProfile& profile,
                                           const ModelParams& p);

/// Small-rate impact at constant rate m0 in the mean-reverting book:
/// y_t = m0/(L sigma sqrt(kappa pi)) * (pi/2 - arcsin(exp(-kappa t))).
/// Requires kappa > 0; strictly increasing and concave in t, bounded by
/// arcsine_plateau.
double arcsine_propagator(double t, double m0, const ModelParams& p);

/// t -> infinity limit of arcsine_propagator:
/// m0/(L sigma sqrt(kappa pi)) * pi/2.
double arcsine_plateau(double m0, const ModelParams& p);

/// Cost of executing at constant rate m0 over [0, T]:
/// C = (2/3) A m0 sqrt(D) T^(3/2) with A = amplitude(m0/J, regime).
/// At large rates this is (2 sqrt2/3) Q^(3/2) / sqrt(L), Q = m0 T.
double cost_constant_rate(double m0, double T, const ModelParams& p,
                          Regime regime);

/// Cancellation-adjusted executed volume
/// int_0^T m_s exp(int_0^s nu(u) du) ds, exact per profile step and per
/// nu piece. Reduces to m0 (e^{nu T} - 1)/nu for constant m and nu.
double rescaled_volume(const ExecutionProfile& profile,
                       const PiecewiseRate& nu);

/// Stationary mispricing variance of the tracking frame:
/// (1 - exp(-2 kappa t)) / (2 kappa); exactly t at kappa = 0.
double mispricing_variance(double kappa, double t);

/// Tracking frame driven by a sampled reference path: the exact per-step
/// update of f' + kappa f = kappa B with B held constant on each step,
///   f_{k+1} = f_k e^{-kappa dt} + B_k (1 - e^{-kappa dt}),  f_0 = 0.
std::vector<double> f_of_t(const ReferencePath& path, double kappa);

}  // namespace llob::analytic
