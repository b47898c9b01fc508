#pragma once
// Time-marching solver for the self-consistent impact equation of the
// latent-book models. The impacted price y_t is the root of a weakly
// singular Volterra relation
//
//   y_t = (1/L) int_0^t m_s W(s) K(y_t - y_s; s, t) ds  [+ deposition term]
//
// discretized node-by-node on the execution grid: past nodes stay frozen
// and the scalar y_{t_k} is found by damped Picard iteration. Each
// sub-interval contribution is product-integrated: the singular factor
// ((t-s)^(-1/2), or its mean-reverting generalization) is integrated
// exactly while the smooth Gaussian factor is held at the sub-interval
// midpoint.

#include <stdexcept>
#include <string>

#include "llob/model.hpp"

namespace llob {

struct SolverConfig {
    int n_steps = 1024;          ///< marching grid resolution (>= 2)
    double picard_tol = 1e-10;   ///< accepted fixed-point residual per node
    int picard_max_iter = 400;   ///< iteration cap per node
    double damping = 1.0;        ///< initial relaxation factor, in (0, 1]
};

enum class Kernel { llob, dep_can, mean_rev };

/// Kernel selection plus the model parameters it reads.
///  - llob: plain diffusive book; uses D and L only.
///  - dep_can: adds deposition lam and cancellation nu. The executed flow
///    carries the growth weight exp(nu(s) * s); by default the deposition
///    term is unweighted, matching the model's final stated equation, and
///    weighted_deposition applies the same growth weight to it for
///    comparison (the internally consistent variant).
///  - mean_rev: co-moving frame with reversion kappa > 0; lag variance
///    C_of(s, t, kappa) replaces t - s.
struct KernelVariant {
    Kernel kind = Kernel::llob;
    ModelParams params;
    bool weighted_deposition = false;

    static KernelVariant llob(const ModelParams& p);
    static KernelVariant dep_can(const ModelParams& p,
                                 bool weighted_deposition = false);
    static KernelVariant mean_rev(const ModelParams& p);
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& msg, int node_index, double residual,
                     int iterations);
    int node_index;
    double residual;
    int iterations;
};

/// March the impact equation across the profile grid. The profile's own
/// grid is resampled to config.n_steps by step interpolation when the two
/// disagree; x is initialized to y (working frame).
ImpactTrajectory solve_impact(const ExecutionProfile& profile,
                              const KernelVariant& variant,
                              const SolverConfig& config);

/// Max-over-nodes defect of a solved trajectory under an independent
/// quadrature of the same equation (Gauss-Legendre on the
/// singularity-absorbing substitution, finer than the marching rule).
double residual(const ImpactTrajectory& trajectory,
                const ExecutionProfile& profile, const KernelVariant& variant);

/// Map a working-frame trajectory to the original frame:
/// x_t = e^{-kappa t} y_t + f(t) with f from the reference path. The path
/// must share the trajectory grid. kappa = 0 is the identity.
ImpactTrajectory to_original_frame(const ImpactTrajectory& trajectory,
                                   const ReferencePath& path, double kappa);

}  // namespace llob
