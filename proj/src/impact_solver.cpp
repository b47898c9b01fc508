#include "llob/impact_solver.hpp"

#include <cmath>
#include <sstream>

#include "llob/analytic.hpp"

namespace llob {

namespace {

const double kFourPi = 4.0 * M_PI;

// 4- and 8-point Gauss-Legendre rules on [-1, 1] for the smooth-substitution
// integrals (deposition term and the independent residual quadrature).
const double kGx4[4] = {-0.8611363115940526, -0.3399810435848563,
                        0.3399810435848563, 0.8611363115940526};
const double kGw4[4] = {0.3478548451374538, 0.6521451548625461,
                        0.6521451548625461, 0.3478548451374538};
const double kGx8[8] = {-0.9602898564975363, -0.7966664774136267,
                        -0.5255324099163290, -0.1834346424956498,
                        0.1834346424956498,  0.5255324099163290,
                        0.7966664774136267,  0.9602898564975363};
const double kGw8[8] = {0.1012285362903763, 0.2223810344533745,
                        0.3137066458778873, 0.3626837833783620,
                        0.3626837833783620, 0.3137066458778873,
                        0.2223810344533745, 0.1012285362903763};

// acos(v) for v = exp(-a), a >= 0, accurate when v is near 1:
// acos(v) = 2 asin(sqrt((1 - v)/2)) with 1 - v = -expm1(-a).
double acos_exp_neg(double a) {
    return 2.0 * std::asin(std::sqrt(0.5 * -std::expm1(-a)));
}

void validate_variant(const KernelVariant& v) {
    if (v.kind == Kernel::mean_rev && v.params.kappa <= 0.0)
        throw ValidationError("kappa must be positive for the mean-reverting kernel");
}

// Per-solve marching state: lag tables for the exactly integrated singular
// factor, midpoint weights, and the frozen-node midpoints.
class Marcher {
public:
    Marcher(const ExecutionProfile& profile, const KernelVariant& variant)
        : prof_(profile), v_(variant), p_(variant.params) {
        n_ = prof_.n_steps();
        dt_ = prof_.dt();
        mass_.assign(n_ + 1, 0.0);
        if (v_.kind == Kernel::mean_rev) {
            // int_step e^{kappa s} (2 pi sigma^2 C(s,t))^{-1/2} ds at lag d,
            // in closed form through the arcsine primitive.
            double c = std::sqrt(2.0 / p_.kappa) /
                       std::sqrt(2.0 * M_PI * p_.sigma * p_.sigma);
            for (int d = 1; d <= n_; ++d)
                mass_[d] = c * (acos_exp_neg(p_.kappa * dt_ * d) -
                                acos_exp_neg(p_.kappa * dt_ * (d - 1)));
            em_.assign(n_ + 1, 0.0);
            for (int d = 1; d <= n_; ++d)
                em_[d] = std::expm1(2.0 * p_.kappa * (d - 0.5) * dt_) /
                         (2.0 * p_.kappa);
            ws2_.assign(n_, 0.0);
            for (int j = 0; j < n_; ++j)
                ws2_[j] = std::exp(2.0 * p_.kappa * (j + 0.5) * dt_);
        } else {
            // int_step (4 pi D (t-s))^{-1/2} ds at lag d
            double c = 2.0 / std::sqrt(kFourPi * p_.D);
            for (int d = 1; d <= n_; ++d)
                mass_[d] = c * (std::sqrt(dt_ * d) - std::sqrt(dt_ * (d - 1)));
            denom_.assign(n_ + 1, 0.0);
            for (int d = 1; d <= n_; ++d)
                denom_[d] = 4.0 * p_.D * (d - 0.5) * dt_;
        }
        weight_.assign(n_, 1.0);
        if (v_.kind == Kernel::dep_can) {
            for (int j = 0; j < n_; ++j) {
                double s_mid = (j + 0.5) * dt_;
                weight_[j] = std::exp(p_.nu.at(s_mid) * s_mid);
            }
        }
        ymid_.assign(n_, 0.0);
    }

    // called once y_k is accepted, so interval k-1 gets its frozen midpoint
    void freeze(int k, const std::vector<double>& y) {
        if (k >= 1) ymid_[k - 1] = 0.5 * (y[k - 1] + y[k]);
    }

    double rhs(int k, double y) const {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) {
            int d = k - j;
            double gauss = 1.0;
            if (d > 1) {  // last sub-interval: y_s ~ y_t, factor pinned at 1
                double dy = y - ymid_[j];
                double denom = (v_.kind == Kernel::mean_rev)
                                   ? 2.0 * p_.sigma * p_.sigma * ws2_[j] * em_[d]
                                   : denom_[d];
                gauss = std::exp(-dy * dy / denom);
            }
            acc += prof_.rate(j) * weight_[j] * gauss * mass_[d];
        }
        if (v_.kind == Kernel::dep_can && p_.lam > 0.0)
            acc += p_.lam * deposition_integral(k, y, kGx4, kGw4, 4);
        return acc / p_.L;
    }

    // int_0^{t_k} erf(y / (2 sqrt(D (t_k - s)))) [w(s)] ds via u = sqrt(t_k-s),
    // Gauss on each sub-interval; the erf form is the centered-Gaussian mass
    // imbalance of the deposition field around the current price.
    double deposition_integral(int k, double y, const double* gx,
                               const double* gw, int gn) const {
        double acc = 0.0;
        double inv2sD = 1.0 / (2.0 * std::sqrt(p_.D));
        for (int d = 1; d <= k; ++d) {
            double u_lo = std::sqrt(dt_ * (d - 1));
            double u_hi = std::sqrt(dt_ * d);
            double half = 0.5 * (u_hi - u_lo), mid = 0.5 * (u_hi + u_lo);
            double sub = 0.0;
            for (int g = 0; g < gn; ++g) {
                double u = mid + half * gx[g];
                double f = 2.0 * u * std::erf(y * inv2sD / u);
                if (v_.weighted_deposition) {
                    double s = dt_ * k - u * u;
                    f *= std::exp(p_.nu.at(s) * s);
                }
                sub += gw[g] * f;
            }
            acc += half * sub;
        }
        return acc;
    }

    int n() const { return n_; }
    double dt() const { return dt_; }

private:
    const ExecutionProfile& prof_;
    const KernelVariant& v_;
    const ModelParams& p_;
    int n_;
    double dt_;
    std::vector<double> mass_, denom_, em_, ws2_, weight_, ymid_;
};

void validate_config(const SolverConfig& c) {
    if (c.n_steps < 2) throw ValidationError("n_steps must be >= 2");
    if (!(c.picard_tol > 0.0))
        throw ValidationError("picard_tol must be positive");
    if (c.picard_max_iter < 1)
        throw ValidationError("picard_max_iter must be >= 1");
    if (!(c.damping > 0.0 && c.damping <= 1.0))
        throw ValidationError("damping must lie in (0, 1]");
}

}  // namespace

KernelVariant KernelVariant::llob(const ModelParams& p) {
    return KernelVariant{Kernel::llob, p, false};
}

KernelVariant KernelVariant::dep_can(const ModelParams& p,
                                     bool weighted_deposition) {
    return KernelVariant{Kernel::dep_can, p, weighted_deposition};
}

KernelVariant KernelVariant::mean_rev(const ModelParams& p) {
    KernelVariant v{Kernel::mean_rev, p, false};
    validate_variant(v);
    return v;
}

ConvergenceError::ConvergenceError(const std::string& msg, int node_index_,
                                   double residual_, int iterations_)
    : std::runtime_error(msg),
      node_index(node_index_),
      residual(residual_),
      iterations(iterations_) {}

ImpactTrajectory solve_impact(const ExecutionProfile& profile,
                              const KernelVariant& variant,
                              const SolverConfig& config) {
    validate_config(config);
    validate_variant(variant);
    ExecutionProfile prof = (profile.n_steps() == config.n_steps)
                                ? profile
                                : resample_to(profile, config.n_steps);
    Marcher march(prof, variant);
    int n = march.n();
    std::vector<double> y(n + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        double yk = y[k - 1];  // warm start from the previous node
        double damp = config.damping;
        double prev_inc = 0.0;
        bool have_prev = false, converged = false;
        int it = 0;
        double inc = 0.0;
        for (it = 1; it <= config.picard_max_iter; ++it) {
            inc = march.rhs(k, yk) - yk;
            if (std::abs(inc) <= config.picard_tol) {
                converged = true;
                break;
            }
            if (have_prev && inc * prev_inc < 0.0) damp *= 0.5;
            yk += damp * inc;
            prev_inc = inc;
            have_prev = true;
        }
        if (!converged) {
            std::ostringstream msg;
            msg << "picard iteration did not converge at node " << k << " (t="
                << prof.t(k) << "): residual " << std::abs(inc) << " after "
                << config.picard_max_iter << " iterations";
            throw ConvergenceError(msg.str(), k, std::abs(inc),
                                   config.picard_max_iter);
        }
        y[k] = yk;
        march.freeze(k, y);
    }
    std::vector<double> cost = running_cost(prof, y);
    std::vector<double> x = y;
    return ImpactTrajectory(prof.T(), std::move(y), std::move(x),
                            std::move(cost));
}

namespace {

double interp_node_series(const std::vector<double>& y, double dt, double s) {
    double r = s / dt;
    int idx = static_cast<int>(r);
    if (idx >= static_cast<int>(y.size()) - 1)
        return y.back();
    if (idx < 0) return y.front();
    double frac = r - idx;
    return y[idx] + frac * (y[idx + 1] - y[idx]);
}

}  // namespace

double residual(const ImpactTrajectory& trajectory,
                const ExecutionProfile& profile,
                const KernelVariant& variant) {
    validate_variant(variant);
    if (profile.n_steps() != trajectory.n_steps() ||
        profile.T() != trajectory.T())
        throw ValidationError("profile and trajectory must share one grid");
    const ModelParams& p = variant.params;
    const std::vector<double>& y = trajectory.y();
    int n = trajectory.n_steps();
    double dt = trajectory.dt();
    Marcher aux(profile, variant);  // only its deposition quadrature is used
    double worst = 0.0;
    for (int k = 1; k <= n; ++k) {
        double tk = dt * k;
        double yk = y[k];
        double acc = 0.0;
        for (int j = 0; j < k; ++j) {
            double sub = 0.0;
            if (variant.kind == Kernel::mean_rev) {
                // theta-substitution absorbs the singular factor exactly:
                // mass element sqrt(2/kappa)/sqrt(2 pi sigma^2) dtheta,
                // s(theta) = t_k + ln(cos theta)/kappa.
                double th_hi = acos_exp_neg(p.kappa * dt * (k - j));
                double th_lo = acos_exp_neg(p.kappa * dt * (k - j - 1));
                double half = 0.5 * (th_hi - th_lo), mid = 0.5 * (th_hi + th_lo);
                for (int g = 0; g < 8; ++g) {
                    double th = mid + half * kGx8[g];
                    double s = tk + std::log(std::cos(th)) / p.kappa;
                    double dy = yk - interp_node_series(y, dt, s);
                    double tn = std::tan(th);
                    double var = p.sigma * p.sigma *
                                 std::exp(2.0 * p.kappa * s) * tn * tn /
                                 p.kappa;
                    sub += kGw8[g] * std::exp(-dy * dy / var);
                }
                sub *= half * std::sqrt(2.0 / p.kappa) /
                       std::sqrt(2.0 * M_PI * p.sigma * p.sigma);
            } else {
                // u = sqrt(t_k - s): kernel ds collapses to 2 du / sqrt(4 pi D)
                double u_hi = std::sqrt(dt * (k - j));
                double u_lo = std::sqrt(dt * (k - j - 1));
                double half = 0.5 * (u_hi - u_lo), mid = 0.5 * (u_hi + u_lo);
                for (int g = 0; g < 8; ++g) {
                    double u = mid + half * kGx8[g];
                    double s = tk - u * u;
                    double w = 1.0;
                    if (variant.kind == Kernel::dep_can)
                        w = std::exp(p.nu.at(s) * s);
                    double dy = yk - interp_node_series(y, dt, s);
                    sub += kGw8[g] * w * std::exp(-dy * dy / (4.0 * p.D * u * u));
                }
                sub *= half * 2.0 / std::sqrt(kFourPi * p.D);
            }
            acc += profile.rate(j) * sub;
        }
        if (variant.kind == Kernel::dep_can && p.lam > 0.0)
            acc += p.lam * aux.deposition_integral(k, yk, kGx8, kGw8, 8);
        worst = std::max(worst, std::abs(yk - acc / p.L));
    }
    return worst;
}

ImpactTrajectory to_original_frame(const ImpactTrajectory& trajectory,
                                   const ReferencePath& path, double kappa) {
    if (kappa < 0.0) throw ValidationError("kappa must be nonnegative");
    if (path.n_steps() != trajectory.n_steps() ||
        std::abs(path.T() - trajectory.T()) >
            1e-12 * std::max(1.0, trajectory.T()))
        throw ValidationError("path and trajectory must share one grid");
    std::vector<double> f = analytic::f_of_t(path, kappa);
    int n = trajectory.n_steps();
    std::vector<double> x(n + 1);
    for (int k = 0; k <= n; ++k)
        x[k] = std::exp(-kappa * trajectory.t(k)) * trajectory.y()[k] + f[k];
    return ImpactTrajectory(trajectory.T(), trajectory.y(), std::move(x),
                            trajectory.cost_running());
}

}  // namespace llob
