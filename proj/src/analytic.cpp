#include "llob/analytic.hpp"

#include <cmath>

namespace llob::analytic {

namespace {

struct GaussRule {
    std::vector<double> x, w;  // nodes/weights on [-1, 1]
};

// Gauss-Legendre nodes by Newton iteration on the Legendre recurrence.
GaussRule gauss_legendre(int n) {
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        g.x[i] = x;
        g.w[i] = w;
        g.x[n - 1 - i] = -x;
        g.w[n - 1 - i] = w;
    }
    return g;
}

const GaussRule& rule64() {
    static const GaussRule g = gauss_legendre(64);
    return g;
}

const double kSqrtPi = std::sqrt(M_PI);

// Shared fixed-point machinery for the amplitude equation. After
// u = 1 - v^2 and v = cos(theta) the integral becomes
//   (1/sqrt(pi)) int_0^{pi/2} sin(theta) exp(-A^2 q(theta)) dtheta,
//   q = (1 - sin)/(4 (1 + sin)),
// an analytic integrand that 64-node Gauss resolves to machine precision.
double amplitude_integral(double A, bool derivative) {
    const GaussRule& g = rule64();
    double half = M_PI / 4.0;  // map [-1,1] -> [0, pi/2]
    double acc = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        double theta = half * (g.x[i] + 1.0);
        double s = std::sin(theta);
        double q = (1.0 - s) / (4.0 * (1.0 + s));
        double f = s * std::exp(-A * A * q);
        if (derivative) f *= -2.0 * A * q;
        acc += g.w[i] * f;
    }
    return acc * half / kSqrtPi;
}

void require_rate_ratio(double r) {
    if (!std::isfinite(r) || r <= 0.0)
        throw ValidationError("m0_over_J must be positive");
}

}  // namespace

double self_similar_rhs(double A, double m0_over_J) {
    require_rate_ratio(m0_over_J);
    return m0_over_J * amplitude_integral(A, false);
}

double self_similar_residual(double A, double m0_over_J) {
    return std::abs(A - self_similar_rhs(A, m0_over_J));
}

SelfSimilarFit solve_A(double m0_over_J) {
    require_rate_ratio(m0_over_J);
    const double r = m0_over_J;
    auto G = [r](double A) { return A - r * amplitude_integral(A, false); };
    double lo = 0.0;
    double hi = std::sqrt(2.0 * r) + 1.0;
    // rhs is decreasing in A and rhs(0) = r/sqrt(pi) > 0, so G(0) < 0; the
    // upper end sits beyond the large-rate asymptote but is re-checked.
    while (G(hi) <= 0.0) hi *= 2.0;
    for (int it = 0; it < 120; ++it) {
        double mid = 0.5 * (lo + hi);
        if (G(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-14 * hi) break;
    }
    double A = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {  // Newton polish inside the bracket
        double gp = 1.0 - r * amplitude_integral(A, true);
        double step = G(A) / gp;
        double next = A - step;
        if (!(next > lo && next < hi)) break;
        A = next;
    }
    return {A, Regime::exact_root};
}

SelfSimilarFit amplitude(double m0_over_J, Regime regime) {
    require_rate_ratio(m0_over_J);
    switch (regime) {
        case Regime::exact_root:
            return solve_A(m0_over_J);
        case Regime::small_rate:
            return {m0_over_J / kSqrtPi, Regime::small_rate};
        case Regime::large_rate:
            return {std::sqrt(2.0 * m0_over_J), Regime::large_rate};
    }
    throw ValidationError("unknown regime");
}

double stationary_phi_llob(double y, const ModelParams& p) {
    if (!p.nu.is_constant() || p.nu.values()[0] <= 0.0)
        throw ValidationError("nu must be a positive constant for the stationary shape");
    double nu = p.nu.values()[0];
    double gamma = std::sqrt(nu / p.D);
    double mag = (p.lam / nu) * (-std::expm1(-gamma * std::abs(y)));
    return y >= 0.0 ? -mag : mag;
}

double stationary_phi_mr(double y, const ModelParams& p, double c0, double c1) {
    if (p.kappa <= 0.0) throw ValidationError("kappa must be positive");
    // int_{-inf}^y exp(-kappa x^2/sigma^2) dx via the error function
    double cum = 0.5 * p.sigma * std::sqrt(M_PI / p.kappa) *
                 (1.0 + std::erf(y * std::sqrt(p.kappa) / p.sigma));
    return c0 + c1 * cum;
}

double heat_kernel(double y, double tau, const ModelParams& p) {
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    double nu = p.nu.at(0.0);
    return std::exp(-nu * tau) / std::sqrt(4.0 * M_PI * p.D * tau) *
           std::exp(-y * y / (4.0 * p.D * tau));
}

double C_of(double s, double t, double kappa) {
    if (s > t) throw ValidationError("C_of requires s <= t");
    if (kappa < 0.0) throw ValidationError("kappa must be nonnegative");
    if (kappa == 0.0) return t - s;
    return std::exp(2.0 * kappa * s) * std::expm1(2.0 * kappa * (t - s)) /
           (2.0 * kappa);
}

double impact_small_rate(double t, double m0, const ModelParams& p) {
    if (t < 0.0) throw ValidationError("t must be nonnegative");
    return (m0 / p.J) * std::sqrt(p.D * t) / kSqrtPi;
}

double impact_large_rate(double Q, const ModelParams& p) {
    if (Q < 0.0) throw ValidationError("Q must be nonnegative");
    return std::sqrt(2.0 * Q / p.L);
}

std::vector<double> linear_propagator_llob(const ExecutionProfile& profile,
                                           const ModelParams& p) {
    int n = profile.n_steps();
    double dt = profile.dt();
    std::vector<double> y(n + 1, 0.0);
    // mass[d] = int over one step of the square-root kernel at lag d steps
    std::vector<double> mass(n + 1, 0.0);
    for (int d = 1; d <= n; ++d)
        mass[d] = 2.0 * (std::sqrt(dt * d) - std::sqrt(dt * (d - 1)));
    double c = 1.0 / (p.L * std::sqrt(4.0 * M_PI * p.D));
    for (int k = 1; k <= n; ++k) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) acc += profile.rate(j) * mass[k - j];
        y[k] = c * acc;
    }
    return y;
}

double arcsine_propagator(double t, double m0, const ModelParams& p) {
    if (p.kappa <= 0.0) throw ValidationError("kappa must be positive");
    if (t < 0.0) throw ValidationError("t must be nonnegative");
    // pi/2 - arcsin(e^{-kappa t}) = 2 arcsin(sqrt((1 - e^{-kappa t})/2)),
    // kept in the right-hand form so small kappa*t loses no precision.
    double one_minus = -std::expm1(-p.kappa * t);
    double angle = 2.0 * std::asin(std::sqrt(0.5 * one_minus));
    return m0 / (p.L * p.sigma * std::sqrt(p.kappa * M_PI)) * angle;
}

double arcsine_plateau(double m0, const ModelParams& p) {
    if (p.kappa <= 0.0) throw ValidationError("kappa must be positive");
    return m0 / (p.L * p.sigma * std::sqrt(p.kappa * M_PI)) * (M_PI / 2.0);
}

double cost_constant_rate(double m0, double T, const ModelParams& p,
                          Regime regime) {
    if (!(m0 > 0.0)) throw ValidationError("m0 must be positive");
    if (!(T > 0.0)) throw ValidationError("T must be positive");
    double A = amplitude(m0 / p.J, regime).A;
    return (2.0 / 3.0) * A * m0 * std::sqrt(p.D) * T * std::sqrt(T);
}

double rescaled_volume(const ExecutionProfile& profile,
                       const PiecewiseRate& nu) {
    double acc = 0.0;
    double dt = profile.dt();
    for (int j = 0; j < profile.n_steps(); ++j)
        acc += profile.rate(j) * nu.exp_weight_integral(dt * j, dt * (j + 1));
    return acc;
}

double mispricing_variance(double kappa, double t) {
    if (kappa < 0.0) throw ValidationError("kappa must be nonnegative");
    if (t < 0.0) throw ValidationError("t must be nonnegative");
    if (kappa == 0.0) return t;
    return -std::expm1(-2.0 * kappa * t) / (2.0 * kappa);
}

std::vector<double> f_of_t(const ReferencePath& path, double kappa) {
    if (kappa < 0.0) throw ValidationError("kappa must be nonnegative");
    int n = path.n_steps();
    std::vector<double> f(n + 1, 0.0);
    double decay = std::exp(-kappa * path.dt());
    for (int k = 0; k < n; ++k)
        f[k + 1] = f[k] * decay + path.values()[k] * (1.0 - decay);
    return f;
}

}  // namespace llob::analytic
