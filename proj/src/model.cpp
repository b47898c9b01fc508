#include "llob/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace llob {

namespace {

void require_finite(double v, const char* field) {
    if (!std::isfinite(v))
        throw ValidationError(std::string(field) + " must be finite");
}

void require_all_finite(const std::vector<double>& v, const char* field) {
    for (double x : v) require_finite(x, field);
}

// exp-integral primitive on one constant-rate piece:
// int_a^b exp(w0 + r*(s - s0)) ds with the rate r anchored at s0.
double exp_piece_integral(double w0, double r, double s0, double a, double b) {
    if (r == 0.0) return std::exp(w0) * (b - a);
    // exp(w0 + r(b-s0)) - exp(w0 + r(a-s0)) over r, written via expm1 so the
    // small-r limit degrades gracefully to (b-a).
    double base = std::exp(w0 + r * (a - s0));
    return base * std::expm1(r * (b - a)) / r;
}

}  // namespace

PiecewiseRate::PiecewiseRate(double constant_value)
    : start_{0.0}, value_{constant_value} {
    if (!std::isfinite(constant_value) || constant_value < 0.0)
        throw ValidationError("nu must be finite and nonnegative");
}

PiecewiseRate::PiecewiseRate(std::vector<double> starts,
                             std::vector<double> values)
    : start_(std::move(starts)), value_(std::move(values)) {
    if (start_.empty() || start_.size() != value_.size())
        throw ValidationError("nu pieces must pair one start with one value");
    if (start_.front() != 0.0)
        throw ValidationError("nu pieces must start at t = 0");
    for (std::size_t i = 0; i < start_.size(); ++i) {
        require_finite(start_[i], "nu piece start");
        if (i > 0 && start_[i] <= start_[i - 1])
            throw ValidationError("nu piece starts must be strictly increasing");
        if (!std::isfinite(value_[i]) || value_[i] < 0.0)
            throw ValidationError("nu must be finite and nonnegative");
    }
}

double PiecewiseRate::at(double t) const {
    auto it = std::upper_bound(start_.begin(), start_.end(), t);
    std::size_t idx = (it == start_.begin()) ? 0 : (it - start_.begin() - 1);
    return value_[idx];
}

double PiecewiseRate::integral(double t) const {
    if (t <= 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < start_.size(); ++i) {
        double lo = start_[i];
        if (lo >= t) break;
        double hi = (i + 1 < start_.size()) ? std::min(start_[i + 1], t) : t;
        acc += value_[i] * (hi - lo);
    }
    return acc;
}

double PiecewiseRate::exp_weight_integral(double a, double b) const {
    if (b < a) throw ValidationError("exp_weight_integral requires b >= a");
    if (a < 0.0) throw ValidationError("exp_weight_integral requires a >= 0");
    double acc = 0.0;
    for (std::size_t i = 0; i < start_.size(); ++i) {
        double lo = start_[i];
        double hi = (i + 1 < start_.size())
                        ? start_[i + 1]
                        : std::numeric_limits<double>::infinity();
        double lo_c = std::max(lo, a), hi_c = std::min(hi, b);
        if (lo_c >= hi_c) continue;
        acc += exp_piece_integral(integral(lo), value_[i], lo, lo_c, hi_c);
    }
    return acc;
}

ModelParams make_params(double sigma, double kappa, double lam,
                        PiecewiseRate nu, double L) {
    require_finite(sigma, "sigma");
    if (sigma <= 0.0) throw ValidationError("sigma must be positive");
    require_finite(kappa, "kappa");
    if (kappa < 0.0) throw ValidationError("kappa must be nonnegative");
    require_finite(lam, "lam");
    if (lam < 0.0) throw ValidationError("lam must be nonnegative");
    require_finite(L, "L");
    if (L <= 0.0) throw ValidationError("L must be positive");
    ModelParams p;
    p.sigma = sigma;
    p.D = sigma * sigma / 2.0;
    p.kappa = kappa;
    p.lam = lam;
    p.nu = std::move(nu);
    p.L = L;
    p.J = L * p.D;
    return p;
}

ModelParams make_params(double sigma, double kappa, double lam,
                        double nu_constant, double L) {
    return make_params(sigma, kappa, lam, PiecewiseRate(nu_constant), L);
}

ExecutionProfile::ExecutionProfile(double T, std::vector<double> m)
    : T_(T), m_(std::move(m)) {
    if (!std::isfinite(T) || T <= 0.0)
        throw ValidationError("T must be positive");
    if (m_.size() < 2)
        throw ValidationError("m must cover at least one step (n_steps >= 1)");
    require_all_finite(m_, "m");
}

ExecutionProfile ExecutionProfile::constant(double m0, double T, int n_steps) {
    if (n_steps < 1) throw ValidationError("n_steps must be >= 1");
    return ExecutionProfile(T, std::vector<double>(n_steps + 1, m0));
}

ExecutionProfile ExecutionProfile::round_trip(double m0, double t_switch,
                                              double T, int n_steps) {
    if (n_steps < 1) throw ValidationError("n_steps must be >= 1");
    if (!(t_switch > 0.0 && t_switch < T))
        throw ValidationError("t_switch must lie strictly inside (0, T)");
    std::vector<double> m(n_steps + 1);
    double dt = T / n_steps;
    for (int k = 0; k <= n_steps; ++k)
        m[k] = (dt * k < t_switch) ? m0 : -m0;
    return ExecutionProfile(T, std::move(m));
}

ExecutionProfile ExecutionProfile::ramp(double m0, double T, int n_steps) {
    if (n_steps < 1) throw ValidationError("n_steps must be >= 1");
    std::vector<double> m(n_steps + 1);
    for (int k = 0; k <= n_steps; ++k)
        m[k] = m0 * static_cast<double>(k) / n_steps;
    return ExecutionProfile(T, std::move(m));
}

double ExecutionProfile::cumulative_volume(int k) const {
    if (k < 0 || k > n_steps())
        throw ValidationError("cumulative_volume node index out of range");
    double acc = 0.0;
    for (int j = 0; j < k; ++j) acc += m_[j];
    return acc * dt();
}

NormalStream::NormalStream(std::uint64_t seed) : gen_(seed) {}

double NormalStream::next() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // u1 in (0,1], u2 in [0,1); 2^-53 spacing keeps log(u1) finite.
    double u1 = 1.0 - (gen_() >> 11) * 0x1.0p-53;
    double u2 = (gen_() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

ReferencePath::ReferencePath(double T, std::vector<double> B,
                             std::optional<std::uint64_t> seed)
    : T_(T), B_(std::move(B)), seed_(seed) {
    if (!std::isfinite(T) || T <= 0.0)
        throw ValidationError("T must be positive");
    if (B_.size() < 2)
        throw ValidationError("B must cover at least one step (n_steps >= 1)");
    require_all_finite(B_, "B");
}

ReferencePath ReferencePath::zero(double T, int n_steps) {
    if (n_steps < 1) throw ValidationError("n_steps must be >= 1");
    return ReferencePath(T, std::vector<double>(n_steps + 1, 0.0));
}

ReferencePath brownian_path(double T, int n_steps, double vol,
                            std::uint64_t seed, double offset) {
    if (n_steps < 1) throw ValidationError("n_steps must be >= 1");
    if (!std::isfinite(vol) || vol < 0.0)
        throw ValidationError("vol must be finite and nonnegative");
    if (!std::isfinite(offset)) throw ValidationError("offset must be finite");
    if (!std::isfinite(T) || T <= 0.0)
        throw ValidationError("T must be positive");
    NormalStream z(seed);
    std::vector<double> B(n_steps + 1);
    B[0] = offset;
    double step_sd = vol * std::sqrt(T / n_steps);
    for (int k = 1; k <= n_steps; ++k) B[k] = B[k - 1] + step_sd * z.next();
    return ReferencePath(T, std::move(B), seed);
}

BookState::BookState(double M, std::vector<double> phi, double t)
    : M_(M), phi_(std::move(phi)), t_(t) {
    if (!std::isfinite(M) || M <= 0.0)
        throw ValidationError("M must be positive");
    if (phi_.size() < 5)
        throw ValidationError("phi must have P >= 4 intervals");
    require_all_finite(phi_, "phi");
    require_finite(t, "t");
}

BookState BookState::linear(double M, int P, double slope, double t) {
    if (P < 4) throw ValidationError("phi must have P >= 4 intervals");
    if (!std::isfinite(slope) || slope <= 0.0)
        throw ValidationError("slope must be positive");
    std::vector<double> phi(P + 1);
    double dx = 2.0 * M / P;
    for (int i = 0; i <= P; ++i) phi[i] = -slope * (-M + dx * i);
    return BookState(M, std::move(phi), t);
}

BookState BookState::with_phi(std::vector<double> phi, double t) const {
    if (phi.size() != phi_.size())
        throw ValidationError("phi replacement must keep the grid size");
    return BookState(M_, std::move(phi), t);
}

ImpactTrajectory::ImpactTrajectory(double T, std::vector<double> y,
                                   std::vector<double> x,
                                   std::vector<double> cost_running)
    : T_(T), y_(std::move(y)), x_(std::move(x)), cost_(std::move(cost_running)) {
    if (!std::isfinite(T) || T <= 0.0)
        throw ValidationError("T must be positive");
    if (y_.size() < 2 || y_.size() != x_.size() || y_.size() != cost_.size())
        throw ValidationError("y, x and cost_running must share one grid");
    if (y_.front() != 0.0 || x_.front() != 0.0)
        throw ValidationError("y and x must start at 0");
    require_all_finite(y_, "y");
    require_all_finite(x_, "x");
    require_all_finite(cost_, "cost_running");
}

ExecutionProfile resample_to(const ExecutionProfile& profile, int n_steps) {
    if (n_steps < 1) throw ValidationError("n_steps must be >= 1");
    int n_old = profile.n_steps();
    std::vector<double> m(n_steps + 1);
    for (int k = 0; k <= n_steps; ++k) {
        // node time is k*T/n; the covering old node index is exact in
        // integer arithmetic: floor(k * n_old / n)
        long long idx = static_cast<long long>(k) * n_old / n_steps;
        m[k] = profile.rate(static_cast<int>(idx));
    }
    return ExecutionProfile(profile.T(), std::move(m));
}

std::vector<double> running_cost(const ExecutionProfile& profile,
                                 const std::vector<double>& y) {
    if (y.size() != profile.rates().size())
        throw ValidationError("y must share the profile grid");
    std::vector<double> cost(y.size());
    double dt = profile.dt();
    double acc = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        acc += profile.rate(static_cast<int>(k)) * y[k];
        cost[k] = acc * dt;
    }
    return cost;
}

}  // namespace llob
