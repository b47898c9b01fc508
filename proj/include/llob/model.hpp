#pragma once
// Core value types shared by the impact solvers: model parameter bundles,
// execution schedules, reference price paths, book snapshots and solved
// impact trajectories. Everything is an immutable value object validated on
// construction; validation failures throw ValidationError naming the field.
//
// Conventions used throughout the library:
//  - all time grids are uniform, t_k = k * (T / n), k = 0..n
//  - rates given per node are treated as step functions, constant on
//    [t_j, t_{j+1})
//  - the desk scale is dimensionless: prices, volumes and times are in
//    model units

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace llob {

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Nonnegative piecewise-constant rate on [0, inf), right-continuous.
/// Piece i holds values()[i] on [starts()[i], starts()[i+1]); starts()[0] == 0.
class PiecewiseRate {
public:
    PiecewiseRate() : PiecewiseRate(0.0) {}
    explicit PiecewiseRate(double constant_value);
    PiecewiseRate(std::vector<double> starts, std::vector<double> values);

    double at(double t) const;
    /// int_0^t rate(u) du, exact per piece.
    double integral(double t) const;
    /// int_a^b exp(integral(s)) ds, exact per piece (b >= a >= 0).
    double exp_weight_integral(double a, double b) const;

    bool is_constant() const { return value_.size() == 1; }
    const std::vector<double>& starts() const { return start_; }
    const std::vector<double>& values() const { return value_; }
    bool operator==(const PiecewiseRate&) const = default;

private:
    std::vector<double> start_;
    std::vector<double> value_;
};

/// Model parameter bundle. sigma/D and L/J are tied pairs: D and J are
/// always derived (D = sigma^2/2, J = L*D), never stored independently.
struct ModelParams {
    double sigma = 1.0;   ///< price volatility of the latent diffusion
    double D = 0.5;       ///< price diffusivity, always sigma^2/2
    double kappa = 0.0;   ///< mean-reversion rate of the book frame (0 = none)
    double lam = 0.0;     ///< order deposition rate per unit price
    PiecewiseRate nu;     ///< order cancellation rate, piecewise constant in t
    double L = 1.0;       ///< book slope near the trade price
    double J = 0.5;       ///< trading-rate scale, always L*D
};

/// Validating factory for ModelParams; the only supported way to build one.
ModelParams make_params(double sigma, double kappa, double lam,
                        PiecewiseRate nu, double L);
ModelParams make_params(double sigma, double kappa, double lam,
                        double nu_constant, double L);

/// Execution schedule on a uniform grid: node k at t_k = k*T/n, trading
/// rate m held constant on [t_j, t_{j+1}) at the node-j value. The node-n
/// value exists for reporting but enters no integral.
class ExecutionProfile {
public:
    ExecutionProfile(double T, std::vector<double> m);

    static ExecutionProfile constant(double m0, double T, int n_steps);
    /// +m0 on [0, t_switch), -m0 from t_switch on.
    static ExecutionProfile round_trip(double m0, double t_switch, double T,
                                       int n_steps);
    /// linear ramp from 0 at t=0 to m0 at t=T.
    static ExecutionProfile ramp(double m0, double T, int n_steps);

    double T() const { return T_; }
    int n_steps() const { return static_cast<int>(m_.size()) - 1; }
    double dt() const { return T_ / n_steps(); }
    double t(int k) const { return dt() * k; }
    double rate(int j) const { return m_[j]; }
    const std::vector<double>& rates() const { return m_; }
    /// dt * sum_{j<k} m_j: volume done strictly before t_k.
    double cumulative_volume(int k) const;
    bool operator==(const ExecutionProfile&) const = default;

private:
    double T_;
    std::vector<double> m_;
};

/// Portable standard-normal stream: mt19937_64 output mapped to uniforms by
/// (x >> 11) * 2^-53 and transformed with Box-Muller (both variates of each
/// pair are consumed). Chosen over std::normal_distribution so a seed pins
/// the stream bit-exactly; the algorithm is part of the contract.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed);
    double next();

private:
    std::mt19937_64 gen_;  // output sequence is pinned by the standard
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// Reference (fundamental) price path sampled on a uniform grid.
class ReferencePath {
public:
    ReferencePath(double T, std::vector<double> B,
                  std::optional<std::uint64_t> seed = {});

    static ReferencePath zero(double T, int n_steps);

    double T() const { return T_; }
    int n_steps() const { return static_cast<int>(B_.size()) - 1; }
    double dt() const { return T_ / n_steps(); }
    double t(int k) const { return dt() * k; }
    const std::vector<double>& values() const { return B_; }
    std::optional<std::uint64_t> seed() const { return seed_; }

private:
    double T_;
    std::vector<double> B_;
    std::optional<std::uint64_t> seed_;
};

/// Arithmetic Brownian path: B_0 = offset, increments N(0, vol^2 * dt) drawn
/// from NormalStream(seed). Same seed, same grid => bit-identical path.
ReferencePath brownian_path(double T, int n_steps, double vol,
                            std::uint64_t seed, double offset = 0.0);

/// Signed latent-book density sampled on the symmetric grid
/// x_i = -M + i * (2M/P), i = 0..P. Positive density = net bids.
class BookState {
public:
    BookState(double M, std::vector<double> phi, double t);

    /// phi = -slope * x; carries the linear far-field pins
    /// phi[0] = +slope*M, phi[P] = -slope*M.
    static BookState linear(double M, int P, double slope, double t = 0.0);

    double M() const { return M_; }
    int P() const { return static_cast<int>(phi_.size()) - 1; }
    double dx() const { return 2.0 * M_ / P(); }
    double x(int i) const { return -M_ + dx() * i; }
    const std::vector<double>& phi() const { return phi_; }
    double t() const { return t_; }

    /// Value-preserving update helpers (the type itself stays immutable).
    BookState with_phi(std::vector<double> phi, double t) const;

private:
    double M_;
    std::vector<double> phi_;
    double t_;
};

/// Solved impact path on a uniform grid: y is the impact in the working
/// (co-moving) frame, x the price in the original frame, cost_running the
/// fixed discrete cost functional dt * sum_{j<=k} m_j * y_j.
class ImpactTrajectory {
public:
    ImpactTrajectory(double T, std::vector<double> y, std::vector<double> x,
                     std::vector<double> cost_running);

    double T() const { return T_; }
    int n_steps() const { return static_cast<int>(y_.size()) - 1; }
    double dt() const { return T_ / n_steps(); }
    double t(int k) const { return dt() * k; }
    const std::vector<double>& y() const { return y_; }
    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& cost_running() const { return cost_; }
    double total_cost() const { return cost_.back(); }

private:
    double T_;
    std::vector<double> y_, x_, cost_;
};

/// cost_running series for a given impact series: dt * sum_{j<=k} m_j * y_j.
std::vector<double> running_cost(const ExecutionProfile& profile,
                                 const std::vector<double>& y);

/// Step-interpolated resampling onto n_steps uniform steps over the same
/// horizon: each new node takes the profile's step value at the latest old
/// node not after it.
ExecutionProfile resample_to(const ExecutionProfile& profile, int n_steps);

}  // namespace llob
