#pragma once
// Direct finite-difference simulation of the latent-book density. One time
// step combines, in order: a Crank-Nicolson diffusion step with an explicit
// first-order advection term for the mean-reverting drift, an exact split
// sub-step for deposition/cancellation sources, metaorder execution against
// the opposing side of the book, and price extraction by sign change.
// Boundary rows are pinned to the initial far-field values.

#include <stdexcept>
#include <string>
#include <vector>

#include "llob/model.hpp"

namespace llob::pde {

struct GridSpec {
    double M;   ///< half-width of the price domain [-M, M]
    int P;      ///< number of intervals (even, >= 8)
    double dT;  ///< time step
};

void validate(const GridSpec& g);

/// Linear initial book phi = -slope * x on the grid, far field pinned.
BookState make_linear_book(const GridSpec& g, double slope);

struct SimOptions {
    bool sources = false;             ///< apply deposition/cancellation split step
    bool mollified_injection = false; ///< deposit the child order as a Gaussian
                                      ///< of width dx at the price instead of
                                      ///< consuming opposing cells
    bool centered_advection = false;  ///< centered first difference (accuracy
                                      ///< studies); default forward difference
    int snapshot_stride = 0;          ///< keep every k-th state (0 = none)
    double boundary_guard = 0.9;      ///< abort when |price| > guard * M
};

struct ConsumptionRecord {
    int step;
    double requested;
    double consumed;
};

/// Simulation output. Snapshots are buffered during stepping and handed off
/// at the end; emission never blocks the stepping loop.
struct SimRun {
    std::vector<double> t;       ///< node times, 0..n
    std::vector<double> price;   ///< extracted trade price per node
    std::vector<double> B;       ///< reference path per node
    std::vector<double> f;       ///< tracking frame per node
    std::vector<BookState> snapshots;
    std::vector<ConsumptionRecord> ledger;
};

class SimError : public std::runtime_error {
public:
    SimError(const std::string& msg, int step_index, double value = 0.0);
    int step_index;
    double value;
};

/// One Crank-Nicolson step of the diffusion plus explicit advection by the
/// reversion drift toward B_now. Boundary rows are identity (values pinned).
BookState cn_step(const BookState& state, const ModelParams& p, double B_now,
                  double dT, bool centered = false);

/// Exact integration over dT of the split source ODE
/// d(phi)/dt = lam * sign(price_now - x) - nu(t) * phi on interior nodes.
BookState apply_source_terms(const BookState& state, const ModelParams& p,
                             double price_now, double dT);

/// Zero of the book by linear interpolation across sign changes; with
/// several candidates, the one nearest prev_price wins (tie: lower).
/// Throws SimError("book one-sided") when no zero crossing exists.
double extract_price(const BookState& state, double prev_price = 0.0);

struct ConsumeResult {
    BookState state;
    double consumed;
    /// Where the marginal consumption stopped; the natural anchor for the
    /// next price extraction. Equals price_now for a zero volume.
    double price_after;
};

/// Execute |volume| against the opposing side of the book cell-by-cell,
/// starting at the first node strictly beyond price_now (above for buys,
/// below for sells). Each cell holds dx * |phi_i|; the final cell is
/// consumed partially. Exhausting the grid throws SimError carrying the
/// unfilled shortfall.
ConsumeResult consume_metaorder(const BookState& state, double volume,
                                double price_now);

/// Full simulation across the path grid (profile and path must share it).
/// Per step: cn_step -> sources -> metaorder -> extract_price.
SimRun simulate(const BookState& init, const ModelParams& p,
                const ExecutionProfile& profile, const ReferencePath& path,
                const SimOptions& opt);

}  // namespace llob::pde
