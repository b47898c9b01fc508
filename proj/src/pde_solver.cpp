#include "llob/pde_solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "llob/analytic.hpp"

namespace llob::pde {

namespace {

std::string msg_with_step(const std::string& msg, int step) {
    std::ostringstream os;
    os << msg << " (step " << step << ")";
    return os.str();
}

}  // namespace

SimError::SimError(const std::string& msg, int step_index_, double value_)
    : std::runtime_error(msg), step_index(step_index_), value(value_) {}

void validate(const GridSpec& g) {
    if (!(g.M > 0.0) || !std::isfinite(g.M))
        throw ValidationError("M must be positive");
    if (g.P < 8 || g.P % 2 != 0)
        throw ValidationError("P must be even and >= 8");
    if (!(g.dT > 0.0) || !std::isfinite(g.dT))
        throw ValidationError("dT must be positive");
}

BookState make_linear_book(const GridSpec& g, double slope) {
    validate(g);
    return BookState::linear(g.M, g.P, slope);
}

BookState cn_step(const BookState& state, const ModelParams& p, double B_now,
                  double dT, bool centered) {
    if (!(dT > 0.0) || !std::isfinite(dT))
        throw ValidationError("dT must be positive");
    if (!std::isfinite(B_now)) throw ValidationError("B must be finite");
    const std::vector<double>& u = state.phi();
    int P = state.P();
    double dx = state.dx();
    double rD = dT * p.D / (dx * dx);
    double ca = dT * p.kappa / dx;

    std::vector<double> rhs(P + 1);
    rhs[0] = u[0];
    rhs[P] = u[P];
    for (int i = 1; i < P; ++i) {
        double diff = 0.5 * rD * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
        double adv = 0.0;
        if (p.kappa != 0.0) {
            double vel = state.x(i) - B_now;
            adv = centered ? 0.5 * ca * vel * (u[i + 1] - u[i - 1])
                           : ca * vel * (u[i + 1] - u[i]);
        }
        rhs[i] = u[i] + diff + adv;
    }

    // Thomas sweep for (I - rD/2 * A), boundary rows identity.
    std::vector<double> c(P + 1), d(P + 1), out(P + 1);
    c[0] = 0.0;
    d[0] = rhs[0];
    double lo = -0.5 * rD, di = 1.0 + rD;
    for (int i = 1; i < P; ++i) {
        double m = 1.0 / (di - lo * c[i - 1]);
        c[i] = lo * m;
        d[i] = (rhs[i] - lo * d[i - 1]) * m;
    }
    c[P] = 0.0;
    d[P] = rhs[P];
    out[P] = d[P];
    for (int i = P - 1; i >= 0; --i) out[i] = d[i] - c[i] * out[i + 1];
    return state.with_phi(std::move(out), state.t() + dT);
}

BookState apply_source_terms(const BookState& state, const ModelParams& p,
                             double price_now, double dT) {
    if (!(dT > 0.0) || !std::isfinite(dT))
        throw ValidationError("dT must be positive");
    // the step spans [t - dT, t]; the cancellation rate is read at its start
    double nu = p.nu.at(std::max(0.0, state.t() - dT));
    double lam = p.lam;
    if (nu == 0.0 && lam == 0.0) return state;
    std::vector<double> phi = state.phi();
    int P = state.P();
    double decay = std::exp(-nu * dT);
    for (int i = 1; i < P; ++i) {
        double xi = state.x(i);
        double sgn = price_now > xi ? 1.0 : (price_now < xi ? -1.0 : 0.0);
        if (nu > 0.0) {
            double target = lam * sgn / nu;  // fixed point of the split ODE
            phi[i] = target + (phi[i] - target) * decay;
        } else {
            phi[i] += dT * lam * sgn;
        }
    }
    return state.with_phi(std::move(phi), state.t());
}

double extract_price(const BookState& state, double prev_price) {
    const std::vector<double>& u = state.phi();
    int P = state.P();
    double dx = state.dx();
    bool found = false;
    double best = 0.0, best_dist = std::numeric_limits<double>::infinity();
    auto consider = [&](double z) {
        double dist = std::abs(z - prev_price);
        if (!found || dist < best_dist || (dist == best_dist && z < best)) {
            best = z;
            best_dist = dist;
            found = true;
        }
    };
    for (int i = 0; i <= P; ++i)
        if (u[i] == 0.0) consider(state.x(i));
    for (int i = 0; i < P; ++i)
        if (u[i] * u[i + 1] < 0.0)
            consider(state.x(i) + dx * u[i] / (u[i] - u[i + 1]));
    if (!found) throw SimError("book one-sided: no zero crossing", -1);
    return best;
}

ConsumeResult consume_metaorder(const BookState& state, double volume,
                                double price_now) {
    if (!std::isfinite(volume)) throw ValidationError("volume must be finite");
    if (volume == 0.0) return {state, 0.0, price_now};
    std::vector<double> phi = state.phi();
    int P = state.P();
    double dx = state.dx();
    int dir = volume > 0.0 ? 1 : -1;
    double rem = std::abs(volume);
    double edge = price_now;
    // first grid node strictly on the opposing side of the price
    int i;
    if (dir > 0)
        i = static_cast<int>(std::floor((price_now + state.M()) / dx)) + 1;
    else
        i = static_cast<int>(std::ceil((price_now + state.M()) / dx)) - 1;
    for (; i >= 0 && i <= P; i += dir) {
        double opposing = dir > 0 ? -phi[i] : phi[i];
        if (opposing <= 0.0) {
            // nothing executable: the sweep passes through the whole cell
            edge = state.x(i) + dir * 0.5 * dx;
            continue;
        }
        double capacity = dx * opposing;
        if (capacity >= rem) {
            phi[i] += dir * rem / dx;
            edge = state.x(i) + dir * dx * (rem / capacity - 0.5);
            rem = 0.0;
            break;
        }
        rem -= capacity;
        phi[i] = 0.0;
        edge = state.x(i) + dir * 0.5 * dx;
    }
    if (rem > 0.0) {
        std::ostringstream os;
        os << "metaorder exhausted the opposing book: shortfall " << rem;
        throw SimError(os.str(), -1, rem);
    }
    return {state.with_phi(std::move(phi), state.t()), std::abs(volume), edge};
}

namespace {

BookState mollified_inject(const BookState& state, double volume,
                           double price_now) {
    std::vector<double> phi = state.phi();
    int P = state.P();
    double dx = state.dx();
    std::vector<double> g(P + 1, 0.0);
    double sum = 0.0;
    for (int i = 1; i < P; ++i) {
        double z = (state.x(i) - price_now) / dx;
        g[i] = std::exp(-0.5 * z * z);
        sum += g[i];
    }
    // discrete normalization: sum_i add_i * dx == volume exactly
    for (int i = 1; i < P; ++i) phi[i] += volume * g[i] / (sum * dx);
    return state.with_phi(std::move(phi), state.t());
}

}  // namespace

SimRun simulate(const BookState& init, const ModelParams& p,
                const ExecutionProfile& profile, const ReferencePath& path,
                const SimOptions& opt) {
    if (profile.n_steps() != path.n_steps() ||
        std::abs(profile.T() - path.T()) > 1e-12 * std::max(1.0, path.T()))
        throw ValidationError("profile and path must share one grid");
    if (opt.snapshot_stride < 0)
        throw ValidationError("snapshot_stride must be nonnegative");
    int n = path.n_steps();
    double dT = path.dt();

    SimRun run;
    run.t.resize(n + 1);
    run.price.resize(n + 1);
    run.B = path.values();
    run.f = analytic::f_of_t(path, p.kappa);

    BookState st = init;
    double price = extract_price(st, 0.0);
    run.t[0] = 0.0;
    run.price[0] = price;
    if (opt.snapshot_stride > 0) run.snapshots.push_back(st);

    for (int k = 0; k < n; ++k) {
        st = cn_step(st, p, path.values()[k], dT, opt.centered_advection);
        if (opt.sources) st = apply_source_terms(st, p, price, dT);
        double vol = profile.rate(k) * dT;
        if (vol != 0.0) {
            if (opt.mollified_injection) {
                st = mollified_inject(st, vol, price);
                run.ledger.push_back({k, vol, vol});
            } else {
                try {
                    ConsumeResult r = consume_metaorder(st, vol, price);
                    st = std::move(r.state);
                    run.ledger.push_back({k, vol, r.consumed});
                    // a block trade can leave a run of empty cells; anchor
                    // the extraction where consumption stopped, not behind it
                    price = r.price_after;
                } catch (const SimError& e) {
                    throw SimError(msg_with_step(e.what(), k), k, e.value);
                }
            }
        }
        try {
            price = extract_price(st, price);
        } catch (const SimError& e) {
            throw SimError(msg_with_step(e.what(), k), k, e.value);
        }
        if (std::abs(price) > opt.boundary_guard * st.M())
            throw SimError(
                msg_with_step("price entered the boundary guard band", k), k,
                price);
        run.t[k + 1] = path.t(k + 1);
        run.price[k + 1] = price;
        if (opt.snapshot_stride > 0 && (k + 1) % opt.snapshot_stride == 0)
            run.snapshots.push_back(st);
    }
    return run;
}

}  // namespace llob::pde
