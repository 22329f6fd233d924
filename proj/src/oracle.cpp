#include "fpt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fpt/error.hpp"
#include "fpt/numeric.hpp"

namespace fpt {

namespace {

long lattice_index_ceil(double y, double span) { return static_cast<long>(std::ceil(y / span - 1e-9)); }

void check_states(std::size_t size, std::size_t max_states) {
    if (size > max_states) {
        std::ostringstream os;
        os << "window of " << size << " states exceeds the limit " << max_states;
        fail(ErrorCode::WindowOverflow, os.str());
    }
}

ExactDistribution sn_window(const LatticeWalk& walk, long n, long lo_n, long hi_n, std::size_t max_states,
                            std::size_t direct_limit) {
    if (n < 0) fail(ErrorCode::InvalidHorizon, "n must be nonnegative");
    const long L = walk.lo;
    const long M = walk.hi();
    lo_n = std::clamp(lo_n, n * L, n * M);
    hi_n = std::clamp(hi_n, n * L, n * M);
    if (lo_n > hi_n) std::swap(lo_n, hi_n);

    ExactDistribution d;
    d.n = n;
    d.span = walk.span;
    d.lo = 0;
    d.masses = {1.0};
    for (long k = 1; k <= n; ++k) {
        std::vector<double> raw = convolve(d.masses, walk.pmf, direct_limit);
        long raw_lo = d.lo + L;
        // States that can still reach [lo_n, hi_n] in the remaining n - k steps.
        long a = std::max(k * L, lo_n - (n - k) * M);
        long b = std::min(k * M, hi_n - (n - k) * L);
        long keep_lo = std::max(a, raw_lo);
        long keep_hi = std::min(b, raw_lo + static_cast<long>(raw.size()) - 1);
        double below = 0.0, above = 0.0;
        for (long i = raw_lo; i < keep_lo && i < raw_lo + static_cast<long>(raw.size()); ++i) below += raw[i - raw_lo];
        for (long i = std::max(keep_hi + 1, raw_lo); i < raw_lo + static_cast<long>(raw.size()); ++i)
            above += raw[i - raw_lo];
        d.mass_below += below;
        d.mass_above += above;
        if (keep_lo > keep_hi) {
            d.masses.assign(1, 0.0);
            d.lo = a;
        } else {
            d.masses.assign(raw.begin() + (keep_lo - raw_lo), raw.begin() + (keep_hi - raw_lo + 1));
            d.lo = keep_lo;
        }
        check_states(d.masses.size(), max_states);
    }
    return d;
}

// Survival behind a barrier: states >= barrier survive. With lump_horizon > 0, states that cannot
// reach the barrier before that horizon are merged into a single survivor bin (exact).
BarrierTrajectory barrier_run(const LatticeWalk& walk, long barrier, long K, long lump_horizon, double trim_rel,
                              std::size_t max_states) {
    if (barrier > 0) fail(ErrorCode::InvalidModel, "barrier must be at or below the start");
    if (K < 0) fail(ErrorCode::InvalidHorizon, "horizon must be nonnegative");
    const long L = walk.lo;
    BarrierTrajectory out;
    out.log_survival.assign(K + 1, -kInf);
    out.log_survival[0] = 0.0;
    std::vector<double> cur{1.0};
    long base = 0;
    double safe = 0.0;
    double log_scale = 0.0;
    for (long k = 1; k <= K; ++k) {
        std::vector<double> raw = cur.empty() ? std::vector<double>{} : convolve(cur, walk.pmf);
        long raw_lo = base + L;
        long start = std::max(barrier, raw_lo);
        if (raw.empty() || start > raw_lo + static_cast<long>(raw.size()) - 1) {
            cur.clear();
        } else {
            cur.assign(raw.begin() + (start - raw_lo), raw.end());
            base = start;
        }
        if (lump_horizon > 0 && L < 0 && !cur.empty()) {
            long safe_from = barrier - (lump_horizon - k) * L;
            while (!cur.empty() && base + static_cast<long>(cur.size()) - 1 >= safe_from) {
                safe += cur.back();
                cur.pop_back();
            }
        }
        double total = safe + std::accumulate(cur.begin(), cur.end(), 0.0);
        if (trim_rel > 0.0) {
            while (cur.size() > 1 && cur.back() < trim_rel * total) {
                out.trimmed_relative += cur.back() / total;
                total -= cur.back();
                cur.pop_back();
            }
        }
        if (!(total > 0.0)) break;
        log_scale += std::log(total);
        for (double& v : cur) v /= total;
        safe /= total;
        out.log_survival[k] = log_scale;
        check_states(cur.size(), max_states);
    }
    return out;
}

}  // namespace

LatticeWalk LatticeWalk::from_pmf(const LatticePMF& p) {
    if (p.offsets.empty() || p.offsets.size() != p.masses.size())
        fail(ErrorCode::InvalidModel, "lattice offsets and masses must be nonempty and of equal length");
    LatticeWalk w;
    w.span = p.span;
    long lo = *std::min_element(p.offsets.begin(), p.offsets.end());
    long hi = *std::max_element(p.offsets.begin(), p.offsets.end());
    w.lo = lo;
    w.pmf.assign(hi - lo + 1, 0.0);
    for (std::size_t i = 0; i < p.offsets.size(); ++i) {
        if (!(p.masses[i] >= 0.0)) fail(ErrorCode::InvalidModel, "negative lattice mass");
        w.pmf[p.offsets[i] - lo] += p.masses[i];
    }
    double total = std::accumulate(w.pmf.begin(), w.pmf.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-12) fail(ErrorCode::InvalidModel, "lattice masses must sum to 1");
    return w;
}

LatticeWalk LatticeWalk::pm_one(double p) { return from_pmf(LatticePMF{1.0, {-1, 1}, {1.0 - p, p}}); }

double LatticeWalk::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) m += pmf[i] * static_cast<double>(lo + static_cast<long>(i));
    return m * span;
}

double LatticeWalk::variance() const {
    double mu = mean() / span;
    double v = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        double d = static_cast<double>(lo + static_cast<long>(i)) - mu;
        v += pmf[i] * d * d;
    }
    return v * span * span;
}

double ExactDistribution::prob_at_least(double y) const {
    long k0 = lattice_index_ceil(y, span);
    if (k0 < lo) {
        if (mass_below > 0.0) fail(ErrorCode::WindowOverflow, "query below the resolved window");
        k0 = lo;
    }
    if (k0 > hi()) {
        if (mass_above > 0.0) fail(ErrorCode::WindowOverflow, "query above the resolved window");
        return 0.0;
    }
    double s = mass_above;
    for (long i = hi(); i >= k0; --i) s += masses[i - lo];
    return s;
}

ExactDistribution exact_sn_dist(const LatticeWalk& walk, long n, const WindowPolicy& policy) {
    if (n < 1) fail(ErrorCode::InvalidHorizon, "exact_sn_dist needs n >= 1");
    double mu = n * walk.mean() / walk.span;
    double sd = std::sqrt(n * walk.variance()) / walk.span;
    long lo_n = static_cast<long>(std::floor(mu - policy.sigmas * sd));
    long hi_n = static_cast<long>(std::ceil(mu + policy.sigmas * sd));
    if (policy.lo) lo_n = std::min(lo_n, static_cast<long>(std::floor(*policy.lo / walk.span + 1e-9)));
    if (policy.hi) hi_n = std::max(hi_n, lattice_index_ceil(*policy.hi, walk.span));
    return sn_window(walk, n, lo_n, hi_n, policy.max_states, policy.direct_limit);
}

double exact_sn_tail(const LatticeWalk& walk, long n, double y) {
    if (n == 0) return y <= 0.0 ? 1.0 : 0.0;
    long k0 = lattice_index_ceil(y, walk.span);
    ExactDistribution d = sn_window(walk, n, k0, k0, 50'000'000, 512);
    return d.prob_at_least(y);
}

double exact_passage(const LatticeWalk& walk, double x, long n, std::size_t max_states) {
    if (x < 0.0) fail(ErrorCode::InvalidModel, "level x must be nonnegative");
    if (n <= 0) return 1.0;
    long b = lattice_index_ceil(-x, walk.span);
    BarrierTrajectory t = barrier_run(walk, b, n, n, 0.0, max_states);
    return std::exp(t.log_survival[n]);
}

BarrierTrajectory barrier_trajectory(const LatticeWalk& walk, long barrier, long K, double trim_rel,
                                     std::size_t max_states) {
    return barrier_run(walk, barrier, K, 0, trim_rel, max_states);
}

double exact_min_functional(const LatticeWalk& walk, double alpha, double x, long n, std::size_t max_states) {
    if (x < 0.0) fail(ErrorCode::InvalidModel, "level x must be nonnegative");
    if (alpha < 0.0) fail(ErrorCode::InvalidModel, "alpha must be nonnegative");
    if (n <= 0) return 1.0;
    long bx = lattice_index_ceil(-x, walk.span);
    // Summation by parts: e^{a b h} P_b + sum_{j > b} (e^{a j h} - e^{a (j-1) h}) P_j, all terms >= 0.
    double s = 0.0;
    for (long j = bx; j <= 0; ++j) {
        double p = std::exp(barrier_run(walk, j, n, n, 0.0, max_states).log_survival[n]);
        double w = j == bx ? std::exp(alpha * j * walk.span)
                           : std::exp(alpha * j * walk.span) * -std::expm1(-alpha * walk.span);
        s += w * p;
    }
    return s;
}

std::vector<double> min_functional_terms(const LatticeWalk& walk, double alpha, double gamma, double x, long K) {
    long bx = lattice_index_ceil(-x, walk.span);
    std::vector<double> T(K + 1, 0.0);
    for (long j = bx; j <= 0; ++j) {
        BarrierTrajectory tr = barrier_trajectory(walk, j, K);
        double lw = j == bx ? alpha * j * walk.span : alpha * j * walk.span + std::log(-std::expm1(-alpha * walk.span));
        if (alpha == 0.0 && j != bx) continue;
        for (long k = 0; k <= K; ++k) T[k] += std::exp(lw + gamma * k + tr.log_survival[k]);
    }
    T[0] = 1.0;  // N_0 = 0; the telescoped sum only rounds to 1
    return T;
}

ENuResult exact_e_nu(const LatticeWalk& walk, double x, double rel_tol) {
    if (!(walk.mean() < 0.0)) fail(ErrorCode::InvalidDrift, "E nu_x needs negative drift");
    long b = lattice_index_ceil(-x, walk.span);
    for (long K = 1024; K <= (1L << 24); K *= 2) {
        BarrierTrajectory t = barrier_trajectory(walk, b, K);
        ENuResult r;
        double sum = 0.0;
        long last = 0;
        for (long k = 0; k <= K; ++k) {
            if (t.log_survival[k] == -kInf) break;
            sum += std::exp(t.log_survival[k]);
            last = k;
        }
        r.terms = last + 1;
        if (last < K) {
            r.value = sum;
            return r;
        }
        double ratio = std::exp(0.5 * (t.log_survival[K] - t.log_survival[K - 2]));
        r.ratio = ratio;
        if (ratio > 0.9999) {
            std::ostringstream os;
            os << "two-step decay ratio " << ratio << " exceeds 0.9999";
            fail(ErrorCode::SlowDecay, os.str());
        }
        r.remainder = std::exp(t.log_survival[K]) * ratio / (1.0 - ratio);
        r.value = sum + r.remainder;
        if (r.remainder <= rel_tol * r.value) return r;
    }
    fail(ErrorCode::SlowDecay, "E nu_x series did not settle");
}

}  // namespace fpt
