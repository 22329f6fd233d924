#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fpt/models.hpp"

namespace fpt {

// Dense lattice walk: P(step = (lo + i) * span) = pmf[i].
struct LatticeWalk {
    double span = 1.0;
    long lo = 0;
    std::vector<double> pmf;

    static LatticeWalk from_pmf(const LatticePMF& p);
    static LatticeWalk from_model(const IncrementModel& m) { return from_pmf(m.pmf()); }
    // +1 w.p. p, -1 otherwise.
    static LatticeWalk pm_one(double p);

    long hi() const { return lo + static_cast<long>(pmf.size()) - 1; }
    double mean() const;
    double variance() const;
};

struct WindowPolicy {
    double sigmas = 12.0;
    // Optional explicit final window in value units; widened to contain both ends.
    std::optional<double> lo;
    std::optional<double> hi;
    std::size_t max_states = 50'000'000;
    std::size_t direct_limit = 512;
};

struct ExactDistribution {
    long n = 0;
    double span = 1.0;
    long lo = 0;  // lattice index of masses[0]
    std::vector<double> masses;
    double mass_below = 0.0;  // P(S_n < lo * span)
    double mass_above = 0.0;  // P(S_n > (lo + size - 1) * span)

    long hi() const { return lo + static_cast<long>(masses.size()) - 1; }
    double truncated_mass() const { return mass_below + mass_above; }
    // P(S_n >= y); throws WindowOverflow when y falls outside the resolved window.
    double prob_at_least(double y) const;
};

ExactDistribution exact_sn_dist(const LatticeWalk& walk, long n, const WindowPolicy& policy = {});

// P(S_n >= y), exact, with the window fitted to the query.
double exact_sn_tail(const LatticeWalk& walk, long n, double y);

// P(nu_x > n), nu_x = min{n >= 1 : S_n < -x}.
double exact_passage(const LatticeWalk& walk, double x, long n, std::size_t max_states = 50'000'000);

// E[exp(alpha N_n); N_n >= -x], N_n = min_{k <= n} S_k.
double exact_min_functional(const LatticeWalk& walk, double alpha, double x, long n,
                            std::size_t max_states = 50'000'000);

// log P(N_k >= barrier * span) for k = 0..K. States whose mass falls below trim_rel of the
// surviving total are dropped from the top of the window; the dropped relative mass is reported.
struct BarrierTrajectory {
    std::vector<double> log_survival;
    double trimmed_relative = 0.0;
};
BarrierTrajectory barrier_trajectory(const LatticeWalk& walk, long barrier, long K, double trim_rel = 1e-40,
                                     std::size_t max_states = 50'000'000);

// T_k = exp(gamma k) E[exp(alpha N_k); N_k >= -x] for k = 0..K.
std::vector<double> min_functional_terms(const LatticeWalk& walk, double alpha, double gamma, double x, long K);

struct ENuResult {
    double value = 0.0;
    long terms = 0;
    double remainder = 0.0;
    double ratio = 0.0;
};

ENuResult exact_e_nu(const LatticeWalk& walk, double x, double rel_tol = 1e-10);

}  // namespace fpt
