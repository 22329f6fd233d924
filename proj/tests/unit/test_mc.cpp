#include <cmath>

#include "doctest.h"
#include "fpt/cramer.hpp"
#include "fpt/mc.hpp"
#include "fpt/oracle.hpp"
#include "fpt/passage.hpp"

using namespace fpt;

namespace {

IncrementModel pm_one(double p) { return IncrementModel::lattice(LatticePMF{1.0, {-1, 1}, {1.0 - p, p}}); }

MCOptions opts(std::uint64_t samples, std::uint64_t seed, unsigned workers = 1) {
    MCOptions o;
    o.samples = samples;
    o.rng.seed = seed;
    o.workers = workers;
    return o;
}

bool within(double est, double se, double truth, double k) { return std::abs(est - truth) <= k * se; }

}  // namespace

TEST_CASE("walk passage against Bernoulli and exact values") {
    auto r = simulate_walk_passage(pm_one(0.4), 0.0, {0, 1}, opts(1000000, 1));
    CHECK(r[0].estimate == 1.0);
    CHECK(within(r[1].estimate, r[1].std_error, 0.4, 4));
    CHECK(r[1].std_error == doctest::Approx(std::sqrt(r[1].estimate * (1 - r[1].estimate) / 1e6)).epsilon(1e-12));
    CHECK(r[1].ci_lo == doctest::Approx(r[1].estimate - 1.96 * r[1].std_error));
    auto s = simulate_walk_passage(pm_one(0.4), 2.0, {50}, opts(400000, 2));
    CHECK(within(s[0].estimate, s[0].std_error, exact_passage(LatticeWalk::pm_one(0.4), 2.0, 50), 3));
}

TEST_CASE("reproducibility and worker independence") {
    MG1Model q(1.0, ExponentialFamily{2.0});
    auto a = simulate_bp(q, 1.0, {1.0, 5.0}, opts(300000, 9, 1));
    auto b = simulate_bp(q, 1.0, {1.0, 5.0}, opts(300000, 9, 3));
    auto c = simulate_bp(q, 1.0, {1.0, 5.0}, opts(300000, 10, 1));
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].estimate == b[i].estimate);
        CHECK(a[i].std_error == b[i].std_error);
    }
    CHECK(a[1].estimate != c[1].estimate);
}

TEST_CASE("stream merge equals one partitioned run") {
    const std::uint64_t m = 5000;
    MCOptions whole = opts(4 * m, 77);
    whole.chunk_size = m;
    auto all = walk_passage_stats(pm_one(0.4), 1.0, {3, 20}, whole);
    std::vector<SimStats> merged(2);
    for (std::uint64_t k = 0; k < 4; ++k) {
        MCOptions part = opts(m, 77);
        part.chunk_size = m;
        part.rng.stream = k;
        auto p = walk_passage_stats(pm_one(0.4), 1.0, {3, 20}, part);
        for (std::size_t i = 0; i < 2; ++i) merged[i].merge(p[i]);
    }
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(all[i].n == merged[i].n);
        CHECK(all[i].hits == merged[i].hits);
        CHECK(all[i].sum == merged[i].sum);
    }
}

TEST_CASE("confidence interval coverage") {
    int covered = 0;
    for (int rep = 0; rep < 200; ++rep) {
        auto r = simulate_walk_passage(pm_one(0.4), 0.0, {1}, opts(2000, 1000 + rep));
        covered += r[0].ci_lo <= 0.4 && 0.4 <= r[0].ci_hi;
    }
    CHECK(covered >= 180);
}

TEST_CASE("busy period mean and trivial horizon") {
    MG1Model q(1.0, ExponentialFamily{2.0});
    SimResult m = simulate_bp_mean(q, 1.0, opts(200000, 3));
    CHECK(within(m.estimate, m.std_error, 2.0, 4));
    auto z = simulate_bp(q, 1.0, {0.0}, opts(1000, 3));
    CHECK(z[0].estimate == 1.0);
}

TEST_CASE("tilted busy period is unbiased at shallow t and efficient at deep t") {
    MG1Model q(1.0, ExponentialFamily{2.0});
    CramerSolution s = solve_tilt_mg1(q);
    auto plain = simulate_bp(q, 1.0, {3.0, 8.0}, opts(400000, 5));
    auto tilt = simulate_bp_tilted(q, s, 1.0, {3.0, 8.0}, opts(400000, 6));
    for (std::size_t i = 0; i < 2; ++i) {
        double se = std::hypot(plain[i].std_error, tilt[i].std_error);
        CHECK(std::abs(plain[i].estimate - tilt[i].estimate) <= 3 * se);
        CHECK(tilt[i].estimate > 0.0);
    }
    auto deep_tilt = simulate_bp_tilted(q, s, 1.0, {85.0}, opts(1000000, 7));
    auto deep_plain = simulate_bp(q, 1.0, {85.0}, opts(100000, 7));
    CHECK(bp_tail(q, 1.0, 85.0, RegimeTag::Cramer).value < 3e-8);
    CHECK(deep_tilt[0].std_error / deep_tilt[0].estimate < 0.1);
    CHECK(deep_plain[0].hits == 0);
}

TEST_CASE("tilted and plain walk sums agree") {
    IncrementModel X = MG1Model(1.0, ExponentialFamily{2.0}).induced_increment();
    CramerSolution s = solve_tilt(X);
    auto plain = simulate_walk_sum(X, 0.0, {5, 10}, opts(400000, 8));
    auto tilt = simulate_walk_sum_tilted(X, s.alpha, 0.0, {5, 10}, opts(400000, 9));
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(std::abs(plain[i].estimate - tilt[i].estimate) <= 3 * std::hypot(plain[i].std_error, tilt[i].std_error));
}

TEST_CASE("sampled minimum-functional terms and E nu match the oracle") {
    LatticeWalk w = LatticeWalk::pm_one(0.4);
    CramerSolution s = solve_tilt(pm_one(0.4));
    auto mc = simulate_min_functional_terms(pm_one(0.4), s.alpha, 2.0, 40, opts(200000, 12));
    auto exact = min_functional_terms(w, s.alpha, s.gamma, 2.0, 40);
    for (long k : {0L, 5L, 20L, 40L}) CHECK(within(mc.terms[k].estimate, mc.terms[k].std_error + 1e-15, exact[k], 4));
    double partial = 0.0;
    for (double t : exact) partial += t;
    CHECK(within(mc.partial_sum.estimate, mc.partial_sum.std_error, partial, 4));
    SimResult e = simulate_e_nu(pm_one(0.4), 0.0, opts(200000, 13));
    CHECK(within(e.estimate, e.std_error, 5.0, 4));
}
