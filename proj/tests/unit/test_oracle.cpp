#include <cmath>

#include "doctest.h"
#include "fpt/cramer.hpp"
#include "fpt/error.hpp"
#include "fpt/oracle.hpp"

using namespace fpt;

namespace {

double binomial_tail(int n, double p, int k0) {
    double s = 0.0;
    for (int k = k0; k <= n; ++k)
        s += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                      (n - k) * std::log1p(-p));
    return s;
}

// E[exp(alpha N_n); N_n >= -x] by summing over all 2^n paths of the +-1 walk.
double enumerate_min_functional(double p, double alpha, double x, int n) {
    double total = 0.0;
    for (unsigned long mask = 0; mask < (1UL << n); ++mask) {
        long s = 0, mn = 0;
        double prob = 1.0;
        for (int i = 0; i < n; ++i) {
            bool up = (mask >> i) & 1UL;
            s += up ? 1 : -1;
            prob *= up ? p : 1.0 - p;
            mn = std::min(mn, s);
        }
        if (mn >= -x) total += prob * std::exp(alpha * mn);
    }
    return total;
}

}  // namespace

TEST_CASE("distribution of S_n") {
    LatticeWalk w = LatticeWalk::pm_one(0.4);
    ExactDistribution d2 = exact_sn_dist(w, 2);
    CHECK(d2.prob_at_least(0.0) == doctest::Approx(0.64).epsilon(1e-15));
    ExactDistribution d1 = exact_sn_dist(w, 1);
    CHECK(d1.prob_at_least(1.0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(d1.prob_at_least(-1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d1.prob_at_least(-0.5) == doctest::Approx(0.4).epsilon(1e-15));
    ExactDistribution d100 = exact_sn_dist(w, 100);
    CHECK(std::abs(d100.prob_at_least(0.0) - binomial_tail(100, 0.4, 50)) < 1e-12);
    double total = d100.truncated_mass();
    for (double m : d100.masses) total += m;
    CHECK(std::abs(total - 1.0) <= 1e-12 * 100);
    CHECK(std::abs(exact_sn_tail(w, 100, 0.0) - binomial_tail(100, 0.4, 50)) < 1e-12);
    CHECK(std::abs(exact_sn_tail(w, 1000, 10.0) - binomial_tail(1000, 0.4, 505)) < 1e-14);
}

TEST_CASE("direct and transform convolution paths agree inside the oracle") {
    LatticeWalk w = LatticeWalk::from_pmf(LatticePMF{1.0, {-3, -1, 0, 2, 5}, {0.3, 0.3, 0.2, 0.15, 0.05}});
    WindowPolicy direct;
    direct.direct_limit = 1u << 30;
    WindowPolicy fft;
    fft.direct_limit = 1;
    ExactDistribution a = exact_sn_dist(w, 300, direct);
    ExactDistribution b = exact_sn_dist(w, 300, fft);
    REQUIRE(a.masses.size() == b.masses.size());
    for (std::size_t i = 0; i < a.masses.size(); ++i) CHECK(std::abs(a.masses[i] - b.masses[i]) < 1e-12);
}

TEST_CASE("survival behind the barrier") {
    LatticeWalk w = LatticeWalk::pm_one(0.4);
    CHECK(exact_passage(w, 0.0, 0) == 1.0);
    CHECK(exact_passage(w, 0.0, 1) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(exact_passage(w, 0.0, 2) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(exact_passage(w, 0.0, 3) == doctest::Approx(0.4 * 0.4 + 0.4 * 0.6 * 0.4).epsilon(1e-15));
    double prev = 1.0;
    for (long n = 1; n <= 200; n += 7) {
        double v = exact_passage(w, 2.0, n);
        CHECK(v <= prev);
        CHECK(v >= exact_passage(w, 1.0, n));
        prev = v;
    }
}

TEST_CASE("minimum functional") {
    LatticeWalk w = LatticeWalk::pm_one(0.4);
    IncrementModel m = IncrementModel::lattice(LatticePMF{1.0, {-1, 1}, {0.6, 0.4}});
    CramerSolution s = solve_tilt(m);
    CHECK(exact_min_functional(w, s.alpha, 2.0, 0) == 1.0);
    for (long n : {1L, 5L, 30L, 100L})
        for (double x : {0.0, 1.0, 2.0, 5.0})
            CHECK(exact_min_functional(w, 0.0, x, n) == doctest::Approx(exact_passage(w, x, n)).epsilon(1e-13));
    for (int n : {1, 4, 9, 16})
        for (double x : {0.0, 2.0, 3.0})
            CHECK(std::abs(exact_min_functional(w, s.alpha, x, n) - enumerate_min_functional(0.4, s.alpha, x, n)) < 1e-12);
    std::vector<double> T = min_functional_terms(w, s.alpha, s.gamma, 2.0, 60);
    CHECK(T[0] == 1.0);
    for (long k : {1L, 17L, 60L}) {
        CHECK(T[k] == doctest::Approx(std::exp(s.gamma * k) * exact_min_functional(w, s.alpha, 2.0, k)).epsilon(1e-12));
        CHECK(T[k] <= std::exp(s.gamma * k) * exact_passage(w, 2.0, k) * (1 + 1e-12));
    }
}

TEST_CASE("barrier trajectory matches the lumped survival") {
    LatticeWalk w = LatticeWalk::pm_one(0.3);
    BarrierTrajectory t = barrier_trajectory(w, -3, 400);
    for (long n : {0L, 10L, 100L, 400L})
        CHECK(std::exp(t.log_survival[n]) == doctest::Approx(exact_passage(w, 3.0, n)).epsilon(1e-11));
}

TEST_CASE("expected passage index") {
    LatticeWalk w = LatticeWalk::pm_one(0.4);
    // Wald with overshoot exactly -1: E nu_0 * (-0.2) = -1.
    CHECK(std::abs(exact_e_nu(w, 0.0).value - 5.0) < 1e-8);
    // Wald at x = 2: S_nu = -3, so E nu_2 = 15.
    CHECK(std::abs(exact_e_nu(w, 2.0).value - 15.0) < 1e-7);
    CHECK(exact_e_nu(w, 2.0).value > exact_e_nu(w, 0.0).value);
    LatticeWalk down = LatticeWalk::from_pmf(LatticePMF{1.0, {-1}, {1.0}});
    CHECK(exact_e_nu(down, 0.0).value == doctest::Approx(1.0).epsilon(1e-14));
    try {
        exact_e_nu(LatticeWalk::pm_one(0.49999), 0.0);
        FAIL("expected SlowDecay");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SlowDecay);
    }
}
