#include <cmath>

#include "doctest.h"
#include "fpt/error.hpp"
#include "fpt/heavy.hpp"
#include "fpt/oracle.hpp"
#include "fpt/passage.hpp"

using namespace fpt;

namespace {

IncrementModel pm_one(double p) { return IncrementModel::lattice(LatticePMF{1.0, {-1, 1}, {1.0 - p, p}}); }

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an fpt::Error");
    return ErrorCode::InvalidModel;
}

void check_decomposition(const AsymptoticEstimate& e) {
    double rebuilt = e.prefactor.value * e.interpolation_factor * e.tail_part / e.horizon;
    CHECK(e.value == doctest::Approx(rebuilt).epsilon(1e-14));
    CHECK(std::exp(e.log_value) == doctest::Approx(e.value).epsilon(1e-12));
}

}  // namespace

TEST_CASE("subexponential prefactors") {
    CHECK(v_subexp(MG1Model(1.0, ExponentialFamily{2.0}), 2.0).value == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(code_of([] { v_subexp(MG1Model(1.0, ExponentialFamily{2.0}), 0.0); }) == ErrorCode::ZeroLevel);
    PrefactorV v = v_subexp(pm_one(0.4), 0.0);
    CHECK(v.method == PrefactorMethod::ExactOracle);
    CHECK(std::abs(v.value - 5.0) < 1e-8);
}

TEST_CASE("M/G/1 Cramer prefactor") {
    CramerSolution s = solve_tilt_mg1(MG1Model(1.0, ExponentialFamily{2.0}));
    CHECK(s.alpha / s.gamma == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-12));
    PrefactorV v = v_cramer_mg1(s.alpha, s.gamma, 1.0);
    CHECK(v.value == doctest::Approx((2.0 + std::sqrt(2.0)) * std::exp(2.0 - std::sqrt(2.0))).epsilon(1e-12));
    CHECK(v.value == doctest::Approx(6.1334).epsilon(1e-4));
    CHECK(v_cramer_mg1(s.alpha, s.gamma, 0.0).value == 0.0);
    CHECK(code_of([] { v_cramer_mg1(0.0, 0.1, 1.0); }) == ErrorCode::InvalidModel);
}

TEST_CASE("random-walk series prefactor") {
    IncrementModel m = pm_one(0.4);
    CramerSolution s = solve_tilt(m);
    PrefactorV v = v_rw_series(m, s.alpha, s.gamma, 2.0);
    CHECK(v.method == PrefactorMethod::DpSeries);
    CHECK(v.value >= std::exp(2.0 * s.alpha));
    CHECK(v.tolerance_met);
    CHECK(v.decay_exponent == doctest::Approx(-1.5).epsilon(0.05));
    CHECK(v.remainder_bound < 1e-4 * v.value);
    std::vector<double> T = min_functional_terms(LatticeWalk::pm_one(0.4), s.alpha, s.gamma, 2.0, v.truncation_K);
    double partial = 0.0;
    for (double t : T) partial += t;
    CHECK(v.partial_sum == doctest::Approx(std::exp(2.0 * s.alpha) * partial).epsilon(1e-12));
    CHECK(T.back() / partial < 1e-4);
    CHECK(code_of([&] { v_rw_series(m, 0.0, s.gamma, 2.0); }) == ErrorCode::InvalidModel);
}

TEST_CASE("series prefactor decreases its fitted remainder with K") {
    IncrementModel m = pm_one(0.4);
    CramerSolution s = solve_tilt(m);
    SeriesOptions a;
    a.max_K = 2048;
    a.tol = 1e-12;
    SeriesOptions b = a;
    b.max_K = 8192;
    PrefactorV va = v_rw_series(m, s.alpha, s.gamma, 2.0, a);
    PrefactorV vb = v_rw_series(m, s.alpha, s.gamma, 2.0, b);
    CHECK_FALSE(va.tolerance_met);
    CHECK(std::abs(va.value - vb.value) < 1e-3 * vb.value);
    CHECK(vb.remainder < va.remainder);
}

TEST_CASE("random-walk passage estimates") {
    IncrementModel m = pm_one(0.4);
    AsymptoticEstimate e = passage_tail_rw(m, 2.0, 400, RegimeTag::Cramer);
    check_decomposition(e);
    CHECK(e.interpolation_factor == 1.0);
    double r = exact_passage(LatticeWalk::pm_one(0.4), 2.0, 400) / e.value;
    double r100 = exact_passage(LatticeWalk::pm_one(0.4), 2.0, 100) / passage_tail_rw(m, 2.0, 100, RegimeTag::Cramer, e.prefactor).value;
    CHECK(std::abs(r - 1.0) < std::abs(r100 - 1.0));

    IncrementModel heavy = IncrementModel::lattice(LatticePMF{1.0, {-1, 1}, {0.6, 0.4}});
    CHECK(code_of([&] { passage_tail_rw(heavy, 2.0, 100, RegimeTag::HeavyI); }) == ErrorCode::RegimeMismatch);
    IncrementModel pareto = IncrementModel::jump(ParetoLike{3.0, 1.0, 0.0}, 1.0, 2.0);
    CHECK(code_of([&] { passage_tail_rw(pareto, 2.0, 100, RegimeTag::Cramer); }) == ErrorCode::RegimeMismatch);

    PrefactorV V;
    V.value = 7.5;
    V.x = 1.0;
    AsymptoticEstimate h = passage_tail_rw(pareto, 1.0, 1000, RegimeTag::HeavyI, V);
    CHECK(h.value == doctest::Approx(7.5 * pareto.tail(500.0)).epsilon(1e-14));
    check_decomposition(h);
    CHECK(code_of([&] { passage_tail_rw(pareto, 2.0, 1000, RegimeTag::HeavyI, V); }) == ErrorCode::InvalidModel);
}

TEST_CASE("continuous-time passage estimate") {
    MG1Model q(1.0, ExponentialFamily{2.0});
    CramerSolution s = solve_tilt(q.induced_increment());
    AsymptoticEstimate e = passage_tail_levy(q, 1.0, 40.5, RegimeTag::Cramer);
    double expect = v_cramer_mg1(s.alpha, s.gamma, 1.0).value * std::exp(-0.5 * s.gamma) * petrov_tail(s, 40, 0.0).value / 40.5;
    CHECK(e.value == doctest::Approx(expect).epsilon(1e-12));
    CHECK(e.horizon == 40.5);
    check_decomposition(e);
    CHECK(passage_tail_levy(q, 1.0, 40.0, RegimeTag::Cramer).interpolation_factor == 1.0);
    MG1Model h(0.5, ParetoLike{3.0, 1.0, 0.0});
    for (double t : {10.0, 10.3, 10.9}) CHECK(passage_tail_levy(h, 1.0, t, RegimeTag::HeavyI).interpolation_factor == 1.0);
    CHECK(code_of([&] { passage_tail_levy(q, 1.0, 0.5, RegimeTag::Cramer); }) == ErrorCode::InvalidHorizon);
}

TEST_CASE("interpolation factor and Petrov factor interlock at integer t") {
    // Left limit at integer k uses n = k - 1 and factor e^{-gamma}; the Petrov factor supplies
    // e^{-gamma} sqrt((k-1)/k), so the two sides differ only through the sqrt(n) term.
    MG1Model q(1.0, ExponentialFamily{2.0});
    CramerSolution s = solve_tilt(q.induced_increment());
    for (long k : {10L, 40L, 200L}) {
        double left = passage_tail_levy(q, 1.0, std::nextafter(static_cast<double>(k), 0.0), RegimeTag::Cramer).value;
        double right = passage_tail_levy(q, 1.0, static_cast<double>(k), RegimeTag::Cramer).value;
        CHECK(right / left == doctest::Approx(std::sqrt((k - 1.0) / k)).epsilon(1e-9));
        CHECK(petrov_tail(s, k, 0.0).value / petrov_tail(s, k - 1, 0.0).value ==
              doctest::Approx(std::exp(-s.gamma) * std::sqrt((k - 1.0) / k)).epsilon(1e-13));
    }
}

TEST_CASE("busy-period estimates") {
    MG1Model q(1.0, ExponentialFamily{2.0});
    AsymptoticEstimate c = bp_tail(q, 1.0, 30.0, RegimeTag::Cramer);
    check_decomposition(c);
    double a = 2.0 - std::sqrt(2.0), g = 3.0 - 2.0 * std::sqrt(2.0), var = 4.0 / std::pow(2.0 - a, 3);
    double closed = std::exp(a - g * 30.0) / (std::sqrt(2 * M_PI * var) * g * std::pow(30.0, 1.5));
    CHECK(c.value == doctest::Approx(closed).epsilon(1e-12));

    MG1Model h(0.5, ParetoLike{3.0, 1.0, 0.0});
    AsymptoticEstimate e = bp_tail(h, 1.0, 400.0, RegimeTag::HeavyI);
    CHECK(e.value == doctest::Approx(2e-6).epsilon(1e-12));
    check_decomposition(e);
    CHECK(code_of([&] { bp_tail(h, 0.0, 400.0, RegimeTag::HeavyI); }) == ErrorCode::ZeroLevel);
    CHECK(code_of([&] { bp_tail(h, 1.0, 400.0, RegimeTag::Cramer); }) == ErrorCode::RegimeMismatch);
    CHECK(code_of([&] { bp_tail(q, 1.0, 400.0, RegimeTag::HeavyI); }) == ErrorCode::RegimeMismatch);
    CHECK(code_of([&] { bp_tail(q, 1.0, 400.0, RegimeTag::Intermediate); }) == ErrorCode::RegimeMismatch);
}

TEST_CASE("intermediate busy period") {
    MG1Model q(0.5, make_tilted(1.0, ParetoLike{4.0, 1.0, 1.0}));
    IntermediateSolution s = solve_intermediate(q.induced_increment());
    AsymptoticEstimate e = bp_tail(q, 1.0, 50.0, RegimeTag::Intermediate);
    double V = s.alpha / s.gamma * std::exp(s.alpha);
    CHECK(e.value == doctest::Approx(V / s.m_alpha * std::exp(-s.gamma * 50.0) * s.gbar(50.0 * s.delta)).epsilon(1e-10));
    check_decomposition(e);
}

TEST_CASE("HeavyII busy period uses the induced increment") {
    MG1Model q(0.5, WeibullLike{0.6, 1.0});
    AsymptoticEstimate e = bp_tail(q, 1.0, 1e5, RegimeTag::HeavyII);
    HeavyIIResult h = heavy2_tail(q.induced_increment(), 1e5);
    CHECK(e.value == doctest::Approx(1.0 / (1.0 - q.load()) * h.value / 1e5).epsilon(1e-12));
    check_decomposition(e);
}

TEST_SUITE("known_red") {
    TEST_CASE("continuity of the continuous-time estimate at integer t") {
        MG1Model q(1.0, ExponentialFamily{2.0});
        for (double k : {10.0, 40.0}) {
            double left = passage_tail_levy(q, 1.0, std::nextafter(k, 0.0), RegimeTag::Cramer).value;
            double right = passage_tail_levy(q, 1.0, k, RegimeTag::Cramer).value;
            CHECK(std::abs(right / left - 1.0) <= 1e-12);
        }
    }

    TEST_CASE("oracle ratio for the +-1 walk converges to the series prefactor") {
        LatticeWalk w = LatticeWalk::pm_one(0.4);
        IncrementModel m = pm_one(0.4);
        CramerSolution s = solve_tilt(m);
        PrefactorV v = v_rw_series(m, s.alpha, s.gamma, 2.0);
        auto ratio = [&](long n) { return exact_passage(w, 2.0, n) * n / exact_sn_tail(w, n, 0.0); };
        double r800 = ratio(800), r1600 = ratio(1600);
        CHECK(std::abs(r1600 / r800 - 1.0) < 0.01);
        CHECK(std::abs(r1600 / v.value - 1.0) < 0.02);
    }
}
