#include <cmath>

#include "doctest.h"
#include "fpt/cramer.hpp"
#include "fpt/error.hpp"

using namespace fpt;

namespace {

IncrementModel pm_one(double p) { return IncrementModel::lattice(LatticePMF{1.0, {-1, 1}, {1.0 - p, p}}); }

IncrementModel tilted_model(double atom = 0.4) {
    return IncrementModel::jump(make_tilted(1.0, ParetoLike{4.0, 1.0, 1.0}), 0.25, 0.0, atom);
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an fpt::Error");
    return ErrorCode::InvalidModel;
}

// Plain bisection on a sign change, independent of the library root finder.
double bisection(const std::function<double(double)>& f, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if ((f(mid) > 0) == (f(hi) > 0)) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

double binomial_tail(int n, double p, int k0) {
    double s = 0.0;
    for (int k = k0; k <= n; ++k)
        s += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                      (n - k) * std::log1p(-p));
    return s;
}

}  // namespace

TEST_CASE("tilt for the +-1 walk") {
    CramerSolution s = solve_tilt(pm_one(0.4));
    CHECK(s.alpha == doctest::Approx(std::log(1.5) / 2).epsilon(1e-12));
    CHECK(s.m_alpha == doctest::Approx(2.0 * std::sqrt(0.24)).epsilon(1e-12));
    CHECK(s.gamma == doctest::Approx(-std::log(2.0 * std::sqrt(0.24))).epsilon(1e-12));
    CHECK(s.sigma_hat == doctest::Approx(1.0).epsilon(1e-12));
    double b = bisection([](double a) { return 0.4 * std::exp(a) - 0.6 * std::exp(-a); }, 0.0, 1.0);
    CHECK(std::abs(s.alpha - b) < 1e-12);
    CHECK(s.gamma == -std::log(s.m_alpha));
    CHECK(s.residual <= 1e-12 * std::max(1.0, pm_one(0.4).mgf(s.alpha).d2));
}

TEST_CASE("tilt for M/M/1 agrees between service-side and increment equations") {
    MG1Model q(1.0, ExponentialFamily{2.0});
    CramerSolution a = solve_tilt(q.induced_increment());
    CramerSolution b = solve_tilt_mg1(q);
    CHECK(a.alpha == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
    CHECK(a.gamma == doctest::Approx(3.0 - 2.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::abs(a.alpha - b.alpha) < 1e-10);
    CHECK(std::abs(a.gamma - b.gamma) < 1e-10);
    double root = bisection([](double s) { return 2.0 / ((2.0 - s) * (2.0 - s)) - 1.0; }, 0.0, 1.9);
    CHECK(std::abs(b.alpha - root) < 1e-12);
    // sigma_hat^2 = lambda m_B''(alpha) = 2 * 2 / (2 - alpha)^3.
    CHECK(b.sigma_hat * b.sigma_hat == doctest::Approx(4.0 / std::pow(2.0 - b.alpha, 3)).epsilon(1e-12));
    CHECK(a.sigma_hat == doctest::Approx(b.sigma_hat).epsilon(1e-9));
}

TEST_CASE("exp(-gamma) equals the mgf at alpha for shipped Cramer models") {
    std::vector<IncrementModel> models{pm_one(0.4), pm_one(0.3), MG1Model(1.0, ExponentialFamily{2.0}).induced_increment(),
                                       MG1Model(0.5, ExponentialFamily{1.0}).induced_increment(),
                                       IncrementModel::lattice(LatticePMF{0.5, {-3, -1, 2}, {0.3, 0.4, 0.3}}),
                                       IncrementModel::jump(ExponentialFamily{1.0}, 1.0, 2.0)};
    for (const auto& m : models) {
        CramerSolution s = solve_tilt(m);
        CHECK(std::abs(std::exp(-s.gamma) - m.mgf(s.alpha).value) <= 1e-12);
        CHECK(s.alpha > 0.0);
        CHECK(s.gamma > 0.0);
    }
}

TEST_CASE("tilt is invariant to the lattice encoding") {
    CramerSolution a = solve_tilt(pm_one(0.4));
    CramerSolution b = solve_tilt(IncrementModel::lattice(LatticePMF{0.5, {-2, 2}, {0.6, 0.4}}));
    CramerSolution c = solve_tilt(IncrementModel::lattice(LatticePMF{1.0, {-1, 0, 1}, {0.6, 0.0, 0.4}}));
    CHECK(std::abs(a.alpha - b.alpha) < 1e-10);
    CHECK(std::abs(a.gamma - b.gamma) < 1e-10);
    CHECK(std::abs(a.alpha - c.alpha) < 1e-10);
}

TEST_CASE("solver error routing") {
    CHECK(code_of([] { solve_tilt(pm_one(0.5)); }) == ErrorCode::InvalidDrift);
    CHECK(code_of([] { solve_tilt(IncrementModel::jump(ParetoLike{3.0, 1.0, 0.0}, 1.0, 2.0)); }) == ErrorCode::HeavyTail);
    CHECK(code_of([] { solve_tilt(tilted_model()); }) == ErrorCode::IntermediateCase);
}

TEST_CASE("Petrov tail for the lattice walk") {
    CramerSolution s = solve_tilt(pm_one(0.4));
    PetrovValue p = petrov_tail(s, 100, 0.0, LatticeInfo::of(pm_one(0.4)));
    CHECK(p.lattice_extension);
    CHECK(p.value == doctest::Approx(6.0 * std::exp(-100 * s.gamma) / std::sqrt(200 * M_PI)).epsilon(1e-12));
    CHECK(p.value == doctest::Approx(0.0311).epsilon(0.01));
    double prev = kInf;
    for (long n : {100L, 400L, 1600L}) {
        double gap = std::abs(petrov_tail(s, n, 0.0, LatticeInfo::of(pm_one(0.4))).value / binomial_tail(n, 0.4, n / 2) - 1.0);
        CHECK(gap < prev);
        prev = gap;
    }
}

TEST_SUITE("known_red") {
    TEST_CASE("Petrov tail within five percent of the binomial tail at n = 100") {
        CramerSolution s = solve_tilt(pm_one(0.4));
        PetrovValue p = petrov_tail(s, 100, 0.0, LatticeInfo::of(pm_one(0.4)));
        CHECK(std::abs(p.value / binomial_tail(100, 0.4, 50) - 1.0) < 0.05);
    }
}

TEST_CASE("Petrov formula structure in the non-lattice case") {
    CramerSolution s = solve_tilt(MG1Model(1.0, ExponentialFamily{2.0}).induced_increment());
    for (long n : {1L, 10L, 400L}) {
        PetrovValue p = petrov_tail(s, n, 0.0);
        CHECK_FALSE(p.lattice_extension);
        CHECK(p.value * s.alpha * s.sigma_hat * std::sqrt(2 * M_PI * n) * std::exp(s.gamma * n) ==
              doctest::Approx(1.0).epsilon(1e-13));
        CHECK(petrov_tail(s, n, 1.0).value / p.value == doctest::Approx(std::exp(-s.alpha)).epsilon(1e-13));
        CHECK(petrov_tail(s, n, 2.5).value / p.value == doctest::Approx(std::exp(-2.5 * s.alpha)).epsilon(1e-13));
        CHECK(petrov_tail(s, n + 1, 0.0).value < p.value);
        CHECK(petrov_tail(s, n, 0.1).value < p.value);
    }
}

TEST_CASE("intermediate solution for the tilted heavy model") {
    IntermediateSolution s = solve_intermediate(tilted_model());
    double m = 0.25 * 4.0 / 3.0 + 0.75 * std::exp(-0.4);
    double d1 = 0.25 * 0.5 - 0.75 * 0.4 * std::exp(-0.4);
    CHECK(s.alpha == 1.0);
    CHECK(s.m_alpha == doctest::Approx(m).epsilon(1e-10));
    CHECK(s.gamma == doctest::Approx(-std::log(m)).epsilon(1e-10));
    CHECK(s.delta == doctest::Approx(-d1 / m).epsilon(1e-10));
    CHECK(s.delta > 0.0);
    // Finite-difference cross-check of delta = -(log m)'(alpha) from the left.
    double h = 1e-5;
    double fd = (3 * std::log(tilted_model().mgf(1.0).value) - 4 * std::log(tilted_model().mgf(1.0 - h).value) +
                 std::log(tilted_model().mgf(1.0 - 2 * h).value)) /
                (2 * h);
    CHECK(-fd == doctest::Approx(s.delta).epsilon(1e-6));
    // Gbar(t) = P(J > t) e^{t} / q-weighting: tail of xi is q e^{-t}(1+t)^{-4}.
    CHECK(s.gbar(10.0) == doctest::Approx(0.25 * std::pow(11.0, -4.0)).epsilon(1e-10));
    CHECK(code_of([] { solve_intermediate(tilted_model(4.0)); }) == ErrorCode::CramerInstead);
}

TEST_CASE("intermediate tail formula") {
    IntermediateSolution s = solve_intermediate(tilted_model());
    double n = 200;
    double expect0 = std::exp(-s.gamma * n) / s.m_alpha * n * s.gbar(n * s.delta);
    CHECK(intermediate_tail(s, n, 0.0) == doctest::Approx(expect0).epsilon(1e-12));
    double expect5 = std::exp(-s.gamma * n - 5.0) / s.m_alpha * n * s.gbar(5.0 + n * s.delta);
    CHECK(intermediate_tail(s, n, 5.0) == doctest::Approx(expect5).epsilon(1e-12));
    IntermediateSolution d = s;
    auto base = s.log_gbar;
    d.log_gbar = [base](double t) { return base(t) + std::log(2.0); };
    CHECK(intermediate_tail(d, n, 5.0) == doctest::Approx(2.0 * intermediate_tail(s, n, 5.0)).epsilon(1e-12));
    double edge = -n * s.delta / 2;
    CHECK_NOTHROW(intermediate_tail(s, n, edge + 1e-9));
    CHECK(code_of([&] { intermediate_tail(s, n, edge - 1.0); }) == ErrorCode::OutsideUniformRange);
}
