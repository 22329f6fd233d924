#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "fpt/error.hpp"
#include "fpt/heavy.hpp"

using namespace fpt;

namespace {

UserAnalytic power_g(double c, double beta) {
    UserAnalytic u;
    u.index = beta;
    u.g = [c, beta](double y) { return y > 0 ? c * std::pow(y, beta) : 0.0; };
    u.g1 = [c, beta](double y) { return y > 0 ? c * beta * std::pow(y, beta - 1) : 0.0; };
    u.g2 = [c, beta](double y) { return y > 0 ? c * beta * (beta - 1) * std::pow(y, beta - 2) : 0.0; };
    return u;
}

// Standardized Weibull-type test law: g(y) = y^0.6, mean -1, variance 1, kappa3 = 1.
IncrementModel weibull_std() { return IncrementModel::declared(power_g(1.0, 0.6), -1.0, 1.0, 1.0, 0.0); }

UserAnalytic pareto_g(double p, double shift_log = 0.0) {
    UserAnalytic u;
    u.g = [p, shift_log](double y) { return y > 1 ? p * std::log(y) + shift_log : shift_log; };
    u.g1 = [p](double y) { return y > 1 ? p / y : 0.0; };
    u.g2 = [p](double y) { return y > 1 ? -p / (y * y) : 0.0; };
    return u;
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

double R_direct(double n, double t, double lambda0, double y) {
    double g = std::pow(y - 1.0, 0.6);
    return g + (t - y) * (t - y) / (2 * n) - lambda0 * std::pow(t - y, 3) / (n * n);
}

}  // namespace

TEST_CASE("HeavyI plug-in formula") {
    IncrementModel m = IncrementModel::declared(pareto_g(3.0), -0.5, 4.0);
    CHECK(heavy1_tail(m, 1000) == doctest::Approx(8e-6).epsilon(1e-12));
    CHECK(code_of([&] { heavy1_tail(m, 0); }) == ErrorCode::InvalidHorizon);
    IncrementModel half = IncrementModel::declared(pareto_g(3.0, std::log(2.0)), -0.5, 4.0);
    for (double n : {10.0, 100.0, 1000.0}) CHECK(heavy1_tail(half, n) == doctest::Approx(0.5 * heavy1_tail(m, n)).epsilon(1e-12));
    MG1Model q(0.5, ParetoLike{3.0, 1.0, 0.0});
    IncrementModel X = q.induced_increment();
    for (double n : {100.0, 400.0}) CHECK(heavy1_tail(X, n) == doctest::Approx(n * 0.5 * std::pow(0.25 * n, -3.0)).epsilon(1e-10));
}

TEST_CASE("k from the tail index") {
    CHECK(compute_k(0.6) == 1);
    CHECK(compute_k(0.7) == 2);
    CHECK(code_of([] { compute_k(0.8); }) == ErrorCode::Unsupported);
    CHECK(code_of([] { compute_k(0.4); }) == ErrorCode::Unsupported);
}

TEST_CASE("Cramer series coefficients") {
    CHECK(cramer_series_from_cumulants(0.0, 0.0, 1)[0] == 0.0);
    CHECK(cramer_series_from_cumulants(1.0, 0.0, 1)[0] == doctest::Approx(1.0 / 6.0));
    CHECK(cramer_series_from_cumulants(0.0, 0.0, 2)[1] == 0.0);
    CHECK(cramer_series_from_cumulants(1.0, 2.0, 2)[1] == doctest::Approx((2.0 - 3.0) / 24.0));
    IncrementModel nok3 = IncrementModel::declared(power_g(1.0, 0.6), -1.0, 1.0);
    CHECK(code_of([&] { cramer_series(nok3, 1); }) == ErrorCode::MissingCumulant);
}

TEST_CASE("Cramer series sign agrees with an exact Gamma tail") {
    // xi = Exp(1) - 1 standardized: kappa3 = 2, so S_n + n ~ Gamma(n, 1).
    IncrementModel e = IncrementModel::jump(ExponentialFamily{1.0}, 1.0, 1.0);
    std::vector<double> lam = cramer_series(e, 1);
    CHECK(lam[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
    const double n = 50;
    for (double x : {12.0, 15.0, 20.0}) {
        double exact = boost::math::gamma_q(n, n + x);
        HeavyIIContext ctx;
        ctx.g = ctx.g1 = ctx.g2 = [](double) { return 0.0; };
        ctx.n = n;
        ctx.t = x;
        ctx.k = 1;
        ctx.lambda = lam;
        double shipped = std::exp(-R_eval(ctx, 0.0).r);
        ctx.lambda = {-lam[0]};
        double flipped = std::exp(-R_eval(ctx, 0.0).r);
        // Mills-ratio prefactor of the Gaussian tail at x / sqrt(n).
        double z = x / std::sqrt(n);
        double pref = std::erfc(z / std::sqrt(2.0)) / 2.0 * std::exp(z * z / 2);
        CHECK(std::abs(std::log(pref * shipped / exact)) < std::abs(std::log(pref * flipped / exact)));
        if (x == 12.0) CHECK(std::abs(pref * shipped / exact - 1.0) < 0.1);
    }
}

TEST_CASE("R evaluation") {
    HeavyIIContext ctx = make_heavy2_context(weibull_std(), 1e4);
    CHECK(ctx.a == 1.0);
    CHECK(ctx.sigma == 1.0);
    CHECK(ctx.t == 1e4);
    CHECK(ctx.k == 1);
    REQUIRE(ctx.lambda.size() == 1);
    CHECK(ctx.lambda[0] == doctest::Approx(1.0 / 6.0));
    RValue at_t = R_eval(ctx, ctx.t);
    CHECK(at_t.r == doctest::Approx(ctx.g_std(ctx.t)).epsilon(1e-15));
    CHECK(at_t.d1 == doctest::Approx(ctx.g_std1(ctx.t)).epsilon(1e-15));
    double y = 0.9 * ctx.t;
    CHECK(R_eval(ctx, y).r == doctest::Approx(R_direct(1e4, 1e4, 1.0 / 6.0, y)).epsilon(1e-12));
    double h = 1e-3;
    CHECK(R_eval(ctx, y).d1 ==
          doctest::Approx((R_direct(1e4, 1e4, 1.0 / 6.0, y + h) - R_direct(1e4, 1e4, 1.0 / 6.0, y - h)) / (2 * h))
              .epsilon(1e-6));

    HeavyIIContext flat = ctx;
    flat.g = flat.g1 = flat.g2 = [](double) { return 0.0; };
    flat.lambda = {0.0};
    for (double v : {0.0, 100.0, 5000.0}) CHECK(R_eval(flat, v).r == doctest::Approx((flat.t - v) * (flat.t - v) / 2e4));
}

TEST_CASE("eta for pure powers") {
    auto g = [](double y) { return std::pow(y, 0.6); };
    auto g2 = [](double y) { return 2 * std::pow(y, 0.6); };
    CHECK(eta(g, 100.0) == doctest::Approx(std::pow(100.0, 5.0 / 7.0)).epsilon(1e-9));
    CHECK(eta(g, 100.0) == doctest::Approx(26.827).epsilon(1e-4));
    CHECK(eta(g, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(eta(g2, 100.0) == doctest::Approx(std::pow(200.0, 5.0 / 7.0)).epsilon(1e-9));
    CHECK(eta(g2, 100.0) == doctest::Approx(43.94).epsilon(2e-3));
}

TEST_CASE("Newton iteration") {
    HeavyIIContext ctx = make_heavy2_context(weibull_std(), 1e4);
    NewtonResult r = newton_y(ctx);
    REQUIRE(r.iterates.size() >= 3);
    CHECK(r.iterates[0] == ctx.t);
    CHECK(r.iterates[1] == doctest::Approx(ctx.t - ctx.n * ctx.g_std1(ctx.t)).epsilon(1e-14));
    CHECK(r.j_min_reached);
    CHECK(r.residual <= 1e-6);
    CHECK(r.y_final <= ctx.t - std::sqrt(ctx.n) * (1 - 1e-6));
    for (std::size_t j = 2; j + 1 < r.iterates.size(); ++j)
        CHECK(std::abs(r.iterates[j + 1] - r.iterates[j]) <= std::abs(r.iterates[j] - r.iterates[j - 1]));

    // Grid minimum over [sqrt(n), t], refined by golden section.
    double lo = std::sqrt(ctx.n), hi = ctx.t, best = lo, bestR = R_eval(ctx, lo).r;
    const int N = 1000000;
    for (int i = 0; i <= N; ++i) {
        double y = lo + (hi - lo) * i / N;
        double v = R_eval(ctx, y).r;
        if (v < bestR) bestR = v, best = y;
    }
    double a = best - (hi - lo) / N, b = best + (hi - lo) / N;
    for (int i = 0; i < 200; ++i) {
        double m1 = a + (b - a) * 0.381966, m2 = b - (b - a) * 0.381966;
        if (R_eval(ctx, m1).r < R_eval(ctx, m2).r) b = m2;
        else a = m1;
    }
    CHECK(r.y_final == doctest::Approx(0.5 * (a + b)).epsilon(1e-6));

    HeavyIIContext flat = ctx;
    flat.g = flat.g1 = flat.g2 = [](double) { return 0.0; };
    flat.lambda = {0.0};
    NewtonOptions o;
    o.check_validity = false;
    NewtonResult f = newton_y(flat, o);
    CHECK(f.y_final == flat.t);
    CHECK(f.residual == 0.0);
}

TEST_CASE("root shift leaves R unchanged") {
    HeavyIIContext ctx = make_heavy2_context(weibull_std(), 1e5);
    NewtonResult r = newton_y(ctx);
    RValue at = R_eval(ctx, r.y_final);
    // Bisect R' to the exact stationary point, then step to both edges of |R'| sqrt(n) <= 1e-8.
    double step = 10.0 * std::abs(at.d1 / at.d2) + 1.0;
    double a = r.y_final - step, b = r.y_final + step;
    REQUIRE(R_eval(ctx, a).d1 * R_eval(ctx, b).d1 < 0.0);
    for (int i = 0; i < 200; ++i) {
        double m = 0.5 * (a + b);
        if ((R_eval(ctx, m).d1 < 0.0) == (R_eval(ctx, a).d1 < 0.0)) a = m;
        else b = m;
    }
    double root = 0.5 * (a + b);
    double dy = 0.9e-8 / (std::sqrt(ctx.n) * std::abs(R_eval(ctx, root).d2));
    for (double y : {root + dy, root - dy, r.y_final}) {
        if (std::abs(R_eval(ctx, y).d1) * std::sqrt(ctx.n) > 1e-8) continue;
        CHECK(std::abs(R_eval(ctx, y).r - at.r) <= 1e-6);
    }
    CHECK(std::abs(R_eval(ctx, root).r - at.r) <= 1e-6);
}

TEST_CASE("heavy2 tail composition, validity and insensitivity") {
    IncrementModel m = weibull_std();
    HeavyIIResult h = heavy2_tail(m, 1e4);
    CHECK(h.value == doctest::Approx(1e4 * std::exp(-R_eval(h.ctx, h.newton.y_final).r)).epsilon(1e-14));
    CHECK(code_of([&] { heavy2_tail(m, 3); }) == ErrorCode::ValidityViolated);
    double prev = kInf;
    for (double n : {1e3, 1e4, 1e5}) {
        double d = std::abs(heavy2_tail(m, n).log_value - heavy2_tail(m, n, std::pow(n, 0.3)).log_value);
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("Weibull expansion") {
    IncrementModel m = weibull_std();
    WeibullExpansion w = weibull_expansion(m, 1e5);
    REQUIRE(w.exponents.size() == 2);
    CHECK(w.exponents[0] == doctest::Approx(0.2));
    CHECK(w.D[0] > 0.0);
    for (double n : {1e4, 3e4, 1e5, 4e5, 1e6}) {
        double direct = heavy2_tail(m, n).log_value;
        CHECK(std::abs(std::expm1(weibull_reconstruct(w, 1.0, n) - direct)) < 0.005);
    }
    IncrementModel w4 = IncrementModel::declared(power_g(1.0, 0.4), -1.0, 1.0, 1.0, 0.0);
    CHECK_THROWS_AS(weibull_expansion(w4, 1e5), Error);
}
