#include "fpt/cramer.hpp"

#include <cmath>
#include <sstream>

#include "fpt/error.hpp"

namespace fpt {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Hybrid Newton/bisection for the increasing function d on [lo, hi] with d(lo) < 0 < d(hi).
template <class F>
double hybrid_root(F eval, double lo, double hi, double tol_scale, int& iterations, double& residual) {
    double x = 0.5 * (lo + hi);
    for (iterations = 1; iterations <= 500; ++iterations) {
        auto [d, dd] = eval(x);
        residual = std::abs(d);
        if (residual <= 1e-12 * std::max(1.0, std::abs(dd) * tol_scale)) return x;
        if (d < 0) lo = x;
        else hi = x;
        double next = (dd > 0 && std::isfinite(dd)) ? x - d / dd : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * x) {
            x = next;
            residual = std::abs(eval(x).first);
            return x;
        }
        x = next;
    }
    fail(ErrorCode::NoConvergence, "tilt root search did not converge");
}

}  // namespace

CramerSolution solve_tilt(const IncrementModel& model) {
    if (!(model.mean() < 0.0)) {
        std::ostringstream os;
        os << "mean " << model.mean() << " is not negative";
        fail(ErrorCode::InvalidDrift, os.str());
    }
    double smax = model.mgf_domain_sup();
    if (smax == 0.0) fail(ErrorCode::HeavyTail, "mgf is infinite for every positive argument");

    double s = std::isfinite(smax) ? std::min(1.0, smax / 2.0) : 1.0;
    double cap = std::isfinite(smax) ? 0.999999 * smax : kInf;
    double lo = 0.0;
    double hi = 0.0;
    for (int i = 0;; ++i) {
        MgfValue m = model.mgf(s);
        if (!m.finite()) fail(ErrorCode::NoBracket, "mgf overflowed during bracket search");
        if (m.d1 >= 0.0) {
            hi = s;
            break;
        }
        lo = s;
        if (s >= cap) fail(ErrorCode::IntermediateCase, "m' < 0 up to the edge of the mgf domain");
        s = std::min(2.0 * s, cap);
        if (i > 2000) fail(ErrorCode::NoBracket, "no sign change of m' found");
    }

    CramerSolution sol;
    sol.bracket = {lo, hi};
    auto eval = [&](double x) {
        MgfValue m = model.mgf(x);
        return std::pair<double, double>(m.d1, m.d2);
    };
    if (model.mgf(hi).d1 == 0.0) {
        sol.alpha = hi;
        sol.iterations = 0;
        sol.residual = 0.0;
    } else {
        sol.alpha = hybrid_root(eval, lo, hi, 1.0, sol.iterations, sol.residual);
    }
    MgfValue m = model.mgf(sol.alpha);
    sol.m_alpha = m.value;
    sol.gamma = -std::log(m.value);
    sol.sigma_hat = std::sqrt(m.d2 / m.value);
    sol.residual = std::abs(m.d1);
    return sol;
}

CramerSolution solve_tilt_mg1(const MG1Model& mg1) {
    if (mg1.load() >= 1.0) fail(ErrorCode::UnstableSystem, "load >= 1");
    double lambda = mg1.arrival_rate();
    double smax = jump::mgf_sup(mg1.service());
    if (smax == 0.0) fail(ErrorCode::HeavyTail, "service mgf is infinite for every positive argument");
    // lambda m_B'(s) - 1 is increasing; find its root.
    double s = std::isfinite(smax) ? std::min(1.0, smax / 2.0) : 1.0;
    double cap = std::isfinite(smax) ? 0.999999 * smax : kInf;
    double lo = 0.0, hi = 0.0;
    for (int i = 0;; ++i) {
        MgfValue b = mg1.service_mgf(s);
        if (!b.finite()) fail(ErrorCode::NoBracket, "service mgf overflowed during bracket search");
        if (lambda * b.d1 - 1.0 >= 0.0) {
            hi = s;
            break;
        }
        lo = s;
        if (s >= cap) fail(ErrorCode::IntermediateCase, "lambda m_B' < 1 up to the edge of the mgf domain");
        s = std::min(2.0 * s, cap);
        if (i > 2000) fail(ErrorCode::NoBracket, "no root of lambda m_B' = 1 found");
    }
    CramerSolution sol;
    sol.bracket = {lo, hi};
    auto eval = [&](double x) {
        MgfValue b = mg1.service_mgf(x);
        return std::pair<double, double>(lambda * b.d1 - 1.0, lambda * b.d2);
    };
    sol.alpha = hybrid_root(eval, lo, hi, 1.0, sol.iterations, sol.residual);
    MgfValue b = mg1.service_mgf(sol.alpha);
    sol.gamma = sol.alpha - lambda * (b.value - 1.0);
    sol.m_alpha = std::exp(-sol.gamma);
    sol.sigma_hat = std::sqrt(lambda * b.d2);
    sol.residual = std::abs(lambda * b.d1 - 1.0);
    return sol;
}

PetrovValue petrov_tail(const CramerSolution& sol, long n, double y, const LatticeInfo& lattice) {
    if (n < 1) fail(ErrorCode::InvalidHorizon, "petrov_tail needs n >= 1");
    PetrovValue out;
    double a = sol.alpha;
    double inv_alpha = 1.0 / a;
    double yy = y;
    if (lattice.span > 0.0) {
        double h = lattice.span;
        // Smallest point of n*offset + h*Z that is >= y.
        double base = std::fmod(n * lattice.offset, h);
        double k = std::ceil((y - base) / h - 1e-12);
        yy = base + k * h;
        inv_alpha = h / -std::expm1(-a * h);
        out.lattice_extension = true;
    }
    out.y_used = yy;
    out.log_value = -sol.gamma * n - a * yy + std::log(inv_alpha) -
                    std::log(sol.sigma_hat * std::sqrt(2.0 * kPi * static_cast<double>(n)));
    out.value = std::exp(out.log_value);
    return out;
}

IntermediateSolution solve_intermediate(const IncrementModel& model) {
    if (!std::holds_alternative<TiltedHeavy>(model.family().kind)) {
        if (!(model.mgf_domain_sup() > 0.0)) fail(ErrorCode::HeavyTail, "mgf is infinite for every s > 0");
        fail(ErrorCode::CramerInstead, "light tail without a heavy base; m' has an interior root");
    }
    if (!(model.mean() < 0.0)) fail(ErrorCode::InvalidDrift, "mean is not negative");
    double alpha = std::get<TiltedHeavy>(model.family().kind).tilt;
    MgfValue m = model.mgf(alpha);
    if (!m.finite()) fail(ErrorCode::DivergentDelta, "m(alpha) is infinite");
    if (!std::isfinite(m.d1)) fail(ErrorCode::DivergentDelta, "m'(alpha) is infinite");
    // m' is increasing, so m'(alpha) < 0 is equivalent to m' < 0 on (0, alpha].
    if (m.d1 >= 0.0) fail(ErrorCode::CramerInstead, "m' vanishes before the tilt rate");
    IntermediateSolution sol;
    sol.alpha = alpha;
    sol.m_alpha = m.value;
    sol.gamma = -std::log(m.value);
    sol.delta = -m.d1 / m.value;
    auto shared = std::make_shared<IncrementModel>(model);
    sol.log_gbar = [shared, alpha](double t) { return alpha * t - shared->log_tail(t); };
    return sol;
}

double intermediate_log_tail(const IntermediateSolution& sol, double n, double x, double epsilon) {
    if (!(n >= 1.0)) fail(ErrorCode::InvalidHorizon, "intermediate_tail needs n >= 1");
    double eps = epsilon > 0.0 ? epsilon : 0.5 * sol.delta;
    if (!(eps < sol.delta)) fail(ErrorCode::OutsideUniformRange, "epsilon must be below delta");
    if (x < -n * (sol.delta - eps)) {
        std::ostringstream os;
        os << "x = " << x << " below -n(delta - eps) = " << -n * (sol.delta - eps);
        fail(ErrorCode::OutsideUniformRange, os.str());
    }
    return -std::log(sol.m_alpha) - sol.gamma * n - sol.alpha * x + std::log(n) + sol.log_gbar(x + n * sol.delta);
}

double intermediate_tail(const IntermediateSolution& sol, double n, double x, double epsilon) {
    return std::exp(intermediate_log_tail(sol, n, x, epsilon));
}

}  // namespace fpt
