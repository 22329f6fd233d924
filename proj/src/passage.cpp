#include "fpt/passage.hpp"

#include <cmath>
#include <sstream>

#include "fpt/error.hpp"
#include "fpt/heavy.hpp"
#include "fpt/oracle.hpp"

namespace fpt {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct TailFit {
    double rem_one = 0.0;  // C k^{-3/2}
    double rem_two = 0.0;  // C k^{-3/2} + C2 k^{-5/2}
    double slope = 0.0;
};

// Least-squares fits of T_k on [K/2, K]; remainders use the midpoint rule sum_{k > K} k^{-s}
// ~ (K + 1/2)^{1-s} / (s - 1). Lattice walks make T_k oscillate with the period of S_n mod the
// span, so the fit runs on period averages centred at k - (period - 1)/2.
TailFit fit_tail(const std::vector<double>& T, long period) {
    long K = static_cast<long>(T.size()) - 1;
    long k0 = std::max(period, K / 2);
    double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
    double lx = 0, ly = 0, lxx = 0, lxy = 0;
    int m = 0;
    for (long k = k0; k <= K; ++k) {
        double avg = 0.0;
        for (long i = 0; i < period; ++i) avg += T[k - i];
        avg /= static_cast<double>(period);
        double kc = static_cast<double>(k) - 0.5 * static_cast<double>(period - 1);
        double f1 = std::pow(kc, -1.5);
        double f2 = f1 / kc;
        s11 += f1 * f1;
        s12 += f1 * f2;
        s22 += f2 * f2;
        b1 += f1 * avg;
        b2 += f2 * avg;
        if (avg > 0) {
            double X = std::log(kc), Y = std::log(avg);
            lx += X;
            ly += Y;
            lxx += X * X;
            lxy += X * Y;
            ++m;
        }
    }
    TailFit f;
    double Kh = K + 0.5;
    double one = b1 / s11;
    f.rem_one = one * 2.0 / std::sqrt(Kh);
    double det = s11 * s22 - s12 * s12;
    if (det > 0) {
        double C = (b1 * s22 - b2 * s12) / det;
        double C2 = (s11 * b2 - s12 * b1) / det;
        f.rem_two = C * 2.0 / std::sqrt(Kh) + C2 * (2.0 / 3.0) * std::pow(Kh, -1.5);
    } else {
        f.rem_two = f.rem_one;
    }
    if (m >= 2) f.slope = (m * lxy - lx * ly) / (m * lxx - lx * lx);
    return f;
}

// Smallest p with p * offset on the lattice span * Z; 1 for non-lattice laws.
long lattice_period(const IncrementModel& model) {
    double h = model.lattice_span(), o = model.lattice_offset();
    if (!(h > 0.0)) return 1;
    for (long p = 1; p <= 64; ++p) {
        double r = p * o / h;
        if (std::abs(r - std::round(r)) < 1e-9) return p;
    }
    return 1;
}

// The remainder bound is the drift of the extrapolated sum between truncation at K/2 and K.
void finish_series(PrefactorV& V, const std::vector<double>& T, double tol, long period) {
    long K = static_cast<long>(T.size()) - 1;
    double partial = 0.0, half_partial = 0.0;
    for (long k = 0; k <= K; ++k) {
        partial += T[k];
        if (k <= K / 2) half_partial += T[k];
    }
    TailFit fit = fit_tail(T, period);
    TailFit half = fit_tail(std::vector<double>(T.begin(), T.begin() + K / 2 + 1), period);
    double scale = std::exp(V.alpha * V.x);
    V.truncation_K = K;
    V.partial_sum = scale * partial;
    V.remainder = scale * fit.rem_two;
    V.remainder_bound = scale * std::abs(partial + fit.rem_two - half_partial - half.rem_two);
    V.decay_exponent = fit.slope;
    V.value = V.partial_sum + V.remainder;
    V.tolerance_met = T.back() / partial < tol && V.remainder_bound < tol * V.value;
}

double log_petrov_real(const CramerSolution& sol, double t) {
    return -sol.gamma * t - std::log(sol.alpha * sol.sigma_hat * std::sqrt(2.0 * kPi * t));
}

AsymptoticEstimate assemble(RegimeTag regime, const PrefactorV& V, double log_tail, double interp, double horizon) {
    AsymptoticEstimate e;
    e.regime = regime;
    e.prefactor = V;
    e.log_tail_part = log_tail;
    e.tail_part = std::exp(log_tail);
    e.interpolation_factor = interp;
    e.horizon = horizon;
    e.log_value = std::log(V.value) + std::log(interp) + log_tail - std::log(horizon);
    e.value = V.value * interp * e.tail_part / horizon;
    return e;
}

void require_level(double x) {
    if (x == 0.0) fail(ErrorCode::ZeroLevel, "x = 0 needs the empty-system convention; use x > 0");
    if (!(x > 0.0)) fail(ErrorCode::InvalidModel, "level x must be positive");
}

// Runs a regime evaluator, turning precondition failures into RegimeMismatch.
template <class F>
auto regime_guard(RegimeTag regime, F f) {
    try {
        return f();
    } catch (const Error& e) {
        switch (e.code()) {
            case ErrorCode::HeavyTail:
            case ErrorCode::IntermediateCase:
            case ErrorCode::CramerInstead:
            case ErrorCode::DivergentDelta:
                fail(ErrorCode::RegimeMismatch, std::string(to_string(regime)) + " declared but " + e.what());
            default:
                throw;
        }
    }
}

void require_heavy(const IncrementModel& X, RegimeTag regime) {
    if (X.mgf_domain_sup() > 0.0)
        fail(ErrorCode::RegimeMismatch, std::string(to_string(regime)) + " declared but the mgf is finite near 0");
}

}  // namespace

const char* to_string(PrefactorMethod m) {
    switch (m) {
        case PrefactorMethod::ClosedForm: return "closed_form";
        case PrefactorMethod::ExactOracle: return "exact_oracle";
        case PrefactorMethod::MonteCarlo: return "mc";
        case PrefactorMethod::DpSeries: return "dp_series";
        case PrefactorMethod::McSeries: return "mc_series";
    }
    return "?";
}

PrefactorV v_subexp(const MG1Model& mg1, double x) {
    require_level(x);
    if (mg1.load() >= 1.0) fail(ErrorCode::UnstableSystem, "load >= 1");
    PrefactorV V;
    V.x = x;
    V.value = x / (1.0 - mg1.load());
    V.method = PrefactorMethod::ClosedForm;
    return V;
}

PrefactorV v_subexp(const IncrementModel& model, double x, const MCOptions& mc) {
    if (x < 0.0) fail(ErrorCode::InvalidModel, "level x must be nonnegative");
    PrefactorV V;
    V.x = x;
    if (model.kind() == IncrementModel::Kind::Lattice) {
        V.value = exact_e_nu(LatticeWalk::from_model(model), x).value;
        V.method = PrefactorMethod::ExactOracle;
    } else {
        SimResult r = simulate_e_nu(model, x, mc);
        V.value = r.estimate;
        V.std_error = r.std_error;
        V.method = PrefactorMethod::MonteCarlo;
    }
    return V;
}

PrefactorV v_cramer_mg1(double alpha, double gamma, double x) {
    if (!(alpha > 0.0) || !(gamma > 0.0)) fail(ErrorCode::InvalidModel, "alpha and gamma must be positive");
    if (x < 0.0) fail(ErrorCode::InvalidModel, "level x must be nonnegative");
    PrefactorV V;
    V.x = x;
    V.alpha = alpha;
    V.gamma = gamma;
    V.value = alpha / gamma * x * std::exp(alpha * x);
    V.method = PrefactorMethod::ClosedForm;
    return V;
}

PrefactorV v_rw_series(const IncrementModel& model, double alpha, double gamma, double x, const SeriesOptions& opts) {
    if (!(alpha > 0.0) || !(gamma > 0.0)) fail(ErrorCode::InvalidModel, "alpha and gamma must be positive");
    if (x < 0.0) fail(ErrorCode::InvalidModel, "level x must be nonnegative");
    PrefactorV V;
    V.x = x;
    V.alpha = alpha;
    V.gamma = gamma;
    if (model.kind() == IncrementModel::Kind::Lattice) {
        V.method = PrefactorMethod::DpSeries;
        LatticeWalk walk = LatticeWalk::from_model(model);
        for (long K = 512;; K = std::min(2 * K, opts.max_K)) {
            std::vector<double> T = min_functional_terms(walk, alpha, gamma, x, K);
            finish_series(V, T, opts.tol, lattice_period(model));
            if (V.tolerance_met || K >= opts.max_K) break;
        }
    } else {
        V.method = PrefactorMethod::McSeries;
        MinFunctionalMC mc = simulate_min_functional_terms(model, alpha, x, opts.mc_K, opts.mc);
        std::vector<double> T;
        for (const auto& r : mc.terms) T.push_back(r.estimate);
        finish_series(V, T, opts.tol, lattice_period(model));
        V.std_error = std::exp(alpha * x) * mc.partial_sum.std_error;
    }
    if (!(V.decay_exponent < -1.1)) {
        std::ostringstream os;
        os << "terms decay like k^" << V.decay_exponent << " at K = " << V.truncation_K;
        fail(ErrorCode::SeriesNotDecaying, os.str());
    }
    return V;
}

PrefactorV passage_prefactor_rw(const IncrementModel& model, double x, RegimeTag regime, const PassageOptions& opts) {
    switch (regime) {
        case RegimeTag::HeavyI:
        case RegimeTag::HeavyII:
            require_heavy(model, regime);
            return v_subexp(model, x, opts.mc);
        case RegimeTag::Cramer: {
            CramerSolution sol = regime_guard(regime, [&] { return solve_tilt(model); });
            return v_rw_series(model, sol.alpha, sol.gamma, x, opts.series);
        }
        case RegimeTag::Intermediate: {
            IntermediateSolution sol = regime_guard(regime, [&] { return solve_intermediate(model); });
            return v_rw_series(model, sol.alpha, sol.gamma, x, opts.series);
        }
    }
    fail(ErrorCode::InvalidModel, "unknown regime");
}

AsymptoticEstimate passage_tail_rw(const IncrementModel& model, double x, long n, RegimeTag regime,
                                   const PrefactorV& V) {
    if (n < 1) fail(ErrorCode::InvalidHorizon, "passage_tail_rw needs n >= 1");
    if (V.x != x) fail(ErrorCode::InvalidModel, "prefactor was computed for a different level");
    std::vector<std::string> flags;
    double log_tail = 0.0;
    switch (regime) {
        case RegimeTag::HeavyI:
            require_heavy(model, regime);
            log_tail = std::log(heavy1_tail(model, static_cast<double>(n)));
            break;
        case RegimeTag::HeavyII: {
            require_heavy(model, regime);
            HeavyIIResult h = heavy2_tail(model, static_cast<double>(n));
            log_tail = h.log_value;
            flags = h.flags;
            break;
        }
        case RegimeTag::Cramer: {
            CramerSolution sol = regime_guard(regime, [&] { return solve_tilt(model); });
            PetrovValue p = petrov_tail(sol, n, 0.0, LatticeInfo::of(model));
            log_tail = p.log_value;
            if (p.lattice_extension) flags.push_back("lattice-extension");
            break;
        }
        case RegimeTag::Intermediate: {
            IntermediateSolution sol = regime_guard(regime, [&] { return solve_intermediate(model); });
            log_tail = intermediate_log_tail(sol, static_cast<double>(n), 0.0);
            break;
        }
    }
    if (!V.tolerance_met) flags.push_back("series-tolerance-not-met");
    if (V.method == PrefactorMethod::MonteCarlo || V.method == PrefactorMethod::McSeries) flags.push_back("mc-prefactor");
    AsymptoticEstimate e = assemble(regime, V, log_tail, 1.0, static_cast<double>(n));
    e.validity_flags = flags;
    return e;
}

AsymptoticEstimate passage_tail_rw(const IncrementModel& model, double x, long n, RegimeTag regime,
                                   const PassageOptions& opts) {
    return passage_tail_rw(model, x, n, regime, passage_prefactor_rw(model, x, regime, opts));
}

AsymptoticEstimate passage_tail_levy(const MG1Model& mg1, double x, double t, RegimeTag regime) {
    if (!(t >= 1.0)) fail(ErrorCode::InvalidHorizon, "passage_tail_levy needs t >= 1");
    require_level(x);
    IncrementModel X = mg1.induced_increment();
    double n = std::floor(t);
    std::vector<std::string> flags;
    PrefactorV V;
    double log_tail = 0.0;
    double gamma = 0.0;
    switch (regime) {
        case RegimeTag::HeavyI:
            require_heavy(X, regime);
            V = v_subexp(mg1, x);
            log_tail = std::log(heavy1_tail(X, n));
            break;
        case RegimeTag::HeavyII: {
            require_heavy(X, regime);
            V = v_subexp(mg1, x);
            HeavyIIResult h = heavy2_tail(X, n);
            log_tail = h.log_value;
            flags = h.flags;
            break;
        }
        case RegimeTag::Cramer: {
            CramerSolution sol = regime_guard(regime, [&] { return solve_tilt(X); });
            V = v_cramer_mg1(sol.alpha, sol.gamma, x);
            log_tail = petrov_tail(sol, static_cast<long>(n), 0.0).log_value;
            gamma = sol.gamma;
            break;
        }
        case RegimeTag::Intermediate: {
            IntermediateSolution sol = regime_guard(regime, [&] { return solve_intermediate(X); });
            V = v_cramer_mg1(sol.alpha, sol.gamma, x);
            log_tail = intermediate_log_tail(sol, n, 0.0);
            gamma = sol.gamma;
            break;
        }
    }
    AsymptoticEstimate e = assemble(regime, V, log_tail, std::exp(-gamma * (t - n)), t);
    e.validity_flags = flags;
    return e;
}

AsymptoticEstimate bp_tail(const MG1Model& mg1, double x, double t, RegimeTag regime) {
    if (!(t > 0.0)) fail(ErrorCode::InvalidHorizon, "bp_tail needs t > 0");
    require_level(x);
    IncrementModel X = mg1.induced_increment();
    double rho = mg1.load();
    double lambda = mg1.arrival_rate();
    switch (regime) {
        case RegimeTag::HeavyI: {
            require_heavy(X, regime);
            PrefactorV V = v_subexp(mg1, x);
            double log_tail = std::log(t * lambda * jump::tail(mg1.service(), (1.0 - rho) * t));
            return assemble(regime, V, log_tail, 1.0, t);
        }
        case RegimeTag::HeavyII: {
            require_heavy(X, regime);
            PrefactorV V = v_subexp(mg1, x);
            HeavyIIResult h = heavy2_tail(X, t);
            AsymptoticEstimate e = assemble(regime, V, h.log_value, 1.0, t);
            e.validity_flags = h.flags;
            return e;
        }
        case RegimeTag::Cramer: {
            CramerSolution sol = regime_guard(regime, [&] { return solve_tilt_mg1(mg1); });
            PrefactorV V = v_cramer_mg1(sol.alpha, sol.gamma, x);
            return assemble(regime, V, log_petrov_real(sol, t), 1.0, t);
        }
        case RegimeTag::Intermediate: {
            IntermediateSolution sol = regime_guard(regime, [&] { return solve_intermediate(X); });
            PrefactorV V = v_cramer_mg1(sol.alpha, sol.gamma, x);
            return assemble(regime, V, intermediate_log_tail(sol, t, 0.0), 1.0, t);
        }
    }
    fail(ErrorCode::InvalidModel, "unknown regime");
}

}  // namespace fpt
