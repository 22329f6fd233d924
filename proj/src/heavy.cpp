#include "fpt/heavy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fpt/error.hpp"

namespace fpt {

namespace {

double declared_or_estimated_index(const IncrementModel& model) {
    if (auto b = model.tail_index()) return *b;
    // Regular-variation index of g read off y g'(y)/g(y) far out.
    double y = 1e8;
    return y * model.log_tail_d1(y) / model.log_tail(y);
}

// Solves the small dense system A x = b by Gaussian elimination with partial pivoting.
std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> b) {
    std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
        std::swap(A[c], A[p]);
        std::swap(b[c], b[p]);
        if (A[c][c] == 0.0) fail(ErrorCode::FitResidualTooLarge, "singular fit system");
        for (std::size_t r = c + 1; r < n; ++r) {
            double f = A[r][c] / A[c][c];
            for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
        x[i] = s / A[i][i];
    }
    return x;
}

}  // namespace

double heavy1_tail(const IncrementModel& model, double n) {
    if (!(n >= 1.0)) fail(ErrorCode::InvalidHorizon, "heavy1_tail needs n >= 1");
    if (!(model.mean() < 0.0)) fail(ErrorCode::InvalidDrift, "mean is not negative");
    double a = -model.mean();
    return n * model.tail(n * a);
}

int compute_k(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) fail(ErrorCode::InvalidModel, "beta must lie in (0, 1)");
    int k = static_cast<int>(std::floor(beta / (1.0 - beta) + 1e-12));
    if (k == 0) fail(ErrorCode::Unsupported, "k=0: tails lighter threshold not met, the HeavyI formula applies");
    if (k > 2) {
        std::ostringstream os;
        os << "k=" << k << " exceeds the supported Cramer series order 2";
        fail(ErrorCode::Unsupported, os.str());
    }
    return k;
}

std::vector<double> cramer_series_from_cumulants(double k3_std, double k4_std, int k) {
    std::vector<double> out;
    if (k >= 1) out.push_back(k3_std / 6.0);
    if (k >= 2) out.push_back((k4_std - 3.0 * k3_std * k3_std) / 24.0);
    return out;
}

std::vector<double> cramer_series(const IncrementModel& model, int k) {
    if (k < 0 || k > 2) fail(ErrorCode::Unsupported, "Cramer series order must be 0, 1 or 2");
    if (k == 0) return {};
    double sd = std::sqrt(model.variance());
    if (!std::isfinite(sd)) fail(ErrorCode::MissingCumulant, "variance is infinite");
    if (!model.cumulant3()) fail(ErrorCode::MissingCumulant, "third cumulant unavailable");
    double k3 = *model.cumulant3() / std::pow(sd, 3);
    double k4 = 0.0;
    if (k >= 2) {
        if (!model.cumulant4()) fail(ErrorCode::MissingCumulant, "fourth cumulant unavailable");
        k4 = *model.cumulant4() / std::pow(sd, 4);
    }
    return cramer_series_from_cumulants(k3, k4, k);
}

HeavyIIContext make_heavy2_context(const IncrementModel& model, double n, double threshold_extra) {
    if (!(n >= 1.0)) fail(ErrorCode::InvalidHorizon, "heavy2 needs n >= 1");
    if (!(model.mean() < 0.0)) fail(ErrorCode::InvalidDrift, "mean is not negative");
    if (model.kind() == IncrementModel::Kind::Lattice)
        fail(ErrorCode::Unsupported, "HeavyII needs a smooth log-tail");
    auto shared = std::make_shared<IncrementModel>(model);
    HeavyIIContext ctx;
    ctx.g = [shared](double y) { return shared->log_tail(y); };
    ctx.g1 = [shared](double y) { return shared->log_tail_d1(y); };
    ctx.g2 = [shared](double y) { return shared->log_tail_d2(y); };
    ctx.a = -model.mean();
    ctx.sigma = std::sqrt(model.variance());
    ctx.n = n;
    ctx.t = (n * ctx.a + threshold_extra) / ctx.sigma;
    ctx.beta = declared_or_estimated_index(model);
    ctx.k = compute_k(ctx.beta);
    ctx.lambda = cramer_series(model, ctx.k);
    return ctx;
}

RValue R_eval(const HeavyIIContext& ctx, double y) {
    double n = ctx.n;
    double u = ctx.t - y;
    RValue out;
    out.r = ctx.g_std(y) + u * u / (2.0 * n);
    out.d1 = ctx.g_std1(y) - u / n;
    out.d2 = ctx.g_std2(y) + 1.0 / n;
    double npow = n;
    for (std::size_t idx = 0; idx < ctx.lambda.size(); ++idx) {
        int i = static_cast<int>(idx) + 1;
        npow *= n;  // n^{i+1}
        double lam = ctx.lambda[idx];
        out.r -= lam * std::pow(u, i + 2) / npow;
        out.d1 += lam * (i + 2) * std::pow(u, i + 1) / npow;
        out.d2 -= lam * (i + 2) * (i + 1) * std::pow(u, i) / npow;
    }
    return out;
}

double eta(const std::function<double(double)>& g, double z, double rel_tol) {
    if (!(z > 0.0)) fail(ErrorCode::NoBracket, "eta needs z > 0");
    auto f = [&](double e) {
        double gv = g(e);
        if (!(gv > 0.0)) return kInf;
        return e * e / gv - z;
    };
    // The largest root is the last upward sign change on a geometric scan.
    double lo = -1.0;
    double prev_e = std::ldexp(1.0, -40);
    double prev_f = f(prev_e);
    for (int j = -39; j <= 400; ++j) {
        double e = std::ldexp(1.0, j);
        double fe = f(e);
        if (prev_f < 0.0 && fe >= 0.0) lo = prev_e;
        prev_e = e;
        prev_f = fe;
    }
    if (lo < 0.0) fail(ErrorCode::NoBracket, "eta^2/g(eta) never crosses z");
    return bisect(f, lo, 2.0 * lo, rel_tol * 1e-2);
}

double eta(const HeavyIIContext& ctx, double z) {
    return eta([&ctx](double y) { return ctx.g_std(y); }, z);
}

NewtonResult newton_y(const HeavyIIContext& ctx, const NewtonOptions& opts) {
    if (opts.check_validity) {
        double e = 0.0;
        try {
            e = eta(ctx, ctx.n);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::NoBracket) throw;
            fail(ErrorCode::ValidityViolated, std::string("eta(n) undefined: ") + err.what());
        }
        if (ctx.t < 1.6 * e) {
            std::ostringstream os;
            os << "t = " << ctx.t << " below 1.6 eta(n) = " << 1.6 * e;
            fail(ErrorCode::ValidityViolated, os.str());
        }
    }
    NewtonResult res;
    double y = ctx.t;
    res.iterates.push_back(y);
    int j_min = (ctx.k + 1) / 2 + 1;
    double sqn = std::sqrt(ctx.n);
    for (int j = 1; j <= opts.max_iter; ++j) {
        y = y - ctx.n * R_eval(ctx, y).d1;
        if (!std::isfinite(y) || !(ctx.sigma * y - ctx.a > 0.0) || y > ctx.t)
            fail(ErrorCode::NoConvergence, "iteration left the admissible range (0, t]");
        res.iterates.push_back(y);
        res.residual = std::abs(R_eval(ctx, y).d1) * sqn;
        if (j >= j_min && res.residual <= opts.tol) {
            res.y_final = y;
            res.j_min_reached = true;
            return res;
        }
    }
    fail(ErrorCode::NoConvergence, "iteration cap reached before the residual criterion");
}

HeavyIIResult heavy2_tail(const IncrementModel& model, double n, double threshold_extra, const NewtonOptions& opts) {
    HeavyIIResult out;
    out.ctx = make_heavy2_context(model, n, threshold_extra);
    out.newton = newton_y(out.ctx, opts);
    out.R = R_eval(out.ctx, out.newton.y_final).r;
    out.log_value = std::log(n) - out.R;
    out.value = std::exp(out.log_value);
    if (opts.check_validity) out.flags.push_back("t>=1.6eta(n)");
    if (out.newton.y_final <= out.ctx.t - std::sqrt(n) * (1.0 - 1e-6)) out.flags.push_back("y<=t-sqrt(n)");
    else out.flags.push_back("y>t-sqrt(n)");
    return out;
}

WeibullExpansion weibull_expansion(const IncrementModel& model, double n, double n_lo, double n_hi, int points) {
    auto b = model.tail_index();
    if (!b || !(*b > 0.5 && *b < 1.0))
        fail(ErrorCode::InvalidModel, "expansion needs a declared pure-power index 1/2 < beta < 1");
    WeibullExpansion w;
    w.beta = *b;
    w.coefficient = model.log_tail(1.0);
    for (double y : {1e2, 1e4, 1e6}) {
        double c = model.log_tail(y) / std::pow(y, w.beta);
        if (std::abs(c - w.coefficient) > 1e-9 * std::abs(w.coefficient))
            fail(ErrorCode::InvalidModel, "log-tail is not a pure power c y^beta");
    }
    if (points < 3 || !(n_hi > n_lo)) fail(ErrorCode::InvalidModel, "expansion needs at least 3 fit points");
    double a = -model.mean();
    int K = static_cast<int>(std::floor(1.0 / (1.0 - w.beta) + 1e-12));
    for (int i = 1; i <= K; ++i) w.exponents.push_back((i + 1) * w.beta - i);

    std::vector<double> L, R;
    for (int j = 0; j < points; ++j) {
        double nj = n_lo * std::pow(n_hi / n_lo, static_cast<double>(j) / (points - 1));
        HeavyIIResult h = heavy2_tail(model, nj);
        w.fit_n.push_back(nj);
        R.push_back(h.R);
        L.push_back(-h.R + w.coefficient * std::pow(nj * a, w.beta));
    }
    std::size_t m = w.exponents.size();
    std::vector<std::vector<double>> A(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, 0.0);
    for (std::size_t j = 0; j < L.size(); ++j) {
        for (std::size_t p = 0; p < m; ++p) {
            double bp = std::pow(w.fit_n[j], w.exponents[p]);
            rhs[p] += bp * L[j];
            for (std::size_t q = 0; q < m; ++q) A[p][q] += bp * std::pow(w.fit_n[j], w.exponents[q]);
        }
    }
    w.D = solve_dense(A, rhs);
    for (std::size_t j = 0; j < L.size(); ++j) {
        double fit = 0.0;
        for (std::size_t p = 0; p < m; ++p) fit += w.D[p] * std::pow(w.fit_n[j], w.exponents[p]);
        double r = L[j] - fit;
        w.fit_residual.push_back(r);
        w.max_relative_residual = std::max(w.max_relative_residual, std::abs(r) / R[j]);
    }
    if (w.max_relative_residual > 1e-4) {
        std::ostringstream os;
        os << "relative fit residual " << w.max_relative_residual << " exceeds 1e-4";
        fail(ErrorCode::FitResidualTooLarge, os.str());
    }
    w.log_value = weibull_reconstruct(w, a, n);
    w.value = std::exp(w.log_value);
    return w;
}

double weibull_reconstruct(const WeibullExpansion& w, double a, double n) {
    double s = std::log(n) - w.coefficient * std::pow(n * a, w.beta);
    for (std::size_t p = 0; p < w.D.size(); ++p) s += w.D[p] * std::pow(n, w.exponents[p]);
    return s;
}

}  // namespace fpt
