#include "fpt/classcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fpt/error.hpp"
#include "fpt/numeric.hpp"

namespace fpt {

namespace {

void require_range(const Sequence& a, long max_n) {
    if (!a.log_a) fail(ErrorCode::InvalidModel, "sequence source is empty");
    if (a.n0 < 0 || max_n < a.n0 + 10) fail(ErrorCode::InvalidModel, "max_n must exceed the positivity index by 10");
}

double checked_log(const Sequence& a, long n) {
    double v = a.log_a(n);
    if (std::isnan(v) || v == -kInf) {
        std::ostringstream os;
        os << "a_" << n << " is not positive";
        fail(ErrorCode::NonPositive, os.str());
    }
    return v;
}

long decade_start(long n0, long max_n) { return std::max(n0 + 1, max_n / 10); }

}  // namespace

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Consistent: return "consistent";
        case Verdict::Inconsistent: return "inconsistent";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

Sequence Sequence::values(std::function<double(long)> a, long n0) {
    Sequence s;
    s.n0 = n0;
    s.log_a = [a = std::move(a)](long n) {
        double v = a(n);
        if (!(v > 0.0)) {
            std::ostringstream os;
            os << "a_" << n << " = " << v << " is not positive";
            fail(ErrorCode::NonPositive, os.str());
        }
        return std::log(v);
    };
    return s;
}

Sequence Sequence::logs(std::function<double(long)> log_a, long n0) {
    Sequence s;
    s.n0 = n0;
    s.log_a = std::move(log_a);
    return s;
}

SequenceDiagnostic ratio_test(const Sequence& a, double gamma, long max_n, const ClassCheckOptions& opts) {
    require_range(a, max_n);
    SequenceDiagnostic d;
    d.max_n = max_n;
    double target = std::exp(gamma);
    long start = decade_start(a.n0, max_n);
    double prev = checked_log(a, a.n0);
    double dev_start = 0.0, dev_end = 0.0, dev_max = 0.0;
    bool diverged = false;
    for (long n = a.n0 + 1; n <= max_n; ++n) {
        double cur = checked_log(a, n);
        double r = std::exp(prev - cur);
        prev = cur;
        if (!std::isfinite(r)) {
            diverged = true;
            break;
        }
        d.ratio_trajectory.emplace_back(n, r);
        d.gamma_hat = std::log(r);
        double dev = std::abs(r / target - 1.0);
        if (n == start) dev_start = dev;
        if (n >= start) dev_max = std::max(dev_max, dev);
        dev_end = dev;
    }
    if (diverged) d.verdict = Verdict::Inconsistent;
    else if (dev_max < opts.ratio_tol) d.verdict = Verdict::Consistent;
    else if (dev_end >= 0.9 * dev_start) d.verdict = Verdict::Inconsistent;
    else d.verdict = Verdict::Inconclusive;
    return d;
}

SequenceDiagnostic conv_test(const Sequence& a, double gamma, long max_n, const ClassCheckOptions& opts) {
    require_range(a, max_n);
    SequenceDiagnostic d;
    d.max_n = max_n;
    std::vector<double> b(max_n + 1, 0.0);
    for (long n = a.n0; n <= max_n; ++n) {
        b[n] = std::exp(gamma * static_cast<double>(n) + checked_log(a, n));
        if (!std::isfinite(b[n])) fail(ErrorCode::Overflow, "e^{gamma n} a_n overflows");
        if (b[n] == 0.0) fail(ErrorCode::Overflow, "e^{gamma n} a_n underflows");
    }
    std::vector<double> c = convolve(b, b, opts.fft_above);
    long start = decade_start(a.n0, max_n);
    double partial = 0.0;
    for (long n = 0; n < a.n0; ++n) partial += b[n];
    double gap_start = 0.0, gap_end = 0.0;
    for (long n = a.n0; n <= max_n; ++n) {
        partial += b[n];
        double r = c[n] / b[n];
        d.conv_trajectory.emplace_back(n, r);
        double gap = std::abs(r / (2.0 * partial) - 1.0);
        if (n == start) gap_start = gap;
        gap_end = gap;
    }
    d.limit_2d = 2.0 * partial;
    if (gap_end < opts.conv_tol && gap_end <= gap_start) d.verdict = Verdict::Consistent;
    else if (gap_end > 0.1 && gap_end >= 0.9 * gap_start) d.verdict = Verdict::Inconsistent;
    else d.verdict = Verdict::Inconclusive;
    return d;
}

std::vector<CondRatioDiagnostic> cond_ratio_test(const std::function<double(long, double)>& tail, double alpha,
                                                 const std::vector<double>& y_set, const std::vector<long>& n_grid,
                                                 double tol) {
    if (n_grid.size() < 2) fail(ErrorCode::InvalidModel, "cond_ratio_test needs at least two horizons");
    std::vector<CondRatioDiagnostic> out;
    for (double y : y_set) {
        CondRatioDiagnostic c;
        c.y = y;
        c.target = std::exp(alpha * y);
        double gap_first = 0.0;
        for (std::size_t i = 0; i < n_grid.size(); ++i) {
            long n = n_grid[i];
            double num = tail(n, 0.0);
            double den = y == 0.0 ? num : tail(n, y);
            if (!(num > 0.0) || !(den > 0.0)) fail(ErrorCode::NonPositive, "tail evaluation is not positive");
            double r = num / den;
            c.trajectory.emplace_back(n, r);
            double gap = std::abs(r / c.target - 1.0);
            if (i == 0) gap_first = gap;
            c.final_relative_gap = gap;
        }
        if (c.final_relative_gap < tol && c.final_relative_gap <= gap_first + 1e-15) c.verdict = Verdict::Consistent;
        else if (c.final_relative_gap > 0.1 && c.final_relative_gap >= 0.9 * gap_first) c.verdict = Verdict::Inconsistent;
        else c.verdict = Verdict::Inconclusive;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace fpt
