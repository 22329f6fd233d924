#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace fpt {

enum class Verdict { Consistent, Inconsistent, Inconclusive };
const char* to_string(Verdict v);

// Positive sequence a_n for n >= n0, zero below; stored as log a_n so steep decay stays representable.
struct Sequence {
    std::function<double(long)> log_a;
    long n0 = 0;

    // Wraps a(n); throws NonPositive when a(n) <= 0 at some n >= n0.
    static Sequence values(std::function<double(long)> a, long n0 = 0);
    static Sequence logs(std::function<double(long)> log_a, long n0 = 0);
};

using Trajectory = std::vector<std::pair<long, double>>;

struct SequenceDiagnostic {
    double gamma_hat = 0.0;     // log of the last finite a_{n-1}/a_n
    Trajectory ratio_trajectory;  // (n, a_{n-1}/a_n)
    Trajectory conv_trajectory;   // (n, a*2_n / a_n)
    double limit_2d = 0.0;      // 2 sum_{i <= max_n} e^{gamma i} a_i
    Verdict verdict = Verdict::Inconclusive;
    long max_n = 0;
};

struct ClassCheckOptions {
    double ratio_tol = 1e-3;  // relative spread of a_{n-1}/a_n around e^gamma over the last decade
    double conv_tol = 2e-2;   // relative gap between a*2_n/a_n and 2 d_n at max_n
    std::size_t fft_above = 4096;
};

SequenceDiagnostic ratio_test(const Sequence& a, double gamma, long max_n, const ClassCheckOptions& opts = {});

// Works with b_n = e^{gamma n} a_n, for which b*2_n / b_n = a*2_n / a_n.
SequenceDiagnostic conv_test(const Sequence& a, double gamma, long max_n, const ClassCheckOptions& opts = {});

struct CondRatioDiagnostic {
    double y = 0.0;
    double target = 1.0;   // e^{alpha y}
    Trajectory trajectory;  // (n, P(S_n >= 0) / P(S_n >= y))
    double final_relative_gap = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

// tail(n, y) = P(S_n >= y). Consistent when the last gap is within tol and not widening.
std::vector<CondRatioDiagnostic> cond_ratio_test(const std::function<double(long, double)>& tail, double alpha,
                                                 const std::vector<double>& y_set, const std::vector<long>& n_grid,
                                                 double tol = 2e-2);

}  // namespace fpt
