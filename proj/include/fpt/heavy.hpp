#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fpt/models.hpp"

namespace fpt {

// n * P(xi > n a) with a = -mean.
double heavy1_tail(const IncrementModel& model, double n);

// floor(beta / (1 - beta)) for beta in (1/2, 1); Unsupported above 2.
int compute_k(double beta);

// Cramer series coefficients lambda_0..lambda_{k-1} of the standardized increment.
std::vector<double> cramer_series(const IncrementModel& model, int k);
std::vector<double> cramer_series_from_cumulants(double k3_std, double k4_std, int k);

struct HeavyIIContext {
    // Log-tail of the raw increment and its derivatives.
    std::function<double(double)> g, g1, g2;
    double a = 0.0;      // -mean
    double sigma = 1.0;  // standard deviation
    double n = 0.0;
    double t = 0.0;      // threshold in standardized units
    int k = 1;
    std::vector<double> lambda;
    double beta = 0.0;

    // Standardized log-tail g(sigma y - a) and derivatives in y.
    double g_std(double y) const { return g(sigma * y - a); }
    double g_std1(double y) const { return sigma * g1(sigma * y - a); }
    double g_std2(double y) const { return sigma * sigma * g2(sigma * y - a); }
};

// Context for P(S_n >= threshold_extra) where S_n has mean -n a; threshold_extra shifts the level.
HeavyIIContext make_heavy2_context(const IncrementModel& model, double n, double threshold_extra = 0.0);

struct RValue {
    double r = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

RValue R_eval(const HeavyIIContext& ctx, double y);

// Solves eta^2 / g(eta) = z, taking the largest root.
double eta(const std::function<double(double)>& g, double z, double rel_tol = 1e-10);
double eta(const HeavyIIContext& ctx, double z);

struct NewtonResult {
    double y_final = 0.0;
    std::vector<double> iterates;
    double residual = 0.0;
    bool j_min_reached = false;
};

struct NewtonOptions {
    double tol = 1e-6;
    int max_iter = 100;
    bool check_validity = true;
};

NewtonResult newton_y(const HeavyIIContext& ctx, const NewtonOptions& opts = {});

struct HeavyIIResult {
    double value = 0.0;
    double log_value = 0.0;
    double R = 0.0;
    HeavyIIContext ctx;
    NewtonResult newton;
    std::vector<std::string> flags;
};

// n exp(-R(y_n)) approximating P(S_n >= threshold_extra).
HeavyIIResult heavy2_tail(const IncrementModel& model, double n, double threshold_extra = 0.0,
                          const NewtonOptions& opts = {});

struct WeibullExpansion {
    double beta = 0.0;
    double coefficient = 0.0;  // c in g(y) = c y^beta
    std::vector<double> exponents;
    std::vector<double> D;
    std::vector<double> fit_n;
    std::vector<double> fit_residual;  // per point, in log units
    double max_relative_residual = 0.0;
    double value = 0.0;        // reconstruction at the requested n
    double log_value = 0.0;
};

// Fits log(heavy2_tail(n)/n) + c (n a)^beta on the ladder n^{(i+1)beta - i}, i = 1..floor(1/(1-beta)),
// over log-spaced n in [n_lo, n_hi], then reconstructs at n.
WeibullExpansion weibull_expansion(const IncrementModel& model, double n, double n_lo = 1e4, double n_hi = 1e6,
                                   int points = 21);
// Log of the reconstructed tail, including the log n factor.
double weibull_reconstruct(const WeibullExpansion& w, double a, double n);

}  // namespace fpt
