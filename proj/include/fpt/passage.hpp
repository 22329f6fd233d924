#pragma once

#include <string>
#include <vector>

#include "fpt/cramer.hpp"
#include "fpt/mc.hpp"
#include "fpt/models.hpp"

namespace fpt {

enum class PrefactorMethod { ClosedForm, ExactOracle, MonteCarlo, DpSeries, McSeries };
const char* to_string(PrefactorMethod m);

struct PrefactorV {
    double value = 0.0;
    double x = 0.0;
    PrefactorMethod method = PrefactorMethod::ClosedForm;
    double alpha = 0.0;
    double gamma = 0.0;
    long truncation_K = 0;
    double partial_sum = 0.0;      // e^{alpha x} sum_{k <= K} T_k
    double remainder = 0.0;        // fitted tail beyond K, same scale as value
    double remainder_bound = 0.0;  // uncertainty of the fitted remainder
    double std_error = 0.0;        // Monte Carlo methods only
    double decay_exponent = 0.0;   // fitted log-log slope of T_k near K
    bool tolerance_met = true;
};

struct AsymptoticEstimate {
    double value = 0.0;
    double log_value = 0.0;
    RegimeTag regime = RegimeTag::Cramer;
    PrefactorV prefactor;
    double tail_part = 0.0;
    double log_tail_part = 0.0;
    double interpolation_factor = 1.0;
    double horizon = 0.0;
    std::vector<std::string> validity_flags;
};

struct SeriesOptions {
    double tol = 1e-4;
    long max_K = 10000;
    long mc_K = 2000;
    MCOptions mc{};
};

struct PassageOptions {
    SeriesOptions series{};
    MCOptions mc{};
};

// E tau_x for M/G/1 (no overshoot): x / (1 - rho).
PrefactorV v_subexp(const MG1Model& mg1, double x);
// E nu_x: exact oracle for lattice walks, Monte Carlo otherwise.
PrefactorV v_subexp(const IncrementModel& model, double x, const MCOptions& mc = {});

// (alpha / gamma) x e^{alpha x}.
PrefactorV v_cramer_mg1(double alpha, double gamma, double x);

// e^{alpha x} sum_k e^{gamma k} E[e^{alpha N_k}; N_k >= -x] with a fitted k^{-3/2} remainder.
PrefactorV v_rw_series(const IncrementModel& model, double alpha, double gamma, double x,
                       const SeriesOptions& opts = {});

// V_rw(x) for the declared regime.
PrefactorV passage_prefactor_rw(const IncrementModel& model, double x, RegimeTag regime,
                                const PassageOptions& opts = {});

AsymptoticEstimate passage_tail_rw(const IncrementModel& model, double x, long n, RegimeTag regime,
                                   const PrefactorV& V);
AsymptoticEstimate passage_tail_rw(const IncrementModel& model, double x, long n, RegimeTag regime,
                                   const PassageOptions& opts = {});

AsymptoticEstimate passage_tail_levy(const MG1Model& mg1, double x, double t, RegimeTag regime);

AsymptoticEstimate bp_tail(const MG1Model& mg1, double x, double t, RegimeTag regime);

}  // namespace fpt
