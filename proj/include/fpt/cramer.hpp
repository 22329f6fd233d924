#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "fpt/models.hpp"

namespace fpt {

struct CramerSolution {
    double alpha = 0.0;
    double gamma = 0.0;
    double m_alpha = 1.0;
    // sqrt(m''(alpha)/m(alpha)), the standard deviation of the tilted increment.
    double sigma_hat = 0.0;
    double residual = 0.0;
    int iterations = 0;
    std::pair<double, double> bracket{0.0, 0.0};
};

struct IntermediateSolution {
    double alpha = 0.0;
    double gamma = 0.0;
    double m_alpha = 1.0;
    double delta = 0.0;
    // log Gbar(t) with Gbar(t) = exp(alpha t) P(xi > t).
    std::function<double(double)> log_gbar;
    double gbar(double t) const { return std::exp(log_gbar(t)); }
};

// Lattice metadata for the Petrov evaluator: support of S_n is n*offset + span*Z.
struct LatticeInfo {
    double span = 0.0;
    double offset = 0.0;
    static LatticeInfo of(const IncrementModel& m) { return {m.lattice_span(), m.lattice_offset()}; }
};

CramerSolution solve_tilt(const IncrementModel& model);

// Service-side equations for M/G/1: lambda m_B'(alpha) = 1, gamma = alpha - lambda (m_B(alpha) - 1),
// sigma_hat^2 = lambda m_B''(alpha).
CramerSolution solve_tilt_mg1(const MG1Model& mg1);

struct PetrovValue {
    double value = 0.0;
    double log_value = 0.0;
    bool lattice_extension = false;
    double y_used = 0.0;
};

// Asymptotic P(S_n >= y).
PetrovValue petrov_tail(const CramerSolution& sol, long n, double y, const LatticeInfo& lattice = {});

IntermediateSolution solve_intermediate(const IncrementModel& model);

// Asymptotic P(S_n > x); epsilon <= 0 selects delta/2.
double intermediate_tail(const IntermediateSolution& sol, double n, double x, double epsilon = 0.0);
double intermediate_log_tail(const IntermediateSolution& sol, double n, double x, double epsilon = 0.0);

}  // namespace fpt
