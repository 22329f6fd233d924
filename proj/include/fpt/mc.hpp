#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpt/cramer.hpp"
#include "fpt/models.hpp"
#include "fpt/rng.hpp"

namespace fpt {

enum class Estimator { Plain, Tilted, Mean };
const char* to_string(Estimator e);

// Mergeable sufficient statistics of a weighted-indicator or sample-mean estimator.
struct SimStats {
    std::uint64_t n = 0;
    std::uint64_t hits = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double w) {
        ++n;
        if (w != 0.0) {
            ++hits;
            sum += w;
            sum_sq += w * w;
        }
    }
    void merge(const SimStats& o) {
        n += o.n;
        hits += o.hits;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }
};

struct SimResult {
    double horizon = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t hits = 0;
    std::uint64_t seed = 0;
    Estimator estimator = Estimator::Plain;
};

SimResult summarize(const SimStats& s, double horizon, std::uint64_t seed, Estimator e);

// Samples are split into chunks of chunk_size; chunk i draws from stream rng.stream + i and the
// per-chunk statistics are merged in chunk order, so results do not depend on the worker count.
struct MCOptions {
    std::uint64_t samples = 100000;
    RNGSpec rng{};
    std::uint64_t chunk_size = 1u << 16;
    unsigned workers = 1;
};

// P(nu_x > n) for each n in n_grid; estimates share paths.
std::vector<SimResult> simulate_walk_passage(const IncrementModel& model, double x, const std::vector<long>& n_grid,
                                             const MCOptions& opts);
std::vector<SimStats> walk_passage_stats(const IncrementModel& model, double x, const std::vector<long>& n_grid,
                                         const MCOptions& opts);

// P(S_n > x), plain and under the exponential tilt s.
std::vector<SimResult> simulate_walk_sum(const IncrementModel& model, double x, const std::vector<long>& n_grid,
                                         const MCOptions& opts);
std::vector<SimResult> simulate_walk_sum_tilted(const IncrementModel& model, double s, double x,
                                                const std::vector<long>& n_grid, const MCOptions& opts);

// E nu_x by plain sampling.
SimResult simulate_e_nu(const IncrementModel& model, double x, const MCOptions& opts,
                        std::uint64_t max_steps = 100'000'000);

// exp(gamma k) E[exp(alpha N_k); N_k >= -x] for k = 0..K, sampled under the alpha-tilted walk, where
// the likelihood ratio m(alpha)^k exp(-alpha S_k) cancels exp(gamma k). partial_sum is the per-path
// sum over k, so its standard error accounts for the correlation between terms.
struct MinFunctionalMC {
    std::vector<SimResult> terms;
    SimResult partial_sum;
};
MinFunctionalMC simulate_min_functional_terms(const IncrementModel& model, double alpha, double x, long K,
                                              const MCOptions& opts);

// P(bp(x) > t) for each t in t_grid, event-driven.
std::vector<SimResult> simulate_bp(const MG1Model& mg1, double x, const std::vector<double>& t_grid,
                                   const MCOptions& opts);
SimResult simulate_bp_mean(const MG1Model& mg1, double x, const MCOptions& opts);

// Importance sampling under the alpha-tilted compound Poisson law; each path surviving past t
// carries the weight exp(-alpha X_t - gamma t), X_t = W_t - x.
std::vector<SimResult> simulate_bp_tilted(const MG1Model& mg1, const CramerSolution& sol, double x,
                                          const std::vector<double>& t_grid, const MCOptions& opts);

}  // namespace fpt
