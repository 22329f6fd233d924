#include "fpt/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "fpt/error.hpp"

namespace fpt {

namespace {

template <class Body>
std::vector<SimStats> run_chunks(const MCOptions& opts, std::size_t n_stats, const Body& body) {
    if (opts.samples == 0) fail(ErrorCode::InvalidModel, "samples must be positive");
    std::uint64_t chunk = std::max<std::uint64_t>(1, opts.chunk_size);
    std::uint64_t n_chunks = (opts.samples + chunk - 1) / chunk;
    std::vector<std::vector<SimStats>> per_chunk(n_chunks, std::vector<SimStats>(n_stats));
    auto work = [&](std::uint64_t c) {
        Stream rng(RNGSpec{opts.rng.seed, opts.rng.stream + c});
        std::uint64_t begin = c * chunk;
        std::uint64_t end = std::min(opts.samples, begin + chunk);
        for (std::uint64_t i = begin; i < end; ++i) body(rng, per_chunk[c]);
    };
    unsigned workers = std::max(1u, opts.workers);
    if (workers == 1 || n_chunks == 1) {
        for (std::uint64_t c = 0; c < n_chunks; ++c) work(c);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::uint64_t c = w; c < n_chunks; c += workers) work(c);
            });
        for (auto& t : pool) t.join();
    }
    std::vector<SimStats> out(n_stats);
    for (const auto& v : per_chunk)
        for (std::size_t j = 0; j < n_stats; ++j) out[j].merge(v[j]);
    return out;
}

// Sorted copy of a grid plus the permutation back to caller order.
template <class T>
std::vector<std::size_t> sort_order(const std::vector<T>& grid) {
    std::vector<std::size_t> idx(grid.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });
    return idx;
}

template <class T>
std::vector<SimResult> to_results(const std::vector<SimStats>& sorted_stats, const std::vector<T>& grid,
                                  const std::vector<std::size_t>& order, std::uint64_t seed, Estimator e) {
    std::vector<SimResult> out(grid.size());
    for (std::size_t j = 0; j < order.size(); ++j)
        out[order[j]] = summarize(sorted_stats[j], static_cast<double>(grid[order[j]]), seed, e);
    return out;
}

}  // namespace

const char* to_string(Estimator e) {
    switch (e) {
        case Estimator::Plain: return "plain";
        case Estimator::Tilted: return "tilted";
        case Estimator::Mean: return "mean";
    }
    return "?";
}

SimResult summarize(const SimStats& s, double horizon, std::uint64_t seed, Estimator e) {
    SimResult r;
    r.horizon = horizon;
    r.samples = s.n;
    r.hits = s.hits;
    r.seed = seed;
    r.estimator = e;
    if (s.n == 0) return r;
    double N = static_cast<double>(s.n);
    r.estimate = s.sum / N;
    if (e == Estimator::Plain) {
        r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / N);
    } else {
        double var = s.n > 1 ? std::max(0.0, (s.sum_sq - N * r.estimate * r.estimate) / (N - 1.0)) : 0.0;
        r.std_error = std::sqrt(var / N);
    }
    r.ci_lo = r.estimate - 1.96 * r.std_error;
    r.ci_hi = r.estimate + 1.96 * r.std_error;
    return r;
}

std::vector<SimStats> walk_passage_stats(const IncrementModel& model, double x, const std::vector<long>& n_grid,
                                         const MCOptions& opts) {
    auto order = sort_order(n_grid);
    std::vector<long> grid;
    for (auto i : order) grid.push_back(n_grid[i]);
    long n_max = grid.empty() ? 0 : std::max(0L, grid.back());
    auto sampler = model.tilted_sampler(0.0);
    auto body = [&](Stream& rng, std::vector<SimStats>& st) {
        double S = 0.0;
        long nu = n_max + 1;
        for (long k = 1; k <= n_max; ++k) {
            S += sampler(rng);
            if (S < -x) {
                nu = k;
                break;
            }
        }
        for (std::size_t j = 0; j < grid.size(); ++j) st[j].add(grid[j] < nu ? 1.0 : 0.0);
    };
    auto sorted = run_chunks(opts, grid.size(), body);
    std::vector<SimStats> out(n_grid.size());
    for (std::size_t j = 0; j < order.size(); ++j) out[order[j]] = sorted[j];
    return out;
}

std::vector<SimResult> simulate_walk_passage(const IncrementModel& model, double x, const std::vector<long>& n_grid,
                                             const MCOptions& opts) {
    auto st = walk_passage_stats(model, x, n_grid, opts);
    std::vector<SimResult> out;
    for (std::size_t j = 0; j < st.size(); ++j)
        out.push_back(summarize(st[j], static_cast<double>(n_grid[j]), opts.rng.seed, Estimator::Plain));
    return out;
}

namespace {

std::vector<SimResult> walk_sum(const IncrementModel& model, double s, double x, const std::vector<long>& n_grid,
                                const MCOptions& opts) {
    auto order = sort_order(n_grid);
    std::vector<long> grid;
    for (auto i : order) grid.push_back(n_grid[i]);
    long n_max = grid.empty() ? 0 : std::max(0L, grid.back());
    auto sampler = model.tilted_sampler(s);
    double log_m = s > 0.0 ? std::log(model.mgf(s).value) : 0.0;
    auto body = [&](Stream& rng, std::vector<SimStats>& st) {
        double S = 0.0;
        std::size_t j = 0;
        while (j < grid.size() && grid[j] <= 0) st[j++].add(0.0 > x ? 1.0 : 0.0);
        for (long k = 1; k <= n_max; ++k) {
            S += sampler(rng);
            while (j < grid.size() && grid[j] == k) {
                double w = 0.0;
                if (S > x) w = s > 0.0 ? std::exp(k * log_m - s * S) : 1.0;
                st[j++].add(w);
            }
        }
    };
    auto sorted = run_chunks(opts, grid.size(), body);
    return to_results(sorted, n_grid, order, opts.rng.seed, s > 0.0 ? Estimator::Tilted : Estimator::Plain);
}

}  // namespace

std::vector<SimResult> simulate_walk_sum(const IncrementModel& model, double x, const std::vector<long>& n_grid,
                                         const MCOptions& opts) {
    return walk_sum(model, 0.0, x, n_grid, opts);
}

std::vector<SimResult> simulate_walk_sum_tilted(const IncrementModel& model, double s, double x,
                                                const std::vector<long>& n_grid, const MCOptions& opts) {
    if (!(s > 0.0)) fail(ErrorCode::TiltUnavailable, "tilt must be positive");
    return walk_sum(model, s, x, n_grid, opts);
}

SimResult simulate_e_nu(const IncrementModel& model, double x, const MCOptions& opts, std::uint64_t max_steps) {
    if (!(model.mean() < 0.0)) fail(ErrorCode::InvalidDrift, "E nu_x needs negative drift");
    auto sampler = model.tilted_sampler(0.0);
    auto body = [&](Stream& rng, std::vector<SimStats>& st) {
        double S = 0.0;
        std::uint64_t k = 0;
        do {
            S += sampler(rng);
            if (++k > max_steps) fail(ErrorCode::NoConvergence, "path did not cross the level within the step cap");
        } while (S >= -x);
        st[0].add(static_cast<double>(k));
    };
    auto st = run_chunks(opts, 1, body);
    return summarize(st[0], 0.0, opts.rng.seed, Estimator::Mean);
}

MinFunctionalMC simulate_min_functional_terms(const IncrementModel& model, double alpha, double x, long K,
                                              const MCOptions& opts) {
    if (K < 0) fail(ErrorCode::InvalidHorizon, "K must be nonnegative");
    auto sampler = model.tilted_sampler(alpha);
    std::size_t total = static_cast<std::size_t>(K) + 1;
    auto body = [&](Stream& rng, std::vector<SimStats>& st) {
        double S = 0.0, N = 0.0, path = 1.0;
        st[0].add(1.0);
        long k = 1;
        for (; k <= K; ++k) {
            S += sampler(rng);
            N = std::min(N, S);
            if (N < -x) break;
            double w = std::exp(alpha * (N - S));
            path += w;
            st[k].add(w);
        }
        for (; k <= K; ++k) st[k].add(0.0);
        st[total].add(path);
    };
    auto st = run_chunks(opts, total + 1, body);
    MinFunctionalMC out;
    for (long k = 0; k <= K; ++k)
        out.terms.push_back(summarize(st[k], static_cast<double>(k), opts.rng.seed, Estimator::Tilted));
    out.partial_sum = summarize(st[total], static_cast<double>(K), opts.rng.seed, Estimator::Mean);
    return out;
}

namespace {

// Event-driven busy period: the workload drains at unit rate between arrivals. Calls
// record(j, W) for every sorted grid point t_j < bp(x), with W the workload at t_j.
template <class Record, class Service>
double busy_period_path(Stream& rng, double x, double rate, const Service& service, const std::vector<double>& grid,
                        bool to_end, const Record& record) {
    double W = x, t = 0.0;
    std::size_t g = 0;
    for (;;) {
        if (!to_end && g >= grid.size()) return kInf;
        double A = rng.exponential(rate);
        bool dies = W <= A;
        double end = dies ? t + W : t + A;
        while (g < grid.size() && grid[g] < end) {
            record(g, W - (grid[g] - t));
            ++g;
        }
        if (dies) return end;
        W = W - A + service(rng);
        t += A;
    }
}

}  // namespace

std::vector<SimResult> simulate_bp(const MG1Model& mg1, double x, const std::vector<double>& t_grid,
                                   const MCOptions& opts) {
    if (mg1.load() >= 1.0) fail(ErrorCode::UnstableSystem, "load >= 1");
    if (!(x > 0.0)) fail(ErrorCode::ZeroLevel, "bp(x) needs x > 0");
    auto order = sort_order(t_grid);
    std::vector<double> grid;
    for (auto i : order) grid.push_back(t_grid[i]);
    TailFamily law = mg1.service();
    auto service = [&law](Stream& rng) { return jump::quantile_tail(law, rng.uniform_pos()); };
    double rate = mg1.arrival_rate();
    auto body = [&](Stream& rng, std::vector<SimStats>& st) {
        std::vector<char> alive(grid.size(), 0);
        busy_period_path(rng, x, rate, service, grid, false, [&](std::size_t j, double) { alive[j] = 1; });
        for (std::size_t j = 0; j < grid.size(); ++j) st[j].add(alive[j] ? 1.0 : 0.0);
    };
    auto sorted = run_chunks(opts, grid.size(), body);
    return to_results(sorted, t_grid, order, opts.rng.seed, Estimator::Plain);
}

SimResult simulate_bp_mean(const MG1Model& mg1, double x, const MCOptions& opts) {
    if (mg1.load() >= 1.0) fail(ErrorCode::UnstableSystem, "load >= 1");
    if (!(x > 0.0)) fail(ErrorCode::ZeroLevel, "bp(x) needs x > 0");
    TailFamily law = mg1.service();
    auto service = [&law](Stream& rng) { return jump::quantile_tail(law, rng.uniform_pos()); };
    double rate = mg1.arrival_rate();
    std::vector<double> none;
    auto body = [&](Stream& rng, std::vector<SimStats>& st) {
        st[0].add(busy_period_path(rng, x, rate, service, none, true, [](std::size_t, double) {}));
    };
    auto st = run_chunks(opts, 1, body);
    return summarize(st[0], 0.0, opts.rng.seed, Estimator::Mean);
}

std::vector<SimResult> simulate_bp_tilted(const MG1Model& mg1, const CramerSolution& sol, double x,
                                          const std::vector<double>& t_grid, const MCOptions& opts) {
    if (mg1.load() >= 1.0) fail(ErrorCode::UnstableSystem, "load >= 1");
    if (!(x > 0.0)) fail(ErrorCode::ZeroLevel, "bp(x) needs x > 0");
    double alpha = sol.alpha, gamma = sol.gamma;
    MgfValue mb = mg1.service_mgf(alpha);
    if (!(alpha > 0.0) || !mb.finite()) fail(ErrorCode::TiltUnavailable, "service mgf infinite at the tilt");
    auto order = sort_order(t_grid);
    std::vector<double> grid;
    for (auto i : order) grid.push_back(t_grid[i]);
    TailFamily law = mg1.service();
    auto service = [&law, alpha](Stream& rng) { return jump::quantile_tilted_tail(law, alpha, rng.uniform_pos()); };
    double rate = mg1.arrival_rate() * mb.value;
    auto body = [&](Stream& rng, std::vector<SimStats>& st) {
        std::vector<double> w(grid.size(), 0.0);
        busy_period_path(rng, x, rate, service, grid, false, [&](std::size_t j, double W) {
            w[j] = std::exp(-alpha * (W - x) - gamma * grid[j]);
        });
        for (std::size_t j = 0; j < grid.size(); ++j) st[j].add(w[j]);
    };
    auto sorted = run_chunks(opts, grid.size(), body);
    return to_results(sorted, t_grid, order, opts.rng.seed, Estimator::Tilted);
}

}  // namespace fpt
