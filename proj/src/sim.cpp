// SPDX-License-Identifier: Apache-2.0
#include "hiercon/sim.hpp"

#include "hiercon/error.hpp"
#include "hiercon/hierarchy.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace hiercon {

SampleMatrix sample(std::span<const NfpStats> stats, std::size_t runs, std::uint64_t seed) {
    if (runs == 0) throw DomainError("runs must be >= 1");
    SampleMatrix m{seed, runs, stats.size(), {}};
    m.values.resize(runs * stats.size());
    std::mt19937_64 rng(seed);
    std::vector<std::normal_distribution<double>> dists;
    dists.reserve(stats.size());
    for (const auto &s : stats) dists.emplace_back(s.mean, s.stddev);
    for (std::size_t k = 0; k < runs; ++k) {
        for (std::size_t i = 0; i < stats.size(); ++i) m.values[k * m.columns + i] = dists[i](rng);
    }
    return m;
}

double flexibility_rate(double root_far, std::span<const double> far) noexcept {
    double total = 0.0;
    for (double p : far) total += p;
    return total > 0.0 ? root_far / total : 0.0;
}

namespace {

template <typename OnRun>
MonitorMetrics scan(const SampleMatrix &samples, std::span<const double> thresholds, double root_threshold,
                    OnRun &&on_run) {
    if (thresholds.size() != samples.columns) throw DomainError("threshold count does not match sample columns");
    const std::size_t n = samples.columns;
    std::vector<std::size_t> counts(n, 0);
    std::size_t root_count = 0;
    for (std::size_t k = 0; k < samples.runs; ++k) {
        const auto row = samples.row(k);
        for (std::size_t i = 0; i < n; ++i) {
            const bool v = row[i] > thresholds[i];
            counts[i] += v;
            on_run(k, i, v);
        }
        const bool rv = threshold_sum(row) > root_threshold;
        root_count += rv;
        on_run(k, n, rv);
    }
    MonitorMetrics m;
    m.runs = samples.runs;
    const double runs = static_cast<double>(samples.runs);
    for (auto c : counts) m.far.push_back(static_cast<double>(c) / runs);
    m.root_far = static_cast<double>(root_count) / runs;
    m.flex_rate = flexibility_rate(m.root_far, m.far);
    return m;
}

} // namespace

MonitorReport evaluate(const SampleMatrix &samples, std::span<const double> thresholds, double root_threshold) {
    MonitorReport r;
    const std::size_t n = samples.columns;
    r.sub_violations.assign(samples.runs * n, 0);
    r.root_violations.assign(samples.runs, 0);
    r.metrics = scan(samples, thresholds, root_threshold, [&](std::size_t k, std::size_t i, bool v) {
        if (i == n) {
            r.root_violations[k] = v;
        } else {
            r.sub_violations[k * n + i] = v;
        }
    });
    return r;
}

MonitorMetrics evaluate_metrics(const SampleMatrix &samples, std::span<const double> thresholds,
                                double root_threshold) {
    return scan(samples, thresholds, root_threshold, [](std::size_t, std::size_t, bool) {});
}

std::vector<double> make_grid(double lo, double hi, double step) {
    std::vector<double> grid;
    if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) return grid;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    grid.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double v = lo + static_cast<double>(k) * step;
        grid.push_back(std::round(v * 1e12) / 1e12);
    }
    return grid;
}

std::optional<double> SweepResult::zero_multiplier_boundary(std::size_t root_index) const {
    for (std::size_t t = 0; t < thetas.size(); ++t) {
        const SweepCell &c = cell(t, root_index);
        if (c.feasible && c.converged && c.multiplier == 0.0) return c.theta;
    }
    return std::nullopt;
}

SweepResult sweep(const SystemDescription &sys, const RootContract &root, std::span<const double> thetas,
                  std::span<const double> root_thresholds, double flexibility, std::size_t runs,
                  std::uint64_t seed, const SolverConfig &config, unsigned threads) {
    if (thetas.empty() || root_thresholds.empty()) throw DomainError("sweep grids must be nonempty");
    for (double t : thetas) (void)Theta(t);

    const DependencyChain chain = find_chain(sys, root);
    SweepResult result;
    result.component_ids = chain.ids;
    result.thetas.assign(thetas.begin(), thetas.end());
    result.root_thresholds.assign(root_thresholds.begin(), root_thresholds.end());
    result.flexibility = flexibility;
    result.cells.resize(thetas.size() * root_thresholds.size());

    std::vector<NfpStats> stats;
    for (const auto &id : chain.ids) stats.push_back(sys.find(id)->stats);
    const SampleMatrix samples = sample(stats, runs, seed);

    auto run_cell = [&](std::size_t index) {
        const double theta = thetas[index % thetas.size()];
        const double xr = root_thresholds[index / thetas.size()];
        std::vector<Theta> weights(chain.size(), Theta(theta));
        const RefinementProblem problem = make_problem(sys, chain.ids, weights, xr, flexibility);

        SweepCell cell;
        cell.theta = theta;
        cell.root_threshold = xr;
        cell.feasible = is_feasible(problem).feasible;
        if (!cell.feasible) {
            cell.multiplier = std::numeric_limits<double>::quiet_NaN();
            cell.thresholds.assign(chain.size(), std::numeric_limits<double>::quiet_NaN());
            cell.metrics.far.assign(chain.size(), std::numeric_limits<double>::quiet_NaN());
            cell.metrics.root_far = std::numeric_limits<double>::quiet_NaN();
            cell.metrics.flex_rate = std::numeric_limits<double>::quiet_NaN();
            cell.metrics.runs = runs;
            result.cells[index] = std::move(cell);
            return;
        }
        RefinementSolution sol;
        try {
            sol = dual_ascent(problem, config);
        } catch (const NotConverged &e) {
            sol = e.partial();
        }
        cell.converged = sol.converged;
        cell.multiplier = sol.multiplier;
        cell.iterations = sol.iterations;
        cell.thresholds = sol.thresholds;
        cell.metrics = evaluate_metrics(samples, cell.thresholds, xr);
        result.cells[index] = std::move(cell);
    };

    const std::size_t total = result.cells.size();
    unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
    if (workers <= 1) {
        for (std::size_t i = 0; i < total; ++i) run_cell(i);
        return result;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                try {
                    for (std::size_t i = next++; i < total; i = next++) run_cell(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = total;
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return result;
}

} // namespace hiercon
