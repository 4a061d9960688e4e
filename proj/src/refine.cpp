// SPDX-License-Identifier: Apache-2.0
#include "hiercon/refine.hpp"

#include "hiercon/hierarchy.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

namespace hiercon {

Theta::Theta(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0)) {
        throw DomainError("theta must lie in (0, 1), got " + std::to_string(value));
    }
}

double cost_flexibility(double threshold, const NfpStats &stats) noexcept {
    return std::exp((threshold - stats.mean) / stats.stddev);
}

double cost_communication(double threshold, const NfpStats &stats) noexcept {
    return std::exp(-(threshold - stats.mean) / stats.stddev);
}

double cost_component(double threshold, const NfpStats &stats, Theta theta) noexcept {
    const double t = theta.value();
    return t * cost_flexibility(threshold, stats) + (1.0 - t) * cost_communication(threshold, stats);
}

void validate_problem(const RefinementProblem &problem) {
    if (problem.components.empty()) throw DomainError("refinement problem has no components");
    if (!(problem.flexibility >= 0.0)) throw DomainError("flexibility must be >= 0");
    if (std::isnan(problem.root_threshold)) throw DomainError("root threshold is NaN");
    for (const auto &c : problem.components) {
        if (!(c.stats.stddev > 0.0) || !std::isfinite(c.stats.stddev) || !std::isfinite(c.stats.mean)) {
            throw DomainError("component stddev must be finite and > 0");
        }
        if (!(c.range.lower <= c.range.upper)) throw DomainError("component range has lower > upper");
    }
}

RefinementProblem make_problem(const SystemDescription &sys, const std::vector<std::string> &chain_ids,
                               std::span<const Theta> thetas, double root_threshold, double flexibility) {
    if (thetas.size() != chain_ids.size()) throw DomainError("one theta per chain member is required");
    RefinementProblem problem;
    problem.root_threshold = root_threshold;
    problem.flexibility = flexibility;
    for (std::size_t i = 0; i < chain_ids.size(); ++i) {
        const ComponentSpec *c = sys.find(chain_ids[i]);
        if (!c) throw UnknownMember("chain member '" + chain_ids[i] + "' is not in the system");
        problem.components.push_back({c->stats, c->range, thetas[i]});
    }
    return problem;
}

double objective(std::span<const double> thresholds, const RefinementProblem &problem) {
    assert(thresholds.size() == problem.components.size());
    double total = 0.0;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        const auto &c = problem.components[i];
        total += cost_component(thresholds[i], c.stats, c.theta);
    }
    return total;
}

Feasibility is_feasible(const RefinementProblem &problem) {
    std::vector<double> lower;
    lower.reserve(problem.components.size());
    for (const auto &c : problem.components) lower.push_back(c.range.lower);
    const double slack = problem.budget() - threshold_sum(lower);
    return {slack >= 0.0, slack};
}

SubLagrangian sublagrangian(double threshold, double lambda, const NfpStats &stats, Theta theta) noexcept {
    const double t = theta.value();
    const double up = std::exp((threshold - stats.mean) / stats.stddev);
    const double down = 1.0 / up;
    return {t * up + (1.0 - t) * down + lambda * threshold,
            (t / stats.stddev) * up - ((1.0 - t) / stats.stddev) * down + lambda};
}

double unclamped_optimum(const NfpStats &stats, Theta theta, double lambda) {
    const double t = theta.value();
    const double s = stats.stddev * lambda;
    const double c = 4.0 * t * (1.0 - t);
    // sqrt(s^2 + c) - s, rewritten to avoid cancellation for large s
    const double root = c / (std::sqrt(s * s + c) + s);
    const double ratio = root / (2.0 * t);
    assert(ratio > 0.0);
    return stats.mean + stats.stddev * std::log(ratio);
}

double solve_subproblem(const NfpStats &stats, const ThresholdRange &range, Theta theta, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("multiplier must be >= 0");
    return range.clamp(unclamped_optimum(stats, theta, lambda));
}

double default_step(const RefinementProblem &problem) {
    double var_sum = 0.0;
    double min_curv = std::numeric_limits<double>::infinity();
    for (const auto &c : problem.components) {
        var_sum += c.stats.stddev * c.stats.stddev;
        const double t = c.theta.value();
        min_curv = std::min(min_curv, 2.0 * std::sqrt(t * (1.0 - t)));
    }
    return min_curv / var_sum;
}

namespace {

struct Primal {
    std::vector<double> x;
    double sum = 0.0;
};

Primal primal_at(const RefinementProblem &p, double lambda) {
    Primal out;
    out.x.reserve(p.components.size());
    for (const auto &c : p.components) out.x.push_back(solve_subproblem(c.stats, c.range, c.theta, lambda));
    out.sum = threshold_sum(out.x);
    return out;
}

// -d(sum x)/dlambda: sum of sd^2 / (theta Q + (1 - theta) W)
// over components strictly inside their range.
double dual_curvature(const RefinementProblem &p, const std::vector<double> &x) {
    double curv = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto &c = p.components[i];
        if (!(c.range.lower < x[i] && x[i] < c.range.upper)) continue;
        const double t = c.theta.value();
        const double h = t * cost_flexibility(x[i], c.stats) + (1.0 - t) * cost_communication(x[i], c.stats);
        curv += c.stats.stddev * c.stats.stddev / h;
    }
    return curv;
}

// Smallest multiplier >= lambda (to bisection precision) whose primal fits the budget.
double raise_until_feasible(const RefinementProblem &p, double lambda) {
    const double budget = p.budget();
    double lo = lambda;
    double hi = std::max(lambda, std::numeric_limits<double>::min());
    for (int i = 0; i < 2100 && budget - primal_at(p, hi).sum < 0.0; ++i) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (budget - primal_at(p, mid).sum >= 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

} // namespace

RefinementSolution dual_ascent(const RefinementProblem &problem, const SolverConfig &config) {
    validate_problem(problem);
    const double fallback_step = config.step.value_or(default_step(problem));
    if (!(fallback_step > 0.0) || !std::isfinite(fallback_step)) throw DomainError("step must be finite and > 0");
    if (!(config.tolerance > 0.0)) throw DomainError("tolerance must be > 0");
    if (config.max_iterations <= 0) throw DomainError("max_iterations must be > 0");
    const double tol_primal = config.primal_tolerance.value_or(1e-6 * std::abs(problem.root_threshold));

    const Feasibility f = is_feasible(problem);
    if (!f.feasible) {
        throw Infeasible("sum of lower bounds exceeds xbar_r - phi by " + std::to_string(-f.slack) +
                         "; loosen the root threshold or the component ranges");
    }

    const double budget = problem.budget();
    RefinementSolution sol;
    if (f.slack <= tol_primal) {
        // The lower-bound vertex is the only point within tolerance of the budget.
        double lambda = 0.0;
        for (const auto &c : problem.components) {
            sol.thresholds.push_back(c.range.lower);
            lambda = std::max(lambda, -sublagrangian(c.range.lower, 0.0, c.stats, c.theta).derivative);
        }
        sol.multiplier = lambda;
        sol.objective = objective(sol.thresholds, problem);
        sol.trace.push_back({0, lambda, threshold_sum(sol.thresholds)});
        sol.iterations = 1;
        sol.converged = true;
        return sol;
    }
    double lambda = 0.0;
    bool stopped = false;
    for (int tau = 0; tau < config.max_iterations; ++tau) {
        const Primal primal = primal_at(problem, lambda);
        sol.trace.push_back({tau, lambda, primal.sum});
        double step = fallback_step;
        if (!config.step) {
            const double curv = dual_curvature(problem, primal.x);
            if (curv > 0.0) step = 1.0 / curv;
        }
        const double next = std::max(0.0, lambda + step * (primal.sum - budget));
        const double moved = std::abs(next - lambda);
        lambda = next;
        sol.iterations = tau + 1;
        if (moved <= config.tolerance) {
            stopped = true;
            break;
        }
    }

    Primal primal = primal_at(problem, lambda);
    sol.multiplier = lambda;
    sol.thresholds = primal.x;
    sol.objective = objective(sol.thresholds, problem);

    const double gap = budget - primal.sum;
    const bool kkt = lambda == 0.0 ? gap >= -tol_primal : std::abs(gap) <= tol_primal;
    if (!stopped || !kkt) {
        sol.converged = false;
        throw NotConverged(stopped ? "dual ascent stalled away from a KKT point (step too small?)"
                                   : "dual ascent did not converge within " +
                                         std::to_string(config.max_iterations) + " iterations",
                           std::move(sol));
    }

    if (gap < 0.0) {
        sol.multiplier = raise_until_feasible(problem, lambda);
        primal = primal_at(problem, sol.multiplier);
        sol.thresholds = primal.x;
        sol.objective = objective(sol.thresholds, problem);
    }
    sol.converged = true;
    return sol;
}

double theta_lower_bound(double mean_sum, double stddev_sum, double root_threshold, double flexibility) noexcept {
    return 1.0 / (std::exp(2.0 * (root_threshold - flexibility - mean_sum) / stddev_sum) + 1.0);
}

double theta_lower_bound(const RefinementProblem &problem) {
    validate_problem(problem);
    const Theta theta = problem.components.front().theta;
    double mean_sum = 0.0;
    double sd_sum = 0.0;
    for (const auto &c : problem.components) {
        if (!(c.theta == theta)) throw DomainError("theta_lower_bound requires a uniform theta");
        mean_sum += c.stats.mean;
        sd_sum += c.stats.stddev;
    }
    return theta_lower_bound(mean_sum, sd_sum, problem.root_threshold, problem.flexibility);
}

RefinementSolution oracle_grid(const RefinementProblem &problem, int points_per_axis) {
    validate_problem(problem);
    if (points_per_axis < 2) throw DomainError("oracle_grid needs at least 2 points per axis");
    if (auto f = is_feasible(problem); !f.feasible) throw Infeasible("no grid point satisfies the budget");

    const std::size_t n = problem.components.size();
    const auto points = static_cast<std::size_t>(points_per_axis);
    std::vector<std::vector<double>> xs(n), costs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto &c = problem.components[i];
        for (std::size_t k = 0; k < points; ++k) {
            const double x = k + 1 == points
                                 ? c.range.upper
                                 : c.range.lower + (c.range.upper - c.range.lower) * static_cast<double>(k) /
                                                       static_cast<double>(points - 1);
            xs[i].push_back(x);
            costs[i].push_back(cost_component(x, c.stats, c.theta));
        }
    }
    // Sum of lower bounds of the axes after i, for pruning.
    std::vector<double> tail_lower(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) tail_lower[i] = tail_lower[i + 1] + xs[i].front();

    const double budget = problem.budget();
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_idx(n, 0), idx(n, 0);

    // Odometer with prefix sums; axes are ascending so a budget overrun ends an axis.
    std::vector<double> prefix_sum(n + 1, 0.0), prefix_cost(n + 1, 0.0);
    auto descend = [&](auto &&self, std::size_t depth) -> void {
        if (depth == n) {
            if (budget - prefix_sum[n] >= 0.0 && prefix_cost[n] < best) {
                best = prefix_cost[n];
                best_idx = idx;
            }
            return;
        }
        for (std::size_t k = 0; k < points; ++k) {
            const double s = prefix_sum[depth] + xs[depth][k];
            if (s + tail_lower[depth + 1] > budget + 1e-9 * std::abs(budget) + 1e-12) break;
            idx[depth] = k;
            prefix_sum[depth + 1] = s;
            prefix_cost[depth + 1] = prefix_cost[depth] + costs[depth][k];
            self(self, depth + 1);
        }
    };
    descend(descend, 0);

    if (!std::isfinite(best)) throw Infeasible("no grid point satisfies the budget");
    RefinementSolution sol;
    for (std::size_t i = 0; i < n; ++i) sol.thresholds.push_back(xs[i][best_idx[i]]);
    sol.objective = objective(sol.thresholds, problem);
    sol.converged = true;
    sol.multiplier = 0.0;
    return sol;
}

} // namespace hiercon
