// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hiercon/error.hpp"
#include "hiercon/model.hpp"

#include <optional>
#include <span>
#include <vector>

namespace hiercon {

/// Weight between flexibility cost and communication cost, in the open
/// interval (0, 1). Construction outside the interval throws DomainError.
class Theta {
  public:
    explicit Theta(double value);
    double value() const noexcept { return value_; }
    friend bool operator==(const Theta &, const Theta &) = default;

  private:
    double value_;
};

/// Cost model ------------------------------------------------------------

/// exp((x - mean) / sd): grows with the threshold (less room at the root).
double cost_flexibility(double threshold, const NfpStats &stats) noexcept;
/// exp(-(x - mean) / sd): tighter thresholds raise more alarms.
double cost_communication(double threshold, const NfpStats &stats) noexcept;
/// theta * flexibility + (1 - theta) * communication.
double cost_component(double threshold, const NfpStats &stats, Theta theta) noexcept;

struct ComponentTerm {
    NfpStats stats;
    ThresholdRange range;
    Theta theta;
};

/// Minimize sum of component costs subject to sum(x) + phi <= xbar_r and
/// x_i in range_i.
struct RefinementProblem {
    std::vector<ComponentTerm> components;
    double root_threshold = 0.0;
    double flexibility = 0.0;

    /// xbar_r - phi
    double budget() const noexcept { return root_threshold - flexibility; }
};

/// Throws DomainError when the problem is malformed (empty, bad stats, phi < 0).
void validate_problem(const RefinementProblem &problem);

/// Builds a problem from a chain-ordered system with one theta per component.
RefinementProblem make_problem(const SystemDescription &sys, const std::vector<std::string> &chain_ids,
                               std::span<const Theta> thetas, double root_threshold, double flexibility);

double objective(std::span<const double> thresholds, const RefinementProblem &problem);

struct Feasibility {
    bool feasible = false;
    double slack = 0.0; // (xbar_r - phi) - sum(lower bounds)
};

/// The problem has a feasible point iff the lower bounds fit in the budget.
Feasibility is_feasible(const RefinementProblem &problem);

/// Dual decomposition -----------------------------------------------------

struct SubLagrangian {
    double value = 0.0;
    double derivative = 0.0;
};

/// H(x) + lambda * x and its derivative in x.
SubLagrangian sublagrangian(double threshold, double lambda, const NfpStats &stats, Theta theta) noexcept;

/// Stationary point of the sub-Lagrangian ignoring the box.
double unclamped_optimum(const NfpStats &stats, Theta theta, double lambda);

/// Minimizer of the sub-Lagrangian over the component's range (closed form,
/// clamped to the box). Requires lambda >= 0.
double solve_subproblem(const NfpStats &stats, const ThresholdRange &range, Theta theta, double lambda);

struct SolverConfig {
    std::optional<double> step;             // fixed step; default: curvature-adaptive, see dual_ascent
    double tolerance = 1e-9;                // on |lambda(t+1) - lambda(t)|
    int max_iterations = 10000;
    std::optional<double> primal_tolerance; // default: 1e-6 * |xbar_r|
};

/// Largest fixed step with step * L <= 1, where L bounds the curvature of the
/// dual function: min_i 2 sqrt(theta_i (1 - theta_i)) / sum_i sd_i^2.
double default_step(const RefinementProblem &problem);

struct TraceEntry {
    int iteration = 0;
    double lambda = 0.0;
    double threshold_sum = 0.0;
};

struct RefinementSolution {
    std::vector<double> thresholds;
    double multiplier = 0.0;
    int iterations = 0;
    double objective = 0.0;
    bool converged = false;
    std::vector<TraceEntry> trace;
};

class NotConverged : public Error {
  public:
    NotConverged(const std::string &what, RefinementSolution partial)
        : Error(what), partial_(std::move(partial)) {}
    const RefinementSolution &partial() const noexcept { return partial_; }

  private:
    RefinementSolution partial_;
};

/// Projected dual gradient ascent starting at lambda = 0:
///   x_i = solve_subproblem(lambda), lambda <- max(0, lambda + step (sum x - (xbar_r - phi)))
/// until the multiplier moves by at most `tolerance`. Without a configured step,
/// each iteration steps by 1 / |d(sum x)/dlambda| over the unclamped components,
/// falling back to default_step() when every component is clamped. Throws Infeasible up front
/// and NotConverged (with the partial trace) if the iteration budget runs out or
/// the stop rule fires away from a KKT point.
///
/// A converged solution always satisfies sum x + phi <= xbar_r exactly: when the
/// last iterate overshoots by a rounding-level amount the multiplier is raised
/// by bisection until the sum fits.
RefinementSolution dual_ascent(const RefinementProblem &problem, const SolverConfig &config = {});

/// Smallest uniform theta for which the threshold-sum constraint is inactive,
/// assuming no component is clamped at lambda = 0.
double theta_lower_bound(double mean_sum, double stddev_sum, double root_threshold, double flexibility) noexcept;
/// Throws DomainError unless every component shares one theta.
double theta_lower_bound(const RefinementProblem &problem);

/// Exhaustive search over a Cartesian grid of `points_per_axis` points per range.
/// The multiplier of the result is not estimated and is reported as 0.
RefinementSolution oracle_grid(const RefinementProblem &problem, int points_per_axis);

} // namespace hiercon
