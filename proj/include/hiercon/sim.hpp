// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hiercon/model.hpp"
#include "hiercon/refine.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hiercon {

/// Row-major matrix of NFP draws: one row per run, one column per component.
struct SampleMatrix {
    std::uint64_t seed = 0;
    std::size_t runs = 0;
    std::size_t columns = 0;
    std::vector<double> values;

    double at(std::size_t run, std::size_t column) const noexcept { return values[run * columns + column]; }
    std::span<const double> row(std::size_t run) const noexcept {
        return {values.data() + run * columns, columns};
    }
};

/// Independent normal draws (untruncated), reproducible from `seed`.
SampleMatrix sample(std::span<const NfpStats> stats, std::size_t runs, std::uint64_t seed);

struct MonitorMetrics {
    std::vector<double> far; // per component: fraction of runs with x_i > xbar_i
    double root_far = 0.0;   // fraction of runs with sum x_i > xbar_r
    double flex_rate = 0.0;  // root_far / sum(far), 0 when no component alarms
    std::size_t runs = 0;
};

struct MonitorReport {
    MonitorMetrics metrics;
    std::vector<std::uint8_t> sub_violations; // runs x components, row-major
    std::vector<std::uint8_t> root_violations;

    bool sub_violation(std::size_t run, std::size_t component) const noexcept {
        return sub_violations[run * metrics.far.size() + component] != 0;
    }
};

double flexibility_rate(double root_far, std::span<const double> far) noexcept;

/// Pass xbar_r = +infinity for "no root bound".
MonitorReport evaluate(const SampleMatrix &samples, std::span<const double> thresholds, double root_threshold);
/// Same metrics without materialising the violation matrices.
MonitorMetrics evaluate_metrics(const SampleMatrix &samples, std::span<const double> thresholds,
                                double root_threshold);

/// Inclusive arithmetic grid lo, lo + step, ..., <= hi (values rounded to 1e-12).
/// Empty when hi < lo or step <= 0.
std::vector<double> make_grid(double lo, double hi, double step);

struct SweepCell {
    double theta = 0.0;
    double root_threshold = 0.0;
    bool feasible = false;
    bool converged = false;
    double multiplier = 0.0;
    int iterations = 0;
    std::vector<double> thresholds;
    MonitorMetrics metrics;
};

struct SweepResult {
    std::vector<std::string> component_ids; // chain order
    std::vector<double> thetas;
    std::vector<double> root_thresholds;
    double flexibility = 0.0;
    std::vector<SweepCell> cells; // root-threshold major, theta minor

    const SweepCell &cell(std::size_t theta_index, std::size_t root_index) const {
        return cells[root_index * thetas.size() + theta_index];
    }
    /// Smallest theta in the column whose multiplier is exactly zero.
    std::optional<double> zero_multiplier_boundary(std::size_t root_index) const;
};

/// Runs refinement and monitoring for every (theta, xbar_r) cell. One sample
/// matrix drawn from `seed` is shared by all cells. A uniform theta is applied
/// to every component. Infeasible or non-converged cells are flagged, not fatal.
/// `threads == 0` picks the hardware concurrency.
SweepResult sweep(const SystemDescription &sys, const RootContract &root, std::span<const double> thetas,
                  std::span<const double> root_thresholds, double flexibility, std::size_t runs,
                  std::uint64_t seed, const SolverConfig &config = {}, unsigned threads = 0);

} // namespace hiercon
