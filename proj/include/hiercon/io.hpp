// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hiercon/hierarchy.hpp"
#include "hiercon/model.hpp"
#include "hiercon/refine.hpp"
#include "hiercon/sim.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hiercon {

inline constexpr std::string_view kProjectVersion = "1";

struct ProjectDefaults {
    double theta = 0.5;
    std::optional<double> alpha;
    std::optional<double> epsilon;
    std::optional<int> max_iterations;
    std::size_t runs = 10000;
    std::uint64_t seed = 0;

    friend bool operator==(const ProjectDefaults &, const ProjectDefaults &) = default;
};

struct ProjectFile {
    std::string version{kProjectVersion};
    SystemDescription system;
    RootContract root_contract;
    std::map<std::string, double> component_theta; // per-component overrides of defaults.theta
    ProjectDefaults defaults;

    /// Chain-ordered weights: per-component override, else defaults.theta.
    std::vector<Theta> thetas_for(const DependencyChain &chain) const;
    SolverConfig solver_config() const;

    friend bool operator==(const ProjectFile &, const ProjectFile &) = default;
};

/// Parses the JSON project schema:
///
///   { "version": "1", "nfp": "latency",
///     "components": [ { "id", "inputs": [..], "outputs": [..], "mu", "sigma",
///                       "a"?, "b"?, "theta"? } ],
///     "root_contract": { "inputs", "outputs", "assumptions", "xbar_r", "phi" },
///     "defaults": { "theta", "alpha"?, "epsilon"?, "max_iterations"?, "runs", "seed" } }
///
/// Missing a/b default to mu -/+ 3 sigma. Throws SyntaxError (with line:column),
/// SchemaError or SemanticError (with a JSON pointer).
ProjectFile parse_project(std::string_view text);

/// Canonical text: sorted keys, two-space indent, reals with 17 significant digits.
std::string serialize_project(const ProjectFile &project);

inline constexpr std::string_view kMachineBegin = "--- BEGIN MACHINE-READABLE ---";
inline constexpr std::string_view kMachineEnd = "--- END MACHINE-READABLE ---";

/// Contract report: prose summary followed by a JSON block between
/// kMachineBegin / kMachineEnd. `subcontracts` are the skeletons from
/// form_subcontracts; thresholds are taken from `solution`. A non-converged
/// solution is flagged and no validity verdict is given.
std::string export_solution(const RefinementSolution &solution, std::span<const SubContract> subcontracts,
                            const RootContract &root);

/// Thresholds from a JSON array, a report's machine section, or a whole report.
std::vector<double> parse_thresholds(std::string_view text);

/// One row per cell, root-threshold major then theta:
/// theta,xbar_r,lambda,converged,xbar_<id>...,p_<id>...,p_root,r_f
std::string export_sweep(const SweepResult &result);

/// Header plus one row: runs,seed,xbar_r,xbar_<id>...,p_<id>...,p_root,r_f
std::string export_monitor(const MonitorMetrics &metrics, std::span<const std::string> component_ids,
                           std::span<const double> thresholds, double root_threshold, std::uint64_t seed);

} // namespace hiercon
