// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hiercon/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace hiercon {

/// Component ids in pipeline order, first consuming the root inputs and last
/// producing the root outputs.
struct DependencyChain {
    std::vector<std::string> ids;

    std::size_t size() const noexcept { return ids.size(); }
    /// "CP -> BS -> EC"
    std::string to_string() const;

    friend bool operator==(const DependencyChain &, const DependencyChain &) = default;
};

struct ValidityReport {
    bool is_valid = false;
    double threshold_sum = 0.0;
    double slack = 0.0; // (xbar_r - phi) - sum
    std::vector<std::string> violations;
};

/// Discovers the unique serial chain linking root inputs to root outputs.
/// Port bundles are matched by set equality. Every walk is explored, so the
/// result does not depend on component order.
///
/// Throws NoChainFound, AmbiguousChain (more than one complete chain) or
/// CycleDetected (no complete chain and some walk revisited a component).
DependencyChain find_chain(const SystemDescription &sys, const RootContract &root);

/// One skeleton sub-contract per chain member, assumptions copied from the root,
/// threshold unset.
std::vector<SubContract> form_subcontracts(const DependencyChain &chain, const SystemDescription &sys,
                                           const RootContract &root);

/// Checks composition (port matching, root end points, shared assumptions) and
/// refinement (sum of thresholds + phi <= xbar_r).
ValidityReport check_validity(std::span<const SubContract> subs, const RootContract &root);

/// Sum of thresholds in chain order; shared so every slack computation rounds alike.
double threshold_sum(std::span<const double> thresholds) noexcept;

/// Replaces `member_ids` by one composite component. Aggregate stats and range
/// are the caller's; `sys` is not modified.
SystemDescription group_composite(const SystemDescription &sys, std::span<const std::string> member_ids,
                                  const std::string &new_id, PortSet inputs, PortSet outputs, NfpStats stats,
                                  ThresholdRange range);

} // namespace hiercon
