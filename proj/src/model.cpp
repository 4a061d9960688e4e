// SPDX-License-Identifier: Apache-2.0
#include "hiercon/model.hpp"

#include "hiercon/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hiercon {

PortSet::PortSet(std::vector<std::string> names) : names_(std::move(names)), sorted_(names_) {
    std::sort(sorted_.begin(), sorted_.end());
    auto dup = std::adjacent_find(sorted_.begin(), sorted_.end());
    if (dup != sorted_.end()) {
        throw DomainError("duplicate port name '" + *dup + "'");
    }
}

PortSet::PortSet(std::initializer_list<std::string> names)
    : PortSet(std::vector<std::string>(names)) {}

bool PortSet::contains(const std::string &name) const {
    return std::binary_search(sorted_.begin(), sorted_.end(), name);
}

std::string PortSet::to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (i) out += ", ";
        out += names_[i];
    }
    return out + "}";
}

bool operator==(const PortSet &lhs, const PortSet &rhs) { return lhs.sorted_ == rhs.sorted_; }

double ThresholdRange::clamp(double x) const noexcept {
    if (x <= lower) return lower;
    if (x >= upper) return upper;
    return x;
}

ThresholdRange default_range(const NfpStats &stats) noexcept {
    return {stats.mean - 3.0 * stats.stddev, stats.mean + 3.0 * stats.stddev};
}

const ComponentSpec *SystemDescription::find(const std::string &id) const {
    auto it = std::find_if(components.begin(), components.end(),
                           [&](const ComponentSpec &c) { return c.id == id; });
    return it == components.end() ? nullptr : &*it;
}

const char *to_string(ViolationKind kind) noexcept {
    switch (kind) {
    case ViolationKind::EmptyId: return "empty-id";
    case ViolationKind::DuplicateId: return "duplicate-id";
    case ViolationKind::NonPositiveStddev: return "non-positive-stddev";
    case ViolationKind::NonFiniteValue: return "non-finite-value";
    case ViolationKind::InvertedRange: return "inverted-range";
    case ViolationKind::NegativeFlexibility: return "negative-flexibility";
    case ViolationKind::NfpMismatch: return "nfp-mismatch";
    }
    return "unknown";
}

bool ValidationReport::has(ViolationKind kind) const noexcept {
    return std::any_of(violations.begin(), violations.end(),
                       [kind](const Violation &v) { return v.kind == kind; });
}

ValidationReport validate_system(const SystemDescription &sys) {
    ValidationReport report;
    auto add = [&](ViolationKind kind, const std::string &id, std::string msg) {
        report.violations.push_back({kind, id, std::move(msg)});
    };

    std::set<std::string> seen;
    for (const auto &c : sys.components) {
        if (c.id.empty()) add(ViolationKind::EmptyId, c.id, "component id is empty");
        if (!seen.insert(c.id).second) {
            add(ViolationKind::DuplicateId, c.id, "component id '" + c.id + "' appears more than once");
        }
        const bool finite = std::isfinite(c.stats.mean) && std::isfinite(c.stats.stddev) &&
                            std::isfinite(c.range.lower) && std::isfinite(c.range.upper);
        if (!finite) {
            add(ViolationKind::NonFiniteValue, c.id, "component '" + c.id + "' has a non-finite statistic or bound");
            continue;
        }
        if (!(c.stats.stddev > 0.0)) {
            add(ViolationKind::NonPositiveStddev, c.id,
                "component '" + c.id + "' has stddev " + std::to_string(c.stats.stddev) + " (must be > 0)");
        }
        if (c.range.lower > c.range.upper) {
            add(ViolationKind::InvertedRange, c.id,
                "component '" + c.id + "' has lower bound above upper bound");
        }
    }
    return report;
}

ValidationReport validate_root(const RootContract &root, const SystemDescription &sys) {
    ValidationReport report;
    if (std::isnan(root.root_threshold) || !std::isfinite(root.flexibility)) {
        report.violations.push_back({ViolationKind::NonFiniteValue, "", "root threshold or flexibility is not a number"});
    } else if (root.flexibility < 0.0) {
        report.violations.push_back({ViolationKind::NegativeFlexibility, "", "flexibility must be >= 0"});
    }
    if (root.nfp_name != sys.nfp_name) {
        report.violations.push_back({ViolationKind::NfpMismatch, "",
                                     "root contract NFP '" + root.nfp_name + "' does not match system NFP '" +
                                         sys.nfp_name + "'"});
    }
    return report;
}

} // namespace hiercon
