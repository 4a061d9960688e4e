// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace hiercon {

/// Set of opaque port identifiers. Keeps insertion order for display;
/// equality ignores order.
class PortSet {
  public:
    PortSet() = default;
    /// Throws DomainError on a duplicate name.
    explicit PortSet(std::vector<std::string> names);
    PortSet(std::initializer_list<std::string> names);

    const std::vector<std::string> &names() const noexcept { return names_; }
    std::size_t size() const noexcept { return names_.size(); }
    bool empty() const noexcept { return names_.empty(); }
    bool contains(const std::string &name) const;

    /// "{a, b}"
    std::string to_string() const;

    friend bool operator==(const PortSet &lhs, const PortSet &rhs);

  private:
    std::vector<std::string> names_;
    std::vector<std::string> sorted_;
};

/// Gaussian summary of a component's non-functional property (NFP).
struct NfpStats {
    double mean = 0.0;
    double stddev = 1.0;

    friend bool operator==(const NfpStats &, const NfpStats &) = default;
};

/// Feasible interval [lower, upper] for a threshold.
struct ThresholdRange {
    double lower = 0.0;
    double upper = 0.0;

    bool contains(double x) const noexcept { return lower <= x && x <= upper; }
    double clamp(double x) const noexcept;

    friend bool operator==(const ThresholdRange &, const ThresholdRange &) = default;
};

/// [mean - 3 sd, mean + 3 sd], used when a component declares no bounds.
ThresholdRange default_range(const NfpStats &stats) noexcept;

struct ComponentSpec {
    std::string id;
    PortSet inputs;
    PortSet outputs;
    NfpStats stats;
    ThresholdRange range;

    friend bool operator==(const ComponentSpec &, const ComponentSpec &) = default;
};

struct SystemDescription {
    std::vector<ComponentSpec> components;
    std::string nfp_name;

    const ComponentSpec *find(const std::string &id) const;

    friend bool operator==(const SystemDescription &, const SystemDescription &) = default;
};

struct RootContract {
    PortSet inputs;
    PortSet outputs;
    std::vector<std::string> assumptions;
    std::string nfp_name;
    double root_threshold = 0.0;
    double flexibility = 0.0;

    friend bool operator==(const RootContract &, const RootContract &) = default;
};

struct SubContract {
    std::string component_id;
    PortSet inputs;
    PortSet outputs;
    std::vector<std::string> assumptions;
    std::optional<double> threshold;

    friend bool operator==(const SubContract &, const SubContract &) = default;
};

enum class ViolationKind {
    EmptyId,
    DuplicateId,
    NonPositiveStddev,
    NonFiniteValue,
    InvertedRange,
    NegativeFlexibility,
    NfpMismatch,
};

const char *to_string(ViolationKind kind) noexcept;

struct Violation {
    ViolationKind kind;
    std::string component_id; // empty for system-level violations
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool has(ViolationKind kind) const noexcept;
};

ValidationReport validate_system(const SystemDescription &sys);

/// Root-contract checks: flexibility >= 0, finite threshold, NFP name matches.
ValidationReport validate_root(const RootContract &root, const SystemDescription &sys);

} // namespace hiercon
