// SPDX-License-Identifier: Apache-2.0
#include "hiercon/hierarchy.hpp"

#include "hiercon/error.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace hiercon {

std::string DependencyChain::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += " -> ";
        out += ids[i];
    }
    return out;
}

namespace {

struct ChainSearch {
    const SystemDescription &sys;
    const RootContract &root;
    std::vector<std::vector<std::size_t>> complete;
    bool revisited = false;
    std::vector<std::size_t> path;
    std::vector<bool> on_path;

    void extend(std::size_t current) {
        const ComponentSpec &c = sys.components[current];
        if (c.outputs == root.outputs) {
            complete.push_back(path);
            return;
        }
        for (std::size_t k = 0; k < sys.components.size(); ++k) {
            if (!(sys.components[k].inputs == c.outputs)) continue;
            if (on_path[k]) {
                revisited = true;
                continue;
            }
            visit(k);
        }
    }

    void visit(std::size_t k) {
        path.push_back(k);
        on_path[k] = true;
        extend(k);
        on_path[k] = false;
        path.pop_back();
    }
};

} // namespace

DependencyChain find_chain(const SystemDescription &sys, const RootContract &root) {
    if (auto report = validate_system(sys); !report.ok()) {
        throw DomainError("system is invalid: " + report.violations.front().message);
    }

    ChainSearch search{sys, root, {}, false, {}, std::vector<bool>(sys.components.size(), false)};
    bool any_start = false;
    for (std::size_t j = 0; j < sys.components.size(); ++j) {
        if (sys.components[j].inputs == root.inputs) {
            any_start = true;
            search.visit(j);
        }
    }

    if (search.complete.size() > 1) {
        auto render = [&](const std::vector<std::size_t> &p) {
            DependencyChain c;
            for (auto k : p) c.ids.push_back(sys.components[k].id);
            return c.to_string();
        };
        throw AmbiguousChain("more than one chain links " + root.inputs.to_string() + " to " +
                             root.outputs.to_string() + ": [" + render(search.complete[0]) + "] and [" +
                             render(search.complete[1]) + "]");
    }
    if (search.complete.empty()) {
        if (search.revisited) {
            throw CycleDetected("no chain reaches " + root.outputs.to_string() +
                                "; the walk revisits a component (group feedback loops first)");
        }
        if (!any_start) {
            throw NoChainFound("no component consumes the root inputs " + root.inputs.to_string());
        }
        throw NoChainFound("every chain from " + root.inputs.to_string() + " dead-ends before " +
                           root.outputs.to_string());
    }

    DependencyChain chain;
    for (auto k : search.complete.front()) chain.ids.push_back(sys.components[k].id);
    return chain;
}

std::vector<SubContract> form_subcontracts(const DependencyChain &chain, const SystemDescription &sys,
                                           const RootContract &root) {
    std::vector<SubContract> subs;
    subs.reserve(chain.size());
    for (const auto &id : chain.ids) {
        const ComponentSpec *c = sys.find(id);
        if (!c) throw UnknownMember("chain member '" + id + "' is not in the system");
        subs.push_back({c->id, c->inputs, c->outputs, root.assumptions, std::nullopt});
    }
    return subs;
}

double threshold_sum(std::span<const double> thresholds) noexcept {
    double sum = 0.0;
    for (double x : thresholds) sum += x;
    return sum;
}

ValidityReport check_validity(std::span<const SubContract> subs, const RootContract &root) {
    ValidityReport report;
    auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };

    if (subs.empty()) {
        fail("no sub-contracts");
    } else {
        if (!(subs.front().inputs == root.inputs)) {
            fail("inputs of '" + subs.front().component_id + "' differ from root inputs");
        }
        if (!(subs.back().outputs == root.outputs)) {
            fail("outputs of '" + subs.back().component_id + "' differ from root outputs");
        }
    }
    for (std::size_t i = 1; i < subs.size(); ++i) {
        if (!(subs[i - 1].outputs == subs[i].inputs)) {
            fail("outputs of '" + subs[i - 1].component_id + "' do not match inputs of '" + subs[i].component_id +
                 "'");
        }
    }

    std::vector<double> thresholds;
    thresholds.reserve(subs.size());
    bool all_set = true;
    for (const auto &s : subs) {
        if (s.assumptions != root.assumptions) {
            fail("assumptions of '" + s.component_id + "' differ from the root's");
        }
        if (!s.threshold) {
            all_set = false;
            fail("threshold of '" + s.component_id + "' is unset");
        } else {
            thresholds.push_back(*s.threshold);
        }
    }

    report.threshold_sum = threshold_sum(thresholds);
    report.slack = (root.root_threshold - root.flexibility) - report.threshold_sum;
    if (all_set && !(report.slack >= 0.0)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "threshold sum %.17g + phi %.17g exceeds root threshold %.17g",
                      report.threshold_sum, root.flexibility, root.root_threshold);
        fail(buf);
    }
    report.is_valid = report.violations.empty();
    return report;
}

SystemDescription group_composite(const SystemDescription &sys, std::span<const std::string> member_ids,
                                  const std::string &new_id, PortSet inputs, PortSet outputs, NfpStats stats,
                                  ThresholdRange range) {
    if (member_ids.empty()) throw DomainError("group_composite needs at least one member");
    std::set<std::string> members(member_ids.begin(), member_ids.end());
    for (const auto &id : members) {
        if (!sys.find(id)) throw UnknownMember("'" + id + "' is not a component of the system");
    }

    SystemDescription out;
    out.nfp_name = sys.nfp_name;
    bool placed = false;
    for (const auto &c : sys.components) {
        if (members.count(c.id)) {
            if (!placed) {
                out.components.push_back({new_id, std::move(inputs), std::move(outputs), stats, range});
                placed = true;
            }
            continue;
        }
        if (c.id == new_id) throw DuplicateId("composite id '" + new_id + "' collides with an existing component");
        out.components.push_back(c);
    }
    return out;
}

} // namespace hiercon
