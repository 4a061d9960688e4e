// SPDX-License-Identifier: Apache-2.0
#include "hiercon/error.hpp"
#include "hiercon/hierarchy.hpp"
#include "testbed.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace hiercon;
using hiercon::test::make_component;
using hiercon::test::testbed_root;
using hiercon::test::testbed_system;

namespace {

RootContract root_for(PortSet in, PortSet out) {
    RootContract r;
    r.inputs = std::move(in);
    r.outputs = std::move(out);
    r.assumptions = {"env"};
    r.nfp_name = "latency_ms";
    r.root_threshold = 100.0;
    r.flexibility = 1.0;
    return r;
}

SystemDescription system_of(std::vector<ComponentSpec> cs) {
    SystemDescription s;
    s.nfp_name = "latency_ms";
    s.components = std::move(cs);
    return s;
}

// Enumerates every ordered sequence of distinct components and keeps the
// ones that link root inputs to root outputs, stopping at the first
// component that produces the root outputs.
std::vector<std::vector<std::string>> brute_force_chains(const SystemDescription &sys, const RootContract &root) {
    const std::size_t n = sys.components.size();
    std::vector<std::vector<std::string>> found;
    std::vector<std::size_t> idx(n);
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::size_t> pick;
        for (std::size_t k = 0; k < n; ++k)
            if (mask & (std::size_t{1} << k)) pick.push_back(k);
        std::sort(pick.begin(), pick.end());
        do {
            const auto &first = sys.components[pick.front()];
            if (!(first.inputs == root.inputs)) continue;
            bool ok = true;
            for (std::size_t i = 0; i + 1 < pick.size() && ok; ++i) {
                const auto &a = sys.components[pick[i]];
                const auto &b = sys.components[pick[i + 1]];
                if (a.outputs == root.outputs || !(a.outputs == b.inputs)) ok = false;
            }
            if (!ok || !(sys.components[pick.back()].outputs == root.outputs)) continue;
            std::vector<std::string> ids;
            for (auto k : pick) ids.push_back(sys.components[k].id);
            found.push_back(ids);
        } while (std::next_permutation(pick.begin(), pick.end()));
    }
    return found;
}

} // namespace

TEST(FindChain, Testbed) {
    auto chain = find_chain(testbed_system(), testbed_root());
    EXPECT_EQ(chain.ids, (std::vector<std::string>{"CP", "BS", "EC"}));
    EXPECT_EQ(chain.to_string(), "CP -> BS -> EC");
}

TEST(FindChain, SingleComponent) {
    auto sys = system_of({make_component("A", {"u"}, {"y"}, 10, 1)});
    auto chain = find_chain(sys, root_for({"u"}, {"y"}));
    EXPECT_EQ(chain.ids, (std::vector<std::string>{"A"}));
}

TEST(FindChain, CycleDetected) {
    auto sys = system_of({make_component("A", {"u"}, {"m"}, 10, 1), make_component("B", {"m"}, {"u"}, 10, 1)});
    EXPECT_THROW(find_chain(sys, root_for({"u"}, {"y"})), CycleDetected);
}

TEST(FindChain, NoChain) {
    auto sys = system_of({make_component("A", {"u"}, {"m"}, 10, 1), make_component("B", {"q"}, {"y"}, 10, 1)});
    EXPECT_THROW(find_chain(sys, root_for({"u"}, {"y"})), NoChainFound);
    EXPECT_THROW(find_chain(sys, root_for({"zz"}, {"y"})), NoChainFound);
}

TEST(FindChain, Ambiguous) {
    auto sys = system_of({make_component("A", {"u"}, {"m"}, 10, 1), make_component("B", {"m"}, {"y"}, 10, 1),
                          make_component("C", {"m"}, {"y"}, 10, 1)});
    EXPECT_THROW(find_chain(sys, root_for({"u"}, {"y"})), AmbiguousChain);
}

TEST(FindChain, InvalidSystemRejected) {
    auto sys = testbed_system();
    sys.components[1].stats.stddev = 0.0;
    EXPECT_THROW(find_chain(sys, testbed_root()), DomainError);
}

TEST(FindChain, BundledPortsMatchAsSets) {
    auto sys = testbed_system();
    sys.components[1].inputs = PortSet{"CV_CP", "SC_CP"};
    EXPECT_EQ(find_chain(sys, testbed_root()).ids, (std::vector<std::string>{"CP", "BS", "EC"}));
    sys.components[1].inputs = PortSet{"SC_CP"};
    EXPECT_THROW(find_chain(sys, testbed_root()), NoChainFound);
}

TEST(FindChain, PermutationIndependent) {
    auto sys = testbed_system();
    sys.components.push_back(make_component("X", {"Q"}, {"R"}, 5, 1));
    std::sort(sys.components.begin(), sys.components.end(),
              [](const auto &a, const auto &b) { return a.id < b.id; });
    do {
        EXPECT_EQ(find_chain(sys, testbed_root()).ids, (std::vector<std::string>{"CP", "BS", "EC"}));
    } while (std::next_permutation(sys.components.begin(), sys.components.end(),
                                   [](const auto &a, const auto &b) { return a.id < b.id; }));
}

TEST(FindChain, AgreesWithBruteForceOnRandomGraphs) {
    std::mt19937_64 rng(7);
    const std::vector<std::string> ports{"p0", "p1", "p2", "p3"};
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_int_distribution<int> count(2, 5);
    for (int trial = 0; trial < 400; ++trial) {
        std::vector<ComponentSpec> cs;
        const int n = count(rng);
        for (int k = 0; k < n; ++k) {
            cs.push_back(make_component("c" + std::to_string(k), {ports[pick(rng)]}, {ports[pick(rng)]}, 10, 1));
        }
        auto sys = system_of(cs);
        auto root = root_for({"p0"}, {"p3"});
        auto expected = brute_force_chains(sys, root);
        if (expected.size() == 1) {
            EXPECT_EQ(find_chain(sys, root).ids, expected.front());
        } else if (expected.size() > 1) {
            EXPECT_THROW(find_chain(sys, root), AmbiguousChain);
        } else {
            try {
                find_chain(sys, root);
                ADD_FAILURE() << "expected a chain error";
            } catch (const CycleDetected &) {
            } catch (const NoChainFound &) {
            }
        }
    }
}

TEST(SubContracts, CopyRootAssumptions) {
    auto sys = testbed_system();
    auto root = testbed_root();
    auto subs = form_subcontracts(find_chain(sys, root), sys, root);
    ASSERT_EQ(subs.size(), 3u);
    for (const auto &s : subs) {
        EXPECT_EQ(s.assumptions, root.assumptions);
        EXPECT_FALSE(s.threshold.has_value());
    }
    EXPECT_EQ(subs[0].component_id, "CP");
    EXPECT_EQ(subs[1].inputs, (PortSet{"SC_CP", "CV_CP"}));
    EXPECT_EQ(subs[2].outputs, (PortSet{"T_EC"}));

    root.assumptions.clear();
    subs = form_subcontracts(find_chain(sys, root), sys, root);
    for (const auto &s : subs) EXPECT_TRUE(s.assumptions.empty());
}

TEST(Validity, SumBoundary) {
    auto sys = testbed_system();
    auto root = testbed_root(100.0, 10.0);
    auto subs = form_subcontracts(find_chain(sys, root), sys, root);
    subs[0].threshold = 50.0;
    subs[1].threshold = 30.0;
    subs[2].threshold = 10.0;
    auto rep = check_validity(subs, root);
    EXPECT_TRUE(rep.is_valid);
    EXPECT_DOUBLE_EQ(rep.threshold_sum, 90.0);
    EXPECT_DOUBLE_EQ(rep.slack, 0.0);

    subs[2].threshold = 11.0;
    rep = check_validity(subs, root);
    EXPECT_FALSE(rep.is_valid);
    EXPECT_DOUBLE_EQ(rep.slack, -1.0);
}

TEST(Validity, StructuralViolations) {
    auto sys = testbed_system();
    auto root = testbed_root();
    auto subs = form_subcontracts(find_chain(sys, root), sys, root);
    for (auto &s : subs) s.threshold = 1.0;
    EXPECT_TRUE(check_validity(subs, root).is_valid);

    auto broken = subs;
    broken[1].assumptions = {"other"};
    EXPECT_FALSE(check_validity(broken, root).is_valid);

    broken = subs;
    std::swap(broken[0], broken[1]);
    EXPECT_FALSE(check_validity(broken, root).is_valid);

    broken = subs;
    broken[2].threshold.reset();
    EXPECT_FALSE(check_validity(broken, root).is_valid);

    EXPECT_FALSE(check_validity(std::span<const SubContract>{}, root).is_valid);
}

TEST(Validity, ThresholdSum) {
    std::vector<double> x{1546.7, 59.651, 31.772};
    EXPECT_NEAR(threshold_sum(x), 1638.123, 1e-9);
    EXPECT_EQ(threshold_sum(std::span<const double>{}), 0.0);
}

TEST(Composite, FeedbackLoopGrouped) {
    // A -> B -> C with a feedback edge from C back into B.
    auto sys = system_of({make_component("A", {"u"}, {"m"}, 10, 1), make_component("B", {"m", "fb"}, {"n"}, 20, 2),
                          make_component("C", {"n"}, {"fb", "y"}, 30, 2)});
    auto root = root_for({"u"}, {"y"});
    EXPECT_THROW(find_chain(sys, root), NoChainFound);

    std::vector<std::string> members{"B", "C"};
    NfpStats agg{50.0, std::sqrt(8.0)};
    auto grouped = group_composite(sys, members, "BC", {"m"}, {"y"}, agg, default_range(agg));
    ASSERT_EQ(grouped.components.size(), 2u);
    EXPECT_EQ(find_chain(grouped, root).ids, (std::vector<std::string>{"A", "BC"}));
    EXPECT_EQ(sys.components.size(), 3u);
}

TEST(Composite, ParallelPairUsesSummedVariance) {
    auto sys = system_of({make_component("A", {"u"}, {"m1", "m2"}, 10, 1), make_component("P", {"m1"}, {"n1"}, 20, 3),
                          make_component("Q", {"m2"}, {"n2"}, 25, 4),
                          make_component("D", {"n1", "n2"}, {"y"}, 5, 1)});
    auto root = root_for({"u"}, {"y"});
    EXPECT_THROW(find_chain(sys, root), NoChainFound);
    const double mean = 20 + 25;
    const double sd = std::sqrt(3.0 * 3.0 + 4.0 * 4.0);
    std::vector<std::string> members{"P", "Q"};
    NfpStats agg{mean, sd};
    auto grouped = group_composite(sys, members, "PQ", {"m1", "m2"}, {"n1", "n2"}, agg, default_range(agg));
    EXPECT_EQ(find_chain(grouped, root).ids, (std::vector<std::string>{"A", "PQ", "D"}));
    ASSERT_NE(grouped.find("PQ"), nullptr);
    EXPECT_DOUBLE_EQ(grouped.find("PQ")->stats.stddev, 5.0);
    EXPECT_DOUBLE_EQ(grouped.find("PQ")->stats.mean, 45.0);
}

TEST(Composite, IdentityGrouping) {
    auto sys = testbed_system();
    std::vector<std::string> members{"BS"};
    const auto &bs = sys.components[1];
    auto grouped = group_composite(sys, members, "BS", bs.inputs, bs.outputs, bs.stats, bs.range);
    EXPECT_EQ(grouped, sys);
}

TEST(Composite, Errors) {
    auto sys = testbed_system();
    std::vector<std::string> unknown{"BS", "ZZ"};
    EXPECT_THROW(group_composite(sys, unknown, "G", {"a"}, {"b"}, {1, 1}, {0, 2}), UnknownMember);
    std::vector<std::string> members{"BS", "EC"};
    EXPECT_THROW(group_composite(sys, members, "CP", {"a"}, {"b"}, {1, 1}, {0, 2}), DuplicateId);
    EXPECT_THROW(group_composite(sys, std::span<const std::string>{}, "G", {"a"}, {"b"}, {1, 1}, {0, 2}),
                 DomainError);
}
