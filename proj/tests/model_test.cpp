// SPDX-License-Identifier: Apache-2.0
#include "hiercon/error.hpp"
#include "hiercon/model.hpp"
#include "testbed.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace hiercon;
using hiercon::test::make_component;
using hiercon::test::testbed_root;
using hiercon::test::testbed_system;

TEST(PortSet, EqualityIgnoresOrder) {
    EXPECT_EQ((PortSet{"a", "b"}), (PortSet{"b", "a"}));
    EXPECT_FALSE((PortSet{"a", "b"}) == (PortSet{"a"}));
    EXPECT_FALSE((PortSet{"a", "b"}) == (PortSet{"a", "c"}));
    EXPECT_EQ(PortSet{}, PortSet{});
}

TEST(PortSet, KeepsListingOrder) {
    PortSet p{"z", "a"};
    EXPECT_EQ(p.to_string(), "{z, a}");
    EXPECT_TRUE(p.contains("a"));
    EXPECT_FALSE(p.contains("b"));
    EXPECT_EQ(p.size(), 2u);
}

TEST(PortSet, DuplicateNameThrows) {
    EXPECT_THROW((PortSet{"a", "a"}), DomainError);
    EXPECT_THROW(PortSet(std::vector<std::string>{"x", "y", "x"}), DomainError);
}

TEST(ThresholdRange, DefaultIsThreeSigma) {
    auto r = default_range({100.0, 2.0});
    EXPECT_DOUBLE_EQ(r.lower, 94.0);
    EXPECT_DOUBLE_EQ(r.upper, 106.0);
    EXPECT_DOUBLE_EQ(r.clamp(0.0), 94.0);
    EXPECT_DOUBLE_EQ(r.clamp(200.0), 106.0);
    EXPECT_DOUBLE_EQ(r.clamp(100.5), 100.5);
}

TEST(Validate, TestbedIsClean) {
    auto sys = testbed_system();
    EXPECT_TRUE(validate_system(sys).ok());
    EXPECT_TRUE(validate_root(testbed_root(), sys).ok());
}

TEST(Validate, DuplicateId) {
    auto sys = testbed_system();
    sys.components[2].id = "CP";
    auto rep = validate_system(sys);
    EXPECT_TRUE(rep.has(ViolationKind::DuplicateId));
}

TEST(Validate, EmptyId) {
    auto sys = testbed_system();
    sys.components[0].id.clear();
    EXPECT_TRUE(validate_system(sys).has(ViolationKind::EmptyId));
}

TEST(Validate, NonPositiveStddev) {
    auto sys = testbed_system();
    sys.components[1].stats.stddev = 0.0;
    EXPECT_TRUE(validate_system(sys).has(ViolationKind::NonPositiveStddev));
    sys.components[1].stats.stddev = -1.0;
    EXPECT_TRUE(validate_system(sys).has(ViolationKind::NonPositiveStddev));
}

TEST(Validate, NonFinite) {
    auto sys = testbed_system();
    sys.components[0].stats.mean = std::numeric_limits<double>::quiet_NaN();
    EXPECT_TRUE(validate_system(sys).has(ViolationKind::NonFiniteValue));
    sys = testbed_system();
    sys.components[0].range.upper = std::numeric_limits<double>::infinity();
    EXPECT_TRUE(validate_system(sys).has(ViolationKind::NonFiniteValue));
}

TEST(Validate, InvertedRange) {
    auto sys = testbed_system();
    sys.components[2].range = {40.0, 30.0};
    auto rep = validate_system(sys);
    ASSERT_TRUE(rep.has(ViolationKind::InvertedRange));
    EXPECT_EQ(rep.violations.front().component_id, "EC");
}

TEST(Validate, DegenerateRangeAllowed) {
    auto sys = testbed_system();
    sys.components[2].range = {31.0, 31.0};
    EXPECT_TRUE(validate_system(sys).ok());
}

TEST(Validate, RootChecks) {
    auto sys = testbed_system();
    auto root = testbed_root();
    root.flexibility = -1.0;
    EXPECT_TRUE(validate_root(root, sys).has(ViolationKind::NegativeFlexibility));
    root = testbed_root();
    root.nfp_name = "energy";
    EXPECT_TRUE(validate_root(root, sys).has(ViolationKind::NfpMismatch));
    root = testbed_root();
    root.root_threshold = std::numeric_limits<double>::quiet_NaN();
    EXPECT_TRUE(validate_root(root, sys).has(ViolationKind::NonFiniteValue));
}

TEST(Validate, Idempotent) {
    auto sys = testbed_system();
    sys.components[0].stats.stddev = 0.0;
    sys.components[1].range = {5.0, 1.0};
    auto a = validate_system(sys);
    auto b = validate_system(sys);
    ASSERT_EQ(a.violations.size(), b.violations.size());
    for (std::size_t i = 0; i < a.violations.size(); ++i) {
        EXPECT_EQ(a.violations[i].kind, b.violations[i].kind);
        EXPECT_EQ(a.violations[i].component_id, b.violations[i].component_id);
        EXPECT_EQ(a.violations[i].message, b.violations[i].message);
    }
    EXPECT_GE(a.violations.size(), 2u);
}

TEST(Validate, KindNames) {
    EXPECT_STREQ(to_string(ViolationKind::DuplicateId), "duplicate-id");
    EXPECT_STREQ(to_string(ViolationKind::InvertedRange), "inverted-range");
}

TEST(System, Find) {
    auto sys = testbed_system();
    ASSERT_NE(sys.find("BS"), nullptr);
    EXPECT_DOUBLE_EQ(sys.find("BS")->stats.mean, 59.651);
    EXPECT_EQ(sys.find("nope"), nullptr);
}
