// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"
#include "testbed.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using hiercon::test::data_path;
using hiercon::test::read_file;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "hiercon");
    std::ostringstream out, err;
    int code = hiercon::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string testbed() { return data_path("testbed.json"); }

std::filesystem::path temp_file(const std::string &name) {
    return std::filesystem::temp_directory_path() / ("hiercon_cli_test_" + name);
}

std::size_t count_lines(const std::string &s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

} // namespace

TEST(Cli, Help) {
    auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("refine"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"refine", testbed(), "--theta", "abc"}).code, 1);
}

TEST(Cli, CheckTestbed) {
    auto r = run({"check", testbed()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("CP -> BS -> EC"), std::string::npos);
}

TEST(Cli, CheckInfeasible) {
    auto r = run({"check", testbed(), "--xbar-r", "1400"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("feasible: no"), std::string::npos);
}

TEST(Cli, CheckMissingFile) {
    auto r = run({"check", "/nonexistent/project.json"});
    EXPECT_EQ(r.code, 3);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, CheckMalformedFile) {
    auto path = temp_file("bad.json");
    std::ofstream(path) << "{ \"version\": ";
    EXPECT_EQ(run({"check", path.string()}).code, 3);
    std::filesystem::remove(path);
}

TEST(Cli, RefineAtMeans) {
    auto r = run({"refine", testbed(), "--theta", "0.5", "--xbar-r", "1730"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("threshold 1546.7"), std::string::npos);
    EXPECT_NE(r.out.find("threshold 59.651"), std::string::npos);
    EXPECT_NE(r.out.find("threshold 31.772"), std::string::npos);
    EXPECT_NE(r.out.find("--- BEGIN MACHINE-READABLE ---"), std::string::npos);
}

TEST(Cli, RefineThetaDomain) {
    EXPECT_EQ(run({"refine", testbed(), "--theta", "0.999"}).code, 0);
    EXPECT_EQ(run({"refine", testbed(), "--theta", "1.0"}).code, 1);
    EXPECT_EQ(run({"refine", testbed(), "--theta", "0"}).code, 1);
}

TEST(Cli, RefineNotConverged) {
    auto r = run({"refine", testbed(), "--theta", "0.05", "--xbar-r", "1640", "--alpha", "1e6", "--max-iter", "50"});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, RefineInfeasible) {
    EXPECT_EQ(run({"refine", testbed(), "--xbar-r", "1400"}).code, 1);
}

TEST(Cli, SimulateExplicitThresholds) {
    auto r = run({"simulate", testbed(), "--thresholds", "1546.7,59.651,31.772"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "runs,seed,xbar_r,xbar_CP,xbar_BS,xbar_EC,p_CP,p_BS,p_EC,p_root,r_f");
    std::vector<double> f;
    std::stringstream ss(row);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(std::stod(cell));
    ASSERT_EQ(f.size(), 11u);
    EXPECT_EQ(f[0], 10000.0);
    for (int i = 6; i < 9; ++i) EXPECT_NEAR(f[i], 0.5, 0.02);
}

TEST(Cli, SimulateRunsFlag) {
    auto r = run({"simulate", testbed(), "--runs", "50"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("\n50,"), std::string::npos);
}

TEST(Cli, SimulateFromReport) {
    auto report = run({"refine", testbed(), "--theta", "0.3"});
    ASSERT_EQ(report.code, 0);
    auto path = temp_file("report.txt");
    std::ofstream(path) << report.out;
    auto r = run({"simulate", testbed(), "--thresholds-file", path.string(), "--runs", "100"});
    EXPECT_EQ(r.code, 0) << r.err;
    std::filesystem::remove(path);
    EXPECT_EQ(run({"simulate", testbed(), "--thresholds-file", "/nonexistent"}).code, 3);
}

TEST(Cli, SimulateInvalidHierarchyWarns) {
    auto r = run({"simulate", testbed(), "--thresholds", "1700,70,40", "--runs", "100"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("warning"), std::string::npos);
    EXPECT_EQ(count_lines(r.out), 2u);
    EXPECT_EQ(run({"simulate", testbed(), "--thresholds", "1,2"}).code, 1);
}

TEST(Cli, SweepPaperGrid) {
    auto path = temp_file("sweep.csv");
    auto r = run({"sweep", testbed(), "--theta-range", "0.01:0.99:0.01", "--xbar-r-range", "1600:1760:10", "--runs",
                  "200", "--out", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("rows: 1683"), std::string::npos);
    EXPECT_NE(r.out.find("1730,0.06,0.0509"), std::string::npos);
    auto csv = read_file(path.string());
    EXPECT_EQ(count_lines(csv), 1684u);
    std::filesystem::remove(path);
}

TEST(Cli, SweepErrors) {
    auto path = temp_file("sweep_err.csv");
    EXPECT_EQ(run({"sweep", testbed(), "--theta-range", "0.5:0.4:0.01", "--out", path.string()}).code, 1);
    EXPECT_EQ(run({"sweep", testbed(), "--theta-range", "0.5", "--out", path.string()}).code, 1);
    EXPECT_EQ(run({"sweep", testbed()}).code, 1);
    EXPECT_FALSE(std::filesystem::exists(path));
}

TEST(Cli, FlagsOverrideFile) {
    auto a = run({"check", testbed(), "--xbar-r", "1600"});
    EXPECT_EQ(a.code, 0);
    EXPECT_NE(a.out.find("theta_lower_bound: 0.848"), std::string::npos);
}
