// SPDX-License-Identifier: Apache-2.0
#include "hiercon/io.hpp"

#include "hiercon/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <set>

namespace hiercon {

using nlohmann::json;

std::vector<Theta> ProjectFile::thetas_for(const DependencyChain &chain) const {
    std::vector<Theta> out;
    out.reserve(chain.size());
    for (const auto &id : chain.ids) {
        auto it = component_theta.find(id);
        out.emplace_back(it == component_theta.end() ? defaults.theta : it->second);
    }
    return out;
}

SolverConfig ProjectFile::solver_config() const {
    SolverConfig cfg;
    cfg.step = defaults.alpha;
    if (defaults.epsilon) cfg.tolerance = *defaults.epsilon;
    if (defaults.max_iterations) cfg.max_iterations = *defaults.max_iterations;
    return cfg;
}

namespace {

std::string line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// Schema walker: every accessor knows its JSON pointer for diagnostics.
class Node {
  public:
    Node(const json &value, std::string path) : value_(value), path_(std::move(path)) {}

    const std::string &path() const { return path_; }

    void expect_object(std::initializer_list<const char *> required,
                       std::initializer_list<const char *> optional = {}) const {
        if (!value_.is_object()) throw SchemaError(where(), "expected an object");
        std::set<std::string> known;
        for (const char *k : required) {
            known.insert(k);
            if (!value_.contains(k)) throw SchemaError(where(), std::string("missing field '") + k + "'");
        }
        for (const char *k : optional) known.insert(k);
        for (const auto &item : value_.items()) {
            if (!known.count(item.key())) {
                throw SchemaError(child_path(item.key()), "unexpected field '" + item.key() + "'");
            }
        }
    }

    bool has(const char *key) const { return value_.contains(key); }
    Node operator[](const char *key) const { return {value_.at(key), child_path(key)}; }

    std::string string() const {
        if (!value_.is_string()) throw SchemaError(where(), "expected a string");
        return value_.get<std::string>();
    }

    double real() const {
        if (!value_.is_number()) throw SchemaError(where(), "expected a number");
        return value_.get<double>();
    }

    std::uint64_t unsigned_integer() const {
        if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<std::int64_t>() >= 0)) {
            throw SchemaError(where(), "expected a non-negative integer");
        }
        return value_.get<std::uint64_t>();
    }

    std::vector<Node> array() const {
        if (!value_.is_array()) throw SchemaError(where(), "expected an array");
        std::vector<Node> out;
        for (std::size_t i = 0; i < value_.size(); ++i) out.emplace_back(value_[i], path_ + "/" + std::to_string(i));
        return out;
    }

    std::vector<std::string> strings() const {
        std::vector<std::string> out;
        for (const auto &n : array()) out.push_back(n.string());
        return out;
    }

    PortSet ports() const {
        try {
            return PortSet(strings());
        } catch (const DomainError &e) {
            throw SemanticError(where(), e.what());
        }
    }

    std::string where() const { return path_.empty() ? "/" : path_; }

  private:
    std::string child_path(const std::string &key) const { return path_ + "/" + key; }

    const json &value_;
    std::string path_;
};

double require_theta(const Node &n) {
    const double t = n.real();
    if (!(t > 0.0 && t < 1.0)) throw SemanticError(n.where(), "theta must lie in (0, 1)");
    return t;
}

// Canonical writer. nlohmann's own dump renders the shortest round-trip
// representation; the project format pins 17 significant digits.
void write_canonical(const json &v, std::string &out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (v.type()) {
    case json::value_t::object: {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto &item : v.items()) {
            if (!first) out += ",\n";
            first = false;
            out += inner + json(item.key()).dump() + ": ";
            write_canonical(item.value(), out, indent + 1);
        }
        out += "\n" + pad + "}";
        return;
    }
    case json::value_t::array: {
        if (v.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ",\n";
            out += inner;
            write_canonical(v[i], out, indent + 1);
        }
        out += "\n" + pad + "]";
        return;
    }
    case json::value_t::number_float: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        out += buf;
        return;
    }
    default:
        out += v.dump();
    }
}

std::string canonical(const json &v) {
    std::string out;
    write_canonical(v, out, 0);
    out += "\n";
    return out;
}

std::string fmt9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

ProjectFile parse_project(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error &e) {
        throw SyntaxError(line_column(text, e.byte == 0 ? 0 : e.byte - 1), "malformed JSON document");
    }

    ProjectFile pf;
    Node top(doc, "");
    top.expect_object({"version", "nfp", "components", "root_contract", "defaults"});

    pf.version = top["version"].string();
    if (pf.version != kProjectVersion) {
        throw SchemaError("/version", "unsupported version '" + pf.version + "' (expected '" +
                                          std::string(kProjectVersion) + "')");
    }
    pf.system.nfp_name = top["nfp"].string();

    for (const Node &c : top["components"].array()) {
        c.expect_object({"id", "inputs", "outputs", "mu", "sigma"}, {"a", "b", "theta"});
        ComponentSpec spec;
        spec.id = c["id"].string();
        spec.inputs = c["inputs"].ports();
        spec.outputs = c["outputs"].ports();
        spec.stats = {c["mu"].real(), c["sigma"].real()};
        const ThresholdRange fallback = default_range(spec.stats);
        spec.range.lower = c.has("a") ? c["a"].real() : fallback.lower;
        spec.range.upper = c.has("b") ? c["b"].real() : fallback.upper;
        if (c.has("theta")) pf.component_theta[spec.id] = require_theta(c["theta"]);
        pf.system.components.push_back(std::move(spec));
    }

    const Node rc = top["root_contract"];
    rc.expect_object({"inputs", "outputs", "assumptions", "xbar_r", "phi"});
    pf.root_contract.inputs = rc["inputs"].ports();
    pf.root_contract.outputs = rc["outputs"].ports();
    pf.root_contract.assumptions = rc["assumptions"].strings();
    pf.root_contract.nfp_name = pf.system.nfp_name;
    pf.root_contract.root_threshold = rc["xbar_r"].real();
    pf.root_contract.flexibility = rc["phi"].real();

    const Node d = top["defaults"];
    d.expect_object({"theta", "runs", "seed"}, {"alpha", "epsilon", "max_iterations"});
    pf.defaults.theta = require_theta(d["theta"]);
    if (d.has("alpha")) {
        pf.defaults.alpha = d["alpha"].real();
        if (!(*pf.defaults.alpha > 0.0)) throw SemanticError("/defaults/alpha", "alpha must be > 0");
    }
    if (d.has("epsilon")) {
        pf.defaults.epsilon = d["epsilon"].real();
        if (!(*pf.defaults.epsilon > 0.0)) throw SemanticError("/defaults/epsilon", "epsilon must be > 0");
    }
    if (d.has("max_iterations")) {
        const auto it = d["max_iterations"].unsigned_integer();
        if (it == 0 || it > 1'000'000'000) {
            throw SemanticError("/defaults/max_iterations", "max_iterations must be in [1, 1e9]");
        }
        pf.defaults.max_iterations = static_cast<int>(it);
    }
    pf.defaults.runs = d["runs"].unsigned_integer();
    if (pf.defaults.runs == 0) throw SemanticError("/defaults/runs", "runs must be >= 1");
    pf.defaults.seed = d["seed"].unsigned_integer();

    if (pf.system.components.empty()) {
        throw SemanticError("/components", "no components: no dependency chain can exist");
    }
    const ValidationReport report = validate_system(pf.system);
    if (!report.ok()) {
        const Violation &v = report.violations.front();
        // A duplicate is reported at its last occurrence, anything else at the first.
        std::optional<std::size_t> index;
        for (std::size_t i = 0; i < pf.system.components.size(); ++i) {
            if (pf.system.components[i].id != v.component_id) continue;
            index = i;
            if (v.kind != ViolationKind::DuplicateId) break;
        }
        std::string where = "/components";
        if (index) where += "/" + std::to_string(*index);
        throw SemanticError(where, std::string(to_string(v.kind)) + ": " + v.message);
    }
    const ValidationReport root_report = validate_root(pf.root_contract, pf.system);
    if (!root_report.ok()) throw SemanticError("/root_contract", root_report.violations.front().message);
    return pf;
}

std::string serialize_project(const ProjectFile &pf) {
    json doc;
    doc["version"] = pf.version;
    doc["nfp"] = pf.system.nfp_name;
    json comps = json::array();
    for (const auto &c : pf.system.components) {
        json jc;
        jc["id"] = c.id;
        jc["inputs"] = c.inputs.names();
        jc["outputs"] = c.outputs.names();
        jc["mu"] = c.stats.mean;
        jc["sigma"] = c.stats.stddev;
        jc["a"] = c.range.lower;
        jc["b"] = c.range.upper;
        if (auto it = pf.component_theta.find(c.id); it != pf.component_theta.end()) jc["theta"] = it->second;
        comps.push_back(std::move(jc));
    }
    doc["components"] = std::move(comps);
    doc["root_contract"] = {
        {"inputs", pf.root_contract.inputs.names()},
        {"outputs", pf.root_contract.outputs.names()},
        {"assumptions", pf.root_contract.assumptions},
        {"xbar_r", pf.root_contract.root_threshold},
        {"phi", pf.root_contract.flexibility},
    };
    json d;
    d["theta"] = pf.defaults.theta;
    if (pf.defaults.alpha) d["alpha"] = *pf.defaults.alpha;
    if (pf.defaults.epsilon) d["epsilon"] = *pf.defaults.epsilon;
    if (pf.defaults.max_iterations) d["max_iterations"] = *pf.defaults.max_iterations;
    d["runs"] = pf.defaults.runs;
    d["seed"] = pf.defaults.seed;
    doc["defaults"] = std::move(d);
    return canonical(doc);
}

std::string export_solution(const RefinementSolution &solution, std::span<const SubContract> subcontracts,
                            const RootContract &root) {
    std::vector<SubContract> refined(subcontracts.begin(), subcontracts.end());
    for (std::size_t i = 0; i < refined.size() && i < solution.thresholds.size(); ++i) {
        refined[i].threshold = solution.thresholds[i];
    }

    std::string out;
    out += "contract hierarchy for NFP '" + root.nfp_name + "'\n";
    out += "root: inputs " + root.inputs.to_string() + " outputs " + root.outputs.to_string() + " xbar_r " +
           fmt9(root.root_threshold) + " phi " + fmt9(root.flexibility) + "\n";
    std::string chain;
    for (std::size_t i = 0; i < refined.size(); ++i) chain += (i ? " -> " : "") + refined[i].component_id;
    out += "chain: " + chain + "\n";

    json machine;
    machine["nfp"] = root.nfp_name;
    machine["xbar_r"] = root.root_threshold;
    machine["phi"] = root.flexibility;
    machine["chain"] = json::array();
    machine["contracts"] = json::array();
    for (const auto &s : refined) {
        std::string assumptions;
        for (std::size_t i = 0; i < s.assumptions.size(); ++i) assumptions += (i ? ", " : "") + s.assumptions[i];
        out += "contract " + s.component_id + ": inputs " + s.inputs.to_string() + " outputs " +
               s.outputs.to_string() + " assumptions [" + assumptions + "] threshold " +
               (s.threshold ? fmt9(*s.threshold) : std::string("unset")) + "\n";
        machine["chain"].push_back(s.component_id);
        json jc = {{"component", s.component_id},
                   {"inputs", s.inputs.names()},
                   {"outputs", s.outputs.names()},
                   {"assumptions", s.assumptions}};
        jc["threshold"] = s.threshold ? json(*s.threshold) : json(nullptr);
        machine["contracts"].push_back(std::move(jc));
    }
    out += "lambda*: " + fmt9(solution.multiplier) + "\n";
    out += "objective J*: " + fmt9(solution.objective) + "\n";
    out += "iterations: " + std::to_string(solution.iterations) + "\n";
    machine["lambda"] = solution.multiplier;
    machine["objective"] = solution.objective;
    machine["iterations"] = solution.iterations;
    machine["converged"] = solution.converged;

    if (!solution.converged) {
        out += "status: NotConverged\n";
        if (!solution.trace.empty()) {
            const auto &last = solution.trace.back();
            out += "last iterate: tau " + std::to_string(last.iteration) + " lambda " + fmt9(last.lambda) +
                   " threshold sum " + fmt9(last.threshold_sum) + "\n";
        }
    } else {
        out += "status: converged\n";
        const ValidityReport v = check_validity(refined, root);
        out += std::string("verdict: ") + (v.is_valid ? "valid" : "invalid") + " (threshold sum " +
               fmt9(v.threshold_sum) + " + phi " + fmt9(root.flexibility) + " vs xbar_r " +
               fmt9(root.root_threshold) + ", slack " + fmt9(v.slack) + ")\n";
        for (const auto &msg : v.violations) out += "  violation: " + msg + "\n";
        machine["valid"] = v.is_valid;
        machine["threshold_sum"] = v.threshold_sum;
        machine["slack"] = v.slack;
    }
    out += std::string(kMachineBegin) + "\n" + canonical(machine) + std::string(kMachineEnd) + "\n";
    return out;
}

std::vector<double> parse_thresholds(std::string_view text) {
    std::string_view body = text;
    if (auto b = text.find(kMachineBegin); b != std::string_view::npos) {
        const auto start = b + kMachineBegin.size();
        const auto e = text.find(kMachineEnd, start);
        if (e == std::string_view::npos) throw SyntaxError("report", "machine-readable section is not terminated");
        body = text.substr(start, e - start);
    }
    json doc;
    try {
        doc = json::parse(body.begin(), body.end());
    } catch (const json::parse_error &e) {
        throw SyntaxError(line_column(body, e.byte == 0 ? 0 : e.byte - 1), "malformed thresholds document");
    }
    std::vector<double> out;
    if (doc.is_array()) {
        for (const auto &n : Node(doc, "").array()) out.push_back(n.real());
        return out;
    }
    if (doc.is_object() && doc.contains("contracts")) {
        for (const auto &c : Node(doc, "")["contracts"].array()) {
            if (!c.has("threshold")) throw SchemaError(c.where(), "contract has no threshold");
            out.push_back(c["threshold"].real());
        }
        return out;
    }
    throw SchemaError("/", "expected an array of thresholds or a contract report");
}

std::string export_sweep(const SweepResult &result) {
    std::string out = "theta,xbar_r,lambda,converged";
    for (const auto &id : result.component_ids) out += ",xbar_" + id;
    for (const auto &id : result.component_ids) out += ",p_" + id;
    out += ",p_root,r_f\n";
    for (const auto &cell : result.cells) {
        out += fmt9(cell.theta) + "," + fmt9(cell.root_threshold) + "," + fmt9(cell.multiplier) + "," +
               (cell.converged ? "1" : "0");
        for (double x : cell.thresholds) out += "," + fmt9(x);
        for (double p : cell.metrics.far) out += "," + fmt9(p);
        out += "," + fmt9(cell.metrics.root_far) + "," + fmt9(cell.metrics.flex_rate) + "\n";
    }
    return out;
}

std::string export_monitor(const MonitorMetrics &metrics, std::span<const std::string> component_ids,
                           std::span<const double> thresholds, double root_threshold, std::uint64_t seed) {
    std::string out = "runs,seed,xbar_r";
    for (const auto &id : component_ids) out += ",xbar_" + id;
    for (const auto &id : component_ids) out += ",p_" + id;
    out += ",p_root,r_f\n";
    out += std::to_string(metrics.runs) + "," + std::to_string(seed) + "," + fmt17(root_threshold);
    for (double x : thresholds) out += "," + fmt17(x);
    for (double p : metrics.far) out += "," + fmt9(p);
    out += "," + fmt9(metrics.root_far) + "," + fmt9(metrics.flex_rate) + "\n";
    return out;
}

} // namespace hiercon
