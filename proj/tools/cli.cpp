// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <hiercon/hiercon.h>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

namespace hiercon::cli {
namespace {

struct ProjectDeleter {
    void operator()(hiercon_project *p) const { hiercon_project_free(p); }
};
struct SolutionDeleter {
    void operator()(hiercon_solution *s) const { hiercon_solution_free(s); }
};
struct MonitorDeleter {
    void operator()(hiercon_monitor *m) const { hiercon_monitor_free(m); }
};
struct SweepDeleter {
    void operator()(hiercon_sweep *s) const { hiercon_sweep_free(s); }
};
struct StringDeleter {
    void operator()(char *s) const { hiercon_string_free(s); }
};

using Project = std::unique_ptr<hiercon_project, ProjectDeleter>;
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct Overrides {
    std::optional<double> theta, xbar_r, phi, alpha, epsilon;
    std::optional<int> max_iter;
    std::optional<std::uint64_t> runs, seed;
};

int report_error(std::ostream &err, hiercon_status st) {
    err << "error: " << hiercon_last_error() << "\n";
    return static_cast<int>(st) <= 3 ? static_cast<int>(st) : 1;
}

// Loads the project and applies command-line overrides (flags win over file defaults).
hiercon_status open_project(const std::string &path, const Overrides &o, Project &project) {
    hiercon_project *raw = nullptr;
    hiercon_status st = hiercon_project_load(path.c_str(), &raw);
    project.reset(raw);
    if (st != HIERCON_OK) return st;
    auto apply = [&](hiercon_status s) {
        if (st == HIERCON_OK) st = s;
    };
    if (o.theta) apply(hiercon_project_set_theta(raw, *o.theta));
    if (o.xbar_r) apply(hiercon_project_set_root_threshold(raw, *o.xbar_r));
    if (o.phi) apply(hiercon_project_set_flexibility(raw, *o.phi));
    if (o.alpha) apply(hiercon_project_set_alpha(raw, *o.alpha));
    if (o.epsilon) apply(hiercon_project_set_epsilon(raw, *o.epsilon));
    if (o.max_iter) apply(hiercon_project_set_max_iterations(raw, *o.max_iter));
    if (o.runs) apply(hiercon_project_set_runs(raw, *o.runs));
    if (o.seed) apply(hiercon_project_set_seed(raw, *o.seed));
    return st;
}

std::optional<hiercon_range> parse_range(const std::string &text) {
    double lo = 0, hi = 0, step = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &lo, &hi, &step, &tail) != 3) return std::nullopt;
    return hiercon_range{lo, hi, step};
}

bool write_atomically(const std::filesystem::path &path, const std::string &content, std::ostream &err) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f || !(f << content) || !f.flush()) {
            err << "error: cannot write '" << tmp.string() << "'\n";
            return false;
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        err << "error: cannot rename to '" << path.string() << "': " << ec.message() << "\n";
        std::filesystem::remove(tmp, ec);
        return false;
    }
    return true;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

int cmd_check(const std::string &path, const Overrides &o, std::ostream &out, std::ostream &err) {
    Project project;
    if (auto st = open_project(path, o, project); st != HIERCON_OK) return report_error(err, st);
    char *raw = nullptr;
    const hiercon_status st = hiercon_check(project.get(), &raw);
    OwnedString report(raw);
    if (report) out << report.get();
    if (st != HIERCON_OK) return report_error(err, st);
    return 0;
}

int cmd_refine(const std::string &path, const Overrides &o, std::ostream &out, std::ostream &err) {
    Project project;
    if (auto st = open_project(path, o, project); st != HIERCON_OK) return report_error(err, st);
    hiercon_solution *raw = nullptr;
    const hiercon_status st = hiercon_refine(project.get(), &raw);
    const std::string message = hiercon_last_error();
    std::unique_ptr<hiercon_solution, SolutionDeleter> solution(raw);
    if (solution) {
        char *text = nullptr;
        if (hiercon_solution_report(solution.get(), &text) == HIERCON_OK) {
            OwnedString owned(text);
            out << owned.get();
        }
    }
    if (st == HIERCON_NOT_CONVERGED) {
        err << "error: " << message << " (" << hiercon_solution_iterations(solution.get())
            << " iterations, last lambda " << fmt(hiercon_solution_multiplier(solution.get())) << ")\n";
        return 2;
    }
    if (st != HIERCON_OK) return report_error(err, st);
    if (hiercon_solution_valid(solution.get()) != 1) {
        err << "error: refined hierarchy is not valid\n";
        return 1;
    }
    return 0;
}

int cmd_simulate(const std::string &path, const Overrides &o, const std::string &inline_thresholds,
                 const std::string &thresholds_file, std::ostream &out, std::ostream &err) {
    Project project;
    if (auto st = open_project(path, o, project); st != HIERCON_OK) return report_error(err, st);

    std::vector<double> thresholds;
    if (!inline_thresholds.empty()) {
        std::stringstream ss(inline_thresholds);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                thresholds.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception &) {
                err << "error: bad threshold '" << item << "'\n";
                return 1;
            }
        }
    } else if (!thresholds_file.empty()) {
        std::ifstream in(thresholds_file, std::ios::binary);
        if (!in) {
            err << "error: cannot open '" << thresholds_file << "'\n";
            return 3;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string text = buf.str();
        std::size_t count = 0;
        hiercon_parse_thresholds(text.data(), text.size(), nullptr, 0, &count);
        thresholds.resize(count);
        if (auto st = hiercon_parse_thresholds(text.data(), text.size(), thresholds.data(), count, &count);
            st != HIERCON_OK) {
            return report_error(err, st);
        }
    } else {
        hiercon_solution *raw = nullptr;
        const hiercon_status st = hiercon_refine(project.get(), &raw);
        std::unique_ptr<hiercon_solution, SolutionDeleter> solution(raw);
        if (st != HIERCON_OK) return report_error(err, st);
        for (std::size_t i = 0; i < hiercon_solution_size(solution.get()); ++i) {
            double x = 0;
            hiercon_solution_threshold(solution.get(), i, &x);
            thresholds.push_back(x);
        }
    }

    hiercon_monitor *raw = nullptr;
    const hiercon_status st = hiercon_simulate(project.get(), thresholds.data(), thresholds.size(), &raw);
    std::unique_ptr<hiercon_monitor, MonitorDeleter> monitor(raw);
    if (st != HIERCON_OK) return report_error(err, st);
    if (!hiercon_monitor_hierarchy_valid(monitor.get())) {
        err << "warning: thresholds do not form a valid hierarchy (sum + phi > xbar_r); running in diagnostic mode\n";
    }
    char *csv = nullptr;
    if (auto s = hiercon_monitor_csv(monitor.get(), &csv); s != HIERCON_OK) return report_error(err, s);
    OwnedString owned(csv);
    out << owned.get();
    return 0;
}

int cmd_sweep(const std::string &path, const Overrides &o, const std::string &theta_range,
              const std::string &root_range, const std::string &out_path, std::ostream &out, std::ostream &err) {
    const auto thetas = parse_range(theta_range);
    if (!thetas) {
        err << "error: --theta-range must be lo:hi:step\n";
        return 1;
    }
    Project project;
    if (auto st = open_project(path, o, project); st != HIERCON_OK) return report_error(err, st);
    hiercon_range roots{};
    if (root_range.empty()) {
        const double xr = hiercon_project_root_threshold(project.get());
        roots = {xr, xr, 1.0};
    } else if (auto r = parse_range(root_range)) {
        roots = *r;
    } else {
        err << "error: --xbar-r-range must be lo:hi:step\n";
        return 1;
    }

    hiercon_sweep *raw = nullptr;
    const hiercon_status st = hiercon_sweep_run(project.get(), *thetas, roots, &raw);
    std::unique_ptr<hiercon_sweep, SweepDeleter> result(raw);
    if (st != HIERCON_OK) return report_error(err, st);

    char *csv = nullptr;
    if (auto s = hiercon_sweep_csv(result.get(), &csv); s != HIERCON_OK) return report_error(err, s);
    OwnedString owned(csv);
    if (!write_atomically(out_path, owned.get(), err)) return 3;

    out << "rows: " << hiercon_sweep_rows(result.get()) << "\n";
    out << "xbar_r,lambda_zero_theta,theta_lower_bound\n";
    for (std::size_t c = 0; c < hiercon_sweep_columns(result.get()); ++c) {
        double xr = 0, observed = 0, predicted = 0;
        hiercon_sweep_boundary(result.get(), c, &xr, &observed, &predicted);
        out << fmt(xr) << "," << (std::isnan(observed) ? std::string("none") : fmt(observed)) << ","
            << fmt(predicted) << "\n";
    }
    return 0;
}

void add_solver_flags(CLI::App *cmd, Overrides &o) {
    cmd->add_option("--theta", o.theta, "uniform weight in (0,1) for every component");
    cmd->add_option("--xbar-r", o.xbar_r, "root threshold");
    cmd->add_option("--phi", o.phi, "guaranteed flexibility");
    cmd->add_option("--alpha", o.alpha, "dual ascent step size");
    cmd->add_option("--epsilon", o.epsilon, "multiplier convergence tolerance");
    cmd->add_option("--max-iter", o.max_iter, "iteration budget");
}

void add_sim_flags(CLI::App *cmd, Overrides &o) {
    cmd->add_option("--runs", o.runs, "Monte-Carlo runs");
    cmd->add_option("--seed", o.seed, "RNG seed");
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Synthesize and evaluate two-level assume-guarantee contract hierarchies"};
    app.require_subcommand(1);

    Overrides o;
    std::string project_path, inline_thresholds, thresholds_file, theta_range = "0.01:0.99:0.01", root_range,
                                                                   out_path;

    auto *check = app.add_subcommand("check", "validate the system, find the chain, test feasibility");
    check->add_option("project", project_path, "project JSON file")->required();
    add_solver_flags(check, o);

    auto *refine = app.add_subcommand("refine", "decompose and refine; print the contract report");
    refine->add_option("project", project_path, "project JSON file")->required();
    add_solver_flags(refine, o);

    auto *simulate = app.add_subcommand("simulate", "Monte-Carlo false-alarm and flexibility rates");
    simulate->add_option("project", project_path, "project JSON file")->required();
    auto *inline_opt = simulate->add_option("--thresholds", inline_thresholds, "comma-separated, chain order");
    simulate->add_option("--thresholds-file", thresholds_file, "JSON array or refine report")->excludes(inline_opt);
    add_solver_flags(simulate, o);
    add_sim_flags(simulate, o);

    auto *sweep = app.add_subcommand("sweep", "refine and simulate over a theta x xbar_r grid");
    sweep->add_option("project", project_path, "project JSON file")->required();
    sweep->add_option("--theta-range", theta_range, "lo:hi:step")->capture_default_str();
    sweep->add_option("--xbar-r-range", root_range, "lo:hi:step (default: the project's xbar_r)");
    sweep->add_option("--out", out_path, "CSV output path")->required();
    add_solver_flags(sweep, o);
    add_sim_flags(sweep, o);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError &e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 1;
    }

    if (*check) return cmd_check(project_path, o, out, err);
    if (*refine) return cmd_refine(project_path, o, out, err);
    if (*simulate) return cmd_simulate(project_path, o, inline_thresholds, thresholds_file, out, err);
    return cmd_sweep(project_path, o, theta_range, root_range, out_path, out, err);
}

} // namespace hiercon::cli
