// SPDX-License-Identifier: Apache-2.0
#include "hiercon/hiercon.h"

#include "hiercon/error.hpp"
#include "hiercon/hierarchy.hpp"
#include "hiercon/io.hpp"
#include "hiercon/refine.hpp"
#include "hiercon/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <sstream>
#include <string>

using namespace hiercon;

struct hiercon_project {
    ProjectFile file;
};

struct hiercon_solution {
    RefinementSolution solution;
    std::vector<SubContract> subcontracts;
    std::string report;
    int valid = -1;
};

struct hiercon_monitor {
    MonitorMetrics metrics;
    std::vector<std::string> ids;
    std::vector<double> thresholds;
    double root_threshold = 0.0;
    std::uint64_t seed = 0;
    bool valid = false;
    std::uint64_t uncovered = 0;
};

struct hiercon_sweep {
    SweepResult result;
    double mean_sum = 0.0;
    double stddev_sum = 0.0;
};

namespace {

thread_local std::string last_error;

hiercon_status fail(hiercon_status status, std::string message) {
    last_error = std::move(message);
    return status;
}

// Maps library exceptions onto status codes.
template <typename F> hiercon_status guarded(F &&body) {
    try {
        last_error.clear();
        return body();
    } catch (const NotConverged &e) {
        return fail(HIERCON_NOT_CONVERGED, e.what());
    } catch (const SemanticError &e) {
        return fail(HIERCON_INVALID, e.what());
    } catch (const ParseError &e) {
        return fail(HIERCON_IO_ERROR, e.what());
    } catch (const Error &e) {
        return fail(HIERCON_INVALID, e.what());
    } catch (const std::bad_alloc &) {
        return fail(HIERCON_INTERNAL, "out of memory");
    } catch (const std::exception &e) {
        return fail(HIERCON_INTERNAL, e.what());
    }
}

char *dup_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

std::vector<NfpStats> chain_stats(const SystemDescription &sys, const DependencyChain &chain) {
    std::vector<NfpStats> stats;
    for (const auto &id : chain.ids) stats.push_back(sys.find(id)->stats);
    return stats;
}

} // namespace

extern "C" {

const char *hiercon_version(void) { return "1.0.0"; }

const char *hiercon_last_error(void) { return last_error.c_str(); }

const char *hiercon_status_name(hiercon_status status) {
    switch (status) {
    case HIERCON_OK: return "ok";
    case HIERCON_INVALID: return "invalid";
    case HIERCON_NOT_CONVERGED: return "not-converged";
    case HIERCON_IO_ERROR: return "io-error";
    case HIERCON_BAD_ARGUMENT: return "bad-argument";
    case HIERCON_INTERNAL: return "internal";
    }
    return "unknown";
}

void hiercon_string_free(char *s) { std::free(s); }

hiercon_status hiercon_project_parse(const char *text, size_t length, hiercon_project **out) {
    if (!text || !out) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto p = std::make_unique<hiercon_project>();
        p->file = parse_project(std::string_view(text, length));
        *out = p.release();
        return HIERCON_OK;
    });
}

hiercon_status hiercon_project_load(const char *path, hiercon_project **out) {
    if (!path || !out) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    *out = nullptr;
    std::ifstream in(path, std::ios::binary);
    if (!in) return fail(HIERCON_IO_ERROR, std::string("cannot open '") + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const hiercon_status st = hiercon_project_parse(text.data(), text.size(), out);
    if (st != HIERCON_OK) last_error = std::string(path) + ": " + last_error;
    return st;
}

void hiercon_project_free(hiercon_project *project) { delete project; }

hiercon_status hiercon_project_serialize(const hiercon_project *project, char **out) {
    if (!project || !out) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    return guarded([&] {
        *out = dup_string(serialize_project(project->file));
        return HIERCON_OK;
    });
}

hiercon_status hiercon_project_set_theta(hiercon_project *project, double theta) {
    if (!project) return fail(HIERCON_BAD_ARGUMENT, "null project");
    return guarded([&] {
        (void)Theta(theta);
        project->file.defaults.theta = theta;
        project->file.component_theta.clear();
        return HIERCON_OK;
    });
}

hiercon_status hiercon_project_set_root_threshold(hiercon_project *project, double xbar_r) {
    if (!project) return fail(HIERCON_BAD_ARGUMENT, "null project");
    if (std::isnan(xbar_r)) return fail(HIERCON_INVALID, "xbar_r is NaN");
    project->file.root_contract.root_threshold = xbar_r;
    return HIERCON_OK;
}

hiercon_status hiercon_project_set_flexibility(hiercon_project *project, double phi) {
    if (!project) return fail(HIERCON_BAD_ARGUMENT, "null project");
    if (!(phi >= 0.0) || !std::isfinite(phi)) return fail(HIERCON_INVALID, "phi must be finite and >= 0");
    project->file.root_contract.flexibility = phi;
    return HIERCON_OK;
}

hiercon_status hiercon_project_set_alpha(hiercon_project *project, double alpha) {
    if (!project) return fail(HIERCON_BAD_ARGUMENT, "null project");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) return fail(HIERCON_INVALID, "alpha must be finite and > 0");
    project->file.defaults.alpha = alpha;
    return HIERCON_OK;
}

hiercon_status hiercon_project_set_epsilon(hiercon_project *project, double epsilon) {
    if (!project) return fail(HIERCON_BAD_ARGUMENT, "null project");
    if (!(epsilon > 0.0)) return fail(HIERCON_INVALID, "epsilon must be > 0");
    project->file.defaults.epsilon = epsilon;
    return HIERCON_OK;
}

hiercon_status hiercon_project_set_max_iterations(hiercon_project *project, int max_iterations) {
    if (!project) return fail(HIERCON_BAD_ARGUMENT, "null project");
    if (max_iterations <= 0) return fail(HIERCON_INVALID, "max_iterations must be > 0");
    project->file.defaults.max_iterations = max_iterations;
    return HIERCON_OK;
}

hiercon_status hiercon_project_set_runs(hiercon_project *project, uint64_t runs) {
    if (!project) return fail(HIERCON_BAD_ARGUMENT, "null project");
    if (runs == 0) return fail(HIERCON_INVALID, "runs must be >= 1");
    project->file.defaults.runs = runs;
    return HIERCON_OK;
}

hiercon_status hiercon_project_set_seed(hiercon_project *project, uint64_t seed) {
    if (!project) return fail(HIERCON_BAD_ARGUMENT, "null project");
    project->file.defaults.seed = seed;
    return HIERCON_OK;
}

double hiercon_project_root_threshold(const hiercon_project *project) {
    return project ? project->file.root_contract.root_threshold : std::numeric_limits<double>::quiet_NaN();
}

uint64_t hiercon_project_runs(const hiercon_project *project) { return project ? project->file.defaults.runs : 0; }

uint64_t hiercon_project_seed(const hiercon_project *project) { return project ? project->file.defaults.seed : 0; }

hiercon_status hiercon_check(const hiercon_project *project, char **report) {
    if (!project) return fail(HIERCON_BAD_ARGUMENT, "null project");
    if (report) *report = nullptr;
    return guarded([&] {
        const ProjectFile &pf = project->file;
        std::string text;
        hiercon_status status = HIERCON_OK;
        std::string first_problem;
        auto problem = [&](const std::string &msg) {
            status = HIERCON_INVALID;
            if (first_problem.empty()) first_problem = msg;
        };

        const ValidationReport v = validate_system(pf.system);
        const ValidationReport rv = validate_root(pf.root_contract, pf.system);
        text += std::string("system: ") + (v.ok() && rv.ok() ? "valid" : "invalid") + "\n";
        for (const auto *r : {&v, &rv}) {
            for (const auto &viol : r->violations) {
                text += std::string("  violation: ") + to_string(viol.kind) + ": " + viol.message + "\n";
                problem(viol.message);
            }
        }

        std::optional<DependencyChain> chain;
        if (v.ok()) {
            try {
                chain = find_chain(pf.system, pf.root_contract);
                text += "chain: " + chain->to_string() + "\n";
            } catch (const Error &e) {
                text += std::string("chain: none (") + e.what() + ")\n";
                problem(e.what());
            }
        }

        if (chain) {
            const auto thetas = pf.thetas_for(*chain);
            const RefinementProblem rp = make_problem(pf.system, chain->ids, thetas,
                                                      pf.root_contract.root_threshold, pf.root_contract.flexibility);
            const Feasibility f = is_feasible(rp);
            if (f.feasible) {
                text += "feasible: yes (slack " + fmt(f.slack) + (f.slack > 0.0 ? ", strict" : ", boundary") + ")\n";
            } else {
                const std::string msg = "infeasible: sum of lower bounds exceeds xbar_r - phi by " + fmt(-f.slack) +
                                        "; loosen the root threshold or the component ranges";
                text += "feasible: no (slack " + fmt(f.slack) + ")\n  " + msg + "\n";
                problem(msg);
            }
            bool uniform = true;
            for (const auto &t : thetas) uniform = uniform && t == thetas.front();
            if (uniform) text += "theta_lower_bound: " + fmt(theta_lower_bound(rp)) + "\n";
        }
        text += std::string("status: ") + (status == HIERCON_OK ? "ok" : "invalid") + "\n";
        if (report) *report = dup_string(text);
        if (status != HIERCON_OK) last_error = first_problem;
        return status;
    });
}

hiercon_status hiercon_chain(const hiercon_project *project, char **out) {
    if (!project || !out) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    return guarded([&] {
        *out = dup_string(find_chain(project->file.system, project->file.root_contract).to_string());
        return HIERCON_OK;
    });
}

hiercon_status hiercon_refine(const hiercon_project *project, hiercon_solution **out) {
    if (!project || !out) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        const ProjectFile &pf = project->file;
        const DependencyChain chain = find_chain(pf.system, pf.root_contract);
        auto handle = std::make_unique<hiercon_solution>();
        handle->subcontracts = form_subcontracts(chain, pf.system, pf.root_contract);
        const RefinementProblem rp = make_problem(pf.system, chain.ids, pf.thetas_for(chain),
                                                  pf.root_contract.root_threshold, pf.root_contract.flexibility);
        hiercon_status status = HIERCON_OK;
        try {
            handle->solution = dual_ascent(rp, pf.solver_config());
        } catch (const NotConverged &e) {
            handle->solution = e.partial();
            status = fail(HIERCON_NOT_CONVERGED, e.what());
        }
        if (handle->solution.converged) {
            std::vector<SubContract> refined = handle->subcontracts;
            for (std::size_t i = 0; i < refined.size(); ++i) refined[i].threshold = handle->solution.thresholds[i];
            handle->valid = check_validity(refined, pf.root_contract).is_valid ? 1 : 0;
        }
        handle->report = export_solution(handle->solution, handle->subcontracts, pf.root_contract);
        *out = handle.release();
        return status;
    });
}

void hiercon_solution_free(hiercon_solution *solution) { delete solution; }

size_t hiercon_solution_size(const hiercon_solution *solution) {
    return solution ? solution->solution.thresholds.size() : 0;
}

hiercon_status hiercon_solution_threshold(const hiercon_solution *solution, size_t index, double *out) {
    if (!solution || !out) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    if (index >= solution->solution.thresholds.size()) return fail(HIERCON_BAD_ARGUMENT, "index out of range");
    *out = solution->solution.thresholds[index];
    return HIERCON_OK;
}

hiercon_status hiercon_solution_component(const hiercon_solution *solution, size_t index, const char **out) {
    if (!solution || !out) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    if (index >= solution->subcontracts.size()) return fail(HIERCON_BAD_ARGUMENT, "index out of range");
    *out = solution->subcontracts[index].component_id.c_str();
    return HIERCON_OK;
}

double hiercon_solution_multiplier(const hiercon_solution *solution) {
    return solution ? solution->solution.multiplier : std::numeric_limits<double>::quiet_NaN();
}

double hiercon_solution_objective(const hiercon_solution *solution) {
    return solution ? solution->solution.objective : std::numeric_limits<double>::quiet_NaN();
}

int hiercon_solution_iterations(const hiercon_solution *solution) {
    return solution ? solution->solution.iterations : 0;
}

int hiercon_solution_converged(const hiercon_solution *solution) {
    return solution && solution->solution.converged ? 1 : 0;
}

int hiercon_solution_valid(const hiercon_solution *solution) { return solution ? solution->valid : -1; }

hiercon_status hiercon_solution_report(const hiercon_solution *solution, char **out) {
    if (!solution || !out) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    return guarded([&] {
        *out = dup_string(solution->report);
        return HIERCON_OK;
    });
}

hiercon_status hiercon_parse_thresholds(const char *text, size_t length, double *out, size_t capacity,
                                        size_t *count) {
    if (!text || !count || (capacity && !out)) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    return guarded([&] {
        const auto values = parse_thresholds(std::string_view(text, length));
        *count = values.size();
        if (values.size() > capacity) return fail(HIERCON_BAD_ARGUMENT, "buffer too small");
        std::copy(values.begin(), values.end(), out);
        return HIERCON_OK;
    });
}

hiercon_status hiercon_simulate(const hiercon_project *project, const double *thresholds, size_t count,
                                hiercon_monitor **out) {
    if (!project || !out || (count && !thresholds)) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        const ProjectFile &pf = project->file;
        const DependencyChain chain = find_chain(pf.system, pf.root_contract);
        if (count != chain.size()) {
            return fail(HIERCON_INVALID, "expected " + std::to_string(chain.size()) + " thresholds, got " +
                                             std::to_string(count));
        }
        auto m = std::make_unique<hiercon_monitor>();
        m->ids = chain.ids;
        m->thresholds.assign(thresholds, thresholds + count);
        m->root_threshold = pf.root_contract.root_threshold;
        m->seed = pf.defaults.seed;

        std::vector<SubContract> subs = form_subcontracts(chain, pf.system, pf.root_contract);
        for (std::size_t i = 0; i < subs.size(); ++i) subs[i].threshold = m->thresholds[i];
        m->valid = check_validity(subs, pf.root_contract).is_valid;

        const SampleMatrix samples = sample(chain_stats(pf.system, chain), pf.defaults.runs, pf.defaults.seed);
        const MonitorReport report = evaluate(samples, m->thresholds, m->root_threshold);
        m->metrics = report.metrics;
        for (std::size_t k = 0; k < samples.runs; ++k) {
            if (!report.root_violations[k]) continue;
            bool any = false;
            for (std::size_t i = 0; i < count; ++i) any = any || report.sub_violation(k, i);
            m->uncovered += !any;
        }
        *out = m.release();
        return HIERCON_OK;
    });
}

void hiercon_monitor_free(hiercon_monitor *monitor) { delete monitor; }

size_t hiercon_monitor_size(const hiercon_monitor *monitor) { return monitor ? monitor->metrics.far.size() : 0; }

hiercon_status hiercon_monitor_far(const hiercon_monitor *monitor, size_t index, double *out) {
    if (!monitor || !out) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    if (index >= monitor->metrics.far.size()) return fail(HIERCON_BAD_ARGUMENT, "index out of range");
    *out = monitor->metrics.far[index];
    return HIERCON_OK;
}

double hiercon_monitor_root_far(const hiercon_monitor *monitor) {
    return monitor ? monitor->metrics.root_far : std::numeric_limits<double>::quiet_NaN();
}

double hiercon_monitor_flex_rate(const hiercon_monitor *monitor) {
    return monitor ? monitor->metrics.flex_rate : std::numeric_limits<double>::quiet_NaN();
}

uint64_t hiercon_monitor_runs(const hiercon_monitor *monitor) { return monitor ? monitor->metrics.runs : 0; }

int hiercon_monitor_hierarchy_valid(const hiercon_monitor *monitor) { return monitor && monitor->valid ? 1 : 0; }

uint64_t hiercon_monitor_uncovered_root_violations(const hiercon_monitor *monitor) {
    return monitor ? monitor->uncovered : 0;
}

hiercon_status hiercon_monitor_csv(const hiercon_monitor *monitor, char **out) {
    if (!monitor || !out) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    return guarded([&] {
        *out = dup_string(
            export_monitor(monitor->metrics, monitor->ids, monitor->thresholds, monitor->root_threshold, monitor->seed));
        return HIERCON_OK;
    });
}

hiercon_status hiercon_sweep_run(const hiercon_project *project, hiercon_range theta, hiercon_range root_threshold,
                                 hiercon_sweep **out) {
    if (!project || !out) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        const ProjectFile &pf = project->file;
        const auto thetas = make_grid(theta.lo, theta.hi, theta.step);
        const auto roots = make_grid(root_threshold.lo, root_threshold.hi, root_threshold.step);
        if (thetas.empty()) return fail(HIERCON_INVALID, "empty theta range");
        if (roots.empty()) return fail(HIERCON_INVALID, "empty xbar_r range");

        auto s = std::make_unique<hiercon_sweep>();
        s->result = sweep(pf.system, pf.root_contract, thetas, roots, pf.root_contract.flexibility, pf.defaults.runs,
                          pf.defaults.seed, pf.solver_config());
        for (const auto &id : s->result.component_ids) {
            s->mean_sum += pf.system.find(id)->stats.mean;
            s->stddev_sum += pf.system.find(id)->stats.stddev;
        }
        *out = s.release();
        return HIERCON_OK;
    });
}

void hiercon_sweep_free(hiercon_sweep *sweep) { delete sweep; }

size_t hiercon_sweep_rows(const hiercon_sweep *sweep) { return sweep ? sweep->result.cells.size() : 0; }

size_t hiercon_sweep_columns(const hiercon_sweep *sweep) { return sweep ? sweep->result.root_thresholds.size() : 0; }

hiercon_status hiercon_sweep_csv(const hiercon_sweep *sweep, char **out) {
    if (!sweep || !out) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    return guarded([&] {
        *out = dup_string(export_sweep(sweep->result));
        return HIERCON_OK;
    });
}

hiercon_status hiercon_sweep_boundary(const hiercon_sweep *sweep, size_t column, double *xbar_r, double *observed,
                                      double *predicted) {
    if (!sweep || !xbar_r || !observed || !predicted) return fail(HIERCON_BAD_ARGUMENT, "null argument");
    if (column >= sweep->result.root_thresholds.size()) return fail(HIERCON_BAD_ARGUMENT, "column out of range");
    *xbar_r = sweep->result.root_thresholds[column];
    *observed = sweep->result.zero_multiplier_boundary(column).value_or(std::numeric_limits<double>::quiet_NaN());
    *predicted = theta_lower_bound(sweep->mean_sum, sweep->stddev_sum, *xbar_r, sweep->result.flexibility);
    return HIERCON_OK;
}

} // extern "C"
