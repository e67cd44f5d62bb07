// fbvp: solve free boundary formulations, reproduce the benchmark tables,
// run convergence sweeps and check integrator orders.
//
// Exit codes: 0 success, 1 tolerance failure, 2 solver error, 3 config error.

#include "fbvp/fbvp.hpp"
#include "fbvp/report_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace fbvp;
using json = nlohmann::ordered_json;

constexpr int exit_ok = 0;
constexpr int exit_tolerance = 1;
constexpr int exit_solver = 2;
constexpr int exit_config = 3;

struct RunConfig {
    std::string problem = "linear";
    std::string method;
    std::string solver = "rk6";
    double P = 1.0;
    double c = 1.0;
    double m = 1.0;
    double q = 1.5;
    std::optional<double> eps;
    double s_star = 1.0;
    double v0 = 100.0;
    double tau = 1e-6;
    std::optional<double> step;
    std::string out_csv;
    std::string out_json;
    std::string locator_mode = "from-previous-point";
    bool refine_locator = false;
    int max_escalations = 12;
    double escalation_factor = 10.0;
    bool no_timing = false;
};

int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::config:
    case ErrorKind::domain: return exit_config;
    case ErrorKind::tolerance_not_met: return exit_tolerance;
    default: return exit_solver;
    }
}

LocatorMode parse_locator_mode(const std::string& s) {
    if (s == "from-previous-point") return LocatorMode::from_previous_point;
    if (s == "literal-eq23") return LocatorMode::from_overshoot_point;
    throw Error(ErrorKind::config, "unknown locator mode '" + s + "'");
}

std::string natural_method(ProblemClass pc) {
    switch (pc) {
    case ProblemClass::translation: return "translation";
    case ProblemClass::scaling: return "scaling";
    case ProblemClass::direct: return "direct";
    }
    return "direct";
}

ProblemParams params_of(const RunConfig& cfg, double eps) { return {cfg.P, cfg.c, cfg.m, cfg.q, eps}; }

double default_eps(const RunConfig& cfg) {
    if (cfg.eps) return *cfg.eps;
    return cfg.problem == "colloid" ? -1e-6 : 1e-6;
}

/// Resolves method and step sign against the problem class, warning on corrections.
std::pair<std::string, double> resolve_method_and_step(const RunConfig& cfg, const BenchmarkProblem& prob) {
    const std::string natural = natural_method(prob.problem_class);
    if (!cfg.method.empty() && cfg.method != natural) {
        std::cerr << "warning: problem '" << prob.name << "' belongs to the " << natural << " class; using method "
                  << natural << " instead of " << cfg.method << "\n";
    }
    double step = cfg.step.value_or(natural == "translation" ? -0.05 : natural == "scaling" ? 0.01 : 1e-3);
    if (step == 0.0 || !std::isfinite(step)) throw Error(ErrorKind::config, "step must be finite and nonzero");
    const bool want_negative = natural == "translation";
    if ((step < 0.0) != want_negative) {
        std::cerr << "warning: step sign corrected for the " << natural << " method\n";
        step = -step;
    }
    return {natural, step};
}

FbfSolution run_fbf(const RunConfig& cfg, const BenchmarkProblem& prob, double step, double tau) {
    const auto& tab = tableaux::by_name(cfg.solver);
    if (prob.problem_class == ProblemClass::translation) {
        TranslationOptions opts;
        opts.locator.mode = parse_locator_mode(cfg.locator_mode);
        opts.locator.refine = cfg.refine_locator;
        return solve_translation(prob.translation(), cfg.s_star, tab, step, opts);
    }
    ScalingOptions opts{cfg.max_escalations, cfg.escalation_factor};
    return solve_scaling(prob.scaling(), cfg.s_star, cfg.v0, tau, tab, step, opts);
}

void fill_solution(json& j, const FbfSolution& sol, const BenchmarkProblem& prob) {
    j["free_boundary"] = sol.free_boundary;
    j["missing_slope"] = sol.missing_slope;
    j["group_parameter"] = sol.group_parameter;
    if (sol.method == GroupMethod::translation) {
        j["residual_at_origin"] = sol.residual;
    } else {
        j["terminal_slope"] = sol.residual;
        j["v0"] = sol.v0;
    }
    j["escalations"] = sol.escalations;
    if (prob.first_integral) {
        const double target = prob.first_integral(prob.translation().beta, prob.translation().gamma);
        double drift = 0.0;
        for (const auto& y : sol.trajectory.states()) {
            drift = std::max(drift, std::abs(prob.first_integral(y[0], y[1]) - target));
        }
        j["first_integral_max_drift"] = drift;
    }
}

void emit(const json& j, const RunConfig& cfg) {
    std::cout << j.dump(2) << "\n";
    if (!cfg.out_json.empty()) io::write_atomic(cfg.out_json, j.dump(2) + "\n");
}

int cmd_solve(const RunConfig& cfg) {
    json j;
    j["problem"] = cfg.problem;
    j["solver"] = cfg.solver;
    std::optional<BenchmarkProblem> prob;
    try {
        tableaux::by_name(cfg.solver);
        prob = make_problem(cfg.problem, params_of(cfg, default_eps(cfg)));
    } catch (const Error& e) {
        j["error"] = std::string(to_string(e.kind()));
        j["message"] = e.what();
        std::cerr << "error: " << e.what() << "\n";
        emit(j, cfg);
        return exit_config;
    }
    const auto [method, step] = resolve_method_and_step(cfg, *prob);
    j["method"] = method;
    j["step"] = step;

    const auto t0 = std::chrono::steady_clock::now();
    int code = exit_ok;
    try {
        if (method == "direct") {
            const double P = cfg.P;
            const double eps = default_eps(cfg);
            const auto traj = integrate_nonautonomous_fbf(P, eps, tableaux::by_name(cfg.solver), std::abs(step));
            const auto exact = exact_linear_fbf(P, eps, 0.0);
            j["free_boundary"] = exact.x_eps;
            j["missing_slope"] = exact.du_dx;
            j["group_parameter"] = 0.0;
            j["residual_at_free_boundary"] = std::abs(traj.back()[0] - 1.0);
            j["escalations"] = 0;
            if (!cfg.out_csv.empty()) io::write_atomic(cfg.out_csv, io::trajectory_csv(traj));
        } else {
            const FbfSolution sol = run_fbf(cfg, *prob, step, cfg.tau);
            fill_solution(j, sol, *prob);
            if (!cfg.out_csv.empty()) io::write_atomic(cfg.out_csv, io::trajectory_csv(sol.trajectory));
        }
    } catch (const ToleranceNotMet& e) {
        fill_solution(j, e.last_solution(), *prob);
        j["error"] = std::string(to_string(e.kind()));
        j["message"] = e.what();
        std::cerr << "error: " << e.what() << "\n";
        if (!cfg.out_csv.empty()) io::write_atomic(cfg.out_csv, io::trajectory_csv(e.last_solution().trajectory));
        code = exit_tolerance;
    } catch (const Error& e) {
        j["error"] = std::string(to_string(e.kind()));
        j["message"] = e.what();
        std::cerr << "error: " << e.what() << "\n";
        code = exit_code_for(e);
    }
    if (!cfg.no_timing) {
        j["wall_time_ms"] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    emit(j, cfg);
    return code;
}

/// Display-only D-notation, e.g. 2.6659D-04.
std::string d_notation(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9E", v);
    std::string s = buf;
    if (auto pos = s.find('E'); pos != std::string::npos) s[pos] = 'D';
    return s;
}

int cmd_table(int n, const std::string& locator_mode, const std::string& out_json) {
    const auto rep = tables::run_table(n, parse_locator_mode(locator_mode));
    std::printf("Table %d: %s\n", rep.number, rep.caption.c_str());
    std::printf("%-14s", "");
    for (const auto& c : rep.columns) std::printf("%20s", c.c_str());
    std::printf("\n");
    for (const auto& row : rep.rows) {
        std::printf("%-14s", row.label.c_str());
        for (double v : row.values) std::printf("%20s", d_notation(v).c_str());
        std::printf("\n");
    }
    std::printf("\n");
    json checks = json::array();
    for (const auto& c : rep.checks) {
        std::printf("[%s] %-32s computed %s  range [%s, %s]\n", c.pass() ? "PASS" : "FAIL", c.name.c_str(),
                    d_notation(c.computed).c_str(), d_notation(c.lo).c_str(), d_notation(c.hi).c_str());
        checks.push_back({{"name", c.name}, {"computed", c.computed}, {"lo", c.lo}, {"hi", c.hi}, {"pass", c.pass()}});
    }
    if (!out_json.empty()) {
        json j;
        j["table"] = rep.number;
        j["columns"] = rep.columns;
        json rows = json::array();
        for (const auto& r : rep.rows) rows.push_back({{"label", r.label}, {"values", r.values}});
        j["rows"] = rows;
        j["checks"] = checks;
        j["pass"] = rep.pass();
        io::write_atomic(out_json, j.dump(2) + "\n");
    }
    return rep.pass() ? exit_ok : exit_tolerance;
}

int cmd_sweep(const std::string& kind, const RunConfig& cfg, const std::vector<double>& ladder,
              const std::string& compare) {
    const auto base = make_problem(cfg.problem, params_of(cfg, default_eps(cfg)));
    if (base.problem_class == ProblemClass::direct) {
        throw Error(ErrorKind::config, "sweeps need a translation- or scaling-class problem");
    }
    ConvergenceReport rep;
    if (kind == "epsilon") {
        const auto [method, step] = resolve_method_and_step(cfg, base);
        SolveFn solve = [&, step = step](double eps) {
            if (base.problem_class == ProblemClass::scaling) return run_fbf(cfg, base, step, eps);
            return run_fbf(cfg, make_problem(cfg.problem, params_of(cfg, eps)), step, cfg.tau);
        };
        ExactFn exact;
        if (compare == "bvp" && base.exact_bvp) {
            exact = [&](double, const FbfSolution&) { return base.exact_bvp; };
        } else if (compare == "fbf" && base.exact_fbf) {
            exact = [&](double eps, const FbfSolution& sol) -> std::optional<ExactSolution> {
                return base.exact_fbf(base.problem_class == ProblemClass::scaling ? sol.terminal_slope() : eps);
            };
        }
        rep = epsilon_sweep(solve, exact, ladder);
    } else {
        const bool negative = base.problem_class == ProblemClass::translation;
        std::vector<double> steps;
        for (double h : ladder) steps.push_back(negative ? -std::abs(h) : std::abs(h));
        SolveFn solve = [&](double h) { return run_fbf(cfg, base, h, cfg.tau); };
        rep = step_refinement(solve, steps);
    }
    const json j = io::to_json(rep);
    std::cout << j.dump(2) << "\n";
    if (!cfg.out_json.empty()) io::write_atomic(cfg.out_json, j.dump(2) + "\n");
    if (!cfg.out_csv.empty()) io::write_atomic(cfg.out_csv, io::report_csv(rep));
    return exit_ok;
}

int cmd_order_check(const std::string& solver) {
    std::vector<std::string> names = solver == "all" ? std::vector<std::string>{"rk4", "rk6", "rk8"}
                                                     : std::vector<std::string>{solver};
    bool ok = true;
    for (const auto& name : names) {
        const auto& tab = tableaux::by_name(name);
        tab.validate();
        const auto est = tables::order_gate(tab);
        const bool pass = std::abs(est.order - tab.nominal_order) <= tables::order_gate_tol;
        ok = ok && pass;
        std::printf("[%s] %s nominal %d empirical %.4f (steps", pass ? "PASS" : "FAIL", name.c_str(),
                    tab.nominal_order, est.order);
        for (std::size_t i = 0; i < est.steps.size(); ++i) std::printf(" %g:%.3e", est.steps[i], est.errors[i]);
        std::printf(")\n");
    }
    return ok ? exit_ok : exit_tolerance;
}

void add_problem_options(CLI::App& cmd, RunConfig& cfg) {
    cmd.add_option("--problem", cfg.problem, "linear | linear-nonautonomous | nonlinear-tanh | colloid | viscoplastic-rod");
    cmd.add_option("--method", cfg.method, "translation | scaling (defaults to the problem's class)");
    cmd.add_option("--solver", cfg.solver, "rk4 | rk6 | rk8");
    cmd.add_option("--P", cfg.P, "P of the linear and tanh problems");
    cmd.add_option("--c", cfg.c, "c of the colloid problem");
    cmd.add_option("--m", cfg.m, "m of the rod problem");
    cmd.add_option("--q", cfg.q, "q of the rod problem");
    cmd.add_option("--eps", cfg.eps, "free boundary slope");
    cmd.add_option("--s_star,--s-star", cfg.s_star, "starting free boundary guess");
    cmd.add_option("--v0", cfg.v0, "initial slope of the scaling auxiliary problem");
    cmd.add_option("--tau", cfg.tau, "terminal slope tolerance of the scaling method");
    cmd.add_option("--step", cfg.step, "signed step size");
    cmd.add_option("--out_csv,--out-csv", cfg.out_csv, "output CSV path");
    cmd.add_option("--out_json,--out-json", cfg.out_json, "output JSON path");
    cmd.add_option("--locator_mode,--locator-mode", cfg.locator_mode, "from-previous-point | literal-eq23");
    cmd.add_flag("--refine-locator", cfg.refine_locator, "iterate the event locator to tolerance (extension)");
    cmd.add_option("--max-escalations", cfg.max_escalations, "v0 escalation budget");
    cmd.add_option("--escalation-factor", cfg.escalation_factor, "v0 multiplier per escalation");
    cmd.add_flag("--no-timing", cfg.no_timing, "omit wall_time_ms so reports compare byte-for-byte");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Free boundary solvers for BVPs on semi-infinite intervals"};
    app.require_subcommand(1);

    RunConfig solve_cfg;
    auto* solve = app.add_subcommand("solve", "solve one free boundary problem");
    add_problem_options(*solve, solve_cfg);

    int table_n = 0;
    std::string table_locator = "from-previous-point";
    std::string table_json;
    auto* table = app.add_subcommand("table", "reproduce a benchmark table and check it");
    table->add_option("n", table_n, "table number (1-4)")->required()->check(CLI::Range(1, 4));
    table->add_option("--locator_mode,--locator-mode", table_locator, "from-previous-point | literal-eq23");
    table->add_option("--out_json,--out-json", table_json, "write the table and checks as JSON");

    RunConfig sweep_cfg;
    std::string sweep_kind;
    std::vector<double> ladder;
    std::string compare = "bvp";
    auto* sweep = app.add_subcommand("sweep", "epsilon sweep or grid refinement study");
    sweep->add_option("kind", sweep_kind, "epsilon | step")->required()->check(CLI::IsMember({"epsilon", "step"}));
    sweep->add_option("--ladder", ladder, "comma-separated parameter values")->required()->delimiter(',');
    sweep->add_option("--compare", compare, "sup-error target: bvp | fbf")->check(CLI::IsMember({"bvp", "fbf"}));
    add_problem_options(*sweep, sweep_cfg);

    std::string order_solver = "all";
    auto* order = app.add_subcommand("order-check", "empirical order of the shipped tableaux on y' = y");
    order->add_option("--solver", order_solver, "rk4 | rk6 | rk8 | all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*solve) return cmd_solve(solve_cfg);
        if (*table) return cmd_table(table_n, table_locator, table_json);
        if (*sweep) return cmd_sweep(sweep_kind, sweep_cfg, ladder, compare);
        if (*order) return cmd_order_check(order_solver);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_solver;
    }
    return exit_config;
}
