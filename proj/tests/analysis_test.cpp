#include "fbvp/analysis.hpp"
#include "fbvp/tables.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace fbvp;

namespace {

SolveFn linear_eps_solver(double h = -1e-3) {
    return [h](double eps) { return tables::solve_linear(eps, tableaux::rk6(), h, LocatorMode::from_previous_point); };
}

ExactFn linear_exact() {
    return [](double eps, const FbfSolution&) -> std::optional<ExactSolution> { return linear_fbf_solution(1.0, eps); };
}

void expect_identical(const ConvergenceReport& a, const ConvergenceReport& b) {
    ASSERT_EQ(a.points.size(), b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        EXPECT_EQ(a.points[i].parameter, b.points[i].parameter);
        EXPECT_EQ(a.points[i].free_boundary, b.points[i].free_boundary);
        EXPECT_EQ(a.points[i].missing_slope, b.points[i].missing_slope);
        EXPECT_EQ(a.points[i].residual, b.points[i].residual);
        EXPECT_EQ(a.points[i].sup_error, b.points[i].sup_error);
    }
    EXPECT_EQ(a.estimated_rate, b.estimated_rate);
    EXPECT_EQ(a.estimated_K, b.estimated_K);
}

} // namespace

TEST(SupNorm, ZeroAgainstItself) {
    const auto exact = linear_fbf_solution(1.0, 1e-3);
    std::vector<double> xs;
    std::vector<Point2> ys;
    for (int i = 0; i <= 50; ++i) {
        const double x = exact.x_eps * i / 50.0;
        xs.push_back(x);
        ys.push_back({exact.u(x), exact.du_dx(x)});
    }
    EXPECT_EQ(sup_norm_error(Trajectory<2>(xs, ys), exact), 0.0);
}

TEST(SupNorm, ComputedLinearSolutionAgainstClosedForm) {
    const auto sol = tables::solve_linear(1e-6, tableaux::rk6(), -0.05, LocatorMode::from_previous_point);
    const double err = sup_norm_error(sol, linear_fbf_solution(1.0, 1e-6));
    EXPECT_GT(err, 2.5e-4);
    EXPECT_LT(err, 2.9e-4);
}

TEST(SupNorm, ScalingSolutionAgainstClosedFormAtTerminalSlope) {
    const auto sol = tables::solve_tanh(100.0, tableaux::rk6());
    EXPECT_LT(sup_norm_error(sol, nonlinear_fbf_solution(1.0, sol.terminal_slope())), 1e-8);
}

TEST(EpsilonSweep, LinearLadderMatchesClosedForm) {
    std::vector<double> ladder;
    for (const auto& r : tables::table3_ref) ladder.push_back(r.eps);
    const auto rep = epsilon_sweep(linear_eps_solver(), linear_exact(), ladder);
    ASSERT_EQ(rep.points.size(), ladder.size());
    EXPECT_EQ(rep.sweep_variable, SweepVariable::epsilon);
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        EXPECT_NEAR(rep.points[i].free_boundary, tables::table3_ref[i].free_boundary, 1e-3);
        EXPECT_NEAR(rep.points[i].missing_slope, 1.0 + ladder[i], 5e-7);
        ASSERT_TRUE(rep.points[i].sup_error);
    }
    ASSERT_TRUE(rep.estimated_K);
}

TEST(EpsilonSweep, ClosedFormRateIsLinear) {
    const std::vector<double> ladder{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    for (int family = 0; family < 2; ++family) {
        const auto rep = family == 0
            ? closed_form_epsilon_sweep([](double e) { return linear_fbf_solution(1.0, e); }, linear_bvp_solution(1.0), ladder)
            : closed_form_epsilon_sweep([](double e) { return nonlinear_fbf_solution(1.0, e); }, tanh_bvp_solution(1.0), ladder);
        ASSERT_TRUE(rep.estimated_rate);
        EXPECT_NEAR(*rep.estimated_rate, 1.0, 0.1);
        // K stable within a factor of 2 over eps <= 1e-2.
        double lo = INFINITY, hi = 0.0;
        for (const auto& p : rep.points) {
            if (p.parameter > 1e-2) continue;
            const double k = *p.sup_error / p.parameter;
            lo = std::min(lo, k);
            hi = std::max(hi, k);
        }
        EXPECT_LE(hi / lo, 2.0);
    }
}

TEST(EpsilonSweep, InvalidLadders) {
    const std::vector<double> rising{1e-3, 1e-2};
    const std::vector<double> large{0.6, 0.1};
    for (const auto* lad : {&rising, &large}) {
        try {
            epsilon_sweep(linear_eps_solver(), linear_exact(), *lad);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::domain);
        }
    }
}

TEST(EpsilonSweep, FailureNamesTheOffendingEpsilon) {
    const SolveFn failing = [](double eps) -> FbfSolution {
        if (eps < 1e-3) throw Error(ErrorKind::no_crossing, "no crossing");
        return tables::solve_linear(eps, tableaux::rk4(), -0.01, LocatorMode::from_previous_point);
    };
    const std::vector<double> ladder{1e-1, 1e-2, 1e-4};
    try {
        epsilon_sweep(failing, nullptr, ladder, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::no_crossing);
        ASSERT_TRUE(e.location());
        EXPECT_EQ(*e.location(), 1e-4);
    }
}

TEST(StepRefinement, HalvingLadder) {
    std::vector<double> ladder;
    for (const auto& r : tables::table2_ref) ladder.push_back(-r.step);
    const auto rep = step_refinement([](double h) { return tables::solve_linear(1e-6, tableaux::rk6(), h, LocatorMode::from_previous_point); },
                                     ladder);
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        EXPECT_NEAR(rep.points[i].residual, tables::table2_ref[i].residual, 0.2 * tables::table2_ref[i].residual);
        if (tables::table2_ref[i].step <= 0.025) {
            EXPECT_NEAR(rep.points[i].free_boundary, 13.8155, 1e-4);
        }
    }
    ASSERT_TRUE(rep.estimated_rate);
    EXPECT_GT(*rep.estimated_rate, 1.5);
}

TEST(StepRefinement, SingleRungHasNoRate) {
    const std::vector<double> one{-0.05};
    const auto rep = step_refinement([](double h) { return tables::solve_linear(1e-6, tableaux::rk4(), h, LocatorMode::from_previous_point); },
                                     one);
    EXPECT_EQ(rep.points.size(), 1u);
    EXPECT_FALSE(rep.estimated_rate);
}

TEST(FitRate, ExactPowerLawAndFloorExclusion) {
    const std::vector<double> p{1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<double> e;
    for (double x : p) e.push_back(3.0 * x * x);
    EXPECT_NEAR(*fit_rate(p, e), 2.0, 1e-12);
    e.back() = 1e-17; // round-off rung is ignored
    EXPECT_NEAR(*fit_rate(p, e), 2.0, 1e-12);
    e[2] = 1e-17;
    e[1] = 0.0;
    EXPECT_FALSE(fit_rate(p, e));
}

// Identical inputs give bit-identical reports, serial or threaded.
TEST(Determinism, SweepsAreReproducible) {
    const std::vector<double> ladder{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    const auto serial = epsilon_sweep(linear_eps_solver(-0.01), linear_exact(), ladder, 1);
    const auto again = epsilon_sweep(linear_eps_solver(-0.01), linear_exact(), ladder, 1);
    const auto threaded = epsilon_sweep(linear_eps_solver(-0.01), linear_exact(), ladder, 4);
    expect_identical(serial, again);
    expect_identical(serial, threaded);
}

TEST(ThreadSetting, EnvironmentOverride) {
    ::setenv("FBVP_THREADS", "0", 1);
    EXPECT_EQ(sweep_threads(), 1u);
    ::setenv("FBVP_THREADS", "3", 1);
    EXPECT_EQ(sweep_threads(), 3u);
    ::unsetenv("FBVP_THREADS");
    EXPECT_GE(sweep_threads(), 1u);
}
