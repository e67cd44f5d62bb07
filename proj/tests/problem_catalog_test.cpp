#include "fbvp/analysis.hpp"
#include "fbvp/problem_catalog.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace fbvp;

TEST(LinearClosedForms, BvpValues) {
    EXPECT_EQ(exact_linear_bvp(1.0, 0.0).u, 0.0);
    EXPECT_NEAR(exact_linear_bvp(1.0, 1.0).u, 1.0 - std::exp(-1.0), 1e-16);
    EXPECT_NEAR(exact_linear_bvp(2.0, 0.0).du_dx, 2.0, 1e-16);
    EXPECT_THROW(exact_linear_bvp(0.0, 1.0), Error);
}

TEST(LinearClosedForms, FbfValues) {
    EXPECT_NEAR(exact_linear_fbf(1.0, 1e-6, 0.0).x_eps, 13.815511557963774, 1e-12);
    EXPECT_NEAR(exact_linear_fbf(1.0, 0.1, 0.0).x_eps, std::log(11.0), 1e-15);
    EXPECT_NEAR(exact_linear_fbf(1.0, 0.1, 0.0).du_dx, 1.1, 1e-15);
    for (double eps : {0.0, -1e-3}) {
        try {
            exact_linear_fbf(1.0, eps, 0.0);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::domain);
        }
    }
}

TEST(TanhClosedForms, LimitsAndFreeBoundary) {
    const auto bvp = exact_nonlinear_fbf(1.0, 0.0, 1.0);
    EXPECT_NEAR(bvp.u, std::tanh(1.0), 1e-15);
    EXPECT_NEAR(bvp.u, 0.7615941560, 1e-10);
    EXPECT_EQ(bvp.C, -1.0);
    EXPECT_TRUE(std::isinf(bvp.x_eps));
    EXPECT_NEAR(exact_nonlinear_fbf(1.0, 8.24462e-9, 0.0).x_eps, 10.0, 1e-5);
    EXPECT_THROW(exact_nonlinear_fbf(1.0, -1e-3, 0.0), Error);
}

// Boundary conditions of both closed forms at random (P, eps).
TEST(ClosedFormIdentities, RandomParameterPairs) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> P(0.1, 10.0), log_eps(-9.0, std::log10(0.5));
    for (int i = 0; i < 20; ++i) {
        const double p = P(rng), eps = std::pow(10.0, log_eps(rng));
        const auto lin = exact_linear_fbf(p, eps, 0.0);
        const auto lin_end = exact_linear_fbf(p, eps, lin.x_eps);
        EXPECT_NEAR(lin_end.u, 1.0, 1e-12);
        EXPECT_NEAR(lin_end.du_dx, eps, 1e-12);
        EXPECT_EQ(exact_linear_fbf(p, eps, 0.0).u, 0.0);

        const auto nl = exact_nonlinear_fbf(p, eps, 0.0);
        const auto nl_end = exact_nonlinear_fbf(p, eps, nl.x_eps);
        EXPECT_NEAR(nl_end.u, 1.0, 1e-12);
        EXPECT_NEAR(nl_end.du_dx, eps, 1e-12);
        EXPECT_NEAR(p * nl.C * nl.C - eps * nl.C - p, 0.0, 1e-12 * p);
        EXPECT_LT(nl.C, 0.0);
        EXPECT_LE(nl.C, -1.0 + eps / (2.0 * p) + 4.0 * std::numeric_limits<double>::epsilon());
    }
}

// ODE residuals with second derivatives written out by hand.
TEST(ClosedFormIdentities, LinearFormsSatisfyTheirEquation) {
    for (double P : {0.1, 1.0, 10.0}) {
        for (double eps : {1e-6, 1e-2, 0.5}) {
            for (int i = 0; i <= 100; ++i) {
                const double x = exact_linear_fbf(P, eps, 0.0).x_eps * i / 100.0;
                const auto v = exact_linear_fbf(P, eps, x);
                const double d2 = -P * (P + eps) * std::exp(-P * x);
                EXPECT_NEAR(d2 + P * v.du_dx, 0.0, 1e-12 * P * (P + eps));
            }
        }
        for (int i = 0; i <= 100; ++i) {
            const double x = 0.1 * i;
            const auto v = exact_linear_bvp(P, x);
            const double d2 = -P * P * std::exp(-P * x);
            EXPECT_NEAR(d2 + P * v.du_dx, 0.0, 1e-12 * P * P);
            // Same function solves the non-autonomous variant.
            EXPECT_NEAR(d2 + P * P * std::exp(-P * x), 0.0, 1e-15);
        }
    }
}

TEST(ClosedFormIdentities, TanhBvpSatisfiesItsEquation) {
    const auto sol = tanh_bvp_solution(2.0);
    for (int i = 0; i <= 100; ++i) {
        const double x = 0.03 * i, t = std::tanh(2.0 * x), ch = std::cosh(2.0 * x);
        const double d2 = -2.0 * 4.0 * t / (ch * ch);
        EXPECT_NEAR(d2 + 2.0 * 2.0 * sol.u(x) * sol.du_dx(x), 0.0, 1e-12);
    }
}

// The tanh FBF closed form meets both boundary conditions but leaves an
// O(eps) defect in the equation: 2P^2 sech^2(Px) tanh(Px) (1 + C) / C^2.
TEST(ClosedFormIdentities, TanhFbfEquationDefectIsOrderEpsilon) {
    for (double P : {0.5, 1.0, 3.0}) {
        for (double eps : {1e-8, 1e-4, 1e-2}) {
            const auto at0 = exact_nonlinear_fbf(P, eps, 0.0);
            const double C = at0.C;
            double worst = 0.0;
            for (int i = 0; i <= 200; ++i) {
                const double x = at0.x_eps * i / 200.0, t = std::tanh(P * x), ch = std::cosh(P * x);
                const auto v = exact_nonlinear_fbf(P, eps, x);
                const double d2 = 2.0 * P * P * t / (C * ch * ch);
                const double defect = d2 + 2.0 * P * v.u * v.du_dx;
                const double predicted = 2.0 * P * P * t * (1.0 + C) / (C * C * ch * ch);
                EXPECT_NEAR(defect, predicted, 1e-12 * P * P);
                worst = std::max(worst, std::abs(defect));
            }
            EXPECT_LE(worst, P * eps);
        }
    }
}

TEST(NonautonomousVariant, ExactFlowFromLinearFbfData) {
    const double P = 1.0, eps = 1e-6;
    const auto traj = integrate_nonautonomous_fbf(P, eps, tableaux::rk6(), 1e-3);
    const double xe = exact_linear_fbf(P, eps, 0.0).x_eps;
    EXPECT_EQ(traj.xs().back(), xe);
    for (std::size_t k = 0; k < traj.size(); k += 97) {
        const double x = traj.x(k);
        EXPECT_NEAR(traj.state(k)[0], -std::expm1(-P * x) + eps * x, 1e-10);
    }
    // The linear FBF data overshoot 1 by eps (x_eps - 1/(P+eps)).
    EXPECT_NEAR(traj.back()[0] - 1.0, eps * (xe - 1.0 / (P + eps)), 1e-10);
}

TEST(Colloid, FirstIntegralAndFreeBoundaryData) {
    EXPECT_NEAR(colloid_first_integral(0.0, -1e-6), 1e-12, 1e-25);
    EXPECT_NEAR(colloid_first_integral(1.0, 0.0), -4.0 * (std::cosh(1.0) - 1.0), 1e-14);
    EXPECT_THROW(colloid_problem(1.0, 1e-6), Error);
    EXPECT_THROW(colloid_problem(-1.0, -1e-6), Error);
    const auto p = colloid_problem(1.0, -1e-6);
    EXPECT_EQ(p.second_derivative(0.3, 0.0, -1.0), 0.0);
    EXPECT_NEAR(p.second_derivative(0.3, 1.0, -1.0), 2.0 * std::sinh(1.0), 1e-15);
}

TEST(ViscoplasticRod, ExponentAndExactAuxiliaryFlow) {
    const auto rod = rod_problem(1.0, 1.5);
    EXPECT_NEAR(rod.delta, 0.2, 1e-15);
    EXPECT_THROW(rod_problem(1.0, 2.5), Error);
    // u*'' = -x (u*')^{1/2} gives u*' = (sqrt(v0) - x^2/4)^2.
    const double v0 = 0.06375;
    const auto sol = solve_scaling_once(rod, 1.0, v0, tableaux::rk6(), 1e-3);
    const double w = std::sqrt(v0) - 0.25;
    EXPECT_NEAR(sol.auxiliary.back()[1], w * w, 1e-10);
    EXPECT_LT(sol.terminal_slope(), 1e-4);
}

TEST(BoundaryLayer, HalfValueAtLogTwoOverP) {
    for (double P : {0.1, 1.0, 10.0}) {
        EXPECT_NEAR(exact_linear_bvp(P, std::log(2.0) / P).u, 0.5, 1e-15);
    }
}

// Sup distance between FBF and BVP closed forms vanishes with eps, at most linearly.
TEST(FreeBoundaryLimit, ClosedFormsConverge) {
    const auto lin_bvp = linear_bvp_solution(1.0);
    const auto tanh_bvp = tanh_bvp_solution(1.0);
    double prev_lin = INFINITY, prev_tanh = INFINITY;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        const double dl = closed_form_sup_error(linear_fbf_solution(1.0, eps), lin_bvp);
        const double dt = closed_form_sup_error(nonlinear_fbf_solution(1.0, eps), tanh_bvp);
        EXPECT_LT(dl, prev_lin);
        EXPECT_LT(dt, prev_tanh);
        EXPECT_LE(dl, 1.5 * eps);
        EXPECT_LE(dt, 1.5 * eps);
        prev_lin = dl;
        prev_tanh = dt;
    }
}

TEST(Catalogue, EveryNamedProblemBuilds) {
    for (auto name : problem_names) {
        ProblemParams pp;
        if (name == "colloid") pp.eps = -1e-6;
        const auto b = make_problem(name, pp);
        EXPECT_EQ(b.name, name);
    }
    EXPECT_EQ(make_problem("linear", {}).problem_class, ProblemClass::translation);
    EXPECT_EQ(make_problem("nonlinear-tanh", {}).problem_class, ProblemClass::scaling);
    EXPECT_EQ(make_problem("linear-nonautonomous", {}).problem_class, ProblemClass::direct);
    EXPECT_FALSE(make_problem("linear-nonautonomous", {}).exact_fbf);
    try {
        make_problem("pendulum", {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::config);
    }
    ProblemParams big;
    big.eps = 0.6;
    EXPECT_THROW(make_problem("linear", big), Error);
}
