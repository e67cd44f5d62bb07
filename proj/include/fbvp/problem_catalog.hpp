#pragma once

// Benchmark problems on [0, inf) and their free boundary formulations.
//
//   linear               u'' + P u' = 0,            u(0)=0, u(inf)=1
//   linear-nonautonomous u'' + P^2 e^{-Px} = 0,     same exact solutions as linear
//   nonlinear-tanh       u'' + 2 P u u' = 0,        u(0)=0, u(inf)=1
//   colloid              u'' - 2 sinh u = 0,        u(0)=c, u(inf)=0
//   viscoplastic-rod     u'' + m x (u')^{2-q} = 0,  u(0)=0, u(inf)=1

#include "fbvp/errors.hpp"
#include "fbvp/group_methods.hpp"
#include "fbvp/rk_integrators.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace fbvp {

/// Closed-form solution of a BVP (x_eps infinite) or of its free boundary formulation.
struct ExactSolution {
    std::function<double(double)> u;
    std::function<double(double)> du_dx;
    double x_eps = std::numeric_limits<double>::infinity();
    double missing_slope = 0.0;
    double beta = 1.0;
    double epsilon = 0.0;
    /// Constant of the tanh family; absent for the linear family.
    std::optional<double> C;
};

struct LinearValue {
    double u;
    double du_dx;
};

struct LinearFbfValue {
    double u;
    double du_dx;
    double x_eps;
};

struct NonlinearFbfValue {
    double u;
    double du_dx;
    double x_eps;
    double C;
};

namespace detail {
inline void require_positive_P(double P) {
    if (!(P > 0.0)) throw Error(ErrorKind::domain, "P must be positive", P);
}
} // namespace detail

/// u = 1 - e^{-Px}.
inline LinearValue exact_linear_bvp(double P, double x) {
    detail::require_positive_P(P);
    if (x < 0.0) throw Error(ErrorKind::domain, "x must be non-negative", x);
    const double e = std::exp(-P * x);
    return {-std::expm1(-P * x), P * e};
}

/// u_eps = (P+eps)/P (1 - e^{-Px}), x_eps = -ln(eps/(P+eps))/P.
inline LinearFbfValue exact_linear_fbf(double P, double eps, double x) {
    detail::require_positive_P(P);
    if (!(eps > 0.0)) throw Error(ErrorKind::domain, "closed form needs eps > 0", eps);
    const double scale = (P + eps) / P;
    return {-scale * std::expm1(-P * x), (P + eps) * std::exp(-P * x), std::log1p(P / eps) / P};
}

/// C = (eps - sqrt(eps^2 + 4P^2)) / (2P).
inline double tanh_family_constant(double P, double eps) {
    return (eps - std::sqrt(eps * eps + 4.0 * P * P)) / (2.0 * P);
}

/// u_eps = -tanh(Px)/C, x_eps = ln((1-C)/(1+C))/(2P).
/// At eps = 0 this is tanh(Px) and x_eps is +infinity.
inline NonlinearFbfValue exact_nonlinear_fbf(double P, double eps, double x) {
    detail::require_positive_P(P);
    if (eps < 0.0) throw Error(ErrorKind::domain, "closed form needs eps >= 0", eps);
    const double root = std::sqrt(eps * eps + 4.0 * P * P);
    const double C = (eps - root) / (2.0 * P);
    // 1 + C without cancellation: 2P - root = -eps^2 / (2P + root).
    const double one_plus_C = (eps - eps * eps / (2.0 * P + root)) / (2.0 * P);
    const double x_eps = one_plus_C > 0.0 ? std::log((1.0 - C) / one_plus_C) / (2.0 * P)
                                          : std::numeric_limits<double>::infinity();
    const double ch = std::cosh(P * x);
    return {-std::tanh(P * x) / C, -P / (C * ch * ch), x_eps, C};
}

inline ExactSolution linear_bvp_solution(double P) {
    detail::require_positive_P(P);
    return {[P](double x) { return exact_linear_bvp(P, x).u; },
            [P](double x) { return exact_linear_bvp(P, x).du_dx; },
            std::numeric_limits<double>::infinity(), P, 1.0, 0.0, std::nullopt};
}

inline ExactSolution linear_fbf_solution(double P, double eps) {
    const auto at0 = exact_linear_fbf(P, eps, 0.0);
    return {[P, eps](double x) { return exact_linear_fbf(P, eps, x).u; },
            [P, eps](double x) { return exact_linear_fbf(P, eps, x).du_dx; },
            at0.x_eps, at0.du_dx, 1.0, eps, std::nullopt};
}

inline ExactSolution tanh_bvp_solution(double P) {
    detail::require_positive_P(P);
    return {[P](double x) { return std::tanh(P * x); },
            [P](double x) {
                const double ch = std::cosh(P * x);
                return P / (ch * ch);
            },
            std::numeric_limits<double>::infinity(), P, 1.0, 0.0, -1.0};
}

inline ExactSolution nonlinear_fbf_solution(double P, double eps) {
    const auto at0 = exact_nonlinear_fbf(P, eps, 0.0);
    return {[P, eps](double x) { return exact_nonlinear_fbf(P, eps, x).u; },
            [P, eps](double x) { return exact_nonlinear_fbf(P, eps, x).du_dx; },
            at0.x_eps, at0.du_dx, 1.0, eps, at0.C};
}

// ---------------------------------------------------------------------------
// Governing equations
// ---------------------------------------------------------------------------

/// u'' + P^2 e^{-Px} = 0 as a first-order system.
inline FirstOrderSystem<2> nonautonomous_variant(double P) {
    detail::require_positive_P(P);
    return {[P](double x, const Point2& y) -> Point2 { return {y[1], -P * P * std::exp(-P * x)}; }, {{"P", P}}};
}

/// Integrates the non-autonomous variant forward from the linear FBF data
/// u(0) = 0, u'(0) = P + eps up to the linear free boundary. The exact flow is
/// u = 1 - e^{-Px} + eps x, so u misses 1 there by eps (x_eps - 1/(P + eps)).
inline Trajectory<2> integrate_nonautonomous_fbf(double P, double eps, const ButcherTableau& tab, double h) {
    const auto exact = exact_linear_fbf(P, eps, 0.0);
    return integrate_to(tab, nonautonomous_variant(P), 0.0, Point2{0.0, exact.du_dx}, exact.x_eps, h);
}

/// Free boundary formulation of the linear problem in the translation class
/// (w = 0, alpha = 0, beta = 1, gamma = eps).
inline TranslationFreeBvp linear_fbf_problem(double P, double eps) {
    detail::require_positive_P(P);
    TranslationFreeBvp p;
    p.omega = 0.0;
    p.alpha = 0.0;
    p.beta = 1.0;
    p.gamma = eps;
    p.reduced_rhs = [P](double, double du) { return -P * du; };
    p.params = {{"P", P}, {"eps", eps}};
    return p;
}

/// Free boundary formulation of the tanh problem in the scaling class (delta = -1, beta = 1).
inline ScalingFreeBvp nonlinear_fbf_problem(double P) {
    detail::require_positive_P(P);
    ScalingFreeBvp p;
    p.delta = -1.0;
    p.beta = 1.0;
    p.accel = [P](double, double u, double du) { return -2.0 * P * u * du; };
    p.params = {{"P", P}};
    return p;
}

/// (u')^2 - 4 (cosh u - 1); constant along solutions of u'' = 2 sinh u.
inline double colloid_first_integral(double u, double du) {
    const double sh = std::sinh(0.5 * u);
    return du * du - 8.0 * sh * sh;
}

/// Free boundary formulation of the colloid problem: alpha = c, beta = 0, gamma = eps < 0.
inline TranslationFreeBvp colloid_problem(double c, double eps) {
    if (!(c > 0.0)) throw Error(ErrorKind::domain, "c must be positive", c);
    if (!(eps < 0.0)) throw Error(ErrorKind::domain, "colloid solution decreases: eps must be negative", eps);
    TranslationFreeBvp p;
    p.omega = 0.0;
    p.alpha = c;
    p.beta = 0.0;
    p.gamma = eps;
    p.reduced_rhs = [](double u, double) { return 2.0 * std::sinh(u); };
    p.params = {{"c", c}, {"eps", eps}};
    return p;
}

// Equation forms used for class membership checks.

inline EquationForm linear_form(double P) { return {{{P, 0.0, 0.0, 1.0}}, false, false, 0.0}; }
inline EquationForm nonautonomous_form() { return {{}, true, false, 0.0}; }
inline EquationForm tanh_form(double P) { return {{{2.0 * P, 0.0, 1.0, 1.0}}, false, false, 0.0}; }
inline EquationForm colloid_form(double c) { return {{}, false, true, c}; }
inline EquationForm rod_form(double m, double q) { return {{{m, 1.0, 0.0, 2.0 - q}}, false, false, 0.0}; }

/// Free boundary formulation of the viscoplastic rod problem; delta = (q-1)/(q+1).
inline ScalingFreeBvp rod_problem(double m, double q) {
    if (!(m > 0.0)) throw Error(ErrorKind::domain, "m must be positive", m);
    if (!(q > 0.0 && q < 2.0)) throw Error(ErrorKind::domain, "q must lie in (0, 2)", q);
    ScalingFreeBvp p;
    p.delta = check_class_membership(rod_form(m, q));
    p.beta = 1.0;
    const double power = 2.0 - q;
    p.accel = [m, power](double x, double, double du) { return -m * x * std::pow(du, power); };
    p.params = {{"m", m}, {"q", q}};
    return p;
}

// ---------------------------------------------------------------------------
// Catalogue entries
// ---------------------------------------------------------------------------

enum class ProblemClass { translation, scaling, direct };

struct ProblemParams {
    double P = 1.0;
    double c = 1.0;
    double m = 1.0;
    double q = 1.5;
    /// Free boundary slope; for scaling problems the terminal slope tolerance.
    double eps = 1e-6;
};

struct BenchmarkProblem {
    std::string name;
    ProblemClass problem_class = ProblemClass::translation;
    std::map<std::string, double> params;
    double epsilon = 0.0;
    std::variant<TranslationFreeBvp, ScalingFreeBvp, FirstOrderSystem<2>> formulation;
    EquationForm form;
    /// Closed-form FBF solution as a function of the free boundary slope, when one exists.
    std::function<ExactSolution(double)> exact_fbf;
    /// Closed-form solution of the original BVP, when one exists.
    std::optional<ExactSolution> exact_bvp;
    /// Conserved quantity along exact solutions, when one is known.
    std::function<double(double, double)> first_integral;
    /// +1 when the solution increases on [0, s], -1 when it decreases.
    int monotone_sign = 1;

    const TranslationFreeBvp& translation() const { return std::get<TranslationFreeBvp>(formulation); }
    const ScalingFreeBvp& scaling() const { return std::get<ScalingFreeBvp>(formulation); }
};

inline constexpr std::string_view problem_names[] = {"linear", "linear-nonautonomous", "nonlinear-tanh", "colloid",
                                                     "viscoplastic-rod"};

inline BenchmarkProblem make_problem(std::string_view name, const ProblemParams& pp) {
    if (std::abs(pp.eps) > 0.5) throw Error(ErrorKind::domain, "|eps| must not exceed 0.5", pp.eps);
    BenchmarkProblem b;
    b.name = std::string(name);
    b.epsilon = pp.eps;
    if (name == "linear") {
        b.problem_class = ProblemClass::translation;
        b.params = {{"P", pp.P}};
        b.formulation = linear_fbf_problem(pp.P, pp.eps);
        b.form = linear_form(pp.P);
        b.exact_fbf = [P = pp.P](double e) { return linear_fbf_solution(P, e); };
        b.exact_bvp = linear_bvp_solution(pp.P);
    } else if (name == "linear-nonautonomous") {
        b.problem_class = ProblemClass::direct;
        b.params = {{"P", pp.P}};
        b.formulation = nonautonomous_variant(pp.P);
        b.form = nonautonomous_form();
        b.exact_bvp = linear_bvp_solution(pp.P);
    } else if (name == "nonlinear-tanh") {
        b.problem_class = ProblemClass::scaling;
        b.params = {{"P", pp.P}};
        b.formulation = nonlinear_fbf_problem(pp.P);
        b.form = tanh_form(pp.P);
        b.exact_fbf = [P = pp.P](double e) { return nonlinear_fbf_solution(P, e); };
        b.exact_bvp = tanh_bvp_solution(pp.P);
    } else if (name == "colloid") {
        b.problem_class = ProblemClass::translation;
        b.params = {{"c", pp.c}};
        b.formulation = colloid_problem(pp.c, pp.eps);
        b.form = colloid_form(pp.c);
        b.first_integral = colloid_first_integral;
        b.monotone_sign = -1;
    } else if (name == "viscoplastic-rod") {
        b.problem_class = ProblemClass::scaling;
        b.params = {{"m", pp.m}, {"q", pp.q}};
        b.formulation = rod_problem(pp.m, pp.q);
        b.form = rod_form(pp.m, pp.q);
    } else {
        throw Error(ErrorKind::config, "unknown problem '" + std::string(name) + "'");
    }
    return b;
}

} // namespace fbvp
