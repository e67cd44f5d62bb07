#pragma once

// Non-iterative transformation methods for free boundary problems whose
// governing equation is invariant under a translation/spiral group or a
// scaling group. Each method solves one auxiliary initial value problem and
// maps its solution back with the recovered group parameter.

#include "fbvp/errors.hpp"
#include "fbvp/rk_integrators.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fbvp {

using Point2 = State<2>;

/// u'' = u * Omega(u e^{-wx}, u' e^{-wx}) on [0, s],
/// u(0) = alpha, u(s) = beta e^{ws}, u'(s) = gamma e^{ws}.
///
/// The right-hand side is held in the regular form
/// u'' = e^{wx} G(u e^{-wx}, u' e^{-wx}) with G(a, b) = a * Omega(a, b),
/// which stays finite where u vanishes.
struct TranslationFreeBvp {
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    std::function<double(double, double)> reduced_rhs;
    std::map<std::string, double> params;

    static TranslationFreeBvp from_omega(double omega, double alpha, double beta, double gamma,
                                         std::function<double(double, double)> omega_fn) {
        TranslationFreeBvp p{omega, alpha, beta, gamma, {}, {}};
        p.reduced_rhs = [fn = std::move(omega_fn)](double a, double b) { return a * fn(a, b); };
        return p;
    }

    double second_derivative(double x, double u, double du) const {
        const double damp = std::exp(-omega * x);
        return reduced_rhs(u * damp, du * damp) / damp;
    }

    FirstOrderSystem<2> system() const {
        return {[self = *this](double x, const Point2& y) -> Point2 {
                    return {y[1], self.second_derivative(x, y[0], y[1])};
                },
                params};
    }

    /// |F(x+mu, e^{w mu} u, e^{w mu} u') - e^{w mu} F(x, u, u')|: zero when the
    /// equation is invariant under the spiral group with parameter mu.
    double closure_residual(double x, double u, double du, double mu) const {
        const double g = std::exp(omega * mu);
        return std::abs(second_derivative(x + mu, g * u, g * du) - g * second_derivative(x, u, du));
    }
};

/// u'' = u^{1-2d} Phi(x u^{-d}, u' u^{d-1}) on [0, s], u(0) = 0, u(s) = beta.
///
/// Held as u'' = F(x, u, u') with the homogeneity
/// F(l^d x, l u, l^{1-d} u') = l^{1-2d} F(x, u, u').
struct ScalingFreeBvp {
    double delta = 0.0;
    double beta = 1.0;
    std::function<double(double, double, double)> accel;
    std::map<std::string, double> params;

    static ScalingFreeBvp from_phi(double delta, double beta, std::function<double(double, double)> phi) {
        ScalingFreeBvp p{delta, beta, {}, {}};
        p.accel = [delta, fn = std::move(phi)](double x, double u, double du) {
            return std::pow(u, 1.0 - 2.0 * delta) * fn(x * std::pow(u, -delta), du * std::pow(u, delta - 1.0));
        };
        return p;
    }

    FirstOrderSystem<2> system() const {
        return {[f = accel](double x, const Point2& y) -> Point2 { return {y[1], f(x, y[0], y[1])}; }, params};
    }

    double closure_residual(double x, double u, double du, double lambda) const {
        const double lhs = accel(std::pow(lambda, delta) * x, lambda * u, std::pow(lambda, 1.0 - delta) * du);
        return std::abs(lhs - std::pow(lambda, 1.0 - 2.0 * delta) * accel(x, u, du));
    }
};

enum class GroupMethod { translation, scaling };

struct FbfSolution {
    GroupMethod method = GroupMethod::translation;
    double free_boundary = 0.0;
    double missing_slope = 0.0;
    /// mu for the translation method, lambda for the scaling method.
    double group_parameter = 0.0;
    /// Solution in the original variables.
    Trajectory<2> trajectory;
    /// Solution of the auxiliary initial value problem (starred variables).
    Trajectory<2> auxiliary;
    /// |u(0) - alpha| for the translation method, du/dx(s) for the scaling method.
    double residual = 0.0;
    std::string solver_name;
    double step_size = 0.0;
    int escalations = 0;
    double v0 = 0.0;

    double residual_at_origin() const { return residual; }
    double terminal_slope() const { return residual; }
};

// ---------------------------------------------------------------------------
// Event location
// ---------------------------------------------------------------------------

enum class LocatorMode {
    /// Final step taken from the last point before the crossing.
    from_previous_point,
    /// Final step taken from the overshoot point back to the located abscissa.
    from_overshoot_point,
};

struct LocatorOptions {
    LocatorMode mode = LocatorMode::from_previous_point;
    /// Extension: repeat the linear correction inside the bracket until the
    /// event value is within `tolerance`. Off for table reproduction.
    bool refine = false;
    double tolerance = 1e-14;
    int max_refinements = 60;
};

struct EventLocation {
    double x = 0.0;
    Point2 state{};
    /// |g(x) - alpha| at the returned point.
    double residual = 0.0;
    int refinements = 0;
};

/// Linear crossing estimate x_cur + (alpha - g_cur) (x_cur - x_prev) / (g_cur - g_prev).
inline double interpolate_crossing(double x_prev, double g_prev, double x_cur, double g_cur, double alpha) {
    if (g_cur == g_prev) {
        throw Error(ErrorKind::degenerate_interpolation, "flat segment at the crossing", x_cur);
    }
    return x_cur + (alpha - g_cur) * (x_cur - x_prev) / (g_cur - g_prev);
}

/// Locates where `event(x, y)` reaches `alpha` between two consecutive
/// accepted grid points and advances the state there with one shortened step.
///
/// Requires event(prev) and event(cur) to bracket alpha with the previous
/// point on the near side: g_prev >= alpha > g_cur or g_prev <= alpha < g_cur.
template <typename Event>
EventLocation locate_event(const ButcherTableau& tab, const FirstOrderSystem<2>& f, double x_prev,
                           const Point2& y_prev, double x_cur, const Point2& y_cur, double alpha, Event&& event,
                           const LocatorOptions& opts = {}) {
    double g_prev = event(x_prev, y_prev);
    double g_cur = event(x_cur, y_cur);
    if (g_cur == g_prev) {
        throw Error(ErrorKind::degenerate_interpolation, "flat segment at the crossing", x_cur);
    }
    const bool downward = g_prev >= alpha && g_cur < alpha;
    const bool upward = g_prev <= alpha && g_cur > alpha;
    if (!downward && !upward) {
        throw Error(ErrorKind::domain, "grid points do not bracket the event value", x_cur);
    }

    auto advance = [&](double xa) -> Point2 {
        if (opts.mode == LocatorMode::from_overshoot_point) {
            return xa == x_cur ? y_cur : rk_step(tab, f, x_cur, y_cur, xa - x_cur);
        }
        return xa == x_prev ? y_prev : rk_step(tab, f, x_prev, y_prev, xa - x_prev);
    };

    EventLocation loc;
    loc.x = interpolate_crossing(x_prev, g_prev, x_cur, g_cur, alpha);
    loc.state = advance(loc.x);
    double g = event(loc.x, loc.state);
    loc.residual = std::abs(g - alpha);

    if (opts.refine) {
        // Regula falsi inside the original bracket.
        double xl = x_prev, gl = g_prev, xr = x_cur, gr = g_cur;
        while (loc.residual > opts.tolerance && loc.refinements < opts.max_refinements) {
            if ((g - alpha) * (gl - alpha) > 0.0) {
                xl = loc.x;
                gl = g;
            } else {
                xr = loc.x;
                gr = g;
            }
            if (gr == gl) break;
            loc.x = interpolate_crossing(xl, gl, xr, gr, alpha);
            loc.state = advance(loc.x);
            g = event(loc.x, loc.state);
            loc.residual = std::abs(g - alpha);
            ++loc.refinements;
        }
    }
    return loc;
}

// ---------------------------------------------------------------------------
// Translation / spiral group method
// ---------------------------------------------------------------------------

struct TranslationOptions {
    LocatorOptions locator{};
    long max_steps = 1'000'000;
};

/// Backward shooting from the free boundary guess `s_star` with step `h < 0`.
///
/// The event is tracked on the group invariant u* e^{-w x*}, which equals
/// u* itself for pure translation.
inline FbfSolution solve_translation(const TranslationFreeBvp& prob, double s_star, const ButcherTableau& tab,
                                     double h, const TranslationOptions& opts = {}) {
    if (!(h < 0.0)) throw Error(ErrorKind::domain, "translation method integrates backwards: step must be negative");
    if (prob.beta == prob.alpha) {
        throw Error(ErrorKind::domain, "boundary values coincide: the event fires at the starting point", s_star);
    }
    const auto sys = prob.system();
    const double w = prob.omega;
    auto event = [w](double x, const Point2& y) { return y[0] * std::exp(-w * x); };
    const bool downward = prob.alpha < prob.beta;
    auto crossed = [&](double g) { return downward ? g < prob.alpha : g > prob.alpha; };

    const double g0 = std::exp(w * s_star);
    std::vector<double> xs{s_star};
    std::vector<Point2> ys{{prob.beta * g0, prob.gamma * g0}};

    EventLocation loc;
    for (long k = 1;; ++k) {
        if (k > opts.max_steps) {
            throw Error(ErrorKind::no_crossing,
                        "no crossing of the boundary value within " + std::to_string(opts.max_steps) + " steps",
                        xs.back(), k);
        }
        const double xk = s_star + static_cast<double>(k) * h;
        Point2 yk;
        try {
            yk = rk_step(tab, sys, xs.back(), ys.back(), xk - xs.back());
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " (step " + std::to_string(k - 1) + ")", e.location(),
                        k - 1);
        }
        if (crossed(event(xk, yk))) {
            loc = locate_event(tab, sys, xs.back(), ys.back(), xk, yk, prob.alpha, event, opts.locator);
            break;
        }
        xs.push_back(xk);
        ys.push_back(yk);
    }
    if (loc.x != xs.back()) {
        xs.push_back(loc.x);
        ys.push_back(loc.state);
    }

    const double mu = loc.x;
    const double back = std::exp(-w * mu);
    Trajectory<2> aux(xs, ys);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] -= mu;
        ys[i] = {back * ys[i][0], back * ys[i][1]};
    }
    // The located node maps to the origin exactly.
    xs.back() = 0.0;

    const double s = s_star - mu;
    if (!(s > 0.0)) {
        throw Error(ErrorKind::domain, "computed free boundary is not positive; choose a larger s*", s);
    }
    FbfSolution sol{GroupMethod::translation,
                    s,
                    back * loc.state[1],
                    mu,
                    Trajectory<2>(std::move(xs), std::move(ys)),
                    std::move(aux),
                    0.0,
                    tab.name,
                    h,
                    0,
                    0.0};
    sol.residual = std::abs(sol.trajectory.back()[0] - prob.alpha);
    return sol;
}

// ---------------------------------------------------------------------------
// Scaling group method
// ---------------------------------------------------------------------------

struct ScalingOptions {
    int max_escalations = 12;
    double escalation_factor = 10.0;
};

/// Raised when the terminal slope stays above tau after the escalation
/// budget; carries the last computed solution.
class ToleranceNotMet : public Error {
public:
    ToleranceNotMet(FbfSolution last, double tau)
        : Error(ErrorKind::tolerance_not_met,
                "terminal slope " + std::to_string(last.terminal_slope()) + " above tolerance " +
                    std::to_string(tau) + " after " + std::to_string(last.escalations) + " escalations",
                last.free_boundary),
          last_(std::move(last)) {}

    const FbfSolution& last_solution() const noexcept { return last_; }
    double terminal_slope() const noexcept { return last_.terminal_slope(); }

private:
    FbfSolution last_;
};

/// One pass of the scaling method for a fixed initial slope `v0`, no tolerance check.
inline FbfSolution solve_scaling_once(const ScalingFreeBvp& prob, double s_star, double v0,
                                      const ButcherTableau& tab, double h) {
    if (!(s_star > 0.0)) throw Error(ErrorKind::domain, "s* must be positive");
    if (!(v0 > 0.0)) throw Error(ErrorKind::domain, "v0 must be positive");
    if (!(h > 0.0)) throw Error(ErrorKind::domain, "scaling method integrates forwards: step must be positive");
    if (prob.beta == 0.0 || prob.delta == 0.0) throw Error(ErrorKind::domain, "beta and delta must be nonzero");

    Trajectory<2> aux = integrate_to(tab, prob.system(), 0.0, Point2{0.0, v0}, s_star, h);
    const Point2& end = aux.back();
    const double lambda = end[0] / prob.beta;
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw Error(ErrorKind::invalid_lambda,
                    "u*(s*) = " + std::to_string(end[0]) + " gives a non-positive group parameter", s_star);
    }
    const double d = prob.delta;
    const double x_scale = std::pow(lambda, -d);
    const double slope_scale = std::pow(lambda, d - 1.0);
    auto traj = aux.transformed([&](double x, const Point2& y) {
        return std::pair{x_scale * x, Point2{y[0] / lambda, slope_scale * y[1]}};
    });
    const double s = x_scale * s_star;
    return FbfSolution{GroupMethod::scaling,
                       s,
                       slope_scale * v0,
                       lambda,
                       std::move(traj),
                       std::move(aux),
                       slope_scale * end[1],
                       tab.name,
                       h,
                       0,
                       v0};
}

/// Forward shooting with rescaling. While the terminal slope exceeds `tau`
/// the initial slope is multiplied by the escalation factor and the
/// auxiliary problem is solved again.
inline FbfSolution solve_scaling(const ScalingFreeBvp& prob, double s_star, double v0, double tau,
                                 const ButcherTableau& tab, double h, const ScalingOptions& opts = {}) {
    if (!(tau > 0.0)) throw Error(ErrorKind::domain, "tau must be positive");
    for (int esc = 0;; ++esc) {
        FbfSolution sol = solve_scaling_once(prob, s_star, v0, tab, h);
        sol.escalations = esc;
        if (!(sol.terminal_slope() > tau)) return sol;
        if (esc >= opts.max_escalations) throw ToleranceNotMet(std::move(sol), tau);
        v0 *= opts.escalation_factor;
    }
}

// ---------------------------------------------------------------------------
// Class membership by exponent balance
// ---------------------------------------------------------------------------

/// coefficient * x^x_exp * u^u_exp * (u')^du_exp
struct MonomialTerm {
    double coefficient = 1.0;
    double x_exp = 0.0;
    double u_exp = 0.0;
    double du_exp = 0.0;
};

/// u'' + sum(terms) + (non-monomial parts) = 0 together with the value imposed at x = 0.
struct EquationForm {
    std::vector<MonomialTerm> terms;
    /// Some term depends on x through a non-power function (e.g. e^{-Px}).
    bool nonmonomial_x = false;
    /// Some term depends on u or u' through a non-power function (e.g. sinh u).
    bool nonmonomial_u = false;
    double origin_value = 0.0;
};

/// Solves the scaling balance and returns delta.
///
/// Each term must scale like u'', i.e. delta*a + b + (1-delta)*d = 1 - 2*delta,
/// and u(0) = 0 must hold. Throws `Error{not_in_class}` otherwise.
inline double check_class_membership(const EquationForm& eq) {
    if (eq.nonmonomial_x || eq.nonmonomial_u) {
        throw Error(ErrorKind::not_in_class, "equation has non-power dependence; no scaling balance");
    }
    if (eq.origin_value != 0.0) {
        throw Error(ErrorKind::not_in_class, "u(0) must vanish for the scaling class");
    }
    constexpr double tol = 1e-12;
    std::optional<double> delta;
    for (const auto& t : eq.terms) {
        // delta * (a - d + 2) = 1 - b - d
        const double lhs = t.x_exp - t.du_exp + 2.0;
        const double rhs = 1.0 - t.u_exp - t.du_exp;
        if (std::abs(lhs) < tol) {
            if (std::abs(rhs) > tol) throw Error(ErrorKind::not_in_class, "term cannot balance for any delta");
            continue;
        }
        const double d = rhs / lhs;
        if (delta && std::abs(*delta - d) > tol * std::max(1.0, std::abs(d))) {
            throw Error(ErrorKind::not_in_class, "terms require different scaling exponents");
        }
        delta = d;
    }
    if (!delta) throw Error(ErrorKind::not_in_class, "balance does not determine delta");
    if (std::abs(*delta) < tol) throw Error(ErrorKind::not_in_class, "balance gives delta = 0; scaling degenerates");
    return *delta;
}

/// True when the equation has no explicit x dependence (translation group, w = 0).
inline bool check_translation_membership(const EquationForm& eq) {
    if (eq.nonmonomial_x) return false;
    for (const auto& t : eq.terms) {
        if (t.x_exp != 0.0) return false;
    }
    return true;
}

} // namespace fbvp
