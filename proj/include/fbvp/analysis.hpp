#pragma once

// Error norms, epsilon sweeps, grid refinement and convergence-rate fits.

#include "fbvp/errors.hpp"
#include "fbvp/group_methods.hpp"
#include "fbvp/problem_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace fbvp {

/// Largest |u_computed - u_exact| over the trajectory nodes.
inline double sup_norm_error(const Trajectory<2>& traj, const ExactSolution& exact) {
    double err = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        err = std::max(err, std::abs(traj.state(k)[0] - exact.u(traj.x(k))));
    }
    return err;
}

inline double sup_norm_error(const FbfSolution& sol, const ExactSolution& exact) {
    return sup_norm_error(sol.trajectory, exact);
}

/// max |u_fbf - u_bvp| on [0, x_eps] of the FBF solution, sampled on a
/// uniform grid that includes both endpoints.
inline double closed_form_sup_error(const ExactSolution& fbf, const ExactSolution& bvp, int samples = 4001) {
    if (!std::isfinite(fbf.x_eps)) throw Error(ErrorKind::domain, "free boundary is infinite");
    double err = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double x = fbf.x_eps * static_cast<double>(i) / static_cast<double>(samples - 1);
        err = std::max(err, std::abs(fbf.u(x) - bvp.u(x)));
    }
    return err;
}

/// Strictly increasing (sign = +1) or decreasing (sign = -1) u, and du/dx of
/// the same strict sign, along the trajectory read in order of increasing x.
inline bool is_strictly_monotone(const Trajectory<2>& traj, int sign) {
    const int dir = traj.direction();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (!(sign * traj.state(k)[1] > 0.0)) return false;
        if (k > 0) {
            const double du = (traj.state(k)[0] - traj.state(k - 1)[0]) * dir;
            if (!(sign * du > 0.0)) return false;
        }
    }
    return true;
}

enum class SweepVariable { epsilon, step };

inline std::string_view to_string(SweepVariable v) { return v == SweepVariable::epsilon ? "epsilon" : "step"; }

struct ConvergencePoint {
    double parameter = 0.0;
    double free_boundary = 0.0;
    double missing_slope = 0.0;
    double residual = 0.0;
    std::optional<double> sup_error;
};

struct ConvergenceReport {
    SweepVariable sweep_variable = SweepVariable::epsilon;
    std::vector<ConvergencePoint> points;
    std::optional<double> estimated_rate;
    /// max(sup_error / |eps|) over the sweep.
    std::optional<double> estimated_K;
};

/// Least-squares slope of log(error) against log(|parameter|). Rungs whose
/// error sits at the round-off floor are dropped; fewer than two usable
/// rungs yields no rate.
inline std::optional<double> fit_rate(std::span<const double> params, std::span<const double> errors) {
    constexpr double floor = 1e2 * std::numeric_limits<double>::epsilon();
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < params.size() && i < errors.size(); ++i) {
        if (!(errors[i] >= floor) || params[i] == 0.0) continue;
        lx.push_back(std::log(std::abs(params[i])));
        ly.push_back(std::log(errors[i]));
    }
    if (lx.size() < 2) return std::nullopt;
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) return std::nullopt;
    return sxy / sxx;
}

/// Worker count for sweeps: FBVP_THREADS if set (0 = serial), else the hardware concurrency.
inline unsigned sweep_threads() {
    if (const char* env = std::getenv("FBVP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 0) return static_cast<unsigned>(std::max(1L, v));
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
/// Runs fn(i) for i in [0, n) over at most `threads` workers. The first
/// failure (by index) is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    std::vector<std::exception_ptr> failures(n);
    auto run = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            failures[i] = std::current_exception();
        }
    };
    const auto workers = std::min<std::size_t>(threads, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) run(i);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < n; i += workers) run(i);
            });
        }
    }
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

inline void require_strictly_monotone(std::span<const double> ladder) {
    if (ladder.empty()) throw Error(ErrorKind::domain, "empty ladder");
    if (ladder.size() < 2) return;
    const bool dec = ladder[1] < ladder[0];
    for (std::size_t i = 1; i < ladder.size(); ++i) {
        if (dec ? !(ladder[i] < ladder[i - 1]) : !(ladder[i] > ladder[i - 1])) {
            throw Error(ErrorKind::domain, "ladder is not strictly monotone", ladder[i]);
        }
    }
}

inline void finish_epsilon_report(ConvergenceReport& rep) {
    std::vector<double> ps, es;
    for (const auto& p : rep.points) {
        if (!p.sup_error) return;
        ps.push_back(p.parameter);
        es.push_back(*p.sup_error);
    }
    rep.estimated_rate = fit_rate(ps, es);
    double k = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) k = std::max(k, es[i] / std::abs(ps[i]));
    rep.estimated_K = k;
}
} // namespace detail

/// Solver signature used by sweeps: one free boundary solve per parameter value.
using SolveFn = std::function<FbfSolution(double)>;
/// Comparison target for a computed solution, or nullopt when none exists.
using ExactFn = std::function<std::optional<ExactSolution>(double eps, const FbfSolution&)>;

/// One solve per eps; sup errors against `exact` (if given), rate fitted on
/// sup_error versus eps and K = max(sup_error/eps).
inline ConvergenceReport epsilon_sweep(const SolveFn& solve, const ExactFn& exact, std::span<const double> ladder,
                                       unsigned threads = sweep_threads()) {
    if (ladder.empty()) throw Error(ErrorKind::domain, "empty ladder");
    for (std::size_t i = 1; i < ladder.size(); ++i) {
        if (!(std::abs(ladder[i]) < std::abs(ladder[i - 1]))) {
            throw Error(ErrorKind::domain, "epsilon ladder must be strictly decreasing", ladder[i]);
        }
    }
    for (double e : ladder) {
        if (std::abs(e) > 0.5) throw Error(ErrorKind::domain, "|eps| must not exceed 0.5", e);
    }
    ConvergenceReport rep;
    rep.sweep_variable = SweepVariable::epsilon;
    rep.points.resize(ladder.size());
    detail::parallel_for(ladder.size(), threads, [&](std::size_t i) {
        const double eps = ladder[i];
        try {
            const FbfSolution sol = solve(eps);
            ConvergencePoint& pt = rep.points[i];
            pt = {eps, sol.free_boundary, sol.missing_slope, sol.residual, std::nullopt};
            if (exact) {
                if (auto ex = exact(eps, sol)) pt.sup_error = sup_norm_error(sol, *ex);
            }
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " [eps = " + std::to_string(eps) + "]", eps);
        }
    });
    detail::finish_epsilon_report(rep);
    return rep;
}

/// Epsilon sweep on closed forms only: free boundary and missing slope of the
/// FBF solution, sup error against the BVP solution on [0, x_eps].
inline ConvergenceReport closed_form_epsilon_sweep(const std::function<ExactSolution(double)>& fbf_family,
                                                   const ExactSolution& bvp, std::span<const double> ladder) {
    detail::require_strictly_monotone(ladder);
    ConvergenceReport rep;
    rep.sweep_variable = SweepVariable::epsilon;
    for (double eps : ladder) {
        const ExactSolution fbf = fbf_family(eps);
        rep.points.push_back({eps, fbf.x_eps, fbf.missing_slope, 0.0, closed_form_sup_error(fbf, bvp)});
    }
    detail::finish_epsilon_report(rep);
    return rep;
}

/// One solve per step size; rate fitted on the residual versus |h|.
inline ConvergenceReport step_refinement(const SolveFn& solve, std::span<const double> ladder,
                                         unsigned threads = sweep_threads()) {
    detail::require_strictly_monotone(ladder);
    ConvergenceReport rep;
    rep.sweep_variable = SweepVariable::step;
    rep.points.resize(ladder.size());
    detail::parallel_for(ladder.size(), threads, [&](std::size_t i) {
        const double h = ladder[i];
        try {
            const FbfSolution sol = solve(h);
            rep.points[i] = {h, sol.free_boundary, sol.missing_slope, sol.residual, std::nullopt};
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " [step = " + std::to_string(h) + "]", h);
        }
    });
    std::vector<double> hs, rs;
    for (const auto& p : rep.points) {
        hs.push_back(p.parameter);
        rs.push_back(std::abs(p.residual));
    }
    rep.estimated_rate = fit_rate(hs, rs);
    return rep;
}

} // namespace fbvp
