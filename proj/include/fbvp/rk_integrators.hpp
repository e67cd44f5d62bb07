#pragma once

// Fixed-step explicit Runge-Kutta integration of first-order systems.

#include "fbvp/errors.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fbvp {

template <std::size_t N>
using State = std::array<double, N>;

/// Coefficients of an explicit Runge-Kutta scheme. `a` is stored row-major,
/// stages x stages, and must be strictly lower triangular.
struct ButcherTableau {
    std::string name;
    std::size_t stages = 0;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> c;
    int nominal_order = 0;

    double coupling(std::size_t i, std::size_t j) const { return a[i * stages + j]; }

    /// Throws `Error{domain}` if any structural or consistency condition fails.
    void validate() const {
        constexpr double tol = 1e-14;
        if (stages == 0 || a.size() != stages * stages || b.size() != stages || c.size() != stages) {
            throw Error(ErrorKind::domain, "tableau " + name + ": inconsistent dimensions");
        }
        if (nominal_order <= 0) {
            throw Error(ErrorKind::domain, "tableau " + name + ": nominal order must be positive");
        }
        for (std::size_t i = 0; i < stages; ++i) {
            for (std::size_t j = i; j < stages; ++j) {
                if (coupling(i, j) != 0.0) {
                    throw Error(ErrorKind::domain, "tableau " + name + ": not strictly lower triangular");
                }
            }
        }
        double b_sum = 0.0;
        for (double w : b) b_sum += w;
        if (std::abs(b_sum - 1.0) > tol) {
            throw Error(ErrorKind::domain, "tableau " + name + ": weights do not sum to one");
        }
        for (std::size_t i = 0; i < stages; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < i; ++j) row += coupling(i, j);
            if (std::abs(row - c[i]) > tol) {
                throw Error(ErrorKind::domain,
                            "tableau " + name + ": row-sum condition fails at stage " + std::to_string(i));
            }
        }
    }
};

namespace tableaux {

namespace detail {
inline ButcherTableau make(std::string name, int order, std::vector<std::vector<double>> rows,
                           std::vector<double> b) {
    ButcherTableau t;
    t.name = std::move(name);
    t.stages = b.size();
    t.nominal_order = order;
    t.a.assign(t.stages * t.stages, 0.0);
    t.c.assign(t.stages, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            t.a[i * t.stages + j] = rows[i][j];
            t.c[i] += rows[i][j];
        }
    }
    t.b = std::move(b);
    return t;
}
} // namespace detail

/// Classical fourth-order method.
inline const ButcherTableau& rk4() {
    static const ButcherTableau t = detail::make(
        "rk4", 4, {{}, {0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0}},
        {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0});
    return t;
}

/// Butcher's seven-stage sixth-order method.
inline const ButcherTableau& rk6() {
    static const ButcherTableau t = detail::make(
        "rk6", 6,
        {{},
         {1.0 / 3.0},
         {0.0, 2.0 / 3.0},
         {1.0 / 12.0, 1.0 / 3.0, -1.0 / 12.0},
         {-1.0 / 16.0, 9.0 / 8.0, -3.0 / 16.0, -3.0 / 8.0},
         {0.0, 9.0 / 8.0, -3.0 / 8.0, -3.0 / 4.0, 1.0 / 2.0},
         {9.0 / 44.0, -9.0 / 11.0, 63.0 / 44.0, 18.0 / 11.0, 0.0, -16.0 / 11.0}},
        {11.0 / 120.0, 0.0, 27.0 / 40.0, 27.0 / 40.0, -4.0 / 15.0, -4.0 / 15.0, 11.0 / 120.0});
    return t;
}

/// Cooper-Verner eleven-stage eighth-order method.
inline const ButcherTableau& rk8() {
    static const ButcherTableau t = [] {
        const double r = std::sqrt(21.0);
        return detail::make(
            "rk8", 8,
            {{},
             {1.0 / 2.0},
             {1.0 / 4.0, 1.0 / 4.0},
             {1.0 / 7.0, (-7.0 - 3.0 * r) / 98.0, (21.0 + 5.0 * r) / 49.0},
             {(11.0 + r) / 84.0, 0.0, (18.0 + 4.0 * r) / 63.0, (21.0 - r) / 252.0},
             {(5.0 + r) / 48.0, 0.0, (9.0 + r) / 36.0, (-231.0 + 14.0 * r) / 360.0, (63.0 - 7.0 * r) / 80.0},
             {(10.0 - r) / 42.0, 0.0, (-432.0 + 92.0 * r) / 315.0, (633.0 - 145.0 * r) / 90.0,
              (-504.0 + 115.0 * r) / 70.0, (63.0 - 13.0 * r) / 35.0},
             {1.0 / 14.0, 0.0, 0.0, 0.0, (14.0 - 3.0 * r) / 126.0, (13.0 - 3.0 * r) / 63.0, 1.0 / 9.0},
             {1.0 / 32.0, 0.0, 0.0, 0.0, (91.0 - 21.0 * r) / 576.0, 11.0 / 72.0,
              (-385.0 - 75.0 * r) / 1152.0, (63.0 + 13.0 * r) / 128.0},
             {1.0 / 14.0, 0.0, 0.0, 0.0, 1.0 / 9.0, (-733.0 - 147.0 * r) / 2205.0,
              (515.0 + 111.0 * r) / 504.0, (-51.0 - 11.0 * r) / 56.0, (132.0 + 28.0 * r) / 245.0},
             {0.0, 0.0, 0.0, 0.0, (-42.0 + 7.0 * r) / 18.0, (-18.0 + 28.0 * r) / 45.0,
              (-273.0 - 53.0 * r) / 72.0, (301.0 + 53.0 * r) / 72.0, (28.0 - 28.0 * r) / 45.0,
              (49.0 - 7.0 * r) / 18.0}},
            {1.0 / 20.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 49.0 / 180.0, 16.0 / 45.0, 49.0 / 180.0, 1.0 / 20.0});
    }();
    return t;
}

/// Looks up a shipped tableau by its tag ("rk4", "rk6", "rk8").
inline const ButcherTableau& by_name(std::string_view name) {
    if (name == "rk4") return rk4();
    if (name == "rk6") return rk6();
    if (name == "rk8") return rk8();
    throw Error(ErrorKind::config, "unknown solver '" + std::string(name) + "'");
}

} // namespace tableaux

/// Right-hand side of y' = f(x, y) in R^N plus the named scalars it closes over.
template <std::size_t N>
struct FirstOrderSystem {
    static_assert(N > 0);
    static constexpr std::size_t dimension = N;

    std::function<State<N>(double, const State<N>&)> rhs;
    std::map<std::string, double> params;

    State<N> operator()(double x, const State<N>& y) const { return rhs(x, y); }
};

/// Grid points and states of an integration run; abscissae strictly monotone.
template <std::size_t N>
class Trajectory {
public:
    Trajectory(std::vector<double> xs, std::vector<State<N>> states)
        : xs_(std::move(xs)), states_(std::move(states)) {
        if (xs_.size() != states_.size() || xs_.size() < 2) {
            throw Error(ErrorKind::domain, "trajectory needs at least two points and matching lengths");
        }
        const bool increasing = xs_[1] > xs_[0];
        for (std::size_t k = 1; k < xs_.size(); ++k) {
            if (increasing ? !(xs_[k] > xs_[k - 1]) : !(xs_[k] < xs_[k - 1])) {
                throw Error(ErrorKind::domain, "trajectory abscissae not strictly monotone", xs_[k]);
            }
        }
    }

    std::span<const double> xs() const { return xs_; }
    std::span<const State<N>> states() const { return states_; }
    std::size_t size() const { return xs_.size(); }
    /// +1 for increasing abscissae, -1 for decreasing.
    int direction() const { return xs_[1] > xs_[0] ? 1 : -1; }

    double x(std::size_t k) const { return xs_[k]; }
    const State<N>& state(std::size_t k) const { return states_[k]; }
    const State<N>& front() const { return states_.front(); }
    const State<N>& back() const { return states_.back(); }

    /// Applies a point map to every node, producing a new trajectory.
    template <typename Map>
    Trajectory transformed(Map&& map) const {
        std::vector<double> xs(xs_.size());
        std::vector<State<N>> ys(xs_.size());
        for (std::size_t k = 0; k < xs_.size(); ++k) {
            auto [xt, yt] = map(xs_[k], states_[k]);
            xs[k] = xt;
            ys[k] = yt;
        }
        return Trajectory(std::move(xs), std::move(ys));
    }

private:
    std::vector<double> xs_;
    std::vector<State<N>> states_;
};

namespace detail {
template <std::size_t N>
bool all_finite(const State<N>& y) {
    for (double v : y) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}
} // namespace detail

/// One explicit Runge-Kutta step of signed size `h` from (x, y).
///
/// Every stage derivative is checked; a non-finite value raises
/// `Error{integration_failure}` located at the stage abscissa.
template <std::size_t N>
State<N> rk_step(const ButcherTableau& tab, const FirstOrderSystem<N>& f, double x, const State<N>& y,
                 double h) {
    if (h == 0.0 || !std::isfinite(h)) {
        throw Error(ErrorKind::domain, "step size must be finite and nonzero", x);
    }
    std::vector<State<N>> k(tab.stages);
    for (std::size_t i = 0; i < tab.stages; ++i) {
        State<N> yi = y;
        for (std::size_t j = 0; j < i; ++j) {
            const double aij = tab.coupling(i, j);
            if (aij == 0.0) continue;
            for (std::size_t d = 0; d < N; ++d) yi[d] += h * aij * k[j][d];
        }
        const double xi = x + tab.c[i] * h;
        k[i] = f(xi, yi);
        if (!detail::all_finite(k[i])) {
            throw Error(ErrorKind::integration_failure,
                        "non-finite right-hand side at x = " + std::to_string(xi), xi);
        }
    }
    State<N> out = y;
    for (std::size_t i = 0; i < tab.stages; ++i) {
        if (tab.b[i] == 0.0) continue;
        for (std::size_t d = 0; d < N; ++d) out[d] += h * tab.b[i] * k[i][d];
    }
    if (!detail::all_finite(out)) {
        throw Error(ErrorKind::integration_failure, "non-finite state at x = " + std::to_string(x + h), x + h);
    }
    return out;
}

/// Integrates `n_steps` uniform steps of size `h` from (x0, y0).
/// Node k sits at x0 + k*h computed directly, never by repeated addition.
template <std::size_t N>
Trajectory<N> integrate_fixed(const ButcherTableau& tab, const FirstOrderSystem<N>& f, double x0,
                              const State<N>& y0, double h, long n_steps) {
    if (n_steps <= 0) throw Error(ErrorKind::domain, "n_steps must be positive");
    std::vector<double> xs(static_cast<std::size_t>(n_steps) + 1);
    std::vector<State<N>> ys(xs.size());
    xs[0] = x0;
    ys[0] = y0;
    for (long k = 0; k < n_steps; ++k) {
        const auto i = static_cast<std::size_t>(k);
        xs[i + 1] = x0 + static_cast<double>(k + 1) * h;
        try {
            ys[i + 1] = rk_step(tab, f, xs[i], ys[i], xs[i + 1] - xs[i]);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " (step " + std::to_string(k) + ")", e.location(), k);
        }
    }
    return Trajectory<N>(std::move(xs), std::move(ys));
}

/// Integrates from x0 to x_end on the uniform grid x0 + k*h, shortening the
/// final step so the last node is exactly x_end. `h` must point toward x_end.
template <std::size_t N>
Trajectory<N> integrate_to(const ButcherTableau& tab, const FirstOrderSystem<N>& f, double x0,
                           const State<N>& y0, double x_end, double h) {
    const double span = x_end - x0;
    if (h == 0.0 || span == 0.0 || (span > 0.0) != (h > 0.0)) {
        throw Error(ErrorKind::domain, "step does not point toward the end of the interval", x0);
    }
    const double ratio = span / h;
    auto n_full = static_cast<long>(std::floor(ratio));
    // A last node within round-off of x_end is snapped onto it.
    if (ratio - static_cast<double>(n_full) < 1e-9) {
        --n_full;
    }
    std::vector<double> xs{x0};
    std::vector<State<N>> ys{y0};
    xs.reserve(static_cast<std::size_t>(n_full) + 2);
    ys.reserve(xs.capacity());
    for (long k = 1; k <= n_full + 1; ++k) {
        const double xk = k <= n_full ? x0 + static_cast<double>(k) * h : x_end;
        try {
            ys.push_back(rk_step(tab, f, xs.back(), ys.back(), xk - xs.back()));
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " (step " + std::to_string(k - 1) + ")", e.location(),
                        k - 1);
        }
        xs.push_back(xk);
    }
    return Trajectory<N>(std::move(xs), std::move(ys));
}

struct OrderEstimate {
    double order = 0.0;
    std::vector<double> steps;
    std::vector<double> errors;
    std::vector<double> rung_orders;
};

/// Empirical convergence order from endpoint errors over the ladder
/// h0, h0/2, ..., h0/2^(rungs-1) on [x0, x_end].
///
/// Throws `Error{order_saturation}` when any rung's error drops below
/// 100 machine epsilons; the ladder then needs coarser steps.
template <std::size_t N>
OrderEstimate estimate_order(const ButcherTableau& tab, const FirstOrderSystem<N>& f, double x0,
                             const State<N>& y0, double x_end, const State<N>& exact_end, double h0,
                             int rungs = 3) {
    if (rungs < 2) throw Error(ErrorKind::domain, "order estimation needs at least two rungs");
    constexpr double floor = 100.0 * std::numeric_limits<double>::epsilon();
    OrderEstimate est;
    for (int r = 0; r < rungs; ++r) {
        const double h = h0 / std::pow(2.0, r);
        const long n = std::lround((x_end - x0) / h);
        if (n <= 0 || std::abs(static_cast<double>(n) * h - (x_end - x0)) > 1e-12 * std::abs(x_end - x0)) {
            throw Error(ErrorKind::domain, "step ladder does not divide the interval", h);
        }
        const auto traj = integrate_fixed(tab, f, x0, y0, h, n);
        double err = 0.0;
        for (std::size_t d = 0; d < N; ++d) err = std::max(err, std::abs(traj.back()[d] - exact_end[d]));
        if (err < floor) {
            throw Error(ErrorKind::order_saturation,
                        "endpoint error " + std::to_string(err) + " at the round-off floor", h);
        }
        est.steps.push_back(h);
        est.errors.push_back(err);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < est.errors.size(); ++i) {
        est.rung_orders.push_back(std::log2(est.errors[i] / est.errors[i + 1]));
        sum += est.rung_orders.back();
    }
    est.order = sum / static_cast<double>(est.rung_orders.size());
    return est;
}

} // namespace fbvp
