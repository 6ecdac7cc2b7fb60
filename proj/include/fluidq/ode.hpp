#pragma once

// Adaptive Dormand-Prince 5(4) integrator with the standard 4th order dense
// output, for small fixed-size systems. Steps never cross a breakpoint, so
// right-hand sides that are only piecewise smooth in t (linear interpolation
// of sampled inflows) keep full order inside every step.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>

#include "fluidq/error.hpp"

namespace fluidq::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0: automatic
    std::size_t max_steps = 50'000'000;
};

struct Stats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

namespace detail {

// Butcher tableau (Hairer, Norsett & Wanner, DOPRI5).
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace detail

// Integrates y' = f(t, y) from t0 to t1.
//
// breakpoints: sorted times the solver must land on exactly.
// outputs: sorted times in [t0, t1]; `on_output(t, y)` is called for each,
// in order, with the dense-output interpolant.
// `on_step(t, y)` is called after every accepted step.
// `admissible(y)` may veto a step whose end point or midpoint leaves a region
// the exact solution is known to stay in; the step is then retried at half
// the size.
template <std::size_t N, class Rhs, class OnOutput, class OnStep, class Admissible>
Stats integrate(Rhs&& f, double t0, double t1, State<N> y, std::span<const double> breakpoints,
                std::span<const double> outputs, OnOutput&& on_output, OnStep&& on_step,
                const Options& opt, Admissible&& admissible) {
    using namespace detail;
    Stats stats;
    std::size_t next_out = 0;
    while (next_out < outputs.size() && outputs[next_out] <= t0) on_output(outputs[next_out++], y);
    if (!(t1 > t0)) return stats;

    auto scale = [&](double a, double b) {
        return opt.abs_tol + opt.rel_tol * std::max(std::abs(a), std::abs(b));
    };

    State<N> k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
    double t = t0;
    f(t, y, k1);
    ++stats.rhs_evals;

    double h = opt.initial_step;
    if (!(h > 0.0)) {
        // Estimate from |y| / |y'| (Hairer's hinit, first stage only).
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sk = opt.abs_tol + opt.rel_tol * std::abs(y[i]);
            dnf += (k1[i] / sk) * (k1[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 * (t1 - t0) : 0.01 * std::sqrt(dny / dnf);
    }
    h = std::min({h, opt.max_step, t1 - t0});

    std::size_t next_bp = 0;
    while (next_bp < breakpoints.size() && breakpoints[next_bp] <= t) ++next_bp;

    constexpr double safety = 0.9, fac_min = 0.2, fac_max = 10.0;
    bool last_rejected = false;

    while (t < t1) {
        if (stats.steps + stats.rejected >= opt.max_steps)
            throw IntegrationError("step budget exhausted", t);

        double limit = t1;
        if (next_bp < breakpoints.size()) limit = std::min(limit, breakpoints[next_bp]);
        const double h_proposed = h;
        bool hits_limit = false;
        if (t + 1.0000001 * h >= limit) {
            h = limit - t;
            hits_limit = true;
        }
        const double min_step = 1e-13 * std::max(1.0, std::abs(t));
        if (h < min_step && !hits_limit) throw IntegrationError("step size underflow", t);

        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        f(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] =
                y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const double t_new = hits_limit ? limit : t + h;
        f(t_new, ytmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] =
                y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f(t_new, ynew, k7);
        stats.rhs_evals += 6;

        // Max norm: every component meets its own tolerance.
        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
            err = std::max(err, std::abs(e) / scale(y[i], ynew[i]));
        }

        if (!std::isfinite(err)) {
            ++stats.rejected;
            h *= fac_min;
            last_rejected = true;
            continue;
        }

        // Dense output on (t, t_new].
        auto dense = [&](double theta) {
            const double theta1 = 1.0 - theta;
            State<N> yo;
            for (std::size_t i = 0; i < N; ++i) {
                const double ydiff = ynew[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                const double r4 = ydiff - h * k7[i] - bspl;
                const double r5 = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                       d6 * k6[i] + d7 * k7[i]);
                yo[i] = y[i] + theta * (ydiff + theta1 * (bspl + theta * (r4 + theta1 * r5)));
            }
            return yo;
        };

        if (err <= 1.0 && !(admissible(ynew) && admissible(dense(0.5)))) {
            ++stats.rejected;
            h *= 0.5;
            last_rejected = true;
            continue;
        }

        if (err <= 1.0) {
            while (next_out < outputs.size() && outputs[next_out] <= t_new) {
                const double theta = (outputs[next_out] - t) / h;
                on_output(outputs[next_out++], dense(theta));
            }
            t = t_new;
            y = ynew;
            k1 = k7;
            ++stats.steps;
            on_step(t, y);
            while (next_bp < breakpoints.size() && breakpoints[next_bp] <= t) ++next_bp;
            double fac = err == 0.0 ? fac_max : safety * std::pow(err, -0.2);
            fac = std::clamp(fac, fac_min, last_rejected ? 1.0 : fac_max);
            const double h_next = hits_limit ? std::max(h_proposed, h * fac) : h * fac;
            h = std::min(h_next, opt.max_step);
            last_rejected = false;
        } else {
            ++stats.rejected;
            h *= std::max(fac_min, safety * std::pow(err, -0.2));
            last_rejected = true;
        }
    }
    // Outputs that round just past t1.
    while (next_out < outputs.size()) on_output(outputs[next_out++], y);
    return stats;
}

template <std::size_t N, class Rhs, class OnOutput, class OnStep>
Stats integrate(Rhs&& f, double t0, double t1, State<N> y, std::span<const double> breakpoints,
                std::span<const double> outputs, OnOutput&& on_output, OnStep&& on_step,
                const Options& opt) {
    return integrate<N>(std::forward<Rhs>(f), t0, t1, y, breakpoints, outputs,
                        std::forward<OnOutput>(on_output), std::forward<OnStep>(on_step), opt,
                        [](const State<N>&) { return true; });
}

}  // namespace fluidq::ode
