#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "fluidq/traffic.hpp"

namespace oracle {

// Waiting times of a FIFO single server by the Lindley recursion.
inline std::vector<double> lindley_waits(const std::vector<fluidq::PacketEvent>& pk, double mu) {
    std::vector<double> w(pk.size(), 0.0);
    for (std::size_t j = 1; j < pk.size(); ++j)
        w[j] = std::max(0.0, w[j - 1] + pk[j - 1].size_bits / mu - (pk[j].t - pk[j - 1].t));
    return w;
}

// Backlog at time tau by replaying the packet list: arrived bits minus
// fully or partially served bits.
inline double replay_backlog(const std::vector<fluidq::PacketEvent>& pk, double mu, double tau) {
    const auto w = lindley_waits(pk, mu);
    double b = 0.0;
    for (std::size_t j = 0; j < pk.size(); ++j) {
        if (pk[j].t > tau) break;
        const double start = pk[j].t + w[j];
        const double end = start + pk[j].size_bits / mu;
        if (tau >= end) continue;
        b += tau <= start ? pk[j].size_bits : (end - tau) * mu;
    }
    return b;
}

// Closed form of the logistic queue for a constant inflow x < mu.
inline double logistic_constant_inflow(double t, double q0, double x, double mu, double alpha) {
    const double gamma = alpha * (x - mu);
    const double k = std::expm1(alpha * q0);
    return std::log1p(k * std::exp(gamma * t)) / alpha;
}

// Exact emptying time from q0 to eps of the same closed form.
inline double logistic_constant_emptying(double q0, double eps, double x, double mu,
                                         double alpha) {
    return std::log(std::expm1(alpha * q0) / std::expm1(alpha * eps)) / (alpha * (mu - x));
}

// Fixed-step explicit Euler for a scalar ODE, sampled every `out_dt`.
inline std::vector<double> euler(const std::function<double(double, double)>& f, double t0,
                                 double t1, double y0, double h, double out_dt) {
    std::vector<double> out{y0};
    double t = t0, y = y0, next = t0 + out_dt;
    const auto steps = static_cast<long>(std::llround((t1 - t0) / h));
    for (long s = 0; s < steps; ++s) {
        y += h * f(t, y);
        t = t0 + static_cast<double>(s + 1) * h;
        if (t >= next - 1e-9 * h) {
            out.push_back(y);
            next += out_dt;
        }
    }
    return out;
}

// Composite Simpson rule.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Two-sided one-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (static_cast<double>(i) + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

// Critical value of the KS statistic at significance 0.01 (asymptotic).
inline double ks_critical_01(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

// Random bounded inflow on a grid: smooth-ish positive noise with overload bursts.
inline fluidq::RateSeries random_inflow(std::mt19937_64& rng, std::size_t bins, double dt,
                                        double mu) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    fluidq::RateSeries x{0.0, dt, std::vector<double>(bins)};
    double level = u(rng) * mu;
    for (auto& v : x.values) {
        level = std::clamp(level + (u(rng) - 0.5) * 0.6 * mu, 0.0, 2.5 * mu);
        v = u(rng) < 0.1 ? 0.0 : level;
    }
    return x;
}

}  // namespace oracle
