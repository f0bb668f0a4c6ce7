// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only reference computations, independent of the library code paths.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace sapaug::oracle {

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int max_depth = 50)
{
    struct Rec {
        static double run(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                          double fb, double whole, double tol, int depth)
        {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m);
            const double rm = 0.5 * (m + b);
            const double flm = f(lm);
            const double frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
                return left + right + delta / 15.0;
            }
            return run(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   run(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    };
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Rec::run(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Integral of the Beta(p, q) density over [0, x], x <= 1. An integrable
/// singularity at 0 (p < 1) is removed by substituting u = t^p. The
/// interval is pre-split at the density mode and into `pieces` panels so
/// that narrow peaks are not missed by the first Simpson sample.
inline double beta_density_integral_from_zero(double p, double q, double x, double tol)
{
    if (x <= 0.0) {
        return 0.0;
    }
    const double log_norm = std::lgamma(p + q) - std::lgamma(p) - std::lgamma(q);
    std::function<double(double)> f;
    double upper = x;
    if (p < 1.0) {
        // t^{p-1} dt = du / p with t = u^{1/p}
        upper = std::pow(x, p);
        f = [=](double u) {
            const double t = std::pow(u, 1.0 / p);
            return std::exp(log_norm + (q - 1.0) * std::log1p(-t)) / p;
        };
    } else {
        f = [=](double t) {
            if (t <= 0.0) {
                return p == 1.0 ? std::exp(log_norm) : 0.0;
            }
            if (t >= 1.0) {
                return q == 1.0 ? std::exp(log_norm + (p - 1.0) * std::log(t)) : 0.0;
            }
            return std::exp(log_norm + (p - 1.0) * std::log(t) + (q - 1.0) * std::log1p(-t));
        };
    }
    std::vector<double> cuts;
    const int pieces = 32;
    for (int i = 0; i <= pieces; ++i) {
        cuts.push_back(upper * i / pieces);
    }
    if (p > 1.0 && q > 1.0) {
        const double mode = (p - 1.0) / (p + q - 2.0);
        if (mode < x) {
            cuts.push_back(mode);
        }
    }
    std::ranges::sort(cuts);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] > cuts[i]) {
            total += adaptive_simpson(f, cuts[i], cuts[i + 1], tol / static_cast<double>(cuts.size()));
        }
    }
    return total;
}

/// I_x(p, q) by quadrature of the density. For x > 1/2 the complement is
/// integrated instead, so any singular endpoint is always at 0.
inline double inc_beta_quadrature(double p, double q, double x, double tol = 1e-13)
{
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    if (x <= 0.5) {
        return beta_density_integral_from_zero(p, q, x, tol);
    }
    return 1.0 - beta_density_integral_from_zero(q, p, 1.0 - x, tol);
}

/// I_x(a, b) for integer shapes as a binomial tail sum.
inline double inc_beta_integer(int a, int b, double x)
{
    const int n = a + b - 1;
    double total = 0.0;
    for (int j = a; j <= n; ++j) {
        const double log_binom = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
        total += std::exp(log_binom) * std::pow(x, j) * std::pow(1.0 - x, n - j);
    }
    return total;
}

} // namespace sapaug::oracle
