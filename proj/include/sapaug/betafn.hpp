// Copyright 2026 The sapaug Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "errors.hpp"

namespace sapaug {

/// Arguments of the regularized incomplete beta function I_x(alpha, beta).
struct BetaArgs {
    double alpha;
    double beta;
    double x;

    void validate() const
    {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw DomainError("inc_beta: alpha must be positive and finite, got " + std::to_string(alpha));
        }
        if (!(beta > 0.0) || !std::isfinite(beta)) {
            throw DomainError("inc_beta: beta must be positive and finite, got " + std::to_string(beta));
        }
        if (!(x >= 0.0 && x <= 1.0)) {
            throw DomainError("inc_beta: x must lie in [0, 1], got " + std::to_string(x));
        }
    }
};

/// Value plus convergence diagnostics of the continued fraction.
struct IncBetaResult {
    double value = 0.0;
    int iterations = 0;
    /// False when the iteration cap was hit; value is the last iterate.
    bool converged = true;
};

namespace detail {

// Lanczos approximation, g = 607/128, 15 terms.
inline constexpr double kLanczosG = 607.0 / 128.0;
inline constexpr std::array<double, 15> kLanczosCoef = {
    0.99999999999999709182,      57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,       -0.49191381609762019978,   0.33994649984811888699e-4,
    0.46523628927048575665e-4,   -0.98374475304879564677e-4, 0.15808870322491248884e-3,
    -0.21026444172410488319e-3,  0.21743961811521264320e-3, -0.16431810653676389022e-3,
    0.84418223983852743293e-4,   -0.26190838401581408670e-4, 0.36899182659531622704e-5,
};

inline constexpr int kMaxContinuedFractionIterations = 300;
inline constexpr double kContinuedFractionTolerance = 1e-14;
inline constexpr double kTiny = 1e-300;

/// Continued fraction for I_x(a, b) (modified Lentz). Converges fast
/// for x < (a + 1) / (a + b + 2).
inline double beta_continued_fraction(double a, double b, double x, int& iterations, bool& converged)
{
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) {
        d = kTiny;
    }
    d = 1.0 / d;
    double h = d;
    converged = false;
    int m = 1;
    for (; m <= kMaxContinuedFractionIterations; ++m) {
        const double m2 = 2.0 * m;
        // even step
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        h *= d * c;
        // odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kContinuedFractionTolerance) {
            converged = true;
            break;
        }
    }
    iterations = std::min(m, kMaxContinuedFractionIterations);
    return h;
}

} // namespace detail

/// Natural log of the gamma function for z > 0.
inline double ln_gamma(double z)
{
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw DomainError("ln_gamma: argument must be positive and finite, got " + std::to_string(z));
    }
    if (z < 0.5) {
        // Gamma(z) = Gamma(z + 1) / z keeps the series in its accurate range.
        return ln_gamma(z + 1.0) - std::log(z);
    }
    const double zm1 = z - 1.0;
    double series = detail::kLanczosCoef[0];
    for (std::size_t k = 1; k < detail::kLanczosCoef.size(); ++k) {
        series += detail::kLanczosCoef[k] / (zm1 + static_cast<double>(k));
    }
    const double t = zm1 + detail::kLanczosG + 0.5;
    constexpr double half_log_two_pi = 0.91893853320467274178;
    return half_log_two_pi + (zm1 + 0.5) * std::log(t) - t + std::log(series);
}

/// ln B(a, b).
inline double ln_beta(double a, double b) { return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b); }

/// Regularized incomplete beta with convergence diagnostics.
inline IncBetaResult inc_beta_detailed(const BetaArgs& args)
{
    args.validate();
    const double a = args.alpha;
    const double b = args.beta;
    const double x = args.x;
    if (x == 0.0) {
        return {0.0, 0, true};
    }
    if (x == 1.0) {
        return {1.0, 0, true};
    }
    const double log_front = a * std::log(x) + b * std::log1p(-x) - ln_beta(a, b);
    IncBetaResult result;
    if (x < (a + 1.0) / (a + b + 2.0)) {
        const double cf = detail::beta_continued_fraction(a, b, x, result.iterations, result.converged);
        result.value = std::exp(log_front) * cf / a;
    } else {
        const double cf = detail::beta_continued_fraction(b, a, 1.0 - x, result.iterations, result.converged);
        result.value = 1.0 - std::exp(log_front) * cf / b;
    }
    result.value = std::clamp(result.value, 0.0, 1.0);
    return result;
}

/// I_x(alpha, beta): the CDF of Beta(alpha, beta) evaluated at x.
inline double inc_beta(const BetaArgs& args) { return inc_beta_detailed(args).value; }

inline double inc_beta(double alpha, double beta, double x) { return inc_beta(BetaArgs{alpha, beta, x}); }

} // namespace sapaug
