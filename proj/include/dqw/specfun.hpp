/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Integer-order Bessel kernels. Modified Bessel values only ever leave this
// file in scaled form, e^{-x} I_n(x); callers carry the exponent themselves.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace dqw {

// Largest order accepted by the scalar entry points.
inline constexpr int kBesselOrderCap = 100000;

// Values J_n(x) for n in [-N, N]. Orders outside the row read as zero, which
// is what the truncated sums want.
struct BesselJRow {
    int N = 0;
    double x = 0.0;
    double tail = 0.0;  // sum_{|n|>N} J_n(x)^2
    std::vector<double> v;

    double operator()(int n) const { return (n < -N || n > N) ? 0.0 : v[n + N]; }
};

// Values e^{-x} I_n(x) for n in [-N, N], x >= 0.
struct ScaledBesselRow {
    int N = 0;
    double x = 0.0;
    double tail = 0.0;  // sum_{|n|>N} e^{-x} I_n(x)
    std::vector<double> v;

    double operator()(int n) const { return (n < -N || n > N) ? 0.0 : v[n + N]; }
};

namespace detail {

inline int millerStart(double x, int nmax) {
    int m = static_cast<int>(std::ceil(2.0 * (x + 40.0 + 10.0 * std::sqrt(x))));
    m = std::max(m, nmax + 20);
    return m + (m & 1);
}

// Ascending series for small |x|; returns J_0..J_nmax (sign = -1) or
// I_0..I_nmax (sign = +1), unscaled.
inline std::vector<double> smallArgSeries(double x, int nmax, double sign) {
    std::vector<double> out(nmax + 1, 0.0);
    const double h = 0.5 * x, q = sign * h * h;
    double lead = 1.0;  // (x/2)^n / n!
    for (int n = 0; n <= nmax; ++n) {
        if (n > 0) lead *= h / n;
        if (lead == 0.0) break;
        double term = lead, sum = lead;
        for (int k = 1; k < 60; ++k) {
            term *= q / (k * double(n + k));
            sum += term;
            if (std::abs(term) < 1e-17 * std::abs(sum)) break;
        }
        out[n] = sum;
    }
    return out;
}

// Miller downward recurrence for x > 0. modified=false gives J_n, normalized
// by J_0 + 2 sum J_{2k} = 1; modified=true gives e^{-x} I_n, normalized by
// I_0 + 2 sum I_k = e^x. Returns orders 0..nmax and the squared/linear tail
// beyond nmax through *tail.
inline std::vector<double> miller(double x, int nmax, bool modified, double* tail) {
    const int m = millerStart(x, nmax);
    std::vector<double> f(nmax + 1, 0.0);
    double fk1 = 0.0, fk = 1e-280, norm = 0.0, tailAcc = 0.0;
    const double big = 1e250;
    for (int k = m; k >= 1; --k) {
        // f_k known; weight it into the normalization and tail
        if (k <= nmax) f[k] = fk;
        if (modified) {
            norm += 2.0 * fk;
            if (k > nmax) tailAcc += 2.0 * fk;
        } else {
            if ((k & 1) == 0) norm += 2.0 * fk;
            if (k > nmax) tailAcc += 2.0 * fk * fk;
        }
        double fkm1 = (2.0 * k / x) * fk + (modified ? fk1 : -fk1);
        fk1 = fk;
        fk = fkm1;
        if (std::abs(fk) > big) {
            const double s = 1.0 / big;
            fk *= s;
            fk1 *= s;
            norm *= s;
            tailAcc *= (modified ? s : s * s);
            for (int j = std::max(k, 0); j <= nmax; ++j) f[j] *= s;
        }
    }
    f[0] = fk;
    norm += fk;
    for (double& e : f) e /= norm;
    if (tail) *tail = modified ? tailAcc / norm : tailAcc / (norm * norm);
    return f;
}

// Hankel asymptotic expansion of e^{-x} I_n(x) for large x, n^2 <= x.
inline double scaledIHankel(int n, double x) {
    const double mu = 4.0 * double(n) * double(n);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 80; ++k) {
        const double a = double(2 * k - 1);
        term *= -(mu - a * a) / (k * 8.0 * x);
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum / std::sqrt(2.0 * M_PI * x);
}

// Debye uniform expansion of e^{-x} I_nu(x) for large nu.
inline double scaledIDebye(int nu, double x) {
    const double v = nu, z = x / v;
    const double r = std::sqrt(1.0 + z * z), p = 1.0 / r;
    const double expo = v * (1.0 / (r + z)) + v * std::log(z / (1.0 + r));
    const double p2 = p * p;
    const double u1 = p * (3.0 - 5.0 * p2) / 24.0;
    const double u2 = p2 * (81.0 - 462.0 * p2 + 385.0 * p2 * p2) / 1152.0;
    const double u3 = p * p2 *
                      (30375.0 - 369603.0 * p2 + 765765.0 * p2 * p2 - 425425.0 * p2 * p2 * p2) /
                      414720.0;
    const double series = 1.0 + u1 / v + u2 / (v * v) + u3 / (v * v * v);
    return std::exp(expo) / (std::sqrt(2.0 * M_PI * v) * std::sqrt(r)) * series;
}

// Hankel expansion of J_n(x), x > 0 large, n^2 << x.
inline double besselJHankel(int n, double x) {
    const double mu = 4.0 * double(n) * double(n);
    double P = 1.0, Q = 0.0, term = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double a = double(2 * k - 1);
        term *= (mu - a * a) / (k * 8.0 * x);
        if (k % 4 == 1) Q += term;
        else if (k % 4 == 2) P -= term;
        else if (k % 4 == 3) Q -= term;
        else P += term;
        if (std::abs(term) < 1e-17) break;
    }
    const double chi = x - (0.5 * n + 0.25) * M_PI;
    return std::sqrt(2.0 / (M_PI * x)) * (P * std::cos(chi) - Q * std::sin(chi));
}

inline constexpr double kMillerIMax = 1e6;
inline constexpr double kMillerJMax = 1e6;

// J_0..J_nmax at x >= 0.
inline std::vector<double> jNonneg(double x, int nmax, double* tail) {
    if (x == 0.0) {
        std::vector<double> f(nmax + 1, 0.0);
        f[0] = 1.0;
        if (tail) *tail = 0.0;
        return f;
    }
    if (x < 0.5) {
        auto f = smallArgSeries(x, nmax + 30, -1.0);
        double t = 0.0;
        for (int k = static_cast<int>(f.size()) - 1; k > nmax; --k) t += 2.0 * f[k] * f[k];
        f.resize(nmax + 1);
        if (tail) *tail = t;
        return f;
    }
    if (x > kMillerJMax) {
        if (double(nmax) * nmax > 0.25 * x)
            throw std::domain_error("besselJ: order too large for the asymptotic regime");
        std::vector<double> f(nmax + 1);
        for (int n = 0; n <= nmax; ++n) f[n] = besselJHankel(n, x);
        if (tail) *tail = 0.0;
        return f;
    }
    return miller(x, nmax, false, tail);
}

// e^{-x} I_0..I_nmax at x >= 0.
inline std::vector<double> iScaledNonneg(double x, int nmax, double* tail) {
    if (x == 0.0) {
        std::vector<double> f(nmax + 1, 0.0);
        f[0] = 1.0;
        if (tail) *tail = 0.0;
        return f;
    }
    if (x < 0.5) {
        auto f = smallArgSeries(x, nmax + 30, 1.0);
        const double s = std::exp(-x);
        double t = 0.0;
        for (int k = static_cast<int>(f.size()) - 1; k > nmax; --k) t += 2.0 * f[k] * s;
        f.resize(nmax + 1);
        for (double& e : f) e *= s;
        if (tail) *tail = t;
        return f;
    }
    if (x > kMillerIMax) {
        std::vector<double> f(nmax + 1);
        for (int n = 0; n <= nmax; ++n)
            f[n] = (double(n) * n <= x) ? scaledIHankel(n, x) : scaledIDebye(n, x);
        if (tail) *tail = 0.0;  // not tracked in the asymptotic regime
        return f;
    }
    return miller(x, nmax, true, tail);
}

inline void checkOrder(int n) {
    if (std::abs(n) > kBesselOrderCap) throw std::domain_error("Bessel order beyond kBesselOrderCap");
}

}  // namespace detail

inline double besselJ(int n, double x) {
    if (!std::isfinite(x)) throw std::domain_error("besselJ: non-finite argument");
    detail::checkOrder(n);
    const int an = std::abs(n);
    double v = detail::jNonneg(std::abs(x), an, nullptr)[an];
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x)
    if ((an & 1) && ((n < 0) != (x < 0))) v = -v;
    return v;
}

inline double besselIScaled(int n, double x) {
    if (!(x >= 0.0)) throw std::domain_error("besselIScaled: x must be >= 0");
    if (std::isinf(x)) return 0.0;
    detail::checkOrder(n);
    const int an = std::abs(n);
    return detail::iScaledNonneg(x, an, nullptr)[an];
}

inline BesselJRow besselJRow(int N, double x) {
    if (!std::isfinite(x)) throw std::domain_error("besselJRow: non-finite argument");
    if (N < 0) throw std::invalid_argument("besselJRow: N must be >= 0");
    BesselJRow row;
    row.N = N;
    row.x = x;
    auto f = detail::jNonneg(std::abs(x), N, &row.tail);
    row.v.assign(2 * N + 1, 0.0);
    for (int n = 0; n <= N; ++n) {
        const double pos = (x < 0 && (n & 1)) ? -f[n] : f[n];
        row.v[N + n] = pos;
        row.v[N - n] = (n & 1) ? -pos : pos;
    }
    return row;
}

inline ScaledBesselRow scaledBesselIRow(int N, double x) {
    if (!(x >= 0.0)) throw std::domain_error("scaledBesselIRow: x must be >= 0");
    if (N < 0) throw std::invalid_argument("scaledBesselIRow: N must be >= 0");
    ScaledBesselRow row;
    row.N = N;
    row.x = x;
    auto f = detail::iScaledNonneg(x, N, &row.tail);
    row.v.assign(2 * N + 1, 0.0);
    for (int n = 0; n <= N; ++n) row.v[N + n] = row.v[N - n] = f[n];
    return row;
}

// Smallest N with sum_{|n|>N} e^{-x}I_n(x) < eps and max_{|y|<=x} |J_n(y)| < eps
// for all |n| > N. Beyond n = x the J bound is attained at y = x and decreases
// in n, so scanning J_n(x) for n >= x suffices.
inline int truncationOrder(double x, double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("truncationOrder: eps must be in (0,1)");
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::domain_error("truncationOrder: x must be finite and >= 0");
    if (x == 0.0) return 1;
    const int top = detail::millerStart(x, 0) / 2 + 60;

    double itail = 0.0;
    auto iv = detail::iScaledNonneg(x, top, &itail);
    int nI = top;
    double tail = itail;  // sum beyond nI
    while (nI > 0 && tail + 2.0 * iv[nI] < eps) tail += 2.0 * iv[nI--];

    auto jv = detail::jNonneg(x, top, nullptr);
    int nJ = top;
    const int floorX = static_cast<int>(std::floor(x));
    for (int n = top; n > floorX; --n) {
        if (std::abs(jv[n]) >= eps) break;
        nJ = n - 1;
    }
    nJ = std::max(nJ, floorX);
    return std::max({1, nI, nJ});
}

}  // namespace dqw
