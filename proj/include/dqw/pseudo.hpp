/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Pseudo density matrix Pi(t): evolution under the bath-mediated interaction
// term alone, from the product start |s1^0, s2^0>. Normalized and Hermitian,
// but not positive.
//
// With sigma_j = s_j - s_j^0 and Bessels unscaled at t_D:
//   Pi = delta_{s1+s2, s1'+s2'} (-1)^{sigma1' - sigma2}
//        sum_e I_e I_{sigma1+e} I_{sigma2-e} I_{sigma1'-sigma2+e}

#pragma once

#include <cmath>
#include <vector>

#include "dqw/numeric.hpp"
#include "dqw/rho.hpp"
#include "dqw/series.hpp"
#include "dqw/spectral.hpp"

namespace dqw {

struct PseudoRho : TwoBodyRho {
    int ic1 = 0, ic2 = 0;
    PseudoRho() = default;
    PseudoRho(SiteWindow w, RhoMeta m, int a, int b) : TwoBodyRho(w, std::move(m)), ic1(a), ic2(b) {}
};

namespace detail {

// Scaled row Ĩ at t_D; the e^{4 t_D} is applied once per element.
inline SeriesValue piFromRow(const ScaledBesselRow& I, double tD, int N, int s1, int s2, int s1p, int s2p, int ic1,
                             int ic2, double budget) {
    if (s1 + s2 != s1p + s2p) return {};
    const int g1 = s1 - ic1, g2 = s2 - ic2, g1p = s1p - ic1;
    CompensatedSum acc;
    for (int e = -N; e <= N; ++e) acc.add(I(e) * I(g1 + e) * I(g2 - e) * I(g1p - g2 + e));
    const double scale = signPow(g1p - g2) * std::exp(4.0 * tD);
    return finish(scale * acc.value(), std::abs(scale) * acc.absSum, 4, budget);
}

}  // namespace detail

inline SeriesValue piElement(int s1, int s2, int s1p, int s2p, double t, const ModelParams& p, int ic1 = 0,
                             int ic2 = 0, double eps = kDefaultEps, double budget = kDefaultBudget) {
    detail::checkTime(t, eps);
    const double tD = p.tD(t);
    const int N = truncationOrder(tD, eps);
    return detail::piFromRow(scaledBesselIRow(N, tD), tD, N, s1, s2, s1p, s2p, ic1, ic2, budget);
}

inline PseudoRho pseudoMatrix(const SiteWindow& w, double t, const ModelParams& p, int ic1 = 0, int ic2 = 0,
                              double eps = kDefaultEps, double budget = kDefaultBudget) {
    detail::checkTime(t, eps);
    if (!w.contains(ic1) || !w.contains(ic2)) throw std::out_of_range("pseudoMatrix: initial sites outside the window");
    const double tD = p.tD(t);
    const int N = truncationOrder(tD, eps);
    const auto I = scaledBesselIRow(N, tD);
    RhoMeta meta{p, t, "pseudo", eps};
    PseudoRho out(w, meta, ic1, ic2);
    const int L = w.L;
    for (int s1 = -L; s1 <= L; ++s1)
        for (int s2 = -L; s2 <= L; ++s2)
            for (int s1p = -L; s1p <= L; ++s1p) {
                const int s2p = s1 + s2 - s1p;
                if (!w.contains(s2p)) continue;
                const auto v = detail::piFromRow(I, tD, N, s1, s2, s1p, s2p, ic1, ic2, budget);
                out.at(s1, s2, s1p, s2p) = v.value;
                out.meta.errorEstimate = std::max(out.meta.errorEstimate, v.errorEstimate);
                out.meta.degraded = out.meta.degraded || v.degraded;
            }
    out.meta.tailMass = std::abs(1.0 - out.values.trace().real());
    return out;
}

// Oracle: 4D transform of exp(t * interactionGen) with the start shifted to (ic1, ic2).
inline TwoBodyRho pseudoSpectral(const SiteWindow& w, int N, double t, const ModelParams& p, int ic1 = 0, int ic2 = 0,
                                 double memoryBudget = kDefaultMemoryBudget) {
    if (N < w.dim() + 2 * std::max(std::abs(ic1), std::abs(ic2)))
        throw std::invalid_argument("pseudoSpectral: gridN too small for the shifted window");
    detail::checkBudget(spectralMemoryEstimate(w.L, N), memoryBudget, "pseudoSpectral");
    RhoMeta meta{p, t, "spectral", 0.0};
    TwoBodyRho out(w, meta);
    std::vector<double> cs(N);
    for (int j = 0; j < N; ++j) cs[j] = p.tD(t) * std::cos(2.0 * M_PI * j / N);
    auto C = [&](int d) { return cs[detail::wrap(d, N)]; };
    // interaction exponent: t_D [cos(k1-k2') + cos(k2-k1') - cos(k1-k2) - cos(k1'-k2')]
    detail::spectralCore(out, N, ic1, ic2, [&](int j1, cplx* X) {
        for (int j1p = 0; j1p < N; ++j1p)
            for (int j2 = 0; j2 < N; ++j2) {
                const double e12 = C(j2 - j1p) - C(j1 - j2);
                cplx* x = X + (size_t(j1p) * N + j2) * N;
                for (int j2p = 0; j2p < N; ++j2p) x[j2p] = std::exp(e12 + C(j1 - j2p) - C(j1p - j2p));
            }
    });
    return out;
}

// One-body reduction of Pi: frozen at the first particle's start.
inline double piOneBody(int s, int sp, int ic1 = 0) {
    return (s == ic1 && sp == ic1) ? signPow(s + ic1) : 0.0;
}

inline OneBodyRho piOneBodyMatrix(const SiteWindow& w, int ic1 = 0) {
    OneBodyRho out(w, RhoMeta{{}, 0.0, "pseudo"});
    for (int s = -w.L; s <= w.L; ++s)
        for (int sp = -w.L; sp <= w.L; ++sp) out.values(w.idx(s), w.idx(sp)) = piOneBody(s, sp, ic1);
    return out;
}

struct PseudoPurity {
    double value = 0.0;           // Tr Pi^2 = sum_m beta_m^2, beta_m = (-1)^m I_m^2(2 t_D)
    double log10Value = 0.0;      // stays finite when value overflows
    double printedAlternating = 0.0;  // sum_m (-1)^{m + m0} I_m^4(2 t_D), shown for comparison
    double errorEstimate = 0.0;
};

// The start offset m0 = s1^0 - s2^0 enters only the alternating comparison form.
inline PseudoPurity piPuritySeries(double tD, int m0 = 0, double eps = 1e-16) {
    if (!(tD >= 0.0) || !std::isfinite(tD)) throw std::domain_error("piPuritySeries: t_D must be finite and >= 0");
    PseudoPurity out;
    const double x = 2.0 * tD;
    const int N = truncationOrder(x, eps);
    const auto I = scaledBesselIRow(N, x);
    CompensatedSum sq, alt;
    for (int m = -N; m <= N; ++m) {
        const double b = I(m) * I(m);
        sq.add(b * b);
        alt.add(signPow(m + m0) * b * b);
    }
    // unscaled I = e^{x} Ĩ, four factors
    out.log10Value = (4.0 * x + std::log(sq.value())) / std::log(10.0);
    out.value = std::exp(4.0 * x) * sq.value();
    out.printedAlternating = std::exp(4.0 * x) * alt.value();
    out.errorEstimate = out.value * kUnitRoundoff * 8;
    return out;
}

}  // namespace dqw
