/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Engine selection and window sizing.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "dqw/series.hpp"
#include "dqw/spectral.hpp"

namespace dqw {

enum class Engine { Series, Spectral, Auto };

inline Engine parseEngine(const std::string& s) {
    if (s == "series") return Engine::Series;
    if (s == "spectral") return Engine::Spectral;
    if (s == "auto") return Engine::Auto;
    throw std::invalid_argument("unknown engine '" + s + "' (series|spectral|auto)");
}

inline const char* engineName(Engine e) {
    switch (e) {
        case Engine::Series: return "series";
        case Engine::Spectral: return "spectral";
        default: return "auto";
    }
}

// The series loses roughly t_D log10(e) digits; past t_D = 6 the grid route leads.
inline constexpr double kSeriesAuthorityTD = 6.0;

inline Engine resolveEngine(Engine e, double tD) {
    if (e != Engine::Auto) return e;
    return tD <= kSeriesAuthorityTD ? Engine::Series : Engine::Spectral;
}

// Ballistic cone plus diffusive spread; used as an upper cap.
inline int windowFormula(double tO, double tD) {
    const double x = tO + tD;
    return std::max(1, int(std::ceil(x + 8.0 * std::sqrt(x + 1.0))));
}

// One-body occupation P1(s) for s = 0..cap (symmetric in s for the localized start).
inline std::vector<double> oneBodyOccupation(int cap, double t, const ModelParams& p, double eps = kDefaultEps) {
    std::vector<double> P(cap + 1);
    const double tO = p.tOmega(t), tD = p.tD(t);
    if (tO == 0.0) {
        const auto I = scaledBesselIRow(cap, tD);
        for (int s = 0; s <= cap; ++s) P[s] = I(s);
        return P;
    }
    const int N = truncationOrder(tD, eps);
    const auto I = scaledBesselIRow(N, tD);
    const auto J = besselJRow(cap + N + 1, tO);
    for (int s = 0; s <= cap; ++s) {
        double acc = 0.0;
        for (int n = -N; n <= N; ++n) acc += J(s + n) * J(s + n) * I(n);
        P[s] = acc;
    }
    return P;
}

struct WindowChoice {
    int L = 1;
    double tailMass = 0.0;  // bound on the two-body mass outside [-L, L]^2
    int formulaCap = 1;
};

// Smallest L with 2 * sum_{|s|>L} P1(s) < tailEps, never above the formula cap.
inline WindowChoice autoWindow(double t, const ModelParams& p, double tailEps) {
    const double tO = p.tOmega(t), tD = p.tD(t);
    WindowChoice wc;
    wc.formulaCap = windowFormula(tO, tD);
    const int far = wc.formulaCap + 60 + int(4 * std::sqrt(tO + tD + 1));
    const auto P = oneBodyOccupation(far, t, p);
    std::vector<double> tail(far + 2, 0.0);  // tail[L] = sum_{|s|>L}
    for (int s = far; s >= 0; --s) tail[s] = tail[s + 1] + (s + 1 <= far ? 2.0 * P[s + 1] : 0.0);
    int L = 1;
    while (L < wc.formulaCap && 2.0 * tail[L] >= tailEps) ++L;
    wc.L = L;
    wc.tailMass = 2.0 * tail[L];
    return wc;
}

inline int autoGridN(int L, int requested) {
    return niceFftSize(std::max(requested, 2 * L + 16));
}

struct EngineOptions {
    Engine engine = Engine::Auto;
    int gridN = kDefaultGridN;
    double eps = kDefaultEps;
    double budget = kDefaultBudget;
    double memoryBudget = kDefaultMemoryBudget;
};

// Rotated frame rho(0, D, t) on window L.
inline BlockRho rotatedFrame(const SiteWindow& w, double t, const ModelParams& p, const EngineOptions& o = {}) {
    const double tD = p.tD(t);
    ModelParams p0{0.0, p.dRate};
    if (resolveEngine(o.engine, tD) == Engine::Series) {
        auto r = omegaZeroBlockSeries(w, t, p0, o.eps, o.budget);
        r.meta.params = p;
        return r;
    }
    auto r = omegaZeroSpectral(w, t, p0, 0, o.memoryBudget);
    r.meta.params = p;
    return r;
}

// Lab-frame dense matrix on window L.
inline TwoBodyRho labMatrix(const SiteWindow& w, double t, const ModelParams& p, const EngineOptions& o = {}) {
    const double tD = p.tD(t);
    if (resolveEngine(o.engine, tD) == Engine::Series) return rhoMatrixSeries(w, t, p, o.eps, o.budget);
    auto r = rhoGridSpectral(w, autoGridN(w.L, o.gridN), t, p, o.memoryBudget);
    r.window.tailEps = w.tailEps;
    return r;
}

}  // namespace dqw
