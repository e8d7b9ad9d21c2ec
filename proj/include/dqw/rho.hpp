/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Density-matrix containers on a truncated site window.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqw/generator.hpp"

namespace dqw {

// i^m for integer m
inline cplx ipow(int m) {
    switch (((m % 4) + 4) % 4) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        case 2: return {-1, 0};
        default: return {0, -1};
    }
}

inline double signPow(int m) { return (m & 1) ? -1.0 : 1.0; }

struct SiteWindow {
    int L = 1;
    double tailEps = 1e-10;

    int dim() const { return 2 * L + 1; }
    int pairDim() const { return dim() * dim(); }
    bool contains(int s) const { return s >= -L && s <= L; }
    int idx(int s) const { return s + L; }
    int pairIdx(int s1, int s2) const { return (s1 + L) * dim() + (s2 + L); }
};

struct RhoMeta {
    ModelParams params;
    double t = 0.0;
    std::string engine;  // series | spectral | rotated | pseudo
    double eps = 1e-13;
    double tailMass = 0.0;       // probability outside the window (measured or bounded)
    double aliasingBound = 0.0;  // spectral engine only
    double errorEstimate = 0.0;  // largest per-element rounding estimate
    bool degraded = false;

    double tOmega() const { return params.tOmega(t); }
    double tD() const { return params.tD(t); }
};

struct TwoBodyRho {
    SiteWindow window;
    Eigen::MatrixXcd values;
    RhoMeta meta;

    TwoBodyRho() = default;
    TwoBodyRho(SiteWindow w, RhoMeta m) : window(w), values(Eigen::MatrixXcd::Zero(w.pairDim(), w.pairDim())), meta(std::move(m)) {}

    cplx operator()(int s1, int s2, int s1p, int s2p) const {
        return values(window.pairIdx(s1, s2), window.pairIdx(s1p, s2p));
    }
    cplx& at(int s1, int s2, int s1p, int s2p) { return values(window.pairIdx(s1, s2), window.pairIdx(s1p, s2p)); }
};

struct OneBodyRho {
    SiteWindow window;
    Eigen::MatrixXcd values;
    RhoMeta meta;

    OneBodyRho() = default;
    OneBodyRho(SiteWindow w, RhoMeta m) : window(w), values(Eigen::MatrixXcd::Zero(w.dim(), w.dim())), meta(std::move(m)) {}

    cplx operator()(int s, int sp) const { return values(window.idx(s), window.idx(sp)); }
};

// Rotated-frame (Omega = 0) matrix: block-diagonal in n = s1 + s2 and real.
// Block n is indexed by s1 over [lo(n), hi(n)], with s2 = n - s1.
struct BlockRho {
    SiteWindow window;
    std::vector<Eigen::MatrixXd> blocks;  // index n + 2L
    RhoMeta meta;

    BlockRho() = default;
    BlockRho(SiteWindow w, RhoMeta m) : window(w), meta(std::move(m)) {
        blocks.resize(4 * w.L + 1);
        for (int n = -2 * w.L; n <= 2 * w.L; ++n) {
            const int sz = blockSize(n);
            blocks[n + 2 * w.L] = Eigen::MatrixXd::Zero(sz, sz);
        }
    }

    int lo(int n) const { return std::max(-window.L, n - window.L); }
    int hi(int n) const { return std::min(window.L, n + window.L); }
    int blockSize(int n) const { return hi(n) - lo(n) + 1; }

    Eigen::MatrixXd& block(int n) { return blocks[n + 2 * window.L]; }
    const Eigen::MatrixXd& block(int n) const { return blocks[n + 2 * window.L]; }

    double operator()(int s1, int s2, int s1p, int s2p) const {
        const int n = s1 + s2;
        if (n != s1p + s2p) return 0.0;
        if (!window.contains(s1) || !window.contains(s2) || !window.contains(s1p) || !window.contains(s2p))
            return 0.0;
        return block(n)(s1 - lo(n), s1p - lo(n));
    }
    double& at(int s1, int s2, int s1p) {
        const int n = s1 + s2;
        return block(n)(s1 - lo(n), s1p - lo(n));
    }

    TwoBodyRho toDense() const {
        TwoBodyRho out(window, meta);
        for (int n = -2 * window.L; n <= 2 * window.L; ++n) {
            const auto& b = block(n);
            for (int i = 0; i < b.rows(); ++i)
                for (int j = 0; j < b.cols(); ++j) {
                    const int s1 = lo(n) + i, s1p = lo(n) + j;
                    out.at(s1, n - s1, s1p, n - s1p) = b(i, j);
                }
        }
        return out;
    }

    double trace() const {
        double tr = 0.0;
        for (const auto& b : blocks) tr += b.trace();
        return tr;
    }
};

inline OneBodyRho partialTrace(const TwoBodyRho& rho) {
    const auto& w = rho.window;
    OneBodyRho out(w, rho.meta);
    for (int s1 = -w.L; s1 <= w.L; ++s1)
        for (int s1p = -w.L; s1p <= w.L; ++s1p) {
            cplx acc = 0.0;
            for (int s2 = -w.L; s2 <= w.L; ++s2) acc += rho(s1, s2, s1p, s2);
            out.values(w.idx(s1), w.idx(s1p)) = acc;
        }
    return out;
}

struct InvariantReport {
    double trace = 0.0;
    double hermiticityError = 0.0;
    double minEigenvalue = 0.0;
    double exchangeError = 0.0;
    bool pass = false;
};

inline double hermiticityError(const Eigen::MatrixXcd& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

inline double minEigenvalue(const Eigen::MatrixXcd& m) {
    const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Trace window [1 - tailEps, 1 + 1e-10], Hermiticity 1e-10, eigenvalues >= -1e-8,
// particle-exchange symmetry 1e-10.
inline InvariantReport checkInvariants(const TwoBodyRho& rho, bool withEigen = true) {
    InvariantReport r;
    r.trace = rho.values.trace().real();
    r.hermiticityError = hermiticityError(rho.values);
    const int L = rho.window.L;
    double ex = 0.0;
    for (int s1 = -L; s1 <= L; ++s1)
        for (int s2 = -L; s2 <= L; ++s2)
            for (int s1p = -L; s1p <= L; ++s1p)
                for (int s2p = -L; s2p <= L; ++s2p)
                    ex = std::max(ex, std::abs(rho(s1, s2, s1p, s2p) - rho(s2, s1, s2p, s1p)));
    r.exchangeError = ex;
    r.minEigenvalue = withEigen ? minEigenvalue(rho.values) : 0.0;
    const double tailEps = std::max(rho.window.tailEps, rho.meta.tailMass);
    r.pass = r.trace >= 1.0 - tailEps - 1e-10 && r.trace <= 1.0 + 1e-10 && r.hermiticityError <= 1e-10 &&
             r.minEigenvalue >= -1e-8 && r.exchangeError <= 1e-10;
    return r;
}

}  // namespace dqw
