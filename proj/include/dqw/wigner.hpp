/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Lattice Wigner function on Z + Z/2 per coordinate. Positions are stored
// doubled, m = 2x, so half-integers stay exact integers.
//
//   W(k; m) = (2 pi)^-2 sum_{s + s' = m} <s|rho|s'> e^{-i k.(s - s')}
//
// Momentum nodes k_j = -pi + 2 pi j / N_k; the k-integrals are trapezoid sums,
// exact for the trigonometric polynomials that appear.

#pragma once

#include <fftw3.h>

#include <cmath>
#include <vector>

#include "dqw/numeric.hpp"
#include "dqw/rho.hpp"
#include "dqw/series.hpp"
#include "dqw/spectral.hpp"
#include "dqw/spectrum.hpp"

namespace dqw {

struct WignerGrid {
    int L = 0;   // source window; m ranges over [-2L, 2L]
    int Nk = 0;
    double maxImag = 0.0;
    double tailEps = 0.0;
    std::vector<double> values;  // [(m1, m2)][j1][j2]

    int mDim() const { return 4 * L + 1; }
    double k(int j) const { return -M_PI + 2.0 * M_PI * j / Nk; }
    double dk2() const { return std::pow(2.0 * M_PI / Nk, 2); }
    size_t sliceOffset(int m1, int m2) const { return (size_t(m1 + 2 * L) * mDim() + (m2 + 2 * L)) * Nk * Nk; }
    double operator()(int j1, int j2, int m1, int m2) const { return values[sliceOffset(m1, m2) + size_t(j1) * Nk + j2]; }
    const double* slice(int m1, int m2) const { return &values[sliceOffset(m1, m2)]; }
};

inline WignerGrid wignerFromRho(const TwoBodyRho& rho, int Nk = 128) {
    if (Nk < 4) throw std::invalid_argument("wignerFromRho: N_k must be >= 4");
    if (rho.meta.tailMass > std::max(rho.window.tailEps, 1e-12))
        throw TailLossError("wignerFromRho: window tail mass exceeds its declared tailEps");
    WignerGrid w;
    w.L = rho.window.L;
    w.Nk = Nk;
    w.tailEps = rho.window.tailEps;
    const int L = w.L, M = w.mDim();
    w.values.assign(size_t(M) * M * Nk * Nk, 0.0);
    auto buf = detail::fftwAlloc(size_t(Nk) * Nk);
    detail::Plan plan(fftw_plan_dft_2d(Nk, Nk, buf.get(), buf.get(), FFTW_FORWARD, FFTW_ESTIMATE));
    cplx* A = reinterpret_cast<cplx*>(buf.get());
    const double norm = 1.0 / (4.0 * M_PI * M_PI);
    for (int m1 = -2 * L; m1 <= 2 * L; ++m1)
        for (int m2 = -2 * L; m2 <= 2 * L; ++m2) {
            std::fill(A, A + size_t(Nk) * Nk, cplx(0));
            bool any = false;
            for (int s1 = std::max(-L, m1 - L); s1 <= std::min(L, m1 + L); ++s1)
                for (int s2 = std::max(-L, m2 - L); s2 <= std::min(L, m2 + L); ++s2) {
                    const int s1p = m1 - s1, s2p = m2 - s2;
                    const int d1 = s1 - s1p, d2 = s2 - s2p;
                    // e^{-i k_j d} = (-1)^d e^{-2 pi i j d / N_k}
                    A[size_t(detail::wrap(d1, Nk)) * Nk + detail::wrap(d2, Nk)] +=
                        signPow(d1 + d2) * rho(s1, s2, s1p, s2p);
                    any = true;
                }
            if (!any) continue;
            plan.run();
            double* out = &w.values[w.sliceOffset(m1, m2)];
            for (size_t i = 0; i < size_t(Nk) * Nk; ++i) {
                out[i] = norm * A[i].real();
                w.maxImag = std::max(w.maxImag, norm * std::abs(A[i].imag()));
            }
        }
    if (w.maxImag > 1e-10) throw ValidationError("wignerFromRho: imaginary residue above 1e-10");
    return w;
}

struct WignerMarginals {
    Eigen::MatrixXd position;  // (m1 + 2L, m2 + 2L)
    Eigen::MatrixXd momentum;  // (j1, j2)
    double total = 0.0;
};

inline WignerMarginals marginals(const WignerGrid& w) {
    WignerMarginals out;
    const int L = w.L, M = w.mDim(), Nk = w.Nk;
    out.position = Eigen::MatrixXd::Zero(M, M);
    out.momentum = Eigen::MatrixXd::Zero(Nk, Nk);
    CompensatedSum tot;
    for (int m1 = -2 * L; m1 <= 2 * L; ++m1)
        for (int m2 = -2 * L; m2 <= 2 * L; ++m2) {
            const double* s = w.slice(m1, m2);
            CompensatedSum acc;
            for (int j1 = 0; j1 < Nk; ++j1)
                for (int j2 = 0; j2 < Nk; ++j2) {
                    acc.add(s[size_t(j1) * Nk + j2]);
                    out.momentum(j1, j2) += s[size_t(j1) * Nk + j2];
                }
            out.position(m1 + 2 * L, m2 + 2 * L) = w.dk2() * acc.value();
            tot.add(out.position(m1 + 2 * L, m2 + 2 * L));
        }
    out.total = tot.value();
    return out;
}

inline cplx inverseReconstruct(const WignerGrid& w, int s1, int s2, int s1p, int s2p) {
    const int m1 = s1 + s1p, m2 = s2 + s2p, d1 = s1 - s1p, d2 = s2 - s2p;
    if (std::abs(m1) > 2 * w.L || std::abs(m2) > 2 * w.L) return 0.0;
    const double* s = w.slice(m1, m2);
    cplx acc = 0.0;
    for (int j1 = 0; j1 < w.Nk; ++j1)
        for (int j2 = 0; j2 < w.Nk; ++j2) {
            const double ph = w.k(j1) * d1 + w.k(j2) * d2;
            acc += s[size_t(j1) * w.Nk + j2] * cplx(std::cos(ph), std::sin(ph));
        }
    return w.dk2() * acc;
}

inline double negativeVolume(const WignerGrid& w) {
    CompensatedSum acc;
    for (double v : w.values)
        if (v < 0) acc.add(-2.0 * v);
    return w.dk2() * acc.value();
}

// Direct series for W at a single phase-space point:
//   W = (-1)^{m1+m2} e^{4 t_D} / (4 pi^2) sum_{a,b,q} (-1)^q J_{m1+2a-q}(X1) J_{m2+2b+q}(X2) K(a,b,q) cos(q(k1-k2)),
//   X_j = -2 t_O sin k_j,
//   K(a,b,q) = sum_{n2,n3,n5} (-1)^{n2+n3} Ĩ_{n2} Ĩ_{n3} Ĩ_{n5} Ĩ_{n2+n5-a} Ĩ_{n3+n5+b} Ĩ_{n2+n3+n5-q}.
// K depends only on t_D, so it is tabulated once per evaluator.
class WignerSeries {
public:
    WignerSeries(double t, const ModelParams& p, double eps = kDefaultEps, double budget = kDefaultBudget)
        : tO_(p.tOmega(t)), tD_(p.tD(t)), budget_(budget) {
        N_ = tD_ == 0.0 ? 0 : truncationOrder(tD_, eps);
        jBand_ = truncationOrder(2.0 * tO_, eps);
        I_ = scaledBesselIRow(N_, tD_);
        const int N = N_;
        // T(u, v) = sum_n (-1)^n Ĩ_n Ĩ_{n+u} Ĩ_{n+v}, |u|,|v| <= 2N
        const int tw = 4 * N + 1;
        std::vector<double> T(size_t(tw) * tw), Ta(T.size());
        for (int u = -2 * N; u <= 2 * N; ++u)
            for (int v = -2 * N; v <= 2 * N; ++v) {
                CompensatedSum acc;
                for (int n = -N; n <= N; ++n) acc.add(signPow(n) * I_(n) * I_(n + u) * I_(n + v));
                T[size_t(u + 2 * N) * tw + (v + 2 * N)] = acc.value();
                Ta[size_t(u + 2 * N) * tw + (v + 2 * N)] = acc.absSum;
            }
        na_ = 6 * N + 1;
        nq_ = 8 * N + 1;
        K_.assign(size_t(na_) * na_ * nq_, 0.0);
        Ka_.assign(K_.size(), 0.0);
        for (int a = -3 * N; a <= 3 * N; ++a)
            for (int b = -3 * N; b <= 3 * N; ++b)
                for (int q = -4 * N; q <= 4 * N; ++q) {
                    CompensatedSum acc;
                    double ab = 0.0;
                    for (int n2 = -N; n2 <= N; ++n2)
                        for (int n5 = -N; n5 <= N; ++n5) {
                            const int u = n5 + b, v = n2 + n5 - q;
                            if (std::abs(u) > 2 * N || std::abs(v) > 2 * N) continue;
                            const double w = I_(n2) * I_(n5) * I_(n2 + n5 - a);
                            if (w == 0.0) continue;
                            const size_t o = size_t(u + 2 * N) * tw + (v + 2 * N);
                            acc.add(signPow(n2) * w * T[o]);
                            ab += w * Ta[o];
                        }
                    K_[koff(a, b, q)] = acc.value();
                    Ka_[koff(a, b, q)] = ab;
                }
    }

    // m_j = 2 x_j
    SeriesValue operator()(double k1, double k2, int m1, int m2) const {
        const int N = N_;
        const double X1 = -2.0 * tO_ * std::sin(k1), X2 = -2.0 * tO_ * std::sin(k2);
        const int span = std::max(std::abs(m1), std::abs(m2)) + 10 * N + jBand_ + 2;
        const auto J1 = besselJRow(span, X1), J2 = besselJRow(span, X2);
        CompensatedSum acc;
        double ab = 0.0;
        for (int q = -4 * N; q <= 4 * N; ++q) {
            const double c = signPow(q) * std::cos(q * (k1 - k2));
            for (int a = -3 * N; a <= 3 * N; ++a) {
                const double j1 = J1(m1 + 2 * a - q);
                if (j1 == 0.0) continue;
                for (int b = -3 * N; b <= 3 * N; ++b) {
                    const size_t o = koff(a, b, q);
                    const double j2 = J2(m2 + 2 * b + q);
                    acc.add(c * j1 * j2 * K_[o]);
                    ab += std::abs(j1 * j2) * Ka_[o];
                }
            }
        }
        const double scale = signPow(m1 + m2) * std::exp(4.0 * tD_) / (4.0 * M_PI * M_PI);
        return detail::finish(scale * acc.value(), std::abs(scale) * ab, 9, budget_);
    }

private:
    size_t koff(int a, int b, int q) const {
        return (size_t(a + 3 * N_) * na_ + (b + 3 * N_)) * nq_ + (q + 4 * N_);
    }
    double tO_, tD_, budget_;
    int N_ = 0, jBand_ = 0, na_ = 1, nq_ = 1;
    ScaledBesselRow I_;
    std::vector<double> K_, Ka_;
};

inline SeriesValue wignerSeries(double k1, double k2, int m1, int m2, double t, const ModelParams& p,
                                double eps = kDefaultEps) {
    return WignerSeries(t, p, eps)(k1, k2, m1, m2);
}

}  // namespace dqw
