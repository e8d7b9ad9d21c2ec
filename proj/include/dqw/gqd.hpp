/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Mirror coarse-graining to a qutrit pair and the geometric-discord lower bound.
//
// Per particle, site +s -> A, site -s -> B, everything else -> phi. The phi
// label is a partial trace over "which complement site", so coherences
// between phi and A/B vanish while the phi-phi sector keeps its weight.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dqw/engine.hpp"
#include "dqw/rho.hpp"
#include "dqw/series.hpp"

namespace dqw {

using Mat3 = Eigen::Matrix3cd;
using Mat9 = Eigen::Matrix<cplx, 9, 9>;

inline std::array<Mat3, 8> gellMannBasis() {
    std::array<Mat3, 8> g;
    for (auto& m : g) m.setZero();
    const cplx I(0, 1);
    g[0](0, 1) = g[0](1, 0) = 1;
    g[1](0, 1) = -I;
    g[1](1, 0) = I;
    g[2](0, 0) = 1;
    g[2](1, 1) = -1;
    g[3](0, 2) = g[3](2, 0) = 1;
    g[4](0, 2) = -I;
    g[4](2, 0) = I;
    g[5](1, 2) = g[5](2, 1) = 1;
    g[6](1, 2) = -I;
    g[6](2, 1) = I;
    const double r = 1.0 / std::sqrt(3.0);
    g[7](0, 0) = g[7](1, 1) = r;
    g[7](2, 2) = -2 * r;
    return g;
}

enum QutritLabel { kA = 0, kB = 1, kPhi = 2 };

// Ordered basis index 3 l1 + l2: AA, AB, Aphi, BA, BB, Bphi, phiA, phiB, phiphi.
struct QutritPairState {
    Mat9 rho = Mat9::Zero();
    int s = 1;
    ModelParams params;
    double t = 0.0;

    Mat3 reducedA() const {
        Mat3 r = Mat3::Zero();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int k = 0; k < 3; ++k) r(a, b) += rho(3 * a + k, 3 * b + k);
        return r;
    }
    Mat3 reducedB() const {
        Mat3 r = Mat3::Zero();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int k = 0; k < 3; ++k) r(a, b) += rho(3 * k + a, 3 * k + b);
        return r;
    }
};

namespace detail {

inline int mirrorSite(int label, int s) { return label == kA ? s : -s; }

// elem(x1,x2,x1',x2') with x in {+s,-s}; phiOn2(x1,x1') = sum_{c not in +-s} rho(x1,c;x1',c);
// phiOn1(x2,x2') likewise for particle 1; phiphi = weight with both particles off the mirror pair.
template <class Elem, class Phi2, class Phi1>
Mat9 assembleQutrit(int s, Elem elem, Phi2 phiOn2, Phi1 phiOn1, double phiphi) {
    Mat9 q = Mat9::Zero();
    for (int l1 = 0; l1 < 3; ++l1)
        for (int l2 = 0; l2 < 3; ++l2)
            for (int m1 = 0; m1 < 3; ++m1)
                for (int m2 = 0; m2 < 3; ++m2) {
                    const bool f1 = l1 == kPhi, g1 = m1 == kPhi, f2 = l2 == kPhi, g2 = m2 == kPhi;
                    if (f1 != g1 || f2 != g2) continue;  // phi on one side only
                    cplx v;
                    if (!f1 && !f2)
                        v = elem(mirrorSite(l1, s), mirrorSite(l2, s), mirrorSite(m1, s), mirrorSite(m2, s));
                    else if (!f1)
                        v = phiOn2(mirrorSite(l1, s), mirrorSite(m1, s));
                    else if (!f2)
                        v = phiOn1(mirrorSite(l2, s), mirrorSite(m2, s));
                    else
                        v = phiphi;
                    q(3 * l1 + l2, 3 * m1 + m2) = v;
                }
    return 0.5 * (q + q.adjoint());
}

}  // namespace detail

inline QutritPairState qutritReduce(const TwoBodyRho& rho, int s) {
    const int L = rho.window.L;
    if (s < 1) throw std::invalid_argument("qutritReduce: mirror index must be >= 1");
    if (s > L) throw std::out_of_range("qutritReduce: mirror index exceeds the window");
    auto off = [s](int c) { return c != s && c != -s; };
    auto phiOn2 = [&](int x, int xp) {
        cplx a = 0;
        for (int c = -L; c <= L; ++c)
            if (off(c)) a += rho(x, c, xp, c);
        return a;
    };
    auto phiOn1 = [&](int x, int xp) {
        cplx a = 0;
        for (int c = -L; c <= L; ++c)
            if (off(c)) a += rho(c, x, c, xp);
        return a;
    };
    double pp = 0;
    for (int c1 = -L; c1 <= L; ++c1)
        for (int c2 = -L; c2 <= L; ++c2)
            if (off(c1) && off(c2)) pp += rho(c1, c2, c1, c2).real();
    QutritPairState q;
    q.s = s;
    q.params = rho.meta.params;
    q.t = rho.meta.t;
    q.rho = detail::assembleQutrit(s, [&](int a, int b, int c, int d) { return rho(a, b, c, d); }, phiOn2, phiOn1, pp);
    return q;
}

// Rotated-frame source for mirror reductions without a dense lab matrix.
// Uses exchange symmetry: the one-body matrix is the same for both particles.
class MirrorSource {
public:
    MirrorSource(int sMax, double t, const ModelParams& p, const EngineOptions& o = {})
        : sMax_(sMax), t_(t), p_(p), eps_(o.eps) {
        const double tO = p.tOmega(t);
        B_ = rotationBand(tO, o.eps);
        r0_ = rotatedFrame(SiteWindow{sMax + B_, 1e-12}, t, p, o);
        J_ = besselJRow(std::max(B_, 1) + 2 * r0_.window.L + 1, tO);
    }

    int sMax() const { return sMax_; }
    const BlockRho& rotated() const { return r0_; }

    cplx element(int s1, int s2, int s1p, int s2p) const {
        return labElementFromRotated(r0_, J_, B_, s1, s2, s1p, s2p);
    }
    cplx oneBody(int s, int sp) const { return oneBodyElementSeries(s, sp, t_, p_, eps_).value; }

    QutritPairState reduce(int s) const {
        if (s < 1 || s > sMax_) throw std::out_of_range("MirrorSource::reduce: mirror index outside [1, sMax]");
        cplx E[2][2][2][2];
        auto k = [s](int x) { return x == s ? 0 : 1; };
        for (int a : {s, -s})
            for (int b : {s, -s})
                for (int c : {s, -s})
                    for (int d : {s, -s}) E[k(a)][k(b)][k(c)][k(d)] = element(a, b, c, d);
        auto elem = [&](int a, int b, int c, int d) { return E[k(a)][k(b)][k(c)][k(d)]; };
        auto phiOn2 = [&](int x, int xp) { return oneBody(x, xp) - elem(x, s, xp, s) - elem(x, -s, xp, -s); };
        auto phiOn1 = [&](int x, int xp) { return oneBody(x, xp) - elem(s, x, s, xp) - elem(-s, x, -s, xp); };
        double pp = 1.0;
        for (int a : {s, -s}) {
            pp -= 2.0 * oneBody(a, a).real();
            for (int b : {s, -s}) pp += elem(a, b, a, b).real();
        }
        QutritPairState q;
        q.s = s;
        q.params = p_;
        q.t = t_;
        q.rho = detail::assembleQutrit(s, elem, phiOn2, phiOn1, pp);
        return q;
    }

private:
    int sMax_, B_ = 0;
    double t_;
    ModelParams p_;
    double eps_;
    BlockRho r0_;
    BesselJRow J_;
};

struct BlochDecomposition {
    Eigen::Matrix<double, 8, 1> x = Eigen::Matrix<double, 8, 1>::Zero();
    Eigen::Matrix<double, 8, 1> y = Eigen::Matrix<double, 8, 1>::Zero();
    Eigen::Matrix<double, 8, 8> T = Eigen::Matrix<double, 8, 8>::Zero();
    double maxImag = 0.0;  // largest imaginary part dropped (Hermiticity check)
};

namespace detail {
inline Mat9 kron(const Mat3& a, const Mat3& b) {
    Mat9 k;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
    return k;
}
}  // namespace detail

inline BlochDecomposition blochDecompose(const QutritPairState& q) {
    static const auto g = gellMannBasis();
    BlochDecomposition b;
    const Mat3 rA = q.reducedA(), rB = q.reducedB();
    auto take = [&](cplx v) {
        b.maxImag = std::max(b.maxImag, std::abs(v.imag()));
        return v.real();
    };
    for (int i = 0; i < 8; ++i) {
        b.x(i) = 1.5 * take((rA * g[i]).trace());
        b.y(i) = 1.5 * take((rB * g[i]).trace());
        for (int j = 0; j < 8; ++j) b.T(i, j) = 2.25 * take((q.rho * detail::kron(g[i], g[j])).trace());
    }
    return b;
}

inline Mat9 reconstruct(const BlochDecomposition& b) {
    static const auto g = gellMannBasis();
    const Mat3 I3 = Mat3::Identity();
    Mat9 r = Mat9::Identity();
    for (int i = 0; i < 8; ++i) {
        r += b.x(i) * detail::kron(g[i], I3) + b.y(i) * detail::kron(I3, g[i]);
        for (int j = 0; j < 8; ++j) r += b.T(i, j) * detail::kron(g[i], g[j]);
    }
    return r / 9.0;
}

// (2/(m^2 n)) (|x|^2 + (2/n)|T|^2 - eta_1 - eta_2), m = n = 3; eta are the
// eigenvalues of x x^T + (2/3) T T^T in non-increasing order.
inline double gqdLowerBound(const BlochDecomposition& b) {
    const Eigen::Matrix<double, 8, 8> M = b.x * b.x.transpose() + (2.0 / 3.0) * b.T * b.T.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(M, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();  // ascending
    return (2.0 / 27.0) * (b.x.squaredNorm() + (2.0 / 3.0) * b.T.squaredNorm() - ev(7) - ev(6));
}

inline double gqdLowerBound(const QutritPairState& q) { return gqdLowerBound(blochDecompose(q)); }

struct MirrorGqd {
    double total = 0.0;       // (3/2) sum_s D_s
    std::vector<double> perS;  // raw D_s for s = 1..sUsed
    int sUsed = 0;
    bool anyNegative = false;
    double tailAtStop = 0.0;  // mass at |site| > sUsed
};

namespace detail {
template <class Reduce>
MirrorGqd mirrorSum(int sCap, const std::vector<double>& tail, double eps, Reduce reduce) {
    MirrorGqd out;
    CompensatedSum acc;
    for (int s = 1; s <= sCap; ++s) {
        if (tail[s] < eps) break;  // nothing left at |site| >= s
        const double d = gqdLowerBound(reduce(s));
        out.perS.push_back(d);
        out.anyNegative = out.anyNegative || d < 0;
        acc.add(d);
        out.sUsed = s;
    }
    out.tailAtStop = out.sUsed + 1 < int(tail.size()) ? tail[out.sUsed + 1] : 0.0;
    out.total = 1.5 * acc.value();
    return out;
}
}  // namespace detail

// Dense route; tail[s] is the mass at |site| >= s measured on the window diagonal.
inline MirrorGqd gqdTotalMirror(const TwoBodyRho& rho, double eps = 1e-10) {
    const int L = rho.window.L;
    const auto red = partialTrace(rho);
    std::vector<double> tail(L + 2, 0.0);
    for (int s = L; s >= 1; --s) tail[s] = tail[s + 1] + red(s, s).real() + red(-s, -s).real();
    tail[L + 1] = rho.meta.tailMass;
    return detail::mirrorSum(L, tail, eps, [&](int s) { return qutritReduce(rho, s); });
}

// Rotated-frame route: window chosen so the one-body mass beyond sMax is below eps.
inline MirrorGqd gqdTotalMirror(double t, const ModelParams& p, double eps = 1e-10, const EngineOptions& o = {}) {
    const auto wc = autoWindow(t, p, eps);
    const int sMax = wc.L;
    const auto P1 = oneBodyOccupation(sMax + 1, t, p, o.eps);
    std::vector<double> tail(sMax + 2, 0.0);
    tail[sMax + 1] = wc.tailMass;
    for (int s = sMax; s >= 1; --s) tail[s] = tail[s + 1] + 2.0 * P1[s];
    const MirrorSource src(sMax, t, p, o);
    return detail::mirrorSum(sMax, tail, eps, [&](int s) { return src.reduce(s); });
}

}  // namespace dqw
