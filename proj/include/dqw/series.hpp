/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Bessel-series engine for the two-particle density matrix.
//
// Every modified Bessel factor enters scaled, Ĩ_n = e^{-t_D} I_n(t_D); six of
// them against e^{-2 t_D} leave a net e^{4 t_D} that the alternating sums
// must cancel. Each result carries the sum of |terms| so the caller can see
// how much of that headroom survived.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dqw/numeric.hpp"
#include "dqw/rho.hpp"
#include "dqw/specfun.hpp"

namespace dqw {

struct SeriesValue {
    cplx value = 0.0;
    double absSum = 0.0;         // sum of |terms| including inner sums
    double errorEstimate = 0.0;  // rounding estimate from absSum
    bool degraded = false;       // errorEstimate above requested budget
    double partialPeak = 0.0;    // largest running outer partial sum (six-index series only)

    double cancellationRatio() const {
        const double v = std::abs(value);
        return v > 0 ? absSum / v : 0.0;
    }
    double partialPeakRatio() const {
        const double v = std::abs(value);
        return v > 0 ? partialPeak / v : 0.0;
    }
};

inline constexpr double kDefaultEps = 1e-13;
inline constexpr double kDefaultBudget = 1e-9;

namespace detail {

inline void checkTime(double t, double eps) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::domain_error("time must be finite and >= 0");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must be in (0,1)");
}

inline SeriesValue finish(cplx v, double absSum, int factors, double budget) {
    SeriesValue r;
    r.value = v;
    r.absSum = absSum;
    r.errorEstimate = roundingEstimate(absSum, factors);
    r.degraded = r.errorEstimate > budget;
    return r;
}

// Dense 2D table over [x0, x0+nx) x [y0, y0+ny).
struct Table2 {
    int x0 = 0, y0 = 0, nx = 0, ny = 0;
    std::vector<double> v, a;
    Table2() = default;
    Table2(int x0_, int nx_, int y0_, int ny_) : x0(x0_), y0(y0_), nx(nx_), ny(ny_), v(size_t(nx_) * ny_), a(size_t(nx_) * ny_) {}
    bool in(int x, int y) const { return x >= x0 && x < x0 + nx && y >= y0 && y < y0 + ny; }
    size_t off(int x, int y) const { return size_t(x - x0) * ny + (y - y0); }
};

}  // namespace detail

// <s|rho1|s'> = i^{s-s'} sum_n J_{s+n}(t_O) J_{s'+n}(t_O) Ĩ_n(t_D)
inline SeriesValue oneBodyElementSeries(int s, int sp, double t, const ModelParams& p, double eps = kDefaultEps,
                                        double budget = kDefaultBudget) {
    detail::checkTime(t, eps);
    const double tO = p.tOmega(t), tD = p.tD(t);
    const int N = truncationOrder(tD, eps);
    const auto I = scaledBesselIRow(N, tD);
    const auto J = besselJRow(std::max(std::abs(s), std::abs(sp)) + N + truncationOrder(tO, eps), tO);
    CompensatedSum acc;
    for (int n = -N; n <= N; ++n) acc.add(J(s + n) * J(sp + n) * I(n));
    return detail::finish(ipow(s - sp) * acc.value(), acc.absSum, 3, budget);
}

inline OneBodyRho oneBodyMatrixSeries(const SiteWindow& w, double t, const ModelParams& p, double eps = kDefaultEps) {
    RhoMeta meta{p, t, "series", eps};
    OneBodyRho out(w, meta);
    for (int s = -w.L; s <= w.L; ++s)
        for (int sp = -w.L; sp <= w.L; ++sp) {
            const auto v = oneBodyElementSeries(s, sp, t, p, eps);
            out.values(w.idx(s), w.idx(sp)) = v.value;
            out.meta.errorEstimate = std::max(out.meta.errorEstimate, v.errorEstimate);
            out.meta.degraded = out.meta.degraded || v.degraded;
        }
    out.meta.tailMass = std::max(0.0, 1.0 - out.values.trace().real());
    return out;
}

// Six-index series, literal form. The alternating pairs (n4, n5) are summed
// first through A(a,b) = sum_n (-1)^n Ĩ_n J_{a+n} J_{b-n}; the remaining
// n1, n2, n3, n6 sum then multiplies two A values.
inline SeriesValue rhoElementSeries(int s1, int s2, int s1p, int s2p, double t, const ModelParams& p,
                                    double eps = kDefaultEps, double budget = kDefaultBudget) {
    detail::checkTime(t, eps);
    const double tO = p.tOmega(t), tD = p.tD(t);
    if (tD == 0.0) {
        const double v = besselJ(s1, tO) * besselJ(s1p, tO) * besselJ(s2, tO) * besselJ(s2p, tO);
        return detail::finish(ipow(s1 + s2 - s1p - s2p) * v, std::abs(v), 4, budget);
    }
    const int N = truncationOrder(tO + tD, eps);
    const auto I = scaledBesselIRow(N, tD);
    const int maxS = std::max({std::abs(s1), std::abs(s2), std::abs(s1p), std::abs(s2p)});
    const auto J = besselJRow(maxS + 4 * N + 2, tO);

    auto buildA = [&](int a0, int b0) {
        detail::Table2 A(a0 - 2 * N, 4 * N + 1, b0 - 2 * N, 4 * N + 1);
        for (int a = A.x0; a < A.x0 + A.nx; ++a)
            for (int b = A.y0; b < A.y0 + A.ny; ++b) {
                CompensatedSum acc;
                for (int n = -N; n <= N; ++n) acc.add(signPow(n) * I(n) * J(a + n) * J(b - n));
                A.v[A.off(a, b)] = acc.value();
                A.a[A.off(a, b)] = acc.absSum;
            }
        return A;
    };
    const auto A1 = buildA(s1, s2);
    const auto A2 = buildA(s1p, s2p);

    CompensatedSum acc;
    double absSum = 0.0, peak = 0.0;
    for (int n1 = -N; n1 <= N; ++n1)
        for (int n2 = -N; n2 <= N; ++n2) {
            const double w12 = I(n1) * I(n2);
            for (int n3 = -N; n3 <= N; ++n3) {
                const double w123 = w12 * I(n3);
                const size_t r1 = size_t(n1 + n2 + 2 * N) * A1.ny, r2 = size_t(n1 + n3 + 2 * N) * A2.ny;
                for (int n6 = -N; n6 <= N; ++n6) {
                    const double w = w123 * I(n6);
                    const size_t c1 = r1 + (n3 + n6 + 2 * N), c2 = r2 + (n2 + n6 + 2 * N);
                    acc.add(w * A1.v[c1] * A2.v[c2]);
                    absSum += w * A1.a[c1] * A2.a[c2];
                }
                peak = std::max(peak, std::abs(acc.sum));
            }
        }
    const double scale = std::exp(4.0 * tD);
    auto r = detail::finish(ipow(s1 + s2 - s1p - s2p) * (scale * acc.value()), scale * absSum, 8, budget);
    r.partialPeak = scale * peak;
    return r;
}

// Omega = 0 element, three-index form with the s1+s2 = s1'+s2' constraint.
inline SeriesValue rhoElementOmegaZero(int s1, int s2, int s1p, int s2p, double t, const ModelParams& p,
                                       double eps = kDefaultEps, double budget = kDefaultBudget) {
    detail::checkTime(t, eps);
    if (s1 + s2 != s1p + s2p) return {};
    const double tD = p.tD(t);
    if (tD == 0.0) return detail::finish((s1 == 0 && s2 == 0 && s1p == 0) ? 1.0 : 0.0, 1.0, 1, budget);
    const int N = truncationOrder(tD, eps);
    const auto I = scaledBesselIRow(N, tD);
    CompensatedSum acc;
    for (int n1 = -N; n1 <= N; ++n1)
        for (int n2 = -N; n2 <= N; ++n2) {
            const double w = signPow(n1 + n2) * I(n1) * I(n2);
            if (w == 0.0) continue;
            for (int n3 = -N; n3 <= N; ++n3)
                acc.add(w * I(n3) * I(s1 + n1 + n3) * I(-s2 + n2 + n3) * I(s1 - s1p + n1 + n2 + n3));
        }
    const double scale = std::exp(4.0 * tD);
    return detail::finish(signPow(s1 + s1p) * scale * acc.value(), scale * acc.absSum, 6, budget);
}

// Full Omega = 0 matrix on a window, re-associated as
//   rho0(s1, s2; s1', .) = e^{4 t_D} sum_a Ĩ_a H(s1+a, s2-s1'-a, s1'+a)
//   H(x,y,z) = sum_f (-1)^f Ĩ_f Ĩ_{z-f} G(x, y+f)
//   G(x,y)   = sum_e (-1)^e Ĩ_e Ĩ_{x+e} Ĩ_{y-e}
// which costs O(N^4 + L^3 N) instead of O(L^3 N^3).
inline BlockRho omegaZeroBlockSeries(const SiteWindow& w, double t, const ModelParams& p, double eps = kDefaultEps,
                                     double budget = kDefaultBudget) {
    detail::checkTime(t, eps);
    RhoMeta meta{p, t, "rotated", eps};
    BlockRho out(w, meta);
    const double tD = p.tD(t);
    if (tD == 0.0) {
        out.at(0, 0, 0) = 1.0;
        return out;
    }
    const int N = truncationOrder(tD, eps);
    const auto I = scaledBesselIRow(N, tD);

    detail::Table2 G(-2 * N, 4 * N + 1, -2 * N, 4 * N + 1);
    for (int x = G.x0; x < G.x0 + G.nx; ++x)
        for (int y = G.y0; y < G.y0 + G.ny; ++y) {
            CompensatedSum acc;
            for (int e = -N; e <= N; ++e) acc.add(signPow(e) * I(e) * I(x + e) * I(y - e));
            G.v[G.off(x, y)] = acc.value();
            G.a[G.off(x, y)] = acc.absSum;
        }

    // H over x in [-2N,2N], y in [-3N,3N], z in [-2N,2N]
    const int hx = 4 * N + 1, hy = 6 * N + 1, hz = 4 * N + 1;
    std::vector<double> H(size_t(hx) * hy * hz), Ha(H.size());
    auto hoff = [&](int x, int y, int z) { return (size_t(x + 2 * N) * hy + (y + 3 * N)) * hz + (z + 2 * N); };
    for (int x = -2 * N; x <= 2 * N; ++x)
        for (int y = -3 * N; y <= 3 * N; ++y)
            for (int z = -2 * N; z <= 2 * N; ++z) {
                CompensatedSum acc;
                double ab = 0.0;
                for (int f = std::max(-N, z - N); f <= std::min(N, z + N); ++f) {
                    if (!G.in(x, y + f)) continue;
                    const double wgt = I(f) * I(z - f);
                    acc.add(signPow(f) * wgt * G.v[G.off(x, y + f)]);
                    ab += wgt * G.a[G.off(x, y + f)];
                }
                H[hoff(x, y, z)] = acc.value();
                Ha[hoff(x, y, z)] = ab;
            }

    const double scale = std::exp(4.0 * tD);
    double worstErr = 0.0;
    for (int n = -2 * w.L; n <= 2 * w.L; ++n) {
        auto& blk = out.block(n);
        const int lo = out.lo(n);
        for (int i = 0; i < blk.rows(); ++i)
            for (int j = 0; j < blk.cols(); ++j) {
                const int s1 = lo + i, s2 = n - s1, s1p = lo + j;
                CompensatedSum acc;
                double ab = 0.0;
                for (int a = -N; a <= N; ++a) {
                    const int x = s1 + a, y = s2 - s1p - a, z = s1p + a;
                    if (std::abs(x) > 2 * N || std::abs(y) > 3 * N || std::abs(z) > 2 * N) continue;
                    acc.add(I(a) * H[hoff(x, y, z)]);
                    ab += I(a) * Ha[hoff(x, y, z)];
                }
                blk(i, j) = scale * acc.value();
                worstErr = std::max(worstErr, roundingEstimate(scale * ab, 9));
            }
    }
    // the table path lands on the same bits for (i,j) and (j,i) only up to
    // rounding; restore exact symmetry
    for (auto& b : out.blocks) b = 0.5 * (b + b.transpose()).eval();
    out.meta.errorEstimate = worstErr;
    out.meta.degraded = worstErr > budget;
    out.meta.tailMass = std::max(0.0, 1.0 - out.trace());
    return out;
}

// Rotation back to the lab frame, rho = U_a rho0 U_a^dagger with
// (U_a)_{(s1 s2),(a b)} = i^{s1+s2+a+b} J_{s1-a}(t_O) J_{s2-b}(t_O).
// All J factors and rho0 are real; the phase collapses to i^{s1+s2-s1'-s2'}.
inline int rotationBand(double tOmega, double eps) { return tOmega == 0.0 ? 0 : truncationOrder(tOmega, eps); }

inline TwoBodyRho labFromRotated(const BlockRho& r0, int L, double tOmega, double eps = kDefaultEps) {
    const int B = rotationBand(tOmega, eps);
    const int P = r0.window.L;
    if (P < L + B) throw std::runtime_error("labFromRotated: rotated window too small for the requested lab window");
    SiteWindow w{L, r0.window.tailEps};
    RhoMeta meta = r0.meta;
    meta.engine = "series";
    TwoBodyRho out(w, meta);
    const int n = w.dim();
    const auto J = besselJRow(std::max(B, 1) + 2 * P + 1, tOmega);

    std::vector<double> R(size_t(n) * n * n * n, 0.0);
    std::vector<double> T2(size_t(2 * P + 1) * n * n), T3(size_t(n) * n * n);
    for (int a = -P; a <= P; ++a) {
        if (a < -L - B || a > L + B) continue;
        std::fill(T2.begin(), T2.end(), 0.0);
        for (int b = -P; b <= P; ++b) {
            const int bn = a + b;
            const auto& blk = r0.block(bn);
            const int lo = r0.lo(bn), hi = r0.hi(bn);
            double* t2 = &T2[size_t(b + P) * n * n];
            for (int s1p = -L; s1p <= L; ++s1p)
                for (int c = std::max(lo, s1p - B); c <= std::min(hi, s1p + B); ++c) {
                    const double v = blk(a - lo, c - lo) * J(s1p - c);
                    if (v == 0.0) continue;
                    const int d = bn - c;
                    for (int s2p = std::max(-L, d - B); s2p <= std::min(L, d + B); ++s2p)
                        t2[(s1p + L) * n + (s2p + L)] += v * J(s2p - d);
                }
        }
        std::fill(T3.begin(), T3.end(), 0.0);
        for (int s2 = -L; s2 <= L; ++s2)
            for (int b = std::max(-P, s2 - B); b <= std::min(P, s2 + B); ++b) {
                const double jb = J(s2 - b);
                const double* t2 = &T2[size_t(b + P) * n * n];
                double* t3 = &T3[size_t(s2 + L) * n * n];
                for (int k = 0; k < n * n; ++k) t3[k] += jb * t2[k];
            }
        for (int s1 = std::max(-L, a - B); s1 <= std::min(L, a + B); ++s1) {
            const double ja = J(s1 - a);
            double* r = &R[size_t(s1 + L) * n * n * n];
            for (size_t k = 0; k < size_t(n) * n * n; ++k) r[k] += ja * T3[k];
        }
    }
    for (int s1 = -L; s1 <= L; ++s1)
        for (int s2 = -L; s2 <= L; ++s2)
            for (int s1p = -L; s1p <= L; ++s1p)
                for (int s2p = -L; s2p <= L; ++s2p) {
                    const double v = R[((size_t(s1 + L) * n + (s2 + L)) * n + (s1p + L)) * n + (s2p + L)];
                    out.at(s1, s2, s1p, s2p) = ipow(s1 + s2 - s1p - s2p) * v;
                }
    out.values = 0.5 * (out.values + out.values.adjoint()).eval();
    out.meta.tailMass = std::max(0.0, 1.0 - out.values.trace().real());
    return out;
}

// Single lab-frame element from the rotated frame, banded sum over a, b, c.
inline cplx labElementFromRotated(const BlockRho& r0, const BesselJRow& J, int B, int s1, int s2, int s1p, int s2p) {
    const int P = r0.window.L;
    CompensatedSum acc;
    for (int a = std::max(-P, s1 - B); a <= std::min(P, s1 + B); ++a)
        for (int b = std::max(-P, s2 - B); b <= std::min(P, s2 + B); ++b) {
            const int n = a + b;
            const double jab = J(s1 - a) * J(s2 - b);
            for (int c = std::max(-P, s1p - B); c <= std::min(P, s1p + B); ++c) {
                const int d = n - c;
                if (d < -P || d > P || std::abs(s2p - d) > B) continue;
                acc.add(jab * J(s1p - c) * J(s2p - d) * r0(a, b, c, d));
            }
        }
    return ipow(s1 + s2 - s1p - s2p) * acc.value();
}

// Diagonal of the lab-frame matrix: P(s1,s2) = sum_{a,c} J_{s1-a} J_{s1-c} M_{s2}(a,c),
// M_{s2}(a,c) = sum_b J_{s2-b} J_{s2-a-b+c} rho0(a,b;c,a+b-c).
inline Eigen::MatrixXd profileFromRotated(const BlockRho& r0, int L, double tOmega, double eps = kDefaultEps) {
    const int B = rotationBand(tOmega, eps);
    const int P = r0.window.L;
    if (P < L + B) throw std::runtime_error("profileFromRotated: rotated window too small");
    const auto J = besselJRow(std::max(B, 1) + 2 * P + 1, tOmega);
    const int n = 2 * L + 1, m = 2 * P + 1;
    Eigen::MatrixXd prof(n, n);
    std::vector<double> M(size_t(m) * m);
    for (int s2 = -L; s2 <= L; ++s2) {
        std::fill(M.begin(), M.end(), 0.0);
        for (int b = std::max(-P, s2 - B); b <= std::min(P, s2 + B); ++b)
            for (int a = -P; a <= P; ++a) {
                const int nb = a + b;
                for (int d = std::max(-P, s2 - B); d <= std::min(P, s2 + B); ++d) {
                    const int c = nb - d;
                    if (c < -P || c > P) continue;
                    M[size_t(a + P) * m + (c + P)] += J(s2 - b) * J(s2 - d) * r0(a, b, c, d);
                }
            }
        for (int s1 = -L; s1 <= L; ++s1) {
            double acc = 0.0;
            for (int a = std::max(-P, s1 - B); a <= std::min(P, s1 + B); ++a)
                for (int c = std::max(-P, s1 - B); c <= std::min(P, s1 + B); ++c)
                    acc += J(s1 - a) * J(s1 - c) * M[size_t(a + P) * m + (c + P)];
            prof(s1 + L, s2 + L) = acc;
        }
    }
    return prof;
}

// Dense lab-frame matrix from the series route.
inline TwoBodyRho rhoMatrixSeries(const SiteWindow& w, double t, const ModelParams& p, double eps = kDefaultEps,
                                  double budget = kDefaultBudget) {
    const double tO = p.tOmega(t);
    const int B = rotationBand(tO, eps);
    const auto r0 = omegaZeroBlockSeries(SiteWindow{w.L + B, w.tailEps}, t, p, eps, budget);
    auto out = labFromRotated(r0, w.L, tO, eps);
    out.window.tailEps = w.tailEps;
    out.meta.errorEstimate = r0.meta.errorEstimate;
    out.meta.degraded = r0.meta.degraded;
    return out;
}

}  // namespace dqw
