/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Dynamic change of basis U_a and the spectra it exposes.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "dqw/rho.hpp"
#include "dqw/series.hpp"
#include "dqw/specfun.hpp"

namespace dqw {

struct TailLossError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// out = K applied on one axis of a rank-4 tensor; K has shape (nOut x nIn)
// and is banded: entry (a, s) lives at J(s - a) for |s - a| <= B.
inline std::vector<cplx> contractAxis(const std::vector<cplx>& in, const int dims[4], int axis, int Lin, int Lout,
                                      const BesselJRow& J, int B) {
    int od[4] = {dims[0], dims[1], dims[2], dims[3]};
    od[axis] = 2 * Lout + 1;
    std::vector<cplx> out(size_t(od[0]) * od[1] * od[2] * od[3], cplx(0));
    size_t inner = 1;
    for (int k = axis + 1; k < 4; ++k) inner *= dims[k];
    size_t outer = 1;
    for (int k = 0; k < axis; ++k) outer *= dims[k];
    const int nin = dims[axis], nout = od[axis];
    for (size_t o = 0; o < outer; ++o)
        for (int a = -Lout; a <= Lout; ++a) {
            cplx* dst = &out[(o * nout + (a + Lout)) * inner];
            for (int s = std::max(-Lin, a - B); s <= std::min(Lin, a + B); ++s) {
                const double k = J(s - a);
                const cplx* src = &in[(o * nin + (s + Lin)) * inner];
                for (size_t i = 0; i < inner; ++i) dst[i] += k * src[i];
            }
        }
    return out;
}

}  // namespace detail

// U_a^dagger rho U_a on the shrunken window L - B, B = truncationOrder(t_O, eps).
inline TwoBodyRho uaTransform(const TwoBodyRho& rho, double t, const ModelParams& p, double eps = kDefaultEps) {
    const double tO = p.tOmega(t);
    const int L = rho.window.L;
    if (tO == 0.0) return rho;
    const int B = truncationOrder(tO, eps);
    const int Lo = L - B;
    if (Lo < 1) throw TailLossError("uaTransform: window too small for the U_a band (need L > truncationOrder(t_Omega))");
    const auto J = besselJRow(B, tO);

    // unitarity of the truncated map on the kept rows
    double uerr = 0.0;
    for (int a = -Lo; a <= Lo; ++a)
        for (int c = -Lo; c <= Lo; ++c) {
            double acc = 0.0;
            for (int s = -L; s <= L; ++s) acc += J(s - a) * J(s - c);
            uerr = std::max(uerr, std::abs(acc - (a == c ? 1.0 : 0.0)));
        }
    if (uerr > 1e-8) throw TailLossError("uaTransform: truncated U_a not unitary to 1e-8; enlarge the padding");

    const int n = rho.window.dim();
    std::vector<cplx> T(size_t(n) * n * n * n);
    for (int s1 = -L; s1 <= L; ++s1)
        for (int s2 = -L; s2 <= L; ++s2)
            for (int s1p = -L; s1p <= L; ++s1p)
                for (int s2p = -L; s2p <= L; ++s2p)
                    T[((size_t(s1 + L) * n + (s2 + L)) * n + (s1p + L)) * n + (s2p + L)] =
                        ipow(-(s1 + s2 - s1p - s2p)) * rho(s1, s2, s1p, s2p);
    int dims[4] = {n, n, n, n};
    for (int ax = 0; ax < 4; ++ax) {
        T = detail::contractAxis(T, dims, ax, L, Lo, J, B);
        dims[ax] = 2 * Lo + 1;
    }
    SiteWindow wo{Lo, rho.window.tailEps};
    RhoMeta meta = rho.meta;
    meta.engine = "rotated";
    TwoBodyRho out(wo, meta);
    const int m = wo.dim();
    for (int a = -Lo; a <= Lo; ++a)
        for (int b = -Lo; b <= Lo; ++b)
            for (int c = -Lo; c <= Lo; ++c)
                for (int d = -Lo; d <= Lo; ++d)
                    out.at(a, b, c, d) = ipow(a + b - c - d) *
                                         T[((size_t(a + Lo) * m + (b + Lo)) * m + (c + Lo)) * m + (d + Lo)];
    out.meta.tailMass = std::max(0.0, 1.0 - out.values.trace().real());
    return out;
}

// Largest element outside the s1 + s2 = s1' + s2' blocks.
inline double offBlockResidual(const TwoBodyRho& r) {
    const int L = r.window.L;
    double m = 0.0;
    for (int a = -L; a <= L; ++a)
        for (int b = -L; b <= L; ++b)
            for (int c = -L; c <= L; ++c)
                for (int d = -L; d <= L; ++d)
                    if (a + b != c + d) m = std::max(m, std::abs(r(a, b, c, d)));
    return m;
}

inline BlockRho blocksFromDense(const TwoBodyRho& r) {
    BlockRho out(r.window, r.meta);
    const int L = r.window.L;
    for (int n = -2 * L; n <= 2 * L; ++n)
        for (int s1 = out.lo(n); s1 <= out.hi(n); ++s1)
            for (int s1p = out.lo(n); s1p <= out.hi(n); ++s1p) out.at(s1, n - s1, s1p) = r(s1, n - s1, s1p, n - s1p).real();
    return out;
}

struct TwoBodySpectrum {
    std::vector<double> values;  // non-increasing
    std::vector<int> block;      // s1 + s2 of the block each value came from
    double offBlockResidual = 0.0;
};

inline TwoBodySpectrum twoBodyEigen(const BlockRho& r) {
    TwoBodySpectrum sp;
    std::vector<std::pair<double, int>> all;
    const int L = r.window.L;
    for (int n = -2 * L; n <= 2 * L; ++n) {
        const auto& b = r.block(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
        for (int i = 0; i < es.eigenvalues().size(); ++i) all.emplace_back(es.eigenvalues()(i), n);
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    for (auto& [v, n] : all) {
        sp.values.push_back(v);
        sp.block.push_back(n);
    }
    return sp;
}

inline TwoBodySpectrum twoBodyEigen(const TwoBodyRho& rho, double eps = kDefaultEps) {
    if (hermiticityError(rho.values) > 1e-8) throw ValidationError("twoBodyEigen: input not Hermitian to 1e-8");
    const auto rot = uaTransform(rho, rho.meta.t, rho.meta.params, eps);
    auto sp = twoBodyEigen(blocksFromDense(rot));
    sp.offBlockResidual = offBlockResidual(rot);
    return sp;
}

inline double oneBodyEigenAnalytic(int n, double tD) { return besselIScaled(n, tD); }

inline std::vector<double> eigenvaluesDescending(const Eigen::MatrixXcd& m) {
    const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(v.begin(), v.end(), std::greater<>());
    return v;
}

// |x - y| <= rel * max(|x|, |y|), with an absolute floor for values at noise level.
inline bool degenerate(double x, double y, double rel = 1e-9, double absFloor = 1e-13) {
    return std::abs(x - y) <= std::max(rel * std::max(std::abs(x), std::abs(y)), absFloor);
}

}  // namespace dqw
