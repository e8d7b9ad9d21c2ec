/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Momentum-grid route: sample exp(F t) on a uniform N^4 lattice and undo the
// four Fourier integrals with FFTs. Independent of every Bessel identity, so
// it serves as the oracle for the series engine.
//
// Nodes k_j = 2 pi j / N (the integrands are 2 pi periodic, and integer sites
// make e^{i k s} insensitive to the zone choice). Unprimed coordinates carry
// e^{+iks}, primed ones e^{-iks'}; FFTW_BACKWARD supplies the + sign and the
// primed sites are read at index -s' mod N.

#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dqw/rho.hpp"
#include "dqw/specfun.hpp"

namespace dqw {

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultMemoryBudget = 2.0 * 1024 * 1024 * 1024;  // bytes
inline constexpr int kDefaultGridN = 64;

namespace detail {

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
using FftwBuf = std::unique_ptr<fftw_complex[], FftwFree>;

inline FftwBuf fftwAlloc(size_t n) {
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (!p) throw ResourceError("fftw_malloc failed");
    return FftwBuf(p);
}

struct Plan {
    fftw_plan p = nullptr;
    explicit Plan(fftw_plan q) : p(q) {
        if (!p) throw std::runtime_error("FFTW planning failed");
    }
    ~Plan() { fftw_destroy_plan(p); }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    void run() const { fftw_execute(p); }
};

inline int wrap(int s, int N) { return ((s % N) + N) % N; }

inline void checkBudget(double bytes, double budget, const std::string& what) {
    if (bytes > budget) {
        std::ostringstream os;
        os << what << ": needs about " << bytes / (1024.0 * 1024.0) << " MiB, budget is " << budget / (1024.0 * 1024.0)
           << " MiB. Reduce the window L or the grid size, or raise memory_budget_mb.";
        throw ResourceError(os.str());
    }
}

// Core 4D transform. fill(j1, X) writes the N^3 slice X[j1'][j2][j2'] of the
// sampled propagator. Output element (s1,s2;s1',s2') receives the transform
// evaluated at sites shifted by (o1, o2).
template <class Fill>
void spectralCore(TwoBodyRho& out, int N, int o1, int o2, Fill&& fill) {
    const int L = out.window.L, n = out.window.dim();
    const size_t N3 = size_t(N) * N * N;
    auto buf = fftwAlloc(N3);
    Plan plan(fftw_plan_dft_3d(N, N, N, buf.get(), buf.get(), FFTW_BACKWARD, FFTW_ESTIMATE));
    std::vector<cplx> Z(size_t(n) * n * n);
    std::vector<cplx> w1(n);
    const size_t D = size_t(n) * n;
    for (int j1 = 0; j1 < N; ++j1) {
        fill(j1, reinterpret_cast<cplx*>(buf.get()));
        plan.run();
        const cplx* Y = reinterpret_cast<const cplx*>(buf.get());
        // Z[s1'][s2][s2'] = Y[-s1'][s2][-s2']
        for (int a = 0; a < n; ++a) {
            const int m1p = wrap(-(a - L - o1), N);
            for (int b = 0; b < n; ++b) {
                const int m2 = wrap(b - L - o2, N);
                for (int c = 0; c < n; ++c) {
                    const int m2p = wrap(-(c - L - o2), N);
                    Z[(size_t(a) * n + b) * n + c] = Y[(size_t(m1p) * N + m2) * N + m2p];
                }
            }
        }
        for (int s1 = 0; s1 < n; ++s1) {
            const double ang = 2.0 * M_PI * double(j1) * double(s1 - L - o1) / N;
            w1[s1] = cplx(std::cos(ang), std::sin(ang));
        }
        cplx* V = out.values.data();
        for (int a = 0; a < n; ++a)        // s1'
            for (int c = 0; c < n; ++c) {  // s2'
                const size_t col = size_t(a) * n + c;
                cplx* colp = V + col * D;
                for (int s1 = 0; s1 < n; ++s1) {
                    const cplx w = w1[s1];
                    cplx* rowp = colp + size_t(s1) * n;
                    for (int b = 0; b < n; ++b) rowp[b] += w * Z[(size_t(a) * n + b) * n + c];
                }
            }
    }
    out.values /= double(N) * N * N * N;
}

}  // namespace detail

inline double spectralMemoryEstimate(int L, int N) {
    const double n = 2.0 * L + 1;
    return 16.0 * (double(N) * N * N + n * n * n * n + n * n * n);
}

// Tail mass beyond |n| = N/2 at x = max(t_O, t_D): scaled-I mass plus J^2 mass.
inline double spectralAliasingBound(double tOmega, double tD, int N) {
    const double x = std::max(tOmega, tD);
    const int h = N / 2;
    return scaledBesselIRow(h, x).tail + besselJRow(h, x).tail;
}

inline TwoBodyRho rhoGridSpectral(const SiteWindow& w, int N, double t, const ModelParams& p,
                                  double memoryBudget = kDefaultMemoryBudget) {
    if (!(t >= 0.0)) throw std::domain_error("rhoGridSpectral: t must be >= 0");
    if (N < w.dim()) throw std::invalid_argument("rhoGridSpectral: gridN must be >= 2L+1");
    detail::checkBudget(spectralMemoryEstimate(w.L, N), memoryBudget, "rhoGridSpectral");
    const double tO = p.tOmega(t), tD = p.tD(t);
    RhoMeta meta{p, t, "spectral", 0.0};
    meta.aliasingBound = spectralAliasingBound(tO, tD, N);
    TwoBodyRho out(w, meta);

    std::vector<cplx> ph(N);
    std::vector<double> lt(N);
    for (int j = 0; j < N; ++j) {
        const double k = 2.0 * M_PI * j / N;
        ph[j] = cplx(std::cos(tO * std::cos(k)), std::sin(tO * std::cos(k)));
        lt[j] = tD * (std::cos(k) - 1.0);
    }
    auto L_ = [&](int d) { return lt[detail::wrap(d, N)]; };
    detail::spectralCore(out, N, 0, 0, [&](int j1, cplx* X) {
        for (int j1p = 0; j1p < N; ++j1p) {
            const cplx p1 = ph[j1] * std::conj(ph[j1p]);
            const double e1 = L_(j1 - j1p);
            for (int j2 = 0; j2 < N; ++j2) {
                const cplx p12 = p1 * ph[j2];
                const double e12 = e1 + L_(j2 - j1p) - L_(j1 - j2);
                cplx* x = X + (size_t(j1p) * N + j2) * N;
                for (int j2p = 0; j2p < N; ++j2p) {
                    const double e = e12 + L_(j2 - j2p) + L_(j1 - j2p) - L_(j1p - j2p);
                    x[j2p] = std::exp(e) * (p12 * std::conj(ph[j2p]));
                }
            }
        }
    });
    out.meta.tailMass = std::max(0.0, 1.0 - out.values.trace().real());
    return out;
}

inline int niceFftSize(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int r = m;
        for (int f : {2, 3, 5})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

// Omega = 0 rotated-frame matrix by a 3D transform:
//   rho0(s1,s2;s1',s2') = G(s1', s2', s2'-s2),
//   G(a,b,c) = (2 pi)^-3 int e^{i(ua+vb+wc)} exp(t_D R(u,v,w)),
//   R = cos u + cos v + cos(w+v) + cos(u-w) - cos w - cos(w+v-u) - 2.
// gridN <= 0 picks a size covering c in [-2P, 2P] without wrap.
inline BlockRho omegaZeroSpectral(const SiteWindow& w, double t, const ModelParams& p, int gridN = 0,
                                  double memoryBudget = kDefaultMemoryBudget, double* imagResidual = nullptr) {
    const double tD = p.tD(t);
    const int P = w.L, m = w.dim();
    const int N = gridN > 0 ? gridN : niceFftSize(4 * P + 16);
    if (N < 4 * P + 1) throw std::invalid_argument("omegaZeroSpectral: gridN must be >= 4L+1");
    detail::checkBudget(16.0 * (double(N) * N + double(N) * m * m + 2.0 * N), memoryBudget, "omegaZeroSpectral");
    RhoMeta meta{p, t, "rotated", 0.0};
    meta.aliasingBound = spectralAliasingBound(0.0, tD, N / 2);
    BlockRho out(w, meta);

    std::vector<double> cs(N);
    for (int j = 0; j < N; ++j) cs[j] = std::cos(2.0 * M_PI * j / N);
    auto C = [&](int d) { return cs[detail::wrap(d, N)]; };

    auto slice = detail::fftwAlloc(size_t(N) * N);
    detail::Plan plan2(fftw_plan_dft_2d(N, N, slice.get(), slice.get(), FFTW_BACKWARD, FFTW_ESTIMATE));
    auto line = detail::fftwAlloc(N);
    detail::Plan plan1(fftw_plan_dft_1d(N, line.get(), line.get(), FFTW_BACKWARD, FFTW_ESTIMATE));

    // Z[jw][a][b]
    std::vector<cplx> Z(size_t(N) * m * m);
    for (int jw = 0; jw < N; ++jw) {
        cplx* X = reinterpret_cast<cplx*>(slice.get());
        for (int ju = 0; ju < N; ++ju)
            for (int jv = 0; jv < N; ++jv) {
                const double r = C(ju) + C(jv) + C(jw + jv) + C(ju - jw) - C(jw) - C(jw + jv - ju) - 2.0;
                X[size_t(ju) * N + jv] = std::exp(tD * r);
            }
        plan2.run();
        for (int a = -P; a <= P; ++a)
            for (int b = -P; b <= P; ++b)
                Z[(size_t(jw) * m + (a + P)) * m + (b + P)] =
                    X[size_t(detail::wrap(a, N)) * N + detail::wrap(b, N)];
    }
    const double norm = 1.0 / (double(N) * N * N);
    double imag = 0.0;
    cplx* lp = reinterpret_cast<cplx*>(line.get());
    for (int a = -P; a <= P; ++a)
        for (int b = -P; b <= P; ++b) {
            for (int jw = 0; jw < N; ++jw) lp[jw] = Z[(size_t(jw) * m + (a + P)) * m + (b + P)];
            plan1.run();
            // element (s1, s2; s1'=a, s2'=b) has c = b - s2 = s1 - a
            const int n = a + b;
            for (int s1 = out.lo(n); s1 <= out.hi(n); ++s1) {
                const cplx g = lp[detail::wrap(s1 - a, N)] * norm;
                imag = std::max(imag, std::abs(g.imag()));
                out.at(s1, n - s1, a) = g.real();
            }
        }
    for (auto& b : out.blocks) b = 0.5 * (b + b.transpose()).eval();
    if (imagResidual) *imagResidual = imag;
    out.meta.tailMass = std::max(0.0, 1.0 - out.trace());
    return out;
}

}  // namespace dqw
