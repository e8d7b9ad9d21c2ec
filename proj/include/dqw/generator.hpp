/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Fourier-space generator of the two-particle dissipative walk. Rates carry
// hbar; the bath cutoff frequency is fixed at zero.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace dqw {

using cplx = std::complex<double>;

struct ModelParams {
    double omegaRate = 1.0;  // Omega / hbar
    double dRate = 0.0;      // D

    double tOmega(double t) const { return omegaRate * t; }
    double tD(double t) const { return 2.0 * dRate * t; }
    // r_D = 2D / (Omega/hbar); undefined without hopping
    double rD() const {
        if (omegaRate <= 0.0) throw std::domain_error("r_D undefined at Omega = 0");
        return 2.0 * dRate / omegaRate;
    }
    bool strongDissipation() const { return omegaRate <= 0.0; }

    void validate() const {
        if (!(omegaRate >= 0.0) || !(dRate >= 0.0) || !std::isfinite(omegaRate) || !std::isfinite(dRate))
            throw std::invalid_argument("ModelParams: rates must be finite and >= 0");
    }

    // Unit hopping rate, so t equals t' = t_Omega.
    static ModelParams fromRatio(double rD) { return {1.0, 0.5 * rD}; }
    // Pure dissipation, so t equals t_D.
    static ModelParams omegaZero() { return {0.0, 0.5}; }
    // Absolute dimensionless times realised at t = 1.
    static ModelParams fromTimes(double tOmega, double tD) { return {tOmega, 0.5 * tD}; }

    bool operator==(const ModelParams&) const = default;
};

struct MomentumQuad {
    double k1 = 0, k1p = 0, k2 = 0, k2p = 0;
};

inline double dispersion(double k, const ModelParams& p) { return p.omegaRate * (1.0 - std::cos(k)); }

inline double coupling(double ka, double kb) { return std::cos(ka - kb); }

inline cplx onePartGen(double k, double kp, const ModelParams& p) {
    const double phase = -(dispersion(k, p) - dispersion(kp, p));
    return {2.0 * p.dRate * (coupling(k, kp) - 1.0), phase};
}

inline double interactionGen(const MomentumQuad& q, const ModelParams& p) {
    return 2.0 * p.dRate *
           (coupling(q.k1, q.k2p) + coupling(q.k2, q.k1p) - coupling(q.k1, q.k2) - coupling(q.k1p, q.k2p));
}

inline cplx twoPartGen(const MomentumQuad& q, const ModelParams& p) {
    return onePartGen(q.k1, q.k1p, p) + onePartGen(q.k2, q.k2p, p) + interactionGen(q, p);
}

inline cplx propagatorK(const MomentumQuad& q, double t, const ModelParams& p) {
    if (t < 0.0) throw std::domain_error("propagatorK: t must be >= 0");
    if (t == 0.0) return 1.0;
    const cplx f = twoPartGen(q, p) * t;
    // Re F <= 0 analytically; rounding can leave it at +1e-16
    return std::exp(std::min(f.real(), 0.0)) * cplx(std::cos(f.imag()), std::sin(f.imag()));
}

}  // namespace dqw
