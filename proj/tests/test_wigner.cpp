/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dqw/engine.hpp"
#include "dqw/observables.hpp"
#include "dqw/wigner.hpp"

using namespace dqw;
using Catch::Approx;

namespace {

double stdJ(int n, double x) {
    const double v = std::cyl_bessel_j(double(std::abs(n)), std::abs(x));
    const bool odd = n & 1;
    return v * ((n < 0 && odd) ? -1 : 1) * ((x < 0 && odd) ? -1 : 1);
}

constexpr double kNorm = 1.0 / (4 * M_PI * M_PI);

TwoBodyRho denseOnAutoWindow(double tO, double tD, double tailEps) {
    const auto p = ModelParams::fromTimes(tO, tD);
    const auto wc = autoWindow(1.0, p, tailEps);
    auto r = rhoMatrixSeries({wc.L, tailEps}, 1.0, p);
    r.meta.tailMass = std::max(0.0, 1.0 - r.values.trace().real());
    return r;
}

}  // namespace

TEST_CASE("Wigner at t = 0 is flat at the origin") {
    const auto r = rhoMatrixSeries({2}, 0.0, {1.0, 0.5});
    const auto w = wignerFromRho(r, 16);
    for (int m1 = -4; m1 <= 4; ++m1)
        for (int m2 = -4; m2 <= 4; ++m2)
            for (int j = 0; j < 16 * 16; ++j) {
                const double v = w.slice(m1, m2)[j];
                if (m1 == 0 && m2 == 0) CHECK(v == Approx(kNorm).epsilon(1e-14));
                else CHECK(std::abs(v) < 1e-16);
                CHECK(v >= -1e-16);
            }
    CHECK(negativeVolume(w) == Approx(0.0).margin(1e-14));
    const auto s = WignerSeries(0.0, {1.0, 0.5});
    CHECK(s(0.3, -1.2, 0, 0).value.real() == Approx(kNorm));
    CHECK(std::abs(s(0.3, -1.2, 1, 0).value) < 1e-16);
    CHECK(std::abs(inverseReconstruct(w, 0, 0, 0, 0) - 1.0) < 1e-13);
    CHECK(std::abs(inverseReconstruct(w, 1, 0, 0, 0)) < 1e-13);
}

TEST_CASE("Wigner without dissipation is a product of Bessel functions") {
    const double tO = 1.5;
    const auto p = ModelParams::fromTimes(tO, 0.0);
    const int L = autoWindow(1.0, p, 1e-12).L;
    // off-diagonal amplitudes cut by the window are ~sqrt(tail), so pad it
    const auto r = rhoMatrixSeries({L + 8, 1e-12}, 1.0, p);
    const int Nk = 32;
    const auto w = wignerFromRho(r, Nk);
    double d = 0.0;
    for (int m1 = -L; m1 <= L; ++m1)
        for (int m2 = -L; m2 <= L; ++m2)
            for (int j1 = 0; j1 < Nk; ++j1)
                for (int j2 = 0; j2 < Nk; ++j2) {
                    const double o = kNorm * stdJ(m1, 2 * tO * std::sin(w.k(j1))) * stdJ(m2, 2 * tO * std::sin(w.k(j2)));
                    d = std::max(d, std::abs(w(j1, j2, m1, m2) - o));
                }
    CHECK(d < 1e-12);
    CHECK(w.maxImag <= 1e-10);
    // pure-state interference already produces negative regions
    CHECK(negativeVolume(wignerFromRho(denseOnAutoWindow(2.0, 0.0, 1e-12), Nk)) > 0.0);
}

TEST_CASE("the two Wigner routes agree") {
    const auto p = ModelParams::fromTimes(1.0, 1.0);
    const auto r = denseOnAutoWindow(1.0, 1.0, 1e-12);
    const int Nk = 32;
    const auto w = wignerFromRho(r, Nk);
    const WignerSeries ws(1.0, p);
    std::mt19937_64 g(23);
    std::uniform_int_distribution<int> jd(0, Nk - 1), md(-4, 4);
    for (int i = 0; i < 60; ++i) {
        const int j1 = jd(g), j2 = jd(g), m1 = md(g), m2 = md(g);
        const auto v = ws(w.k(j1), w.k(j2), m1, m2);
        INFO("j=(" << j1 << "," << j2 << ") m=(" << m1 << "," << m2 << ")");
        CHECK(std::abs(v.value.imag()) < 1e-14);
        CHECK_FALSE(v.degraded);
        CHECK(v.value.real() == Approx(w(j1, j2, m1, m2)).margin(1e-6));
    }
    CHECK(wignerSeries(w.k(3), w.k(9), 1, -2, 1.0, p).value.real() == Approx(w(3, 9, 1, -2)).margin(1e-6));
}

TEST_CASE("Wigner mirror symmetry") {
    const auto r = denseOnAutoWindow(1.0, 1.0, 1e-12);
    const int Nk = 32;
    const auto w = wignerFromRho(r, Nk);
    // j -> index of the same k after swapping particles is j itself
    double d = 0.0;
    for (int m1 = -2 * w.L; m1 <= 2 * w.L; ++m1)
        for (int m2 = -2 * w.L; m2 <= 2 * w.L; ++m2)
            for (int j1 = 0; j1 < Nk; ++j1)
                for (int j2 = 0; j2 < Nk; ++j2) d = std::max(d, std::abs(w(j1, j2, m1, m2) - w(j2, j1, m2, m1)));
    CHECK(d < 1e-15);
    const WignerSeries ws(1.0, ModelParams::fromTimes(1.0, 1.0));
    CHECK(ws(0.4, -1.1, 2, 1).value.real() == Approx(ws(-1.1, 0.4, 1, 2).value.real()).margin(1e-15));
}

TEST_CASE("Wigner marginals") {
    const auto r0 = rhoMatrixSeries({3}, 0.0, {1.0, 0.5});
    const auto mg0 = marginals(wignerFromRho(r0, 32));
    CHECK(mg0.position(6, 6) == Approx(1.0));
    CHECK(mg0.position.sum() == Approx(1.0));

    const auto r = denseOnAutoWindow(2.0, 2.0, 1e-10);
    const auto w = wignerFromRho(r, 64);
    const auto mg = marginals(w);
    const auto prof = probabilityProfile(r);
    const int L = w.L;
    double dInt = 0.0, dHalf = 0.0;
    for (int m1 = -2 * L; m1 <= 2 * L; ++m1)
        for (int m2 = -2 * L; m2 <= 2 * L; ++m2) {
            const double v = mg.position(m1 + 2 * L, m2 + 2 * L);
            if ((m1 & 1) || (m2 & 1)) dHalf = std::max(dHalf, std::abs(v));
            else dInt = std::max(dInt, std::abs(v - prof.P(m1 / 2 + L, m2 / 2 + L)));
        }
    CHECK(dInt < 1e-7);
    CHECK(dHalf < 1e-12);
    CHECK(mg.total == Approx(1.0).margin(1e-10));
    CHECK(mg.momentum.minCoeff() >= -1e-8);

    // momentum marginal is the t = 0 one at every time
    CHECK((mg.momentum.array() - kNorm).abs().maxCoeff() < 1e-8);
    CHECK((mg0.momentum.array() - kNorm).abs().maxCoeff() < 1e-15);

    // N_k doubling leaves the position marginal unchanged
    const auto small = denseOnAutoWindow(1.0, 1.0, 1e-10);
    const auto a = marginals(wignerFromRho(small, 64)), b = marginals(wignerFromRho(small, 128));
    CHECK((a.position - b.position).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("inverse reconstruction") {
    const auto r = denseOnAutoWindow(1.0, 1.0, 1e-12);
    const auto w = wignerFromRho(r, 64);
    for (const auto& [a, b, c, d] : {std::array{0, 0, 0, 0}, std::array{1, -1, 0, 0}, std::array{2, 1, -1, 0},
                                     std::array{-2, 0, 1, 3}, std::array{1, 1, 1, 1}}) {
        CHECK(std::abs(inverseReconstruct(w, a, b, c, d) - r(a, b, c, d)) < 1e-6);
    }
    CHECK(inverseReconstruct(w, 2, -1, 2, -1).real() == Approx(r(2, -1, 2, -1).real()).margin(1e-14));
}

TEST_CASE("negative volume") {
    CHECK(negativeVolume(wignerFromRho(rhoMatrixSeries({2}, 0.0, {1.0, 0.5}), 16)) == 0.0);
    const auto w = wignerFromRho(denseOnAutoWindow(1.0, 0.5, 1e-12), 32);
    double brute = 0.0;
    for (double v : w.values) brute += std::abs(v) - v;
    CHECK(negativeVolume(w) == Approx(brute * w.dk2()).epsilon(1e-12));
    CHECK(negativeVolume(w) > 0.0);
}

TEST_CASE("half-integer slices carry negative domains at t_D = 5") {
    const auto p0 = ModelParams::omegaZero();
    const auto wc = autoWindow(5.0, p0, 1e-10);
    auto r = omegaZeroBlockSeries({wc.L, 1e-10}, 5.0, p0).toDense();
    r.meta.tailMass = std::max(0.0, 1.0 - r.values.trace().real());
    const int Nk = 32;
    const auto w = wignerFromRho(r, Nk);
    auto minOf = [&](int m1, int m2) {
        double m = 1e300;
        for (int j = 0; j < Nk * Nk; ++j) m = std::min(m, w.slice(m1, m2)[j]);
        return m;
    };
    CHECK(minOf(1, 1) < -1e-3);
    CHECK(minOf(1, -1) < -1e-3);
    CHECK(minOf(2, 2) > 0.0);
    CHECK(minOf(2, -2) > 0.0);
    // mirror reflection on k1 = k2 for the x1 = x2 slices
    for (int j1 = 0; j1 < Nk; ++j1)
        for (int j2 = 0; j2 < Nk; ++j2) CHECK(w(j1, j2, 1, 1) == Approx(w(j2, j1, 1, 1)).margin(1e-15));
    // series route at a couple of points on the same slices
    const WignerSeries ws(5.0, p0);
    CHECK(ws(w.k(5), w.k(11), 1, 1).value.real() == Approx(w(5, 11, 1, 1)).margin(1e-6));
    CHECK(ws(w.k(20), w.k(3), 2, -2).value.real() == Approx(w(20, 3, 2, -2)).margin(1e-6));
}

TEST_CASE("Wigner input validation") {
    auto r = rhoMatrixSeries({3, 1e-10}, 1.0, ModelParams::fromTimes(2.0, 1.0));
    r.meta.tailMass = 1e-3;
    CHECK_THROWS_AS(wignerFromRho(r, 16), TailLossError);
    r.meta.tailMass = 0.0;
    CHECK_THROWS_AS(wignerFromRho(r, 2), std::invalid_argument);
    r.values(0, 1) += cplx(0.0, 1e-3);  // breaks Hermiticity, so W picks up an imaginary part
    CHECK_THROWS_AS(wignerFromRho(r, 16), ValidationError);
}
