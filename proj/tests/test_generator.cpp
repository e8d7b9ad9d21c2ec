/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dqw/generator.hpp"

using namespace dqw;
using Catch::Approx;

namespace {

// Oracle: the two-body exponent expanded term by term from the energies and
// the bath kernel 2D cos(k_a - k_b), without going through the library pieces.
cplx exponentOracle(const MomentumQuad& q, double W, double D) {
    auto E = [W](double k) { return W * (1.0 - std::cos(k)); };
    const double re = 2 * D *
                      (std::cos(q.k1 - q.k1p) - 1 + std::cos(q.k2 - q.k2p) - 1 + std::cos(q.k1 - q.k2p) +
                       std::cos(q.k2 - q.k1p) - std::cos(q.k1 - q.k2) - std::cos(q.k1p - q.k2p));
    const double im = -(E(q.k1) - E(q.k1p) + E(q.k2) - E(q.k2p));
    return {re, im};
}

MomentumQuad randomQuad(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    return {u(g), u(g), u(g), u(g)};
}

}  // namespace

TEST_CASE("dispersion at zone landmarks") {
    const ModelParams p{1.7, 0.3};
    CHECK(dispersion(0.0, p) == 0.0);
    CHECK(dispersion(-M_PI, p) == Approx(2 * 1.7));
    CHECK(dispersion(M_PI / 2, p) == Approx(1.7));
}

TEST_CASE("coupling is cos of the difference") {
    CHECK(coupling(0.4, 0.4) == 1.0);
    CHECK(coupling(0.0, M_PI) == Approx(-1.0));
    CHECK(coupling(0.3, 0.1) == Approx(std::cos(0.2)));
}

TEST_CASE("one-particle generator") {
    CHECK(onePartGen(0.7, 0.7, {1.3, 0.4}) == cplx(0.0, 0.0));
    const auto pure = onePartGen(0.0, -M_PI, {0.9, 0.0});
    CHECK(pure.real() == Approx(0.0).margin(1e-15));
    CHECK(pure.imag() == Approx(2 * 0.9));
    const auto diss = onePartGen(0.0, -M_PI, {0.0, 0.25});
    CHECK(diss.real() == Approx(-4 * 0.25));
    CHECK(diss.imag() == 0.0);

    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    for (int i = 0; i < 1000; ++i) CHECK(onePartGen(u(g), u(g), {1.0, 0.8}).real() <= 0.0);
}

TEST_CASE("two-particle generator matches the expanded oracle") {
    std::mt19937_64 g(11);
    for (const ModelParams p : {ModelParams{1.0, 0.0}, ModelParams{0.0, 0.7}, ModelParams{2.3, 1.1}}) {
        for (int i = 0; i < 500; ++i) {
            const auto q = randomQuad(g);
            const auto f = twoPartGen(q, p), o = exponentOracle(q, p.omegaRate, p.dRate);
            CHECK(std::abs(f - o) < 1e-13);
        }
    }
}

TEST_CASE("diagonal quads have zero exponent") {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    const ModelParams p{1.4, 0.9};
    for (int i = 0; i < 200; ++i) {
        const double a = u(g), b = u(g);
        CHECK(std::abs(twoPartGen({a, a, b, b}, p)) < 1e-14);
        CHECK(std::abs(propagatorK({a, a, b, b}, 5.0, p) - 1.0) < 1e-13);
    }
}

TEST_CASE("without dissipation the exponent is a pure energy phase") {
    std::mt19937_64 g(5);
    const ModelParams p{1.6, 0.0};
    for (int i = 0; i < 200; ++i) {
        const auto q = randomQuad(g);
        const auto f = twoPartGen(q, p);
        CHECK(f.real() == 0.0);
        CHECK(f.imag() == Approx(-(dispersion(q.k1, p) - dispersion(q.k1p, p) + dispersion(q.k2, p) -
                                   dispersion(q.k2p, p))).margin(1e-14));
        CHECK(std::abs(propagatorK(q, 3.0, p)) == Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("interaction exponent") {
    const ModelParams p{1.0, 0.6};
    CHECK(interactionGen({0.3, 0.3, 0.3, 0.3}, p) == Approx(0.0).margin(1e-15));
    CHECK(interactionGen({0.0, 0.0, M_PI, M_PI}, p) == Approx(0.0).margin(1e-15));
    std::mt19937_64 g(13);
    for (int i = 0; i < 300; ++i) {
        const auto q = randomQuad(g);
        const cplx rest = twoPartGen(q, p) - onePartGen(q.k1, q.k1p, p) - onePartGen(q.k2, q.k2p, p);
        CHECK(rest.imag() == Approx(0.0).margin(1e-14));
        CHECK(interactionGen(q, p) == Approx(rest.real()).margin(1e-13));
    }
}

TEST_CASE("contractivity on a 33^4 grid") {
    // also the dense-scan oracle for random quads at Omega = 0
    const ModelParams p{0.0, 1.0};
    const int n = 33;
    double maxRe = -1e300;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    auto k = [n](int j) { return -M_PI + 2 * M_PI * j / n; };
                    maxRe = std::max(maxRe, twoPartGen({k(a), k(b), k(c), k(d)}, p).real());
                }
    CHECK(maxRe <= 1e-12);
    CHECK(maxRe >= -1e-12);  // attained on the diagonal

    std::mt19937_64 g(17);
    for (int i = 0; i < 2000; ++i) {
        const auto q = randomQuad(g);
        const auto f = twoPartGen(q, {1.3, 0.8});
        CHECK(f.real() <= 1e-12);
        CHECK(std::abs(propagatorK(q, 2.5, {1.3, 0.8})) <= 1.0 + 1e-12);
    }
}

TEST_CASE("exchange and Hermiticity symmetries") {
    std::mt19937_64 g(19);
    const ModelParams p{1.1, 0.45};
    for (int i = 0; i < 500; ++i) {
        const auto q = randomQuad(g);
        const auto f = twoPartGen(q, p);
        const auto swapped = twoPartGen({q.k2, q.k2p, q.k1, q.k1p}, p);            // particle exchange
        const auto adj = twoPartGen({q.k1p, q.k1, q.k2p, q.k2}, p);                // k <-> k'
        CHECK(std::abs(f - swapped) < 1e-13);
        CHECK(std::abs(adj - std::conj(f)) < 1e-13);
    }
}

TEST_CASE("propagator domain and landmarks") {
    const ModelParams p{1.0, 0.5};
    const MomentumQuad q{0.2, -1.0, 2.0, 0.5};
    CHECK(propagatorK(q, 0.0, p) == cplx(1.0, 0.0));
    CHECK_THROWS_AS(propagatorK(q, -0.1, p), std::domain_error);
    CHECK(std::abs(propagatorK(q, 1.5, p) - std::exp(1.5 * exponentOracle(q, 1.0, 0.5))) < 1e-14);
}

TEST_CASE("model parameter derived quantities") {
    const ModelParams p{2.0, 0.5};
    CHECK(p.tOmega(3.0) == 6.0);
    CHECK(p.tD(3.0) == 3.0);
    CHECK(p.rD() == Approx(0.5));
    CHECK_FALSE(p.strongDissipation());
    CHECK(ModelParams::omegaZero().strongDissipation());
    CHECK_THROWS_AS(ModelParams::omegaZero().rD(), std::domain_error);
    CHECK_THROWS_AS((ModelParams{-1.0, 0.0}.validate()), std::invalid_argument);
    const auto r = ModelParams::fromRatio(2.0);
    CHECK(r.tOmega(1.7) == Approx(1.7));
    CHECK(r.rD() == Approx(2.0));
    const auto ft = ModelParams::fromTimes(3.0, 1.5);
    CHECK(ft.tOmega(1.0) == 3.0);
    CHECK(ft.tD(1.0) == 1.5);
}
