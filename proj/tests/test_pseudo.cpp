/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <catch_amalgamated.hpp>

#include <cmath>

#include "dqw/engine.hpp"
#include "dqw/pseudo.hpp"
#include "dqw/spectrum.hpp"

using namespace dqw;
using Catch::Approx;

namespace {

double stdI(int n, double x) { return std::cyl_bessel_i(double(std::abs(n)), x); }

SiteWindow piWindow(double tD, int ic1, int ic2) {
    return {std::max(std::abs(ic1), std::abs(ic2)) + truncationOrder(2 * tD, 1e-14) + 2, 1e-12};
}

}  // namespace

TEST_CASE("pseudo matrix matches the interaction-only transform") {
    const auto p = ModelParams::omegaZero();
    for (const auto& [ic1, ic2] : {std::pair{0, 0}, std::pair{1, -1}, std::pair{2, 0}}) {
        for (double tD : {0.3, 0.7}) {
            const auto w = piWindow(tD, ic1, ic2);
            const auto P = pseudoMatrix(w, tD, p, ic1, ic2);
            const auto S = pseudoSpectral(w, autoGridN(w.L + 2, 64), tD, p, ic1, ic2);
            INFO("ic=(" << ic1 << "," << ic2 << ") t_D=" << tD);
            CHECK((P.values - S.values).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(P.values.trace().real() == Approx(1.0).margin(1e-10));
        }
    }
}

TEST_CASE("pseudo matrix at t = 0 is the start projector") {
    const auto P = pseudoMatrix({3}, 0.0, ModelParams::omegaZero(), 1, -1);
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b)
            for (int c = -3; c <= 3; ++c)
                for (int d = -3; d <= 3; ++d) {
                    const double want = (a == 1 && b == -1 && c == 1 && d == -1) ? 1.0 : 0.0;
                    CHECK(std::abs(P(a, b, c, d) - want) < 1e-15);
                }
}

TEST_CASE("pseudo matrix conserves the centre of mass") {
    const auto P = pseudoMatrix({5, 1e-12}, 0.8, ModelParams::omegaZero(), 1, 0);
    for (int a = -5; a <= 5; ++a)
        for (int b = -5; b <= 5; ++b)
            for (int c = -5; c <= 5; ++c)
                for (int d = -5; d <= 5; ++d)
                    if (a + b != c + d) CHECK(P(a, b, c, d) == cplx(0.0, 0.0));
    CHECK(piElement(2, 0, 1, 0, 0.8, ModelParams::omegaZero(), 1, 0).value == 0.0);
}

TEST_CASE("pseudo purity") {
    const auto p = ModelParams::omegaZero();
    for (const auto& [ic1, ic2] : {std::pair{0, 0}, std::pair{1, -1}}) {
        for (double tD : {0.4, 0.7, 1.0}) {
            const auto w = piWindow(tD, ic1, ic2);
            const auto P = pseudoMatrix(w, tD, p, ic1, ic2);
            const double matrix = (P.values * P.values).trace().real();
            const auto pur = piPuritySeries(tD, ic1 - ic2);
            double oracle = 0;
            for (int m = -60; m <= 60; ++m) oracle += std::pow(stdI(m, 2 * tD), 4);
            INFO("ic=(" << ic1 << "," << ic2 << ") t_D=" << tD);
            CHECK(pur.value == Approx(oracle).epsilon(1e-12));
            CHECK(matrix == Approx(pur.value).epsilon(1e-9));
            CHECK(pur.log10Value == Approx(std::log10(pur.value)).epsilon(1e-12));
            CHECK(pur.value > 1.0);  // not a state
        }
    }
    CHECK(piPuritySeries(0.0).value == Approx(1.0));
    CHECK(piPuritySeries(0.7).value == Approx(7.0694).epsilon(1e-4));
    CHECK(std::abs(piPuritySeries(0.7).printedAlternating - piPuritySeries(0.7).value) > 1.0);
    CHECK(std::isfinite(piPuritySeries(400.0).log10Value));
    CHECK_THROWS_AS(piPuritySeries(-1.0), std::domain_error);
}

TEST_CASE("pseudo matrix has negative eigenvalues") {
    const auto w = piWindow(0.7, 0, 0);
    const auto P = pseudoMatrix(w, 0.7, ModelParams::omegaZero());
    const auto ev = eigenvaluesDescending(P.values);
    CHECK(ev.back() < -0.5);
}

TEST_CASE("pseudo one-body reduction") {
    for (const auto& [ic1, ic2] : {std::pair{0, 0}, std::pair{1, -1}}) {
        const auto w = piWindow(0.6, ic1, ic2);
        const auto P = pseudoMatrix(w, 0.6, ModelParams::omegaZero(), ic1, ic2);
        const auto one = piOneBodyMatrix(w, ic1);
        CHECK((partialTrace(P).values - one.values).cwiseAbs().maxCoeff() < 1e-10);
    }
    CHECK(piOneBody(1, 1, 1) == 1.0);
    CHECK(piOneBody(1, 0, 1) == 0.0);
    CHECK_THROWS_AS(pseudoMatrix({2}, 0.5, ModelParams::omegaZero(), 3, 0), std::out_of_range);
    CHECK_THROWS_AS(pseudoSpectral({4}, 8, 0.5, ModelParams::omegaZero()), std::invalid_argument);
}
