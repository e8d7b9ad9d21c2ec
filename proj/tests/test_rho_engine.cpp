/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <catch_amalgamated.hpp>

#include <cmath>

#include "dqw/engine.hpp"
#include "dqw/observables.hpp"
#include "dqw/series.hpp"
#include "dqw/spectral.hpp"
#include "dqw/spectrum.hpp"

using namespace dqw;
using Catch::Approx;

namespace {

// Oracle Bessels from the standard library (independent of dqw/specfun).
double stdJ(int n, double x) {
    const double v = std::cyl_bessel_j(double(std::abs(n)), x);
    return (n < 0 && (n & 1)) ? -v : v;
}
double stdIScaled(int n, double x) { return std::cyl_bessel_i(double(std::abs(n)), x) * std::exp(-x); }

cplx productOracle(int s1, int s2, int s1p, int s2p, double tO) {
    return ipow(s1 - s1p + s2 - s2p) * stdJ(s1, tO) * stdJ(s1p, tO) * stdJ(s2, tO) * stdJ(s2p, tO);
}

double maxAbsDiff(const TwoBodyRho& a, const TwoBodyRho& b) {
    const int L = std::min(a.window.L, b.window.L);
    double m = 0.0;
    for (int s1 = -L; s1 <= L; ++s1)
        for (int s2 = -L; s2 <= L; ++s2)
            for (int s1p = -L; s1p <= L; ++s1p)
                for (int s2p = -L; s2p <= L; ++s2p)
                    m = std::max(m, std::abs(a(s1, s2, s1p, s2p) - b(s1, s2, s1p, s2p)));
    return m;
}

}  // namespace

TEST_CASE("series element at t = 0 is the localized start") {
    const ModelParams p{1.0, 0.7};
    CHECK(rhoElementSeries(0, 0, 0, 0, 0.0, p).value == cplx(1.0, 0.0));
    CHECK(std::abs(rhoElementSeries(1, 0, 0, 0, 0.0, p).value) == 0.0);
    CHECK(std::abs(rhoElementSeries(0, 0, 0, -1, 0.0, p).value) == 0.0);
    CHECK_THROWS_AS(rhoElementSeries(0, 0, 0, 0, -1.0, p), std::domain_error);
}

TEST_CASE("series element without dissipation factorizes") {
    const ModelParams p{1.0, 0.0};
    for (int s1 = -3; s1 <= 3; ++s1)
        for (int s1p = -3; s1p <= 3; s1p += 2) {
            const auto v = rhoElementSeries(s1, 2, s1p, -1, 2.3, p);
            CHECK(std::abs(v.value - productOracle(s1, 2, s1p, -1, 2.3)) < 1e-13);
        }
}

TEST_CASE("series element agrees with the spectral transform") {
    const auto p = ModelParams::fromTimes(1.0, 1.0);
    const auto spec = rhoGridSpectral({8}, 64, 1.0, p);
    for (const auto& [a, b, c, d] : {std::array{1, -1, 0, 0}, std::array{0, 0, 0, 0}, std::array{2, 1, -1, 0},
                                     std::array{-2, 3, 1, 1}, std::array{0, 1, 1, 0}}) {
        CHECK(std::abs(rhoElementSeries(a, b, c, d, 1.0, p).value - spec(a, b, c, d)) < 1e-6);
    }
    CHECK(std::abs(rhoElementSeries(1, -1, 0, 0, 1.0, p).value - spec(1, -1, 0, 0)) < 1e-10);
}

TEST_CASE("omega-zero element: constraint, start and cross-check") {
    const auto p = ModelParams::omegaZero();
    CHECK(rhoElementOmegaZero(1, 0, 0, 0, 2.0, p).value == cplx(0.0, 0.0));
    CHECK(rhoElementOmegaZero(0, 0, 0, 0, 0.0, p).value == cplx(1.0, 0.0));
    CHECK(rhoElementOmegaZero(1, -1, 0, 0, 0.0, p).value == cplx(0.0, 0.0));
    const auto a = rhoElementOmegaZero(1, 0, 1, 0, 2.0, p).value;
    const auto b = rhoElementSeries(1, 0, 1, 0, 2.0, p).value;
    CHECK(std::abs(a - b) < 1e-12);
    for (int s1 = -2; s1 <= 2; ++s1)
        for (int s1p = -2; s1p <= 2; ++s1p) {
            const int s2 = 1 - s1, s2p = 1 - s1p;
            CHECK(std::abs(rhoElementOmegaZero(s1, s2, s1p, s2p, 1.5, p).value -
                           rhoElementSeries(s1, s2, s1p, s2p, 1.5, p).value) < 1e-12);
        }
}

TEST_CASE("omega-zero block matrix matches the literal element sum") {
    const auto p = ModelParams::omegaZero();
    const auto r = omegaZeroBlockSeries({5}, 1.2, p);
    for (int s1 = -3; s1 <= 3; ++s1)
        for (int s2 = -3; s2 <= 3; ++s2)
            for (int s1p = -3; s1p <= 3; ++s1p) {
                const int s2p = s1 + s2 - s1p;
                if (std::abs(s2p) > 3) continue;
                CHECK(r(s1, s2, s1p, s2p) == Approx(rhoElementOmegaZero(s1, s2, s1p, s2p, 1.2, p).value.real())
                                                 .margin(1e-13));
            }
    const auto spec = omegaZeroSpectral({5}, 1.2, p);
    double d = 0.0;
    for (int n = -10; n <= 10; ++n) d = std::max(d, (r.block(n) - spec.block(n)).cwiseAbs().maxCoeff());
    CHECK(d < 1e-12);
}

TEST_CASE("spectral engine landmarks") {
    const ModelParams p{1.0, 0.4};
    const auto r0 = rhoGridSpectral({3}, 16, 0.0, p);
    CHECK(std::abs(r0(0, 0, 0, 0) - 1.0) < 1e-14);
    CHECK((r0.values.cwiseAbs().sum() - 1.0) < 1e-13);

    const auto free = rhoGridSpectral({6}, 32, 2.0, {1.0, 0.0});
    double d = 0.0;
    for (int s1 = -6; s1 <= 6; ++s1)
        for (int s2 = -6; s2 <= 6; ++s2)
            for (int s1p = -6; s1p <= 6; ++s1p)
                for (int s2p = -6; s2p <= 6; ++s2p)
                    d = std::max(d, std::abs(free(s1, s2, s1p, s2p) - productOracle(s1, s2, s1p, s2p, 2.0)));
    CHECK(d < 1e-8);

    CHECK_THROWS_AS(rhoGridSpectral({6}, 8, 1.0, p), std::invalid_argument);
    CHECK_THROWS_AS(rhoGridSpectral({6}, 64, 1.0, p, 1024.0), ResourceError);
}

TEST_CASE("dual-engine agreement on L = 12") {
    const auto p = ModelParams::fromTimes(2.0, 2.0);
    const SiteWindow w{12};
    const auto spec = rhoGridSpectral(w, 64, 1.0, p);
    const auto ser = rhoMatrixSeries(w, 1.0, p);
    CHECK(maxAbsDiff(spec, ser) < 1e-6);
    // the literal six-index element on a few entries
    for (const auto& [a, b, c, d] : {std::array{0, 0, 0, 0}, std::array{3, -2, 1, 0}, std::array{-4, 4, 2, -1}})
        CHECK(std::abs(rhoElementSeries(a, b, c, d, 1.0, p).value - spec(a, b, c, d)) < 1e-6);
}

TEST_CASE("matrix invariants on produced matrices") {
    for (const auto& [tO, tD] : {std::pair{1.0, 0.5}, std::pair{2.0, 1.0}, std::pair{0.0, 2.0}}) {
        const auto p = ModelParams::fromTimes(tO, tD);
        const auto wc = autoWindow(1.0, p, 1e-10);
        const SiteWindow w{wc.L, 1e-10};
        for (const auto& r : {rhoMatrixSeries(w, 1.0, p), rhoGridSpectral(w, autoGridN(w.L, 32), 1.0, p)}) {
            const auto inv = checkInvariants(r);
            INFO("tO=" << tO << " tD=" << tD << " engine=" << r.meta.engine);
            CHECK(inv.trace >= 1.0 - 1e-10 - 1e-12);
            CHECK(inv.trace <= 1.0 + 1e-10);
            CHECK(inv.hermiticityError <= 1e-10);
            CHECK(inv.minEigenvalue >= -1e-8);
            CHECK(inv.exchangeError <= 1e-10);
            CHECK(inv.pass);
        }
    }
}

TEST_CASE("one-body element series") {
    const ModelParams p{1.0, 0.6};
    CHECK(oneBodyElementSeries(0, 0, 0.0, p).value == cplx(1.0, 0.0));
    CHECK(std::abs(oneBodyElementSeries(1, 0, 0.0, p).value) == 0.0);
    for (int s = -3; s <= 3; ++s)
        for (int sp = -3; sp <= 3; ++sp) {
            const cplx o = ipow(s - sp) * stdJ(s, 1.7) * stdJ(sp, 1.7);
            CHECK(std::abs(oneBodyElementSeries(s, sp, 1.7, {1.0, 0.0}).value - o) < 1e-14);
        }
    // independent oracle: direct sum with std Bessels
    for (int s = -2; s <= 2; ++s) {
        cplx o = 0.0;
        for (int n = -40; n <= 40; ++n) o += stdJ(s + n, 1.3) * stdJ(1 + n, 1.3) * stdIScaled(n, 1.56);
        o *= ipow(s - 1);
        CHECK(std::abs(oneBodyElementSeries(s, 1, 1.3, {1.0, 0.6}).value - o) < 1e-13);
    }
}

TEST_CASE("partial trace reproduces the one-body matrix") {
    const auto p = ModelParams::fromTimes(1.5, 1.0);
    const SiteWindow w{autoWindow(1.0, p, 1e-12).L, 1e-12};
    const auto two = rhoMatrixSeries(w, 1.0, p);
    const auto pt = partialTrace(two);
    const auto one = oneBodyMatrixSeries(w, 1.0, p);
    CHECK((pt.values - one.values).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(hermiticityError(one.values) < 1e-14);
    CHECK(minEigenvalue(one.values) >= -1e-10);
}

TEST_CASE("cancellation monitor") {
    // With n4, n5 collapsed first, the running outer partial sum stays within
    // 1e3 of the result up to t_D = 2.5. Beyond that the peak grows roughly
    // like e^{3.5 t_D}; what must hold there is the accuracy against the
    // independent spectral engine.
    for (double tD : {0.5, 1.0, 2.0, 2.5}) {
        for (double tO : {0.0, 1.0, 2.0}) {
            const auto p = ModelParams::fromTimes(tO, tD);
            for (const auto& [a, b, c, d] :
                 {std::array{0, 0, 0, 0}, std::array{1, -1, 0, 0}, std::array{1, 1, 1, 1}, std::array{2, 0, 1, 1}}) {
                const auto v = rhoElementSeries(a, b, c, d, 1.0, p);
                INFO("tO=" << tO << " tD=" << tD << " peak ratio=" << v.partialPeakRatio());
                CHECK(v.partialPeakRatio() <= 1e3);
                CHECK(v.partialPeakRatio() >= 1.0 - 1e-12);
                CHECK_FALSE(v.degraded);
            }
        }
    }
    for (double tD : {4.0, 6.0}) {
        const auto p = ModelParams::fromTimes(1.0, tD);
        const auto spec = rhoGridSpectral({10}, 64, 1.0, p);
        for (const auto& [a, b, c, d] : {std::array{0, 0, 0, 0}, std::array{1, -1, 0, 0}, std::array{2, 0, 1, 1}}) {
            const auto v = rhoElementSeries(a, b, c, d, 1.0, p);
            const double err = std::abs(v.value - spec(a, b, c, d));
            INFO("tD=" << tD << " actual=" << err << " estimate=" << v.errorEstimate);
            CHECK(err <= 1e-9);
            CHECK(err <= v.errorEstimate);  // the estimate is a safe upper bound
            CHECK(v.errorEstimate <= 1e-6);
        }
    }
    CHECK_FALSE(rhoElementSeries(0, 0, 0, 0, 1.0, ModelParams::fromTimes(1.0, 4.0)).degraded);
    // a budget below the attainable rounding level raises the flag
    CHECK(rhoElementSeries(0, 0, 0, 0, 1.0, ModelParams::fromTimes(1.0, 6.0), 1e-13, 1e-16).degraded);
}

TEST_CASE("U_a transform") {
    const ModelParams p{1.0, 0.5};
    const auto r = rhoMatrixSeries({6}, 0.0, p);
    CHECK(maxAbsDiff(uaTransform(r, 0.0, p), r) == 0.0);

    const auto pl = ModelParams::fromTimes(2.0, 2.0);
    const auto lab = rhoMatrixSeries({22, 1e-10}, 1.0, pl);
    const auto rot = uaTransform(lab, 1.0, pl);
    const auto ref = omegaZeroBlockSeries({rot.window.L}, 1.0, {0.0, pl.dRate});
    double d = 0.0;
    const int L = rot.window.L;
    for (int s1 = -L; s1 <= L; ++s1)
        for (int s2 = -L; s2 <= L; ++s2)
            for (int s1p = -L; s1p <= L; ++s1p)
                for (int s2p = -L; s2p <= L; ++s2p)
                    d = std::max(d, std::abs(rot(s1, s2, s1p, s2p) - ref(s1, s2, s1p, s2p)));
    CHECK(d < 1e-8);
    CHECK_THROWS_AS(uaTransform(rhoMatrixSeries({3}, 1.0, pl), 1.0, pl), TailLossError);
}

TEST_CASE("purity and entropy are invariant under U_a") {
    const auto pl = ModelParams::fromTimes(1.0, 1.0);
    const int B = truncationOrder(1.0, kDefaultEps);
    const int L = autoWindow(1.0, pl, 1e-13).L;
    const auto lab = rhoMatrixSeries({L + B, 1e-13}, 1.0, pl);
    const auto rot = uaTransform(lab, 1.0, pl);
    CHECK(rot.window.L == L);
    CHECK(purityMatrix(rot.values) == Approx(purityMatrix(lab.values)).margin(1e-10));
    const auto ref = omegaZeroBlockSeries({L}, 1.0, {0.0, pl.dRate});
    CHECK(purityMatrix(rot.values) == Approx(purityMatrix(ref.toDense().values)).margin(1e-10));
    CHECK(vonNeumann(eigenvaluesDescending(lab.values)) == Approx(vonNeumann(twoBodyEigen(ref).values)).margin(1e-9));
}

TEST_CASE("analytic one-body eigenvalues") {
    CHECK(oneBodyEigenAnalytic(0, 0.0) == 1.0);
    CHECK(oneBodyEigenAnalytic(3, 0.0) == 0.0);
    double sum = 0.0;
    for (int n = -60; n <= 60; ++n) {
        const double l = oneBodyEigenAnalytic(n, 4.0);
        CHECK(l >= 0.0);
        CHECK(l <= 1.0);
        CHECK(l == oneBodyEigenAnalytic(-n, 4.0));
        CHECK(l == Approx(stdIScaled(n, 4.0)).epsilon(1e-12));
        sum += l;
    }
    CHECK(sum == Approx(1.0).epsilon(1e-14));

    // dense eigensolve oracle; hopping only rotates the one-body matrix
    const auto p = ModelParams::fromTimes(1.0, 4.0);
    const SiteWindow w{40};
    const auto ev = eigenvaluesDescending(oneBodyMatrixSeries(w, 1.0, p).values);
    std::vector<double> an;
    for (int n = -40; n <= 40; ++n) an.push_back(oneBodyEigenAnalytic(n, 4.0));
    std::sort(an.begin(), an.end(), std::greater<>());
    for (int i = 0; i < 15; ++i) CHECK(ev[i] == Approx(an[i]).margin(1e-10));
}

TEST_CASE("two-body spectrum") {
    const ModelParams p{1.0, 0.5};
    const auto s0 = twoBodyEigen(rhoMatrixSeries({4}, 0.0, p));
    CHECK(s0.values[0] == Approx(1.0));
    for (size_t i = 1; i < s0.values.size(); ++i) CHECK(std::abs(s0.values[i]) < 1e-14);

    const auto p0 = ModelParams::omegaZero();
    const auto wc = autoWindow(4.0, p0, 1e-12);
    const auto r = omegaZeroBlockSeries({wc.L}, 4.0, p0);
    for (int n = 1; n <= 4; ++n) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> a(r.block(n), Eigen::EigenvaluesOnly),
            b(r.block(-n), Eigen::EigenvaluesOnly);
        CHECK((a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
    }
    const auto sp = twoBodyEigen(r);
    // leading values that are not part of a degenerate pair come from block 0
    int checked = 0;
    for (size_t i = 0; i < sp.values.size() && sp.values[i] > 1e-6; ++i) {
        const bool prev = i > 0 && degenerate(sp.values[i], sp.values[i - 1]);
        const bool next = i + 1 < sp.values.size() && degenerate(sp.values[i], sp.values[i + 1]);
        if (!prev && !next) {
            CHECK(sp.block[i] == 0);
            ++checked;
        }
    }
    CHECK(checked > 0);

    Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(9, 9);
    bad(0, 1) = 1.0;
    TwoBodyRho nh({1}, {});
    nh.values = bad;
    CHECK_THROWS_AS(twoBodyEigen(nh), ValidationError);
}

TEST_CASE("engine resolution and window policy") {
    CHECK(resolveEngine(Engine::Auto, 6.0) == Engine::Series);
    CHECK(resolveEngine(Engine::Auto, 6.1) == Engine::Spectral);
    CHECK(resolveEngine(Engine::Spectral, 1.0) == Engine::Spectral);
    CHECK(windowFormula(0.0, 0.0) == 8);
    const auto p = ModelParams::fromTimes(2.0, 2.0);
    const auto wc = autoWindow(1.0, p, 1e-10);
    CHECK(wc.L <= wc.formulaCap);
    CHECK(wc.tailMass < 1e-10);
    // the measured tail is the real one: the window trace agrees with it
    const auto r = rhoMatrixSeries({wc.L}, 1.0, p);
    CHECK(1.0 - r.values.trace().real() <= wc.tailMass + 1e-12);
    const auto rl = labMatrix({wc.L}, 1.0, p, {Engine::Spectral});
    CHECK(maxAbsDiff(r, rl) < 1e-6);
}
