/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Scalar measures of coherence and correlation, plus the probability profile.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqw/engine.hpp"
#include "dqw/rho.hpp"
#include "dqw/series.hpp"
#include "dqw/spectrum.hpp"

namespace dqw {

struct ObservableSeries {
    std::string measure;
    std::string abscissaLabel;  // "t_Omega" or "t_D"
    std::vector<double> abscissa;
    std::vector<double> values;
    ModelParams params;

    void validate() const {
        if (abscissa.size() != values.size()) throw std::invalid_argument("ObservableSeries: size mismatch");
        for (size_t i = 1; i < abscissa.size(); ++i)
            if (!(abscissa[i] > abscissa[i - 1])) throw std::invalid_argument("ObservableSeries: abscissa not increasing");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("ObservableSeries: non-finite value");
    }
};

struct Profile {
    int L = 0;
    Eigen::MatrixXd P;  // P(s1 + L, s2 + L)
    int clamped = 0;    // entries in [-1e-12, 0) set to zero
    double minRaw = 0.0;
};

inline Profile profileFromGrid(Eigen::MatrixXd P) {
    Profile out;
    out.L = (int(P.rows()) - 1) / 2;
    out.minRaw = P.minCoeff();
    if (out.minRaw < -1e-12) throw ValidationError("probabilityProfile: negative probability below -1e-12");
    for (int i = 0; i < P.size(); ++i)
        if (P.data()[i] < 0) {
            P.data()[i] = 0;
            ++out.clamped;
        }
    out.P = std::move(P);
    return out;
}

inline Profile probabilityProfile(const TwoBodyRho& rho) {
    const int L = rho.window.L;
    Eigen::MatrixXd P(2 * L + 1, 2 * L + 1);
    for (int s1 = -L; s1 <= L; ++s1)
        for (int s2 = -L; s2 <= L; ++s2) P(s1 + L, s2 + L) = rho(s1, s2, s1, s2).real();
    return profileFromGrid(std::move(P));
}

// Lab-frame profile straight from the rotated frame (no dense matrix).
inline Profile probabilityProfile(const BlockRho& rot, int L, double tOmega, double eps = kDefaultEps) {
    return profileFromGrid(profileFromRotated(rot, L, tOmega, eps));
}

// ---- purities --------------------------------------------------------------

inline double purityOneBodyAnalytic(double tD) { return besselIScaled(0, 2.0 * tD); }

inline double purityMatrix(const Eigen::MatrixXcd& m) { return m.cwiseAbs2().sum(); }
inline double purityMatrix(const TwoBodyRho& r) { return purityMatrix(r.values); }
inline double purityMatrix(const OneBodyRho& r) { return purityMatrix(r.values); }
inline double purityMatrix(const BlockRho& r) {
    double s = 0.0;
    for (const auto& b : r.blocks) s += b.squaredNorm();
    return s;
}

// Three-index alternating series at argument x = 2 t_D:
//   P2 = e^{-4t_D} sum_m I_m sum_{a,b} (-1)^{a+b} I_a I_b I_{a+m} I_{b+m} I_{a+b+m}.
inline SeriesValue purityTwoBodySeries(double tD, double eps = kDefaultEps, double budget = 1e-10) {
    if (!(tD >= 0.0)) throw std::domain_error("purityTwoBodySeries: t_D must be >= 0");
    if (tD == 0.0) return detail::finish(1.0, 1.0, 1, budget);
    const double x = 2.0 * tD;
    const int N = truncationOrder(x, eps);
    const auto I = scaledBesselIRow(3 * N, x);
    CompensatedSum acc;
    for (int m = -N; m <= N; ++m) {
        const double im = I(m);
        for (int a = -N; a <= N; ++a) {
            const double wa = signPow(a) * im * I(a) * I(a + m);
            for (int b = -N; b <= N; ++b) acc.add(wa * signPow(b) * I(b) * I(b + m) * I(a + b + m));
        }
    }
    const double scale = std::exp(8.0 * tD);
    return detail::finish(scale * acc.value(), scale * acc.absSum, 7, budget);
}

// Same quantity by Parseval: (2 pi)^-3 int exp(2 t_D R(u,v,w)) over the torus,
// trapezoid rule (exponentially accurate for the periodic integrand).
inline double purityTwoBodyQuadrature(double tD, int n = 0) {
    if (tD == 0.0) return 1.0;
    if (n <= 0) n = 2 * truncationOrder(6.0 * tD, 1e-16) + 16;
    std::vector<double> c(n);
    for (int j = 0; j < n; ++j) c[j] = std::cos(2.0 * M_PI * j / n);
    auto C = [&](int d) { return c[((d % n) + n) % n]; };
    CompensatedSum acc;
    for (int ju = 0; ju < n; ++ju)
        for (int jw = 0; jw < n; ++jw) {
            const double base = C(ju) + C(ju - jw) - C(jw) - 2.0;
            double row = 0.0;
            for (int jv = 0; jv < n; ++jv) row += std::exp(2.0 * tD * (base + C(jv) + C(jw + jv) - C(jw + jv - ju)));
            acc.add(row);
        }
    return acc.value() / (double(n) * n * n);
}

enum class PurityRoute { Series, Quadrature };

struct PurityValue {
    double value = 1.0;
    PurityRoute route = PurityRoute::Series;
};

// Series when its rounding estimate is inside the budget, Parseval otherwise.
inline PurityValue purityTwoBody(double tD, double eps = kDefaultEps, double budget = 1e-11) {
    const auto s = purityTwoBodySeries(tD, eps, budget);
    if (!s.degraded) return {s.value.real(), PurityRoute::Series};
    return {purityTwoBodyQuadrature(tD), PurityRoute::Quadrature};
}

inline double purityGap(double tD, double eps = kDefaultEps) {
    const double p1 = purityOneBodyAnalytic(tD);
    return purityTwoBody(tD, eps).value - p1 * p1;
}

// Coarse scan followed by golden-section refinement around the best sample.
inline double goldenSectionMax(const std::function<double(double)>& f, double lo, double hi, int scan = 33,
                               double tol = 1e-6) {
    double best = lo, fb = -INFINITY;
    const double h = (hi - lo) / (scan - 1);
    for (int i = 0; i < scan; ++i) {
        const double x = lo + i * h, v = f(x);
        if (v > fb) {
            fb = v;
            best = x;
        }
    }
    double a = std::max(lo, best - h), b = std::min(hi, best + h);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a), fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline double purityGapArgmax(double lo = 1e-3, double hi = 8.0, double eps = kDefaultEps) {
    return goldenSectionMax([&](double tD) { return purityGap(tD, eps); }, lo, hi);
}

// ---- entropies -------------------------------------------------------------

// t_D - e^{-t_D} sum_n I_n ln I_n with ln I_n = t_D + ln Ĩ_n
inline double entropyOneBodyAnalytic(double tD, double eps = 1e-16) {
    if (tD == 0.0) return 0.0;
    const int N = truncationOrder(tD, std::max(eps, 1e-300));
    const auto I = scaledBesselIRow(N + 20, tD);
    CompensatedSum acc;
    for (int n = -(N + 20); n <= N + 20; ++n) {
        const double v = I(n);
        if (v > 0.0) acc.add(v * (tD + std::log(v)));
    }
    return tD - acc.value();
}

inline double vonNeumann(const std::vector<double>& lambda) {
    CompensatedSum acc;
    for (double l : lambda) {
        if (l < -1e-8) throw ValidationError("entropy: eigenvalue below -1e-8 (positivity violation)");
        if (l > 0.0) acc.add(-l * std::log(l));
    }
    return acc.value();
}

inline double entropyMatrix(const BlockRho& r) { return vonNeumann(twoBodyEigen(r).values); }
inline double entropyMatrix(const TwoBodyRho& r, double eps = kDefaultEps) { return vonNeumann(twoBodyEigen(r, eps).values); }
inline double entropyMatrix(const OneBodyRho& r) { return vonNeumann(eigenvaluesDescending(r.values)); }

// 2 S1 - S12. S12 is Omega-independent, so it is read off the rotated frame.
inline double qmi(double t, const ModelParams& p, const EngineOptions& o = {}, double tailEps = 1e-10) {
    const double tD = p.tD(t);
    if (tD == 0.0) return 0.0;
    ModelParams p0{0.0, p.dRate};
    const auto wc = autoWindow(t, p0, tailEps);
    const auto rot = rotatedFrame(SiteWindow{wc.L, tailEps}, t, p, o);
    return 2.0 * entropyOneBodyAnalytic(tD) - entropyMatrix(rot);
}

// ---- coherence and correlation --------------------------------------------

enum class CoherenceVariant { And, Or };

// Sum of |rho| over s1 != s1' AND s2 != s2' (Or: either coordinate differs).
inline double coherenceG(const TwoBodyRho& rho, CoherenceVariant v = CoherenceVariant::And) {
    const int L = rho.window.L;
    CompensatedSum acc;
    for (int s1 = -L; s1 <= L; ++s1)
        for (int s2 = -L; s2 <= L; ++s2)
            for (int s1p = -L; s1p <= L; ++s1p)
                for (int s2p = -L; s2p <= L; ++s2p) {
                    const bool d1 = s1 != s1p, d2 = s2 != s2p;
                    if (v == CoherenceVariant::And ? (d1 && d2) : (d1 || d2)) acc.add(std::abs(rho(s1, s2, s1p, s2p)));
                }
    return acc.value();
}

struct Correlation {
    double value = 0.0;
    double errorBar = 0.0;  // window-tail contribution bound
};

// <q1^2 q2^2> - <q1^2><q2^2> on the diagonal. The error bar charges the
// missing mass at the first site outside the window.
inline Correlation spatialCorrelation(const Profile& prof, double tailMass) {
    const int L = prof.L;
    CompensatedSum q22, q1, q2;
    for (int s1 = -L; s1 <= L; ++s1)
        for (int s2 = -L; s2 <= L; ++s2) {
            const double P = prof.P(s1 + L, s2 + L);
            const double a = double(s1) * s1, b = double(s2) * s2;
            q22.add(P * a * b);
            q1.add(P * a);
            q2.add(P * b);
        }
    Correlation c;
    c.value = q22.value() - q1.value() * q2.value();
    const double edge = double(L + 1) * (L + 1);
    c.errorBar = tailMass * edge * edge;
    return c;
}

inline Correlation spatialCorrelation(const TwoBodyRho& rho) {
    return spatialCorrelation(probabilityProfile(rho), std::max(rho.meta.tailMass, 0.0));
}

inline double secondMomentOneBody(const OneBodyRho& r) {
    const int L = r.window.L;
    double m1 = 0.0, m2 = 0.0;
    for (int s = -L; s <= L; ++s) {
        const double P = r(s, s).real();
        m1 += P * s;
        m2 += P * s * double(s);
    }
    return m2 - m1 * m1;
}

// ---- curve features --------------------------------------------------------

struct Located {
    double x = 0.0;
    double uncertainty = 0.0;  // half grid step
};

namespace detail {
// Cubic through (x[i-1..i+2], y[...]) evaluated by Lagrange form.
inline double cubicAt(const std::vector<double>& x, const std::vector<double>& y, size_t i0, double t) {
    double s = 0.0;
    for (size_t a = i0; a < i0 + 4; ++a) {
        double w = 1.0;
        for (size_t b = i0; b < i0 + 4; ++b)
            if (b != a) w *= (t - x[b]) / (x[a] - x[b]);
        s += w * y[a];
    }
    return s;
}
inline size_t stencil(size_t i, size_t n) { return std::min(i > 0 ? i - 1 : 0, n >= 4 ? n - 4 : 0); }
}  // namespace detail

// Sign changes of y on a uniform grid, refined by cubic interpolation.
inline std::vector<Located> locateCrossings(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<Located> out;
    for (size_t i = 0; i + 1 < y.size(); ++i) {
        if (!((y[i] < 0 && y[i + 1] >= 0) || (y[i] > 0 && y[i + 1] <= 0))) continue;
        double a = x[i], b = x[i + 1];
        if (y.size() >= 4) {
            const size_t s = detail::stencil(i, y.size());
            double fa = detail::cubicAt(x, y, s, a);
            for (int it = 0; it < 60; ++it) {
                const double m = 0.5 * (a + b), fm = detail::cubicAt(x, y, s, m);
                if ((fa < 0) == (fm < 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
        }
        out.push_back({0.5 * (a + b), 0.5 * (x[i + 1] - x[i])});
    }
    return out;
}

// Interior maxima (sample larger than both neighbours), refined by cubic interpolation.
inline std::vector<Located> locateMaxima(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<Located> out;
    for (size_t i = 1; i + 1 < y.size(); ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        double best = x[i];
        if (y.size() >= 4) {
            const size_t s = detail::stencil(i, y.size());
            double fb = y[i];
            const double lo = x[i - 1], hi = x[i + 1];
            for (int k = 0; k <= 400; ++k) {
                const double t = lo + (hi - lo) * k / 400.0, v = detail::cubicAt(x, y, s, t);
                if (v > fb) {
                    fb = v;
                    best = t;
                }
            }
        }
        out.push_back({best, 0.5 * (x[i + 1] - x[i])});
    }
    return out;
}

inline int derivativeSignChanges(const std::vector<double>& y) {
    int changes = 0, last = 0;
    for (size_t i = 0; i + 1 < y.size(); ++i) {
        const double d = y[i + 1] - y[i];
        const int sg = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (sg != 0) {
            if (last != 0 && sg != last) ++changes;
            last = sg;
        }
    }
    return changes;
}

}  // namespace dqw
