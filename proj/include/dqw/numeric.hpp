/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace dqw {

// Neumaier-compensated running sum that also tracks sum |x|.
struct CompensatedSum {
    double sum = 0.0, comp = 0.0, absSum = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) comp += (sum - t) + x;
        else comp += (x - t) + sum;
        sum = t;
        absSum += std::abs(x);
    }
    double value() const { return sum + comp; }
};

inline constexpr double kUnitRoundoff = std::numeric_limits<double>::epsilon() / 2;

// Rounding estimate for a compensated sum fed by products of a few correctly
// rounded factors: each term carries ~k ulps, and they add in magnitude.
inline double roundingEstimate(double absSum, int factorsPerTerm) {
    return absSum * kUnitRoundoff * (factorsPerTerm + 2);
}

}  // namespace dqw
