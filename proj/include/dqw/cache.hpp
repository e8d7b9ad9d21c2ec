/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// On-disk cache of two-body matrices keyed by (params, t, L, engine, eps).
// A hit is only trusted after the stored checksum verifies; anything else is
// recomputed and overwritten.

#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include "dqw/io.hpp"

namespace dqw {

struct CacheStats {
    int hits = 0;
    int misses = 0;
    int recomputed = 0;  // entries present but failing verification
};

class RhoCache {
public:
    explicit RhoCache(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

    static std::string key(const ModelParams& p, double t, int L, const std::string& engine, double eps) {
        const std::string canon = "omega_rate=" + fmt(p.omegaRate) + ";d_rate=" + fmt(p.dRate) + ";t=" + fmt(t) +
                                  ";L=" + std::to_string(L) + ";engine=" + engine + ";eps=" + fmt(eps);
        return hex64(fnv1a(canon));
    }

    std::string basePath(const std::string& k) const { return (dir_ / ("rho_" + k)).string(); }

    TwoBodyRho get(const ModelParams& p, double t, int L, const std::string& engine, double eps,
                   const std::function<TwoBodyRho()>& compute) {
        const auto k = key(p, t, L, engine, eps);
        const auto base = basePath(k);
        if (std::filesystem::exists(base + ".json")) {
            try {
                auto r = readRhoBinary(base);
                ++stats_.hits;
                return r;
            } catch (const IoError&) {
                ++stats_.recomputed;
            }
        } else {
            ++stats_.misses;
        }
        auto r = compute();
        writeRhoBinary(base, r);
        return r;
    }

    const CacheStats& stats() const { return stats_; }

private:
    std::filesystem::path dir_;
    CacheStats stats_;
};

}  // namespace dqw
