/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Exports: matrix CSV, binary matrix with JSON sidecar, series CSV, Wigner
// slices. Numbers go out with %.17g so repeated runs are byte-identical.

#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqw/observables.hpp"
#include "dqw/rho.hpp"
#include "dqw/wigner.hpp"

namespace dqw {

using json = nlohmann::json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// 64-bit FNV-1a
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}
inline uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

inline std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline json paramsJson(const ModelParams& p) { return {{"omega_rate", p.omegaRate}, {"d_rate", p.dRate}}; }

inline json metaJson(const SiteWindow& w, const RhoMeta& m) {
    return {{"window", {{"L", w.L}, {"tail_eps", w.tailEps}}},
            {"params", paramsJson(m.params)},
            {"t", m.t},
            {"t_omega", m.tOmega()},
            {"t_d", m.tD()},
            {"engine", m.engine},
            {"eps", m.eps},
            {"tail_mass", m.tailMass},
            {"aliasing_bound", m.aliasingBound},
            {"error_estimate", m.errorEstimate},
            {"degraded", m.degraded}};
}

inline void writeMetaHeader(std::ostream& os, const std::map<std::string, std::string>& meta) {
    for (const auto& [k, v] : meta) os << "# " << k << " = " << v << "\n";
}

inline void writeRhoCsv(std::ostream& os, const TwoBodyRho& r) {
    const auto j = metaJson(r.window, r.meta);
    os << "# dqw two-body density matrix\n";
    os << "# meta = " << j.dump() << "\n";
    os << "s1,s2,s1p,s2p,re,im\n";
    const int L = r.window.L;
    for (int s1 = -L; s1 <= L; ++s1)
        for (int s2 = -L; s2 <= L; ++s2)
            for (int s1p = -L; s1p <= L; ++s1p)
                for (int s2p = -L; s2p <= L; ++s2p) {
                    const cplx v = r(s1, s2, s1p, s2p);
                    os << s1 << ',' << s2 << ',' << s1p << ',' << s2p << ',' << fmt(v.real()) << ',' << fmt(v.imag())
                       << '\n';
                }
}

inline uint64_t matrixChecksum(const Eigen::MatrixXcd& m) {
    return fnv1a(m.data(), sizeof(cplx) * size_t(m.size()));
}

// <base>.bin holds column-major complex doubles; <base>.json describes them.
inline void writeRhoBinary(const std::string& base, const TwoBodyRho& r) {
    {
        std::ofstream bin(base + ".bin", std::ios::binary | std::ios::trunc);
        if (!bin) throw IoError("cannot write " + base + ".bin");
        bin.write(reinterpret_cast<const char*>(r.values.data()), std::streamsize(sizeof(cplx) * r.values.size()));
    }
    json j = metaJson(r.window, r.meta);
    j["format"] = "dqw-rho-v1";
    j["layout"] = "column-major complex128, row/col index (s1+L)*(2L+1)+(s2+L)";
    j["rows"] = r.values.rows();
    j["cols"] = r.values.cols();
    j["checksum_fnv1a64"] = hex64(matrixChecksum(r.values));
    std::ofstream side(base + ".json", std::ios::trunc);
    if (!side) throw IoError("cannot write " + base + ".json");
    side << j.dump(2) << "\n";
}

struct ChecksumError : IoError {
    using IoError::IoError;
};

inline TwoBodyRho readRhoBinary(const std::string& base) {
    std::ifstream side(base + ".json");
    if (!side) throw IoError("cannot read " + base + ".json");
    json j;
    try {
        side >> j;
    } catch (const json::exception& e) {
        throw ChecksumError(std::string("corrupt sidecar: ") + e.what());
    }
    if (j.value("format", "") != "dqw-rho-v1") throw ChecksumError("unknown matrix container format");
    SiteWindow w{j["window"]["L"].get<int>(), j["window"]["tail_eps"].get<double>()};
    RhoMeta m;
    m.params = {j["params"]["omega_rate"].get<double>(), j["params"]["d_rate"].get<double>()};
    m.t = j["t"].get<double>();
    m.engine = j["engine"].get<std::string>();
    m.eps = j["eps"].get<double>();
    m.tailMass = j["tail_mass"].get<double>();
    m.aliasingBound = j["aliasing_bound"].get<double>();
    m.errorEstimate = j["error_estimate"].get<double>();
    m.degraded = j["degraded"].get<bool>();
    TwoBodyRho r(w, m);
    std::ifstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw IoError("cannot read " + base + ".bin");
    const auto bytes = std::streamsize(sizeof(cplx) * r.values.size());
    bin.read(reinterpret_cast<char*>(r.values.data()), bytes);
    if (bin.gcount() != bytes || bin.peek() != std::char_traits<char>::eof())
        throw ChecksumError("matrix payload has the wrong size");
    if (hex64(matrixChecksum(r.values)) != j.value("checksum_fnv1a64", ""))
        throw ChecksumError("matrix checksum mismatch");
    return r;
}

inline void writeSeriesCsv(std::ostream& os, const ObservableSeries& s,
                           const std::map<std::string, std::string>& extra = {}) {
    s.validate();
    std::map<std::string, std::string> meta = extra;
    meta["measure"] = s.measure;
    meta["abscissa"] = s.abscissaLabel + " (dimensionless)";
    meta["omega_rate"] = fmt(s.params.omegaRate);
    meta["d_rate"] = fmt(s.params.dRate);
    writeMetaHeader(os, meta);
    os << s.abscissaLabel << ',' << s.measure << '\n';
    for (size_t i = 0; i < s.values.size(); ++i) os << fmt(s.abscissa[i]) << ',' << fmt(s.values[i]) << '\n';
}

// Several measures over one abscissa.
inline void writeTableCsv(std::ostream& os, const std::string& abscissaLabel, const std::vector<double>& x,
                          const std::vector<std::pair<std::string, std::vector<double>>>& cols,
                          const std::map<std::string, std::string>& meta = {}) {
    auto m = meta;
    m["abscissa"] = abscissaLabel + " (dimensionless)";
    writeMetaHeader(os, m);
    os << abscissaLabel;
    for (const auto& c : cols) {
        if (c.second.size() != x.size()) throw std::invalid_argument("writeTableCsv: column length mismatch");
        os << ',' << c.first;
    }
    os << '\n';
    for (size_t i = 0; i < x.size(); ++i) {
        os << fmt(x[i]);
        for (const auto& c : cols) os << ',' << fmt(c.second[i]);
        os << '\n';
    }
}

// Rows (k1, k2, x1, x2, W) for the requested doubled positions (all when empty).
inline void writeWignerCsv(std::ostream& os, const WignerGrid& w, const std::vector<std::pair<int, int>>& slices = {},
                           const std::map<std::string, std::string>& meta = {}) {
    auto m = meta;
    m["N_k"] = std::to_string(w.Nk);
    m["L"] = std::to_string(w.L);
    m["positions"] = "x = m/2 on the integer plus half-integer lattice";
    writeMetaHeader(os, m);
    os << "k1,k2,x1,x2,W\n";
    auto emit = [&](int m1, int m2) {
        for (int j1 = 0; j1 < w.Nk; ++j1)
            for (int j2 = 0; j2 < w.Nk; ++j2)
                os << fmt(w.k(j1)) << ',' << fmt(w.k(j2)) << ',' << fmt(0.5 * m1) << ',' << fmt(0.5 * m2) << ','
                   << fmt(w(j1, j2, m1, m2)) << '\n';
    };
    if (slices.empty()) {
        for (int m1 = -2 * w.L; m1 <= 2 * w.L; ++m1)
            for (int m2 = -2 * w.L; m2 <= 2 * w.L; ++m2) emit(m1, m2);
    } else {
        for (auto [m1, m2] : slices) {
            if (std::abs(m1) > 2 * w.L || std::abs(m2) > 2 * w.L)
                throw std::out_of_range("writeWignerCsv: slice outside the Wigner grid");
            emit(m1, m2);
        }
    }
}

// Profile as (s1, s2, P) rows.
inline void writeProfileCsv(std::ostream& os, const Profile& p, const std::map<std::string, std::string>& meta = {}) {
    auto m = meta;
    m["clamped_entries"] = std::to_string(p.clamped);
    m["min_raw"] = fmt(p.minRaw);
    writeMetaHeader(os, m);
    os << "s1,s2,P\n";
    for (int s1 = -p.L; s1 <= p.L; ++s1)
        for (int s2 = -p.L; s2 <= p.L; ++s2) os << s1 << ',' << s2 << ',' << fmt(p.P(s1 + p.L, s2 + p.L)) << '\n';
}

}  // namespace dqw
