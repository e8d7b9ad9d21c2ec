/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Exact two-boson algebra on a periodic ring of M sites.
//
// Fock states are integer combinations of monomials C†_{a1}...C†_{an}|vac>,
// keyed by the sorted site list. C_s acts through [C_s, C†_a] = delta_{sa},
// so no square-root occupation factors ever appear and all checks are exact.
// Wannier states are integer combinations of ordered kets |s1, s2>.

#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dqw::fock {

using Monomial = std::vector<int>;  // sorted sites of the creation operators
using FockState = std::map<Monomial, long long>;
using Ket = std::pair<int, int>;
using WannierState = std::map<Ket, long long>;

template <class K>
void addTo(std::map<K, long long>& st, const K& k, long long c) {
    if (c == 0) return;
    auto [it, fresh] = st.emplace(k, c);
    if (!fresh && (it->second += c) == 0) st.erase(it);
}

template <class K>
std::map<K, long long> combine(const std::map<K, long long>& a, const std::map<K, long long>& b, long long cb = 1) {
    auto out = a;
    for (const auto& [k, c] : b) addTo(out, k, cb * c);
    return out;
}

template <class K>
std::map<K, long long> scaled(const std::map<K, long long>& a, long long c) {
    std::map<K, long long> out;
    for (const auto& [k, v] : a) addTo(out, k, c * v);
    return out;
}

class Ring {
public:
    explicit Ring(int M) : M_(M) {
        if (M < 3) throw std::invalid_argument("fock::Ring: need at least 3 sites");
    }
    int size() const { return M_; }
    int wrap(int s) const { return ((s % M_) + M_) % M_; }

    // C†_a C†_b |vac>
    FockState pair(int a, int b) const {
        Monomial m{wrap(a), wrap(b)};
        std::sort(m.begin(), m.end());
        return {{m, 1}};
    }

    FockState create(int s, const FockState& st) const {
        FockState out;
        for (const auto& [m, c] : st) {
            Monomial n = m;
            n.insert(std::upper_bound(n.begin(), n.end(), wrap(s)), wrap(s));
            addTo(out, n, c);
        }
        return out;
    }

    FockState annihilate(int s, const FockState& st) const {
        FockState out;
        const int w = wrap(s);
        for (const auto& [m, c] : st)
            for (size_t i = 0; i < m.size(); ++i)
                if (m[i] == w) {
                    Monomial n = m;
                    n.erase(n.begin() + long(i));
                    addTo(out, n, c);
                }
        return out;
    }

    // R = sum_s C†_{s-1} C_s
    FockState applyR(const FockState& st) const { return hop(st, -1); }
    // R† = sum_s C†_{s+1} C_s
    FockState applyRdagger(const FockState& st) const { return hop(st, +1); }

    // Ordered kets, shifting each particle individually: a12 left, a12† right.
    WannierState a12(const WannierState& st) const { return shiftEach(st, -1); }
    WannierState a12dagger(const WannierState& st) const { return shiftEach(st, +1); }

    // |s1, s2>_S without the 1/sqrt(2); all identities checked are linear.
    WannierState sym(int s1, int s2) const {
        WannierState out;
        addTo(out, Ket{wrap(s1), wrap(s2)}, 1);
        addTo(out, Ket{wrap(s2), wrap(s1)}, 1);
        return out;
    }
    WannierState ket(int s1, int s2) const { return {{Ket{wrap(s1), wrap(s2)}, 1}}; }

    // T12 on symmetric kets is a12 restricted to the symmetric subspace.
    WannierState T12(const WannierState& st) const { return a12(requireSymmetric(st)); }
    WannierState T12dagger(const WannierState& st) const { return a12dagger(requireSymmetric(st)); }

    // C†_a C†_b |vac> -> |a,b> + |b,a>
    WannierState toWannier(const FockState& st) const {
        WannierState out;
        for (const auto& [m, c] : st) {
            if (m.size() != 2) throw std::invalid_argument("fock::toWannier: two-particle states only");
            addTo(out, Ket{m[0], m[1]}, c);
            addTo(out, Ket{m[1], m[0]}, c);
        }
        return out;
    }

private:
    FockState hop(const FockState& st, int d) const {
        FockState out;
        std::vector<int> sites;
        for (const auto& [m, c] : st) sites.insert(sites.end(), m.begin(), m.end());
        std::sort(sites.begin(), sites.end());
        sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
        for (int s : sites) out = combine(out, create(s + d, annihilate(s, st)));  // C_s kills absent sites
        return out;
    }
    WannierState shiftEach(const WannierState& st, int d) const {
        WannierState out;
        for (const auto& [k, c] : st) {
            addTo(out, Ket{wrap(k.first + d), k.second}, c);
            addTo(out, Ket{k.first, wrap(k.second + d)}, c);
        }
        return out;
    }
    const WannierState& requireSymmetric(const WannierState& st) const {
        for (const auto& [k, c] : st) {
            auto it = st.find(Ket{k.second, k.first});
            if (it == st.end() || it->second != c) throw std::invalid_argument("fock::T12: state is not symmetric");
        }
        return st;
    }
    int M_;
};

struct LabCheck {
    std::string name;
    bool informational = false;  // reported, never fails the lab
    bool pass = true;
    long states = 0;  // basis states checked
    std::string firstFailure;

    explicit LabCheck(std::string n, bool info = false) : name(std::move(n)), informational(info) {}
};

// Every identity over every two-particle basis state on the ring.
inline std::vector<LabCheck> appendixALab(int M) {
    const Ring r(M);
    LabCheck apen4{"R translates each boson left"};
    LabCheck apen6{"R-dagger translates each boson right"};
    LabCheck apen6Printed{"R-dagger printed right-hand side, last term C+_{s2+1} C+_{s2}", true};
    LabCheck apen77{"R R-dagger = 2 + hop exchange"};
    LabCheck comm{"[R, R-dagger] = 0"};
    LabCheck t12{"T12 on symmetric kets"};
    LabCheck t12Fock{"T12 and T12-dagger match R and R-dagger through the symmetric map"};
    LabCheck t12t12{"T12-dagger T12 = 2 + hop exchange, matches R-dagger R"};
    LabCheck t12comm{"[T12-dagger, T12] = 0"};
    LabCheck rr3{"a12 a12-dagger on distinguishable kets"};
    LabCheck rr10{"[a12-dagger, a12] = 0"};

    auto check = [](LabCheck& c, bool ok, int a, int b) {
        ++c.states;
        if (!ok && c.pass) {
            c.pass = false;
            std::ostringstream os;
            os << "(" << a << "," << b << ")";
            c.firstFailure = os.str();
        }
    };

    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            if (a <= b) {
                const auto f = r.pair(a, b);
                const auto Rf = r.applyR(f), Rdf = r.applyRdagger(f);
                check(apen4, Rf == combine(r.pair(a - 1, b), r.pair(b - 1, a)), a, b);
                check(apen6, Rdf == combine(r.pair(a + 1, b), r.pair(b + 1, a)), a, b);
                check(apen6Printed, Rdf == combine(r.pair(a + 1, b), r.pair(b + 1, b)), a, b);
                const auto RRd = r.applyR(Rdf), RdR = r.applyRdagger(Rf);
                check(apen77, RRd == combine(combine(scaled(f, 2), r.pair(a - 1, b + 1)), r.pair(a + 1, b - 1)), a, b);
                check(comm, RRd == RdR, a, b);

                const auto S = r.sym(a, b);
                const auto TS = r.T12(S), TdS = r.T12dagger(S);
                check(t12, TS == combine(r.sym(a - 1, b), r.sym(a, b - 1)) &&
                               TdS == combine(r.sym(a + 1, b), r.sym(a, b + 1)), a, b);
                check(t12Fock, TS == r.toWannier(Rf) && TdS == r.toWannier(Rdf) && r.toWannier(f) == S, a, b);
                const auto TdT = r.T12dagger(TS), TTd = r.T12(TdS);
                check(t12t12, TdT == combine(combine(scaled(S, 2), r.sym(a - 1, b + 1)), r.sym(a + 1, b - 1)) &&
                                  TdT == r.toWannier(RdR), a, b);
                check(t12comm, TdT == TTd, a, b);
            }
            const auto k = r.ket(a, b);
            const auto AAd = r.a12(r.a12dagger(k)), AdA = r.a12dagger(r.a12(k));
            check(rr3, AAd == combine(combine(scaled(k, 2), r.ket(a - 1, b + 1)), r.ket(a + 1, b - 1)), a, b);
            check(rr10, AAd == AdA, a, b);
        }
    return {apen4, apen6, apen77, comm, t12, t12Fock, t12t12, t12comm, rr3, rr10, apen6Printed};
}

// Plain-text listing, one line per identity.
inline std::string formatLab(const std::vector<LabCheck>& checks, int M) {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.informational ? (c.pass ? "INFO-HOLDS " : "INFO-DIFFERS ") : (c.pass ? "PASS " : "FAIL ")) << "M=" << M << " "
           << c.name << " [" << c.states << " states]";
        if (!c.pass) os << " first mismatch at " << c.firstFailure;
        os << "\n";
    }
    return os.str();
}

inline bool labPassed(const std::vector<LabCheck>& checks) {
    for (const auto& c : checks)
        if (!c.pass && !c.informational) return false;
    return true;
}

}  // namespace dqw::fock
