/*
 * Copyright (c) 2026 The dqwlab Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// dqwlab: batch driver for the dissipative two-walker toolkit.
//
// Configuration precedence: built-in defaults < config file < command-line flags.
// Exit codes: 0 success, 1 validation failure, 2 configuration error, 3 resource refusal.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dqw/cache.hpp"
#include "dqw/engine.hpp"
#include "dqw/fock.hpp"
#include "dqw/gqd.hpp"
#include "dqw/io.hpp"
#include "dqw/observables.hpp"
#include "dqw/pseudo.hpp"
#include "dqw/spectrum.hpp"
#include "dqw/wigner.hpp"

namespace fs = std::filesystem;
using namespace dqw;

namespace {

constexpr const char* kVersion = "dqwlab 1.0.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    double omegaRate = 1.0;
    double dRate = 0.5;
    std::optional<double> rD;  // overrides the rates: Omega = 1, D = r_D / 2
    double t = 1.0;
    std::optional<int> L;  // empty = auto
    int gridN = kDefaultGridN;
    int nK = 64;
    double eps = kDefaultEps;
    double tailEps = 1e-10;
    double mirrorEps = 1e-10;
    std::string engine = "auto";
    std::string out = "dqw_out";
    double sweepStart = 0.1;
    double sweepStop = 3.0;
    int sweepPoints = 30;
    std::string sweepScale = "lin";
    std::vector<double> rDList;
    std::vector<std::pair<int, int>> slices;  // doubled positions
    std::vector<int> mList{8, 16};
    int ic1 = 0, ic2 = 0;
    double memoryBudgetMb = kDefaultMemoryBudget / (1024.0 * 1024.0);
    std::string cacheDir;  // empty = <out>/cache
    bool cache = true;

    ModelParams params() const { return rD ? ModelParams::fromRatio(*rD) : ModelParams{omegaRate, dRate}; }
    EngineOptions engineOptions() const {
        EngineOptions o;
        o.engine = parseEngine(engine);
        o.gridN = gridN;
        o.eps = eps;
        o.memoryBudget = memoryBudgetMb * 1024.0 * 1024.0;
        return o;
    }
    std::vector<double> sweep() const {
        std::vector<double> x(sweepPoints);
        for (int i = 0; i < sweepPoints; ++i) {
            const double f = double(i) / (sweepPoints - 1);
            x[i] = sweepScale == "log" ? sweepStart * std::pow(sweepStop / sweepStart, f)
                                       : sweepStart + f * (sweepStop - sweepStart);
        }
        return x;
    }
    std::vector<ModelParams> paramList() const {
        if (rDList.empty()) return {params()};
        std::vector<ModelParams> v;
        for (double r : rDList) v.push_back(ModelParams::fromRatio(r));
        return v;
    }
};

double parseDouble(const std::string& key, const std::string& v) {
    size_t pos = 0;
    double d = 0;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size() || !std::isfinite(d)) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return d;
}

int parseInt(const std::string& key, const std::string& v) {
    const double d = parseDouble(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return int(d);
}

std::vector<std::string> splitList(const std::string& v, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

double tolerance(const std::string& key, const std::string& v) {
    const double d = parseDouble(key, v);
    if (!(d > 0 && d < 1)) throw ConfigError(key + ": tolerance must lie in (0, 1)");
    return d;
}

struct KeyDef {
    std::string name;
    std::string help;
    std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<KeyDef>& keyTable() {
    static const std::vector<KeyDef> keys = {
        {"omega_rate", "hopping rate Omega (per unit time)", [](RunConfig& c, const std::string& v) { c.omegaRate = parseDouble("omega_rate", v); }},
        {"d_rate", "dissipation rate D (per unit time)", [](RunConfig& c, const std::string& v) { c.dRate = parseDouble("d_rate", v); }},
        {"r_d", "ratio r_D = 2D/Omega; sets Omega = 1, so t is t-prime", [](RunConfig& c, const std::string& v) { c.rD = parseDouble("r_d", v); }},
        {"t", "evaluation time", [](RunConfig& c, const std::string& v) { c.t = parseDouble("t", v); }},
        {"t_prime", "alias of t for the r_D parametrization", [](RunConfig& c, const std::string& v) { c.t = parseDouble("t_prime", v); }},
        {"L", "site window half-width, or 'auto'", [](RunConfig& c, const std::string& v) {
             if (v == "auto") c.L.reset();
             else c.L = parseInt("L", v);
         }},
        {"grid_n", "spectral grid size per dimension", [](RunConfig& c, const std::string& v) { c.gridN = parseInt("grid_n", v); }},
        {"n_k", "Wigner momentum nodes per dimension", [](RunConfig& c, const std::string& v) { c.nK = parseInt("n_k", v); }},
        {"eps", "series truncation tolerance", [](RunConfig& c, const std::string& v) { c.eps = tolerance("eps", v); }},
        {"tail_eps", "window tail-mass tolerance", [](RunConfig& c, const std::string& v) { c.tailEps = tolerance("tail_eps", v); }},
        {"mirror_eps", "mirror-sum stop tolerance for gqd", [](RunConfig& c, const std::string& v) { c.mirrorEps = tolerance("mirror_eps", v); }},
        {"engine", "series | spectral | auto", [](RunConfig& c, const std::string& v) {
             parseEngine(v);
             c.engine = v;
         }},
        {"out", "output directory", [](RunConfig& c, const std::string& v) { c.out = v; }},
        {"sweep_start", "first sweep abscissa", [](RunConfig& c, const std::string& v) { c.sweepStart = parseDouble("sweep_start", v); }},
        {"sweep_stop", "last sweep abscissa", [](RunConfig& c, const std::string& v) { c.sweepStop = parseDouble("sweep_stop", v); }},
        {"sweep_points", "number of sweep points (>= 2)", [](RunConfig& c, const std::string& v) { c.sweepPoints = parseInt("sweep_points", v); }},
        {"sweep_scale", "lin | log", [](RunConfig& c, const std::string& v) {
             if (v != "lin" && v != "log") throw ConfigError("sweep_scale: expected lin or log");
             c.sweepScale = v;
         }},
        {"r_d_list", "comma-separated r_D values for sweeps", [](RunConfig& c, const std::string& v) {
             c.rDList.clear();
             for (const auto& s : splitList(v)) c.rDList.push_back(parseDouble("r_d_list", s));
         }},
        {"slices", "Wigner positions x1:x2, comma separated (half-integers allowed)", [](RunConfig& c, const std::string& v) {
             c.slices.clear();
             for (const auto& s : splitList(v)) {
                 const auto xy = splitList(s, ':');
                 if (xy.size() != 2) throw ConfigError("slices: expected x1:x2 pairs");
                 const double a = 2 * parseDouble("slices", xy[0]), b = 2 * parseDouble("slices", xy[1]);
                 if (a != std::floor(a) || b != std::floor(b)) throw ConfigError("slices: positions must be multiples of 1/2");
                 c.slices.emplace_back(int(a), int(b));
             }
         }},
        {"m_list", "Fock ring sizes, comma separated", [](RunConfig& c, const std::string& v) {
             c.mList.clear();
             for (const auto& s : splitList(v)) c.mList.push_back(parseInt("m_list", s));
         }},
        {"ic", "pseudo start sites s1,s2", [](RunConfig& c, const std::string& v) {
             const auto ab = splitList(v);
             if (ab.size() != 2) throw ConfigError("ic: expected two integers");
             c.ic1 = parseInt("ic", ab[0]);
             c.ic2 = parseInt("ic", ab[1]);
         }},
        {"memory_budget_mb", "memory budget for grid engines (MiB)", [](RunConfig& c, const std::string& v) { c.memoryBudgetMb = parseDouble("memory_budget_mb", v); }},
        {"cache_dir", "matrix cache directory (default <out>/cache)", [](RunConfig& c, const std::string& v) { c.cacheDir = v; }},
        {"cache", "on | off", [](RunConfig& c, const std::string& v) {
             if (v != "on" && v != "off") throw ConfigError("cache: expected on or off");
             c.cache = v == "on";
         }},
    };
    return keys;
}

std::string validKeys() {
    std::string s;
    for (const auto& k : keyTable()) s += (s.empty() ? "" : ", ") + k.name;
    return s;
}

void applyKey(RunConfig& c, const std::string& key, const std::string& value) {
    for (const auto& k : keyTable())
        if (k.name == key) return k.set(c, value);
    throw ConfigError("unknown key '" + key + "'; valid keys: " + validKeys());
}

void applyConfigFile(RunConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(no) + ": expected 'key = value'");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        applyKey(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void checkConfig(const RunConfig& c) {
    if (c.sweepPoints < 2) throw ConfigError("sweep_points must be >= 2");
    if (!(c.sweepStop > c.sweepStart)) throw ConfigError("sweep_stop must exceed sweep_start");
    if (c.sweepScale == "log" && !(c.sweepStart > 0)) throw ConfigError("log sweeps need sweep_start > 0");
    if (c.L && *c.L < 1) throw ConfigError("L must be >= 1 or auto");
    if (c.gridN < 4 || c.nK < 4) throw ConfigError("grid_n and n_k must be >= 4");
    if (c.t < 0) throw ConfigError("t must be >= 0");
    if (c.rD && *c.rD < 0) throw ConfigError("r_d must be >= 0");
    for (double r : c.rDList)
        if (r < 0) throw ConfigError("r_d_list entries must be >= 0");
    for (int m : c.mList)
        if (m < 3) throw ConfigError("m_list entries must be >= 3");
    if (!(c.memoryBudgetMb > 0)) throw ConfigError("memory_budget_mb must be positive");
    c.params().validate();
}

json configJson(const RunConfig& c) {
    json j = {{"command", c.command},
              {"params", paramsJson(c.params())},
              {"t", c.t},
              {"L", c.L ? json(*c.L) : json("auto")},
              {"grid_n", c.gridN},
              {"n_k", c.nK},
              {"eps", c.eps},
              {"tail_eps", c.tailEps},
              {"mirror_eps", c.mirrorEps},
              {"engine", c.engine},
              {"out", c.out},
              {"sweep", {{"start", c.sweepStart}, {"stop", c.sweepStop}, {"points", c.sweepPoints}, {"scale", c.sweepScale}}},
              {"r_d_list", c.rDList},
              {"m_list", c.mList},
              {"ic", {c.ic1, c.ic2}},
              {"memory_budget_mb", c.memoryBudgetMb},
              {"cache", c.cache}};
    if (c.rD) j["r_d"] = *c.rD;
    return j;
}

// ---- run context -------------------------------------------------------------

struct Run {
    RunConfig cfg;
    json manifest;
    json checks = json::array();
    json windows = json::array();
    json warnings = json::array();
    json residuals = json::object();
    std::optional<RhoCache> cache;
    bool failed = false;

    explicit Run(RunConfig c) : cfg(std::move(c)) {
        fs::create_directories(cfg.out);
        if (cfg.cache) cache.emplace(cfg.cacheDir.empty() ? fs::path(cfg.out) / "cache" : fs::path(cfg.cacheDir));
    }

    fs::path path(const std::string& name) const { return fs::path(cfg.out) / name; }

    std::ofstream open(const std::string& name) const {
        std::ofstream f(path(name), std::ios::trunc);
        if (!f) throw IoError("cannot write " + path(name).string());
        return f;
    }

    void check(const std::string& name, double value, double tol, bool pass) {
        checks.push_back({{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", pass}});
        if (!pass) failed = true;
        std::cout << (pass ? "PASS " : "FAIL ") << name << " (" << value << " vs " << tol << ")\n";
    }

    void tailDiagnostic(const std::string& what, int L, double tailMass, bool autoChosen) {
        windows.push_back({{"what", what}, {"L", L}, {"auto", autoChosen}, {"tail_mass", tailMass}});
        if (tailMass > cfg.tailEps)
            warnings.push_back(what + ": tail mass " + fmt(tailMass) + " exceeds tail_eps " + fmt(cfg.tailEps));
    }

    int window(const std::string& what, double t, const ModelParams& p) {
        if (cfg.L) {
            tailDiagnostic(what, *cfg.L, autoWindowTailAt(t, p, *cfg.L), false);
            return *cfg.L;
        }
        const auto wc = autoWindow(t, p, cfg.tailEps);
        tailDiagnostic(what, wc.L, wc.tailMass, true);
        return wc.L;
    }

    static double autoWindowTailAt(double t, const ModelParams& p, int L) {
        const auto P = oneBodyOccupation(L + 80, t, p);
        double tail = 0;
        for (size_t s = L + 1; s < P.size(); ++s) tail += 2 * P[s];
        return 2 * tail;
    }

    TwoBodyRho dense(double t, const ModelParams& p, int L) {
        const auto o = cfg.engineOptions();
        const std::string eng = engineName(resolveEngine(o.engine, p.tD(t)));
        auto compute = [&] { return labMatrix(SiteWindow{L, cfg.tailEps}, t, p, o); };
        return cache ? cache->get(p, t, L, eng, cfg.eps, compute) : compute();
    }

    int finish(double seconds) {
        manifest = {{"tool", kVersion},
                    {"config", configJson(cfg)},
                    {"wall_seconds", seconds},
                    {"checks", checks},
                    {"windows", windows},
                    {"warnings", warnings},
                    {"engine_residuals", residuals}};
        if (cache)
            manifest["cache"] = {{"hits", cache->stats().hits},
                                 {"misses", cache->stats().misses},
                                 {"recomputed", cache->stats().recomputed}};
        auto f = open("manifest_" + cfg.command + ".json");
        f << manifest.dump(2) << "\n";
        return failed ? 1 : 0;
    }
};

std::string rdTag(const ModelParams& p) {
    std::ostringstream os;
    os << "rD" << fmt(p.omegaRate > 0 ? 2 * p.dRate / p.omegaRate : 0.0) << "_O" << fmt(p.omegaRate);
    return os.str();
}

std::map<std::string, std::string> paramMeta(const ModelParams& p) {
    std::map<std::string, std::string> m{{"omega_rate", fmt(p.omegaRate)}, {"d_rate", fmt(p.dRate)}};
    if (p.omegaRate > 0) m["r_d"] = fmt(p.rD());
    return m;
}

// Sweep abscissa in the unit each figure uses: t_Omega when there is hopping, t_D otherwise.
std::string abscissaLabel(const ModelParams& p) { return p.omegaRate > 0 ? "t_Omega" : "t_D"; }
double abscissaTime(const ModelParams& p, double x) { return p.omegaRate > 0 ? x / p.omegaRate : x / (2 * p.dRate); }

// ---- commands ----------------------------------------------------------------

void cmdRho(Run& run) {
    const auto p = run.cfg.params();
    const double t = run.cfg.t;
    const int L = run.window("rho", t, p);
    const auto r = run.dense(t, p, L);
    const auto inv = checkInvariants(r, r.window.pairDim() <= 2500);
    // a narrow user window is a manifest warning, not a failure: compare with its own tail bound
    const double tail = std::max(run.cfg.tailEps, run.windows.back()["tail_mass"].get<double>());
    const double dev = std::max(inv.trace - 1.0, 1.0 - tail - inv.trace);
    run.check("rho trace within the window tail bound", std::max(dev, 0.0), 1e-10, dev <= 1e-10);
    run.check("rho hermiticity", inv.hermiticityError, 1e-10, inv.hermiticityError <= 1e-10);
    auto f = run.open("rho.csv");
    writeRhoCsv(f, r);
    writeRhoBinary(run.path("rho").string(), r);
}

void cmdProfile(Run& run) {
    const auto p = run.cfg.params();
    const double t = run.cfg.t;
    const int L = run.window("profile", t, p);
    const auto o = run.cfg.engineOptions();
    const int B = rotationBand(p.tOmega(t), o.eps);
    const auto rot = rotatedFrame(SiteWindow{L + B, run.cfg.tailEps}, t, p, o);
    const auto prof = probabilityProfile(rot, L, p.tOmega(t), o.eps);
    const double mass = prof.P.sum();
    run.check("profile mass", std::abs(1 - mass), std::max(1e-8, 10 * run.cfg.tailEps), std::abs(1 - mass) <= std::max(1e-8, 10 * run.cfg.tailEps));
    auto meta = paramMeta(p);
    meta["t_Omega"] = fmt(p.tOmega(t));
    meta["t_D"] = fmt(p.tD(t));
    auto f = run.open("profile.csv");
    writeProfileCsv(f, prof, meta);
}

void cmdSpectrum(Run& run) {
    const auto p = run.cfg.params();
    const double t = run.cfg.t;
    const double tD = p.tD(t);
    const int L = run.window("spectrum", t, p);
    // one-body: analytic versus the dense matrix
    const auto r1 = oneBodyMatrixSeries(SiteWindow{L + rotationBand(p.tOmega(t), run.cfg.eps), run.cfg.tailEps}, t, p, run.cfg.eps);
    const auto ev = eigenvaluesDescending(r1.values);
    std::vector<double> n, analytic, dense;
    std::vector<double> sortedAnalytic;
    for (int k = -L; k <= L; ++k) sortedAnalytic.push_back(oneBodyEigenAnalytic(k, tD));
    std::sort(sortedAnalytic.begin(), sortedAnalytic.end(), std::greater<>());
    double worst = 0;
    for (size_t i = 0; i < sortedAnalytic.size(); ++i) {
        n.push_back(double(i));
        analytic.push_back(sortedAnalytic[i]);
        dense.push_back(ev[i]);
        worst = std::max(worst, std::abs(ev[i] - sortedAnalytic[i]));
    }
    run.residuals["one_body_spectrum"] = worst;
    {
        auto f = run.open("spectrum_onebody.csv");
        writeTableCsv(f, "rank", n, {{"analytic", analytic}, {"dense", dense}}, paramMeta(p));
    }
    const auto rot = rotatedFrame(SiteWindow{L, run.cfg.tailEps}, t, p, run.cfg.engineOptions());
    const auto sp = twoBodyEigen(rot);
    std::vector<double> idx, vals, blk;
    for (size_t i = 0; i < sp.values.size(); ++i) {
        idx.push_back(double(i));
        vals.push_back(sp.values[i]);
        blk.push_back(sp.block[i]);
    }
    auto f = run.open("spectrum_twobody.csv");
    writeTableCsv(f, "rank", idx, {{"eigenvalue", vals}, {"block_s1_plus_s2", blk}}, paramMeta(p));
}

void cmdObservables(Run& run) {
    const auto xs = run.cfg.sweep();
    for (const auto& p : run.cfg.paramList()) {
        std::vector<double> P1, P2, S1, S12, Q, G, C12, TD;
        for (double x : xs) {
            const double t = abscissaTime(p, x), tD = p.tD(t);
            const int L = run.window("observables " + rdTag(p) + " x=" + fmt(x), t, p);
            const auto r = run.dense(t, p, L);
            const auto o = run.cfg.engineOptions();
            const auto rot = rotatedFrame(SiteWindow{L, run.cfg.tailEps}, t, p, o);
            TD.push_back(tD);
            P1.push_back(purityOneBodyAnalytic(tD));
            P2.push_back(purityTwoBody(tD).value);
            S1.push_back(entropyOneBodyAnalytic(tD));
            S12.push_back(entropyMatrix(rot));
            Q.push_back(2 * S1.back() - S12.back());
            G.push_back(coherenceG(r));
            C12.push_back(spatialCorrelation(r).value);
        }
        auto f = run.open("observables_" + rdTag(p) + ".csv");
        writeTableCsv(f, abscissaLabel(p), xs,
                      {{"t_D", TD}, {"purity_1", P1}, {"purity_12", P2}, {"entropy_1", S1}, {"entropy_12", S12},
                       {"qmi", Q}, {"coherence_G", G}, {"C12", C12}},
                      paramMeta(p));
    }
}

void cmdWigner(Run& run) {
    const auto p = run.cfg.params();
    const double t = run.cfg.t;
    const int L = run.window("wigner", t, p);
    const auto r = run.dense(t, p, L);
    const auto W = wignerFromRho(r, run.cfg.nK);
    const auto mg = marginals(W);
    run.check("wigner normalization", std::abs(mg.total - 1), 1e-6, std::abs(mg.total - 1) <= 1e-6);
    run.residuals["wigner_max_imag"] = W.maxImag;
    auto meta = paramMeta(p);
    meta["t"] = fmt(t);
    meta["negative_volume"] = fmt(negativeVolume(W));
    auto f = run.open("wigner.csv");
    writeWignerCsv(f, W, run.cfg.slices.empty() ? std::vector<std::pair<int, int>>{{0, 0}} : run.cfg.slices, meta);
}

void cmdNegvol(Run& run) {
    const auto xs = run.cfg.sweep();
    std::vector<std::pair<std::string, std::vector<double>>> cols;
    const auto plist = run.cfg.paramList();
    for (const auto& p : plist) {
        std::vector<double> V;
        for (double x : xs) {
            const double t = abscissaTime(p, x);
            const int L = run.window("negvol " + rdTag(p) + " x=" + fmt(x), t, p);
            V.push_back(negativeVolume(wignerFromRho(run.dense(t, p, L), run.cfg.nK)));
        }
        cols.emplace_back("V_" + rdTag(p), V);
    }
    auto f = run.open("negvol.csv");
    writeTableCsv(f, abscissaLabel(plist.front()), xs, cols, {{"n_k", std::to_string(run.cfg.nK)}});
}

void cmdGqd(Run& run) {
    const auto xs = run.cfg.sweep();
    for (const auto& p : run.cfg.paramList()) {
        std::vector<double> D, sUsed;
        std::vector<std::vector<double>> perS;
        for (double x : xs) {
            const double t = abscissaTime(p, x);
            const auto g = gqdTotalMirror(t, p, run.cfg.mirrorEps, run.cfg.engineOptions());
            D.push_back(g.total);
            sUsed.push_back(g.sUsed);
            perS.push_back(g.perS);
            run.tailDiagnostic("gqd " + rdTag(p) + " x=" + fmt(x), g.sUsed, g.tailAtStop, true);
            // values are kept raw; only negatives beyond rounding noise are worth a warning
            const double lo = g.perS.empty() ? 0.0 : *std::min_element(g.perS.begin(), g.perS.end());
            if (lo < -1e-12) run.warnings.push_back("gqd " + rdTag(p) + " x=" + fmt(x) + ": negative per-s value " + fmt(lo));
        }
        {
            auto f = run.open("gqd_" + rdTag(p) + ".csv");
            writeTableCsv(f, abscissaLabel(p), xs, {{"D_G_total", D}, {"s_max_used", sUsed}}, paramMeta(p));
        }
        auto f = run.open("gqd_" + rdTag(p) + "_per_s.csv");
        writeMetaHeader(f, paramMeta(p));
        f << abscissaLabel(p) << ",s,D_G_s\n";
        for (size_t i = 0; i < xs.size(); ++i)
            for (size_t s = 0; s < perS[i].size(); ++s) f << fmt(xs[i]) << ',' << s + 1 << ',' << fmt(perS[i][s]) << '\n';
    }
}

void cmdPseudo(Run& run) {
    // abscissa is t_D directly
    const auto xs = run.cfg.sweep();
    const auto p = ModelParams::omegaZero();
    const int ic1 = run.cfg.ic1, ic2 = run.cfg.ic2;
    std::vector<double> tr, me, tp2, ser, alt, orc;
    double worstTrace = 0, worstOracle = 0, minEig = 0, worstOneBody = 0;
    for (double tD : xs) {
        const int L = run.cfg.L ? *run.cfg.L
                                : std::max(std::abs(ic1), std::abs(ic2)) + truncationOrder(2 * tD, run.cfg.tailEps) + 2;
        const SiteWindow w{L, run.cfg.tailEps};
        const auto P = pseudoMatrix(w, tD, p, ic1, ic2, run.cfg.eps);
        const auto S = pseudoSpectral(w, autoGridN(L + std::max(std::abs(ic1), std::abs(ic2)), run.cfg.gridN), tD, p, ic1, ic2,
                                      run.cfg.memoryBudgetMb * 1024 * 1024);
        const auto pur = piPuritySeries(tD, ic1 - ic2);
        tr.push_back(P.values.trace().real());
        me.push_back(minEigenvalue(P.values));
        tp2.push_back(purityMatrix(P.values));
        ser.push_back(pur.value);
        alt.push_back(pur.printedAlternating);
        orc.push_back((P.values - S.values).cwiseAbs().maxCoeff());
        worstTrace = std::max(worstTrace, std::abs(tr.back() - 1));
        worstOracle = std::max(worstOracle, orc.back());
        minEig = std::min(minEig, me.back());
        const auto red = partialTrace(P);
        worstOneBody = std::max(worstOneBody, (red.values - piOneBodyMatrix(w, ic1).values).cwiseAbs().maxCoeff());
    }
    run.check("pseudo trace", worstTrace, 1e-8, worstTrace <= 1e-8);
    run.check("pseudo matches interaction-only oracle", worstOracle, 1e-7, worstOracle <= 1e-7);
    run.check("pseudo has a negative eigenvalue", minEig, 0.0, minEig < 0);
    run.check("pseudo one-body marginal frozen", worstOneBody, 1e-8, worstOneBody <= 1e-8);
    {
        auto f = run.open("pseudo.csv");
        writeTableCsv(f, "t_D", xs,
                      {{"trace", tr}, {"min_eigenvalue", me}, {"tr_pi2_matrix", tp2}, {"tr_pi2_series", ser},
                       {"printed_alternating_form", alt}, {"oracle_residual", orc}},
                      {{"ic", std::to_string(ic1) + "," + std::to_string(ic2)}});
    }
    auto f = run.open("pseudo_report.txt");
    for (const auto& c : run.checks) f << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << "\n";
}

void cmdFock(Run& run) {
    auto f = run.open("fock_report.txt");
    for (int M : run.cfg.mList) {
        const auto checks = fock::appendixALab(M);
        const auto text = fock::formatLab(checks, M);
        f << text;
        std::cout << text;
        for (const auto& c : checks)
            if (!c.informational) {
                run.checks.push_back({{"name", "M=" + std::to_string(M) + " " + c.name}, {"pass", c.pass}, {"states", c.states}});
                if (!c.pass) run.failed = true;
            }
    }
}

void cmdValidate(Run& run) {
    const auto p = run.cfg.params();
    const double t = run.cfg.t;
    const double tO = p.tOmega(t), tD = p.tD(t);
    const auto o = run.cfg.engineOptions();

    // special functions against the standard library
    double bj = 0;
    for (int k : {0, 1, 5, 12})
        for (double x : {0.7, 3.1, 9.4}) bj = std::max(bj, std::abs(besselJ(k, x) - std::cyl_bessel_j(double(k), x)));
    run.check("besselJ vs std::cyl_bessel_j", bj, 1e-12, bj <= 1e-12);

    // matrix invariants at the run parameters
    const int L = std::min(run.window("validate", t, p), 14);
    const auto r = labMatrix(SiteWindow{L, run.cfg.tailEps}, t, p, o);
    const auto inv = checkInvariants(r, true);
    const double trTol = std::max(1e-8, 10 * r.meta.tailMass);
    run.check("trace", std::abs(inv.trace - 1), trTol, std::abs(inv.trace - 1) <= trTol);
    run.check("hermiticity", inv.hermiticityError, 1e-10, inv.hermiticityError <= 1e-10);
    run.check("min eigenvalue", inv.minEigenvalue, -1e-8, inv.minEigenvalue >= -1e-8);
    run.check("exchange symmetry", inv.exchangeError, 1e-10, inv.exchangeError <= 1e-10);

    // dual engine
    if (tO <= 4 && tD <= 4) {
        const int Le = std::min(L, 8);
        const auto a = rhoMatrixSeries(SiteWindow{Le, run.cfg.tailEps}, t, p, o.eps);
        const auto b = rhoGridSpectral(SiteWindow{Le, run.cfg.tailEps}, autoGridN(Le, o.gridN), t, p, o.memoryBudget);
        const double d = (a.values - b.values).cwiseAbs().maxCoeff();
        run.residuals["series_vs_spectral"] = d;
        run.check("series vs spectral", d, 1e-6, d <= 1e-6);
    }

    // rotated frame and spectrum invariance
    const auto rot = rotatedFrame(SiteWindow{L, run.cfg.tailEps}, t, p, o);
    const double pr = std::abs(purityMatrix(rot) - purityMatrix(r));
    run.check("purity (rotated vs lab, window-limited)", pr, 1e-6, pr <= 1e-6);

    // purities
    const double p1 = std::abs(purityOneBodyAnalytic(tD) - purityMatrix(partialTrace(r)));
    run.check("one-body purity analytic vs matrix", p1, 1e-7, p1 <= 1e-7);

    // Wigner marginals on a small window
    {
        auto rw = r;  // the window may be capped above; accept its measured tail here
        rw.window.tailEps = std::max(rw.window.tailEps, rw.meta.tailMass);
        const auto W = wignerFromRho(rw, 32);
        const double tot = std::abs(marginals(W).total - r.values.trace().real());
        run.check("wigner total marginal", tot, 1e-10, tot <= 1e-10);
    }

    // GQD at D = 0 and the diagonal zero-discord family
    {
        const auto g = gqdTotalMirror(t, ModelParams{p.omegaRate > 0 ? p.omegaRate : 1.0, 0.0}, 1e-10, o);
        run.check("gqd vanishes without dissipation", std::abs(g.total), 1e-10, std::abs(g.total) <= 1e-10);
    }

    // pseudo generator
    {
        const auto P = pseudoMatrix(SiteWindow{10, 1e-12}, 1.0, ModelParams::omegaZero());
        const double d = std::abs(P.values.trace().real() - 1);
        run.check("pseudo trace", d, 1e-8, d <= 1e-8);
    }

    // Fock algebra
    bool lab = true;
    for (int M : run.cfg.mList) lab = lab && fock::labPassed(fock::appendixALab(M));
    run.check("appendix A identities", lab ? 0.0 : 1.0, 0.0, lab);
}

int dispatch(Run& run) {
    const auto& c = run.cfg.command;
    if (c == "rho") cmdRho(run);
    else if (c == "profile") cmdProfile(run);
    else if (c == "spectrum") cmdSpectrum(run);
    else if (c == "observables") cmdObservables(run);
    else if (c == "wigner") cmdWigner(run);
    else if (c == "negvol") cmdNegvol(run);
    else if (c == "gqd") cmdGqd(run);
    else if (c == "pseudo") cmdPseudo(run);
    else if (c == "fock") cmdFock(run);
    else if (c == "validate") cmdValidate(run);
    else throw ConfigError("unknown command " + c);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact two-walker dissipative quantum walk toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::string configPath;
    app.add_option("--config", configPath, "config file of 'key = value' lines ('#' starts a comment)");
    std::map<std::string, std::string> flagValues;
    for (const auto& k : keyTable()) {
        std::string flag = "--" + k.name;
        std::replace(flag.begin(), flag.end(), '_', '-');
        app.add_option(flag, flagValues[k.name], k.help);
    }

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"rho", "export the two-body density matrix (CSV and binary with JSON sidecar)"},
        {"profile", "two-body probability profile P(s1, s2)"},
        {"spectrum", "one-body and two-body spectra"},
        {"observables", "purities, entropies, QMI, coherence G and C12 over a time sweep"},
        {"wigner", "Wigner function slices"},
        {"negvol", "Wigner negative volume over a time sweep"},
        {"gqd", "mirror-sum geometric discord lower bound over a time sweep"},
        {"pseudo", "interaction-only pseudo density matrix lab"},
        {"fock", "exact bosonic translation-operator algebra lab"},
        {"validate", "full invariant suite"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    RunConfig cfg;
    const auto start = std::chrono::steady_clock::now();
    try {
        cfg.command = app.get_subcommands().front()->get_name();
        if (!configPath.empty()) applyConfigFile(cfg, configPath);
        for (const auto& k : keyTable()) {
            std::string flag = "--" + k.name;
            std::replace(flag.begin(), flag.end(), '_', '-');
            if (app.count(flag) > 0) k.set(cfg, flagValues[k.name]);
        }
        checkConfig(cfg);
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }

    try {
        Run run(cfg);
        dispatch(run);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const int rc = run.finish(secs);
        for (const auto& w : run.warnings) std::cerr << "warning: " << w.get<std::string>() << "\n";
        return rc;
    } catch (const ResourceError& e) {
        std::cerr << "resource refusal: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return 1;
    }
}
