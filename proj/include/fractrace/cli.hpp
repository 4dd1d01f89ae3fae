#pragma once

// Batch driver behind tools/fractrace. run_cli parses, dispatches and maps
// library errors onto the exit codes; everything printed is JSON (or CSV).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "constants.hpp"
#include "mcquad.hpp"
#include "potentials.hpp"
#include "sphere.hpp"
#include "verify.hpp"

namespace fractrace::cli {

using json = nlohmann::json;

inline constexpr int exit_pass = 0;
inline constexpr int exit_violation = 1;
inline constexpr int exit_config = 2;
inline constexpr int exit_divergence = 3;

// Unset optionals fall back to per-theorem defaults in the resolvers below.
struct RunConfig {
    std::string command;

    std::string formula;
    std::string variant; // statement | derivation | both; empty = the formula's default

    std::optional<int> n;
    std::optional<int> m;
    std::vector<double> alphas, sigma, betas, rhos, betas_high;
    std::optional<double> beta, p, q, lambda;
    std::optional<int> k_sub;

    std::string theorem;
    std::optional<std::size_t> N;
    std::optional<double> L;
    std::string family = "gaussian_mixture";
    std::size_t count = 20;
    std::uint64_t seed = 1;
    double t = 1.0;
    std::optional<double> tol;
    std::optional<int> degree;
    std::optional<std::size_t> nodes;
    std::string op = "riesz";
    bool estimate_error = false;

    std::vector<std::size_t> grids;
    std::vector<double> scales, widths, ts;
    std::optional<double> threshold;

    std::string mode = "riesz";
    std::size_t samples = 1'000'000;
    std::string scheme = "plain";
    double x = 0.5;
    int k = 0;
    std::vector<double> eta1, eta2;
    std::optional<double> alpha, rho;
    bool no_quadrature = false;

    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string out, csv;
    bool timing = false;
};

// A command's result: the JSON report, an optional CSV table and the exit code.
struct Outcome {
    json report;
    json table = json::array(); // flat rows for --csv
    int code = exit_pass;
};

namespace detail {

using fractrace::detail::fmt;

inline int dim_n(const RunConfig& c, int fallback = 1) { return c.n.value_or(fallback); }

inline void need(bool ok, const std::string& msg) {
    if (!ok) throw config_error(msg);
}

inline std::vector<double> equal_split(int m, double total) { return std::vector<double>(m, total / m); }

// --m and --alphas must agree when both are given.
inline int factor_count(const RunConfig& c, int fallback = 2) {
    if (!c.alphas.empty()) {
        if (c.m) need(*c.m == static_cast<int>(c.alphas.size()),
                      "--m " + std::to_string(*c.m) + " does not match " + std::to_string(c.alphas.size()) +
                          " alpha values");
        return static_cast<int>(c.alphas.size());
    }
    return c.m.value_or(fallback);
}

// Theorem 1: α = (m-1)n + β, split equally; β defaults to 0.8n.
inline std::vector<double> pitt_alphas(const RunConfig& c) {
    if (!c.alphas.empty()) return c.alphas;
    const int n = dim_n(c), m = factor_count(c);
    return equal_split(m, (m - 1) * double(n) + c.beta.value_or(0.8 * n));
}

// mn - α = λ with λ = 2n/q; q defaults to 4 (λ = n/2).
inline std::vector<double> hls_alphas(const RunConfig& c) {
    if (!c.alphas.empty()) return c.alphas;
    const int n = dim_n(c), m = factor_count(c);
    const double lam = 2.0 * n / c.q.value_or(4.0);
    return equal_split(m, m * double(n) - lam);
}

inline Variant parse_variant(const std::string& s, Variant fallback) {
    if (s.empty()) return fallback;
    if (s == "statement") return Variant::statement;
    if (s == "derivation") return Variant::derivation;
    throw config_error("unknown variant '" + s + "' (statement, derivation, both)");
}

inline json constant_json(const ConstantValue& c) {
    json j = c;
    j["params"] = c.params;
    return j;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

inline ParamSet simple_params(int n, int m) {
    ParamSet ps;
    ps.n = n;
    ps.m = m;
    return ps;
}

// ---------------------------------------------------------------------------
// constant

inline Outcome cmd_constant(const RunConfig& c) {
    const std::string& id = c.formula;
    const int n = dim_n(c);
    Outcome o;
    json& j = o.report;
    j["command"] = "constant";
    j["formula"] = id;
    auto single = [&](const ConstantValue& v) {
        j["constant"] = constant_json(v);
        j["value"] = v.value;
    };
    const bool both = c.variant == "both";
    auto no_variant = [&] {
        need(c.variant.empty(), "formula " + id + " has no variants");
    };

    if (id == "C_p") {
        no_variant();
        single(l2_hls_constant(n, c.p.value_or(2.0)));
    } else if (id == "C_beta") {
        const ParamSet ps = theorem1_params(n, pitt_alphas(c), c.beta);
        if (both) {
            const auto s = pitt_trace_constant(ps, Variant::statement);
            const auto d = pitt_trace_constant(ps, Variant::derivation);
            const auto chain = constant_chain_pitt(ps);
            const double es = rel_diff(s.value, chain.value), ed = rel_diff(d.value, chain.value);
            j["statement"] = constant_json(s);
            j["derivation"] = constant_json(d);
            j["chain"] = constant_json(chain);
            j["chain_rel_diff"] = {{"statement", es}, {"derivation", ed}};
            j["derivation_over_statement"] = d.value / s.value;
            j["winner"] = es <= ed ? "statement" : "derivation";
            j["value"] = es <= ed ? s.value : d.value;
        } else {
            single(pitt_trace_constant(ps, parse_variant(c.variant, Variant::statement)));
        }
    } else if (id == "F_alpha") {
        no_variant();
        const ParamSet ps = theorem2_params(n, hls_alphas(c));
        single(hls_trace_constant(ps));
        const auto chain = constant_chain_hls(ps);
        j["chain"] = constant_json(chain);
        j["chain_rel_diff"] = rel_diff(j["value"].get<double>(), chain.value);
    } else if (id == "E_beta") {
        no_variant();
        need(c.beta.has_value(), "E_beta needs --beta");
        single(stein_weiss_l2_constant(n, *c.beta));
    } else if (id == "H_classical") {
        no_variant();
        need(c.lambda.has_value(), "H_classical needs --lambda");
        single(classical_hls_constant(n, *c.lambda));
    } else if (id == "A_sigma") {
        no_variant();
        need(!c.sigma.empty() && c.beta.has_value(), "A_sigma needs --sigma and --beta");
        single(stein_weiss_riesz_constant(theorem3_params(n, c.sigma, *c.beta)));
    } else if (id == "C_alpha2") {
        no_variant();
        const std::vector<double> orders = c.alphas.empty() ? std::vector<double>(factor_count(c), double(n)) : c.alphas;
        single(bessel_l2_constant(n, orders));
        if (orders.size() == 2)
            j["routes"] = {{"closed_form", j["value"]},
                           {"plancherel", bessel_l2_plancherel(n, orders[0], orders[1])},
                           {"kernel_quadrature", bessel_l2_constant(n, orders, true).value}};
    } else if (id == "F_alpha_S") {
        const ParamSet ps = sphere6_params(n, hls_alphas(c));
        // Constants are extremals of the dual form, so A_α K(2n/q)/F_{α,S} = 1 picks the variant.
        const double ak = sphere_A_alpha(ps).value * sphere_kernel_mean(ps.n, 2.0 * ps.n / *ps.q);
        if (both) {
            const auto s = sphere_trace_constant(ps, Variant::statement);
            const auto d = sphere_trace_constant(ps, Variant::derivation);
            const double rs = ak / s.value, rd = ak / d.value;
            j["statement"] = constant_json(s);
            j["derivation"] = constant_json(d);
            j["constant_function_ratio"] = {{"statement", rs}, {"derivation", rd}};
            const bool stmt = std::abs(rs - 1.0) < std::abs(rd - 1.0);
            j["winner"] = stmt ? "statement" : "derivation";
            j["value"] = stmt ? s.value : d.value;
        } else {
            single(sphere_trace_constant(ps, parse_variant(c.variant, Variant::derivation)));
            j["constant_function_ratio"] = ak / j["value"].get<double>();
        }
    } else if (id == "A_alpha_S") {
        no_variant();
        single(sphere_A_alpha(sphere6_params(n, hls_alphas(c))));
    } else if (id == "d_subvariety") {
        need(!both, "d_subvariety: variants are not adjudicated by a chain; pick statement or derivation");
        need(c.beta.has_value(), "d_subvariety needs --beta");
        single(subvariety_constant(n, c.k_sub.value_or(n), *c.beta, parse_variant(c.variant, Variant::statement)));
    } else if (id == "D_beta") {
        no_variant();
        single(pitt_chain_terms(theorem1_params(n, pitt_alphas(c), c.beta)).dual);
    } else if (id == "G_alpha_dual" || id == "H_alpha") {
        no_variant();
        const auto t = hls_chain_terms(theorem2_params(n, hls_alphas(c)));
        single(id == "H_alpha" ? t.last : t.dual);
    } else if (id == "K_sphere") {
        no_variant();
        need(c.lambda.has_value(), "K_sphere needs --lambda");
        ParamSet ps = simple_params(n, 1);
        ps.lambda_kernel = *c.lambda;
        ConstantValue v;
        v.value = sphere_kernel_mean(n, *c.lambda);
        v.formula_id = FormulaId::K_sphere;
        v.params = ps;
        single(v);
    } else if (id == "C_alpha_q") {
        no_variant();
        need(c.q.has_value(), "C_alpha_q needs --q");
        single(theorem4_constant(theorem4_params(n, c.alphas.empty() ? hls_alphas(c) : c.alphas, *c.q)));
    } else if (id == "C_iterated") {
        no_variant();
        single(iterated_sw_constant_quadrature(iterated_sw_params(n, c.alphas, c.betas, c.rhos)));
    } else if (id == "S_hls") {
        no_variant();
        const ParamSet ps = sphere_hls_params(n, c.q.value_or(4.0));
        ConstantValue v;
        v.value = 1.0;
        v.formula_id = FormulaId::S_hls;
        v.params = ps;
        single(v);
    } else if (id == "D_alpha_q") {
        throw config_error("D_alpha_q is a test-family estimate; run `verify --theorem corollary`");
    } else if (id == "E_T") {
        throw config_error("E_T is a test-family estimate; run `verify --theorem 7`");
    } else {
        throw config_error("unknown formula '" + id + "'");
    }
    o.table.push_back({{"formula", id}, {"value", j["value"]}});
    return o;
}

// ---------------------------------------------------------------------------
// verify

inline GridSpec grid_for(const RunConfig& c, int n, int m, std::size_t N, double L) {
    GridSpec s{n, m, c.N.value_or(N), c.L.value_or(L), true};
    s.validate();
    return s;
}

inline TestFamily family_for(const RunConfig& c) {
    TestFamily fam;
    fam.kind = family_kind_from_string(c.family);
    fam.base_seed = c.seed;
    fam.count = c.count;
    fam.t = c.t;
    need(c.count >= 1, "--count must be >= 1");
    return fam;
}

inline json aggregate_json(const FamilyResult& r) {
    return {{"max_ratio", r.max_ratio}, {"min_margin", r.min_margin}, {"all_pass", r.all_pass},
            {"count", r.reports.size()}};
}

inline void retolerance(std::vector<VerificationReport>& reports, std::optional<double> tol) {
    if (!tol) return;
    need(*tol >= 0.0, "--tol must be >= 0");
    for (auto& r : reports) {
        r.tol = *tol;
        r.pass = !r.outside_regime && r.ratio <= 1.0 + *tol;
    }
}

template <class F>
VerificationReport maybe_timed(bool timing, F&& f) {
    return timing ? timed(std::forward<F>(f)) : f();
}

inline Outcome finish_verify(const RunConfig& c, std::vector<VerificationReport> reports, json extra) {
    retolerance(reports, c.tol);
    const FamilyResult res = aggregate(std::move(reports));
    Outcome o;
    o.report = std::move(extra);
    o.report["command"] = c.command;
    o.report["theorem"] = c.theorem;
    o.report["reports"] = res.reports;
    o.report["aggregate"] = aggregate_json(res);
    for (const auto& r : res.reports)
        o.table.push_back({{"seed", r.seed ? json(*r.seed) : json(nullptr)},
                           {"lhs", r.lhs},
                           {"rhs", r.rhs},
                           {"ratio", r.ratio},
                           {"margin", r.margin},
                           {"pass", r.pass}});
    o.code = res.all_pass ? exit_pass : exit_violation;
    return o;
}

inline std::vector<VerificationReport> seeded(const RunConfig& c, const std::function<VerificationReport(std::uint64_t)>& f) {
    std::vector<VerificationReport> out;
    for (std::size_t i = 0; i < c.count; ++i) {
        const std::uint64_t s = c.seed + i;
        auto r = maybe_timed(c.timing, [&] { return f(s); });
        r.seed = s;
        out.push_back(std::move(r));
    }
    return out;
}

inline Outcome verify_sphere(const RunConfig& c) {
    const std::string& th = c.theorem;
    const int n = dim_n(c);
    const int K = c.degree.value_or(4);
    need(K >= 0, "--degree must be >= 0");
    if (th == "sphere_hls") {
        const double q = c.q.value_or(4.0);
        sphere_hls_params(n, q);
        auto reports = seeded(c, [&](std::uint64_t s) {
            const auto r = check_sphere_hls(random_sphere_expansion(n, 1, K, s), q);
            auto h = r.harmonic;
            h.notes.push_back("operator form ratio " + fmt(r.operator_form.ratio) + ", form gap " + fmt(r.form_gap));
            return h;
        });
        return finish_verify(c, std::move(reports), {{"degree", K}});
    }
    if (th == "sphere_classical") {
        const double q = c.q.value_or(4.0);
        sphere_hls_params(n, q);
        const auto g = make_sphere_grid(n, c.nodes.value_or(n == 1 ? 64 : 16));
        auto reports = seeded(c, [&](std::uint64_t s) {
            return check_sphere_classical_hls(synthesize(random_sphere_expansion(n, 1, K, s), g), g, q, c.jobs);
        });
        return finish_verify(c, std::move(reports), {{"degree", K}, {"nodes", g.size()}});
    }
    // Theorem 6 on (S^n)^m.
    const ParamSet ps = sphere6_params(n, hls_alphas(c));
    const Variant v = parse_variant(c.variant, Variant::derivation);
    auto reports = seeded(c, [&](std::uint64_t s) {
        return check_theorem6(random_sphere_expansion(n, ps.m, K, s), ps.alphas, v);
    });
    // Constant G ≡ 1 attains the dual form: the variant whose ratio is 1 is the right one.
    const auto g = make_sphere_grid(n, n == 1 ? 64 : 16);
    std::vector<cplx> one(g.size(), cplx{1.0});
    const double rd = check_theorem6_dual(one, g, ps.alphas, Variant::derivation, c.jobs).ratio;
    const double rs = check_theorem6_dual(one, g, ps.alphas, Variant::statement, c.jobs).ratio;
    json extra{{"degree", K},
               {"params", ps},
               {"variant", to_string(v)},
               {"variant_adjudication",
                {{"constant_function_ratio", {{"derivation", rd}, {"statement", rs}}},
                 {"winner", std::abs(rd - 1.0) <= std::abs(rs - 1.0) ? "derivation" : "statement"},
                 {"note", fractrace::detail::sphere_variant_note(ps)}}}};
    return finish_verify(c, std::move(reports), std::move(extra));
}

inline bool is_sphere_theorem(const std::string& th) {
    return th == "sphere_hls" || th == "sphere_classical" || th == "sphere6";
}

inline Outcome cmd_verify(RunConfig c) {
    if (c.theorem == "6") c.theorem = "sphere6";
    const std::string& th = c.theorem;
    if (c.command == "sphere")
        need(is_sphere_theorem(th), "sphere: --theorem must be sphere_hls, sphere_classical or sphere6");
    if (is_sphere_theorem(th)) return verify_sphere(c);

    const RunOptions ropt{c.jobs, c.estimate_error};
    auto run = [&](const TestFamily& fam, const GridSpec& s, const Checker& chk, json extra) {
        extra["grid"] = {{"n", s.n}, {"m", s.m}, {"N", s.N}, {"L", s.L}};
        extra["family"] = {{"kind", to_string(fam.kind)}, {"base_seed", fam.base_seed}, {"count", fam.count}};
        Checker wrapped = chk;
        if (c.timing) wrapped = [&chk](const GridField& f) { return timed([&] { return chk(f); }); };
        auto res = run_family(fam, s, wrapped, ropt);
        return finish_verify(c, std::move(res.reports), std::move(extra));
    };
    TestFamily fam = family_for(c);
    const int n = dim_n(c);

    if (th == "1") {
        const ParamSet ps = theorem1_params(n, pitt_alphas(c), c.beta);
        return run(fam, grid_for(c, n, ps.m, 256, 6.0), [&](const GridField& f) { return check_theorem1(f, ps); },
                   {{"params", ps}});
    }
    if (th == "2") {
        const ParamSet ps = theorem2_params(n, hls_alphas(c));
        fam.params = ps;
        return run(fam, grid_for(c, n, ps.m, 256, 6.0), [&](const GridField& f) { return check_theorem2(f, ps); },
                   {{"params", ps}});
    }
    if (th == "4") {
        const int m = factor_count(c);
        const ParamSet ps = theorem4_params(n, c.alphas.empty() ? std::vector<double>(m, double(n)) : c.alphas,
                                            c.q.value_or(2.0));
        return run(fam, grid_for(c, n, ps.m, 256, 6.0), [&](const GridField& f) { return check_theorem4(f, ps); },
                   {{"params", ps}});
    }
    if (th == "5") {
        const ParamSet ps = theorem5_params(n, c.alphas.empty() ? std::vector<double>{0.9 * n} : c.alphas,
                                            c.betas_high.empty() ? std::vector<double>{1.5 * n} : c.betas_high,
                                            c.q.value_or(2.0));
        const int m_total = ps.m + static_cast<int>(ps.betas_high.size());
        return run(fam, grid_for(c, n, m_total, 256, 6.0), [&](const GridField& f) { return check_theorem5(f, ps); },
                   {{"params", ps}});
    }
    if (th == "lemma1") {
        // p = q = 2: the g_k are fixed positive mixtures, the family supplies H.
        const int m = factor_count(c);
        const GridSpec s = grid_for(c, n, m, 64, 6.0), one = s.with_shape(n, 1);
        TestFamily gk;
        gk.kind = FamilyKind::gaussian_mixture;
        std::vector<GridField> g;
        for (int k = 0; k < m; ++k) g.push_back(make_member(gk, one, c.seed + 1'000'000 + k));
        ParamSet ps = simple_params(n, m);
        ps.p = 2.0;
        ps.q = 2.0;
        ConstantValue cv;
        cv.value = lemma1_sharp_l2_constant(g);
        cv.formula_id = FormulaId::E_T;
        cv.params = ps;
        cv.note = "sup of the product of autocorrelations g_k * g_k~";
        return run(fam, s,
                   [&](const GridField& H) {
                       const auto pr = lemma1_ratio(g, H);
                       VerificationReport r;
                       r.theorem_id = "lemma1";
                       r.params = ps;
                       r.grid = H.spec;
                       r.lhs = pr.lhs;
                       r.rhs = pr.rhs;
                       r.constant = cv;
                       return fractrace::detail::finish(r);
                   },
                   {{"params", ps}});
    }
    if (th == "lemma2") {
        const double p = c.p.value_or(4.0 / 3.0);
        const ParamSet ps = lemma2_params(n, p);
        return run(fam, grid_for(c, n, 1, 256, 6.0), [&](const GridField& f) { return check_lemma2(f, p); },
                   {{"params", ps}});
    }
    if (th == "subvariety" || th == "uncertainty") {
        const int nn = dim_n(c, 2);
        const bool unc = th == "uncertainty";
        const ParamSet ps = subvariety_params(nn, unc ? nn : c.k_sub.value_or(1), c.beta.value_or(unc ? 0.7 : 0.5));
        const Variant v = parse_variant(c.variant, Variant::statement);
        return run(fam, grid_for(c, nn, 1, unc ? 128 : 256, unc ? 6.0 : 8.0),
                   [&](const GridField& f) { return unc ? check_uncertainty(f, ps, v) : check_subvariety(f, ps, v); },
                   {{"params", ps}, {"variant", to_string(v)}});
    }
    if (th == "corollary") {
        const ParamSet ps = corollary_params(n, hls_alphas(c), c.q.value_or(2.0));
        const GridSpec s = grid_for(c, n, ps.m, 128, 6.0);
        std::vector<GridField> members;
        const auto seeds = family_seeds(fam);
        for (auto sd : seeds) members.push_back(make_member(fam, s, sd));
        auto res = check_corollary(members, ps);
        for (std::size_t i = 0; i < seeds.size(); ++i) res.reports[i].seed = seeds[i];
        json extra{{"params", ps}, {"D", constant_json(res.D)}};
        extra["family"] = {{"kind", to_string(fam.kind)}, {"base_seed", fam.base_seed}, {"count", fam.count}};
        return finish_verify(c, std::move(res.reports), std::move(extra));
    }
    if (th == "7") {
        const int m = factor_count(c);
        const GridSpec s = grid_for(c, n, m, 128, 6.0);
        OperatorFamily ofam;
        double q = 2.0;
        if (c.op == "riesz") {
            const ParamSet ps = theorem2_params(n, hls_alphas(c));
            ofam = riesz_family(n, ps.alphas, s.dxi());
            q = c.q.value_or(*ps.q);
        } else if (c.op == "bessel") {
            ofam = bessel_family(n, c.alphas.empty() ? std::vector<double>(m, double(n)) : c.alphas);
            q = c.q.value_or(2.0);
        } else if (c.op == "identity") {
            ofam = identity_family(n, m);
            q = c.q.value_or(2.0);
        } else {
            throw config_error("unknown operator family '" + c.op + "' (riesz, bessel, identity)");
        }
        return run(fam, s,
                   [&](const GridField& f) {
                       auto g = check_generic_trace(f, ofam, q);
                       g.report.notes.push_back("E_T probe " + fmt(g.E_T_probe));
                       return g.report;
                   },
                   {{"operator", ofam.name}, {"q", q}, {"probe_set_version", probe_set_version}});
    }
    throw config_error("unknown theorem '" + th +
                       "' (1, 2, 4, 5, lemma1, lemma2, subvariety, uncertainty, corollary, 7, sphere_hls, "
                       "sphere_classical, sphere6)");
}

// ---------------------------------------------------------------------------
// sharpness

inline bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return true;
}

inline Outcome threshold_table(const RunConfig& c, const std::string& axis, const json& xs,
                               const std::vector<double>& ratios, double threshold, json extra) {
    Outcome o;
    o.report = std::move(extra);
    o.report["command"] = "sharpness";
    o.report["theorem"] = c.theorem;
    json rows = json::array();
    for (std::size_t i = 0; i < xs.size(); ++i) rows.push_back({{axis, xs[i]}, {"ratio", ratios[i]}});
    const bool mono = strictly_increasing(ratios);
    const bool meets = !ratios.empty() && ratios.back() >= threshold;
    o.report["table"] = rows;
    o.report["monotone"] = mono;
    o.report["threshold"] = threshold;
    o.report["final_ratio"] = ratios.empty() ? json(nullptr) : json(ratios.back());
    o.report["meets_threshold"] = meets;
    o.report["verdict"] = mono && meets ? "pass" : "fail";
    o.table = rows;
    o.code = mono && meets ? exit_pass : exit_violation;
    return o;
}

template <class T>
std::vector<T> or_default(const std::vector<T>& given, std::vector<T> fallback) {
    return given.empty() ? fallback : given;
}

inline Outcome cmd_sharpness(const RunConfig& c) {
    const std::string& th = c.theorem;
    const int n = dim_n(c);
    if (th == "2") {
        // Extremals are defined up to dilation: each N takes the best profile scale.
        const ParamSet ps = theorem2_params(n, c.alphas.empty() ? std::vector<double>{0.75, 0.75} : c.alphas);
        const auto Ns = or_default<std::size_t>(c.grids, {64, 128, 256});
        const auto scales = or_default<double>(c.scales, {0.125, 0.25, 0.5, 1.0, 2.0});
        const double L = c.L.value_or(32.0);
        for (auto N : Ns) GridSpec{n, ps.m, N, L, true}.validate();
        std::vector<double> ratios;
        json xs = json::array(), best = json::array();
        for (auto N : Ns) {
            const GridSpec s{n, ps.m, N, L, true};
            double top = -1.0, arg = 0.0;
            for (double sc : scales) {
                ExtremalProfile prof;
                prof.scale = sc;
                const double r = check_theorem2(build_extremal_thm2(ps, s, prof), ps, {LambdaQuadrature::plain}).ratio;
                if (r > top) {
                    top = r;
                    arg = sc;
                }
            }
            xs.push_back(N);
            ratios.push_back(top);
            best.push_back(arg);
        }
        auto o = threshold_table(c, "N", xs, ratios, c.threshold.value_or(0.90),
                                 {{"params", ps}, {"L", L}, {"scales", scales}, {"best_scale", best}});
        for (std::size_t i = 0; i < o.table.size(); ++i) {
            o.table[i]["best_scale"] = best[i];
            o.report["table"][i]["best_scale"] = best[i];
        }
        return o;
    }
    if (th == "6") {
        // F ≡ 1 attains the dual form exactly; the table shows it is resolution free.
        const ParamSet ps = sphere6_params(n, hls_alphas(c));
        const auto Ns = or_default<std::size_t>(c.grids, n == 1 ? std::vector<std::size_t>{16, 32, 64}
                                                                 : std::vector<std::size_t>{8, 12, 16});
        const double tol = c.tol.value_or(1e-6);
        Outcome o;
        json rows = json::array();
        bool ok = true;
        for (auto N : Ns) {
            const auto g = make_sphere_grid(n, N);
            std::vector<cplx> one(g.size(), cplx{1.0});
            const double rd = check_theorem6_dual(one, g, ps.alphas, Variant::derivation, c.jobs).ratio;
            const double rs = check_theorem6_dual(one, g, ps.alphas, Variant::statement, c.jobs).ratio;
            rows.push_back({{"nodes", N}, {"ratio", rd}, {"statement_ratio", rs}});
            ok = ok && std::abs(rd - 1.0) <= tol;
        }
        o.report = {{"command", "sharpness"}, {"theorem", th}, {"params", ps}, {"table", rows},
                    {"tolerance", tol}, {"equality", ok}, {"verdict", ok ? "pass" : "fail"},
                    {"note", fractrace::detail::sphere_variant_note(ps)}};
        o.table = rows;
        o.code = ok ? exit_pass : exit_violation;
        return o;
    }
    if (th == "lemma1" || th == "lemma1-p2q2") {
        const int m = factor_count(c);
        const GridSpec one{n, 1, c.N.value_or(256), c.L.value_or(8.0), true};
        one.with_shape(n, m).validate();
        const auto widths = or_default<double>(c.widths, {0.15, 0.25, 0.35});
        const std::vector<PointFunction> g(m, [](std::span<const double> x) {
            double r2 = 0.0;
            for (double v : x) r2 += v * v;
            return std::exp(-pi * r2);
        });
        std::vector<double> ratios;
        for (double w : widths) ratios.push_back(lemma1_matched_probe(g, one, w).ratio);
        return threshold_table(c, "width", widths, ratios, c.threshold.value_or(0.95),
                               {{"N", one.N}, {"L", one.L}, {"m", m}});
    }
    if (th == "thm4-q2") {
        const int m = factor_count(c);
        const ParamSet ps = theorem4_params(n, c.alphas.empty() ? std::vector<double>(m, double(n)) : c.alphas, 2.0);
        const GridSpec one{n, 1, c.N.value_or(1024), c.L.value_or(64.0), true};
        one.validate();
        const auto widths = or_default<double>(c.widths, {3.0, 6.0, 12.0});
        std::vector<double> ratios;
        for (double w : widths) ratios.push_back(theorem4_dual_ratio(ps, one, w));
        return threshold_table(c, "width", widths, ratios, c.threshold.value_or(0.95),
                               {{"params", ps}, {"N", one.N}, {"L", one.L}});
    }
    if (th == "1") {
        // No extremals: only the concentration trend is reported.
        const ParamSet ps = theorem1_params(n, pitt_alphas(c), c.beta);
        const auto ts = or_default<double>(c.ts, {1.0, 2.0, 4.0});
        TestFamily fam;
        fam.kind = FamilyKind::concentrating;
        const std::size_t N = c.N.value_or(256);
        const double L = c.L.value_or(6.0);
        std::vector<double> ratios;
        json rows = json::array();
        for (double t : ts) {
            need(t > 0.0, "--ts values must be > 0");
            fam.t = t;
            const GridSpec s{n, ps.m, N, L / t, true};
            s.validate();
            const double r = check_theorem1(make_member(fam, s, c.seed), ps).ratio;
            ratios.push_back(r);
            rows.push_back({{"t", t}, {"ratio", r}});
        }
        bool nondecreasing = true, strict = true;
        for (std::size_t i = 0; i < ratios.size(); ++i) {
            if (i > 0 && ratios[i] < ratios[i - 1] * (1.0 - 1e-9)) nondecreasing = false;
            if (!(ratios[i] <= 1.0 - 1e-3)) strict = false;
        }
        Outcome o;
        o.report = {{"command", "sharpness"}, {"theorem", "1"}, {"params", ps}, {"table", rows},
                    {"trend_only", true}, {"flag", "no extremals exist"}, {"nondecreasing", nondecreasing},
                    {"strict", strict}, {"seed", c.seed},
                    {"note", "co-dilated grids: the discrete ratio is dilation invariant, so the trend is flat"}};
        o.table = rows;
        o.code = nondecreasing && strict ? exit_pass : exit_violation;
        return o;
    }
    throw config_error("theorem '" + th + "' has no sharpness probe (2, 6, lemma1, thm4-q2, 1)");
}

// ---------------------------------------------------------------------------
// sw

inline MCOptions mc_options(const RunConfig& c) {
    MCOptions o;
    o.samples = c.samples;
    o.seed = c.seed;
    o.scheme = mc_scheme_from_string(c.scheme);
    o.jobs = c.jobs;
    return o;
}

inline json versus(const MCEstimate& e, double reference) {
    const double z = (e.mean - reference) / e.std_error;
    return {{"reference", reference}, {"z", z}, {"within_3_stderr", std::abs(z) <= 3.0}};
}

inline std::vector<double> unit(int n, double sign) {
    std::vector<double> v(n, 0.0);
    v[0] = sign;
    return v;
}

inline ParamSet iterated_params(const RunConfig& c) {
    const int n = dim_n(c);
    const bool defaults = c.alphas.empty() && c.betas.empty() && c.rhos.empty();
    if (defaults) return iterated_sw_params(n, {0.9 * n, 0.9 * n}, {0.2 * n, 0.2 * n}, {0.2 * n, 0.2 * n});
    return iterated_sw_params(n, c.alphas, c.betas, c.rhos);
}

inline Outcome cmd_sw(const RunConfig& c) {
    const int n = dim_n(c);
    Outcome o;
    json& j = o.report;
    j["command"] = "sw";
    j["mode"] = c.mode;
    auto finish = [&](const MCEstimate& e, const json& cmp) {
        j["estimate"] = e;
        j["rel_stderr"] = e.rel_error();
        o.table.push_back({{"mean", e.mean}, {"stderr", e.std_error}, {"n_samples", e.n_samples}, {"seed", e.seed}});
        if (!cmp.is_null()) {
            j["comparison"] = cmp;
            o.table[0]["z"] = cmp["z"];
            if (!cmp["within_3_stderr"].get<bool>()) o.code = exit_violation;
        }
    };
    if (c.mode == "riesz") {
        const int m = c.sigma.empty() ? c.m.value_or(2) : static_cast<int>(c.sigma.size());
        const double mn = m * double(n);
        // 2σ + β - mn = n fixes one of (σ, β) from the other.
        double beta = c.beta.value_or(0.2 * n);
        std::vector<double> sigma = c.sigma;
        if (sigma.empty()) sigma = equal_split(m, 0.5 * (n + mn - beta));
        else if (!c.beta) beta = n + mn - 2.0 * std::accumulate(sigma.begin(), sigma.end(), 0.0);
        const ParamSet ps = theorem3_params(n, sigma, beta);
        const auto closed = stein_weiss_riesz_constant(ps);
        std::vector<KernelSpec> kernels;
        for (double s : ps.sigma) kernels.push_back(riesz_kernel(n, s));
        j["params"] = ps;
        j["closed_form"] = constant_json(closed);
        const auto e = stein_weiss_trace_constant(kernels, *ps.beta, n, mc_options(c));
        finish(e, versus(e, closed.value));
        return o;
    }
    if (c.mode == "iterated") {
        const ParamSet ps = iterated_params(c);
        j["params"] = ps;
        const auto e = iterated_sw_constant(ps, mc_options(c));
        json cmp;
        if (ps.n == 1 && !c.no_quadrature) {
            const auto qd = iterated_sw_constant_quadrature(ps);
            j["quadrature"] = constant_json(qd);
            cmp = versus(e, qd.value);
        }
        finish(e, cmp);
        return o;
    }
    if (c.mode == "B") {
        const ParamSet ps = iterated_params(c);
        need(c.k >= 0 && c.k < ps.m, "--k must index a factor (0.." + std::to_string(ps.m - 1) + ")");
        const auto e1 = c.eta1.empty() ? unit(ps.n, 1.0) : c.eta1;
        const auto e2 = c.eta2.empty() ? unit(ps.n, -1.0) : c.eta2;
        j["params"] = ps;
        j["x"] = c.x;
        j["k"] = c.k;
        j["eta1"] = e1;
        j["eta2"] = e2;
        const auto e = iterated_sw_B(c.x, ps, c.k, e1, e2, mc_options(c));
        json cmp;
        if (ps.n == 1 && !c.no_quadrature) {
            const double qd = iterated_sw_B_quadrature(c.x, ps, c.k, e1[0], e2[0]);
            j["quadrature"] = qd;
            cmp = versus(e, qd);
        }
        finish(e, cmp);
        return o;
    }
    if (c.mode == "factor") {
        // A single B factor from raw (α_k, ρ_k), outside any joint regime.
        need(c.alpha && c.rho, "factor mode needs --alpha and --rho");
        need(n == 1, "factor mode is quadrature only (n = 1)");
        const auto f = iterated_factor(n, *c.alpha, *c.rho);
        const double e1 = c.eta1.empty() ? 1.0 : c.eta1.at(0), e2 = c.eta2.empty() ? -1.0 : c.eta2.at(0);
        const double b = iterated_sw_B_quadrature(c.x, f, e1, e2);
        j["factor"] = {{"alpha", *c.alpha}, {"rho", *c.rho}, {"c", f.c}, {"p", f.p}};
        j["x"] = c.x;
        j["eta1"] = e1;
        j["eta2"] = e2;
        j["B"] = b;
        o.table.push_back({{"x", c.x}, {"B", b}});
        return o;
    }
    throw config_error("unknown sw mode '" + c.mode + "' (riesz, iterated, B, factor)");
}

// ---------------------------------------------------------------------------
// parsing

inline std::string csv_of(const json& rows) {
    std::ostringstream os;
    if (rows.empty()) return "";
    std::vector<std::string> keys;
    for (auto it = rows[0].begin(); it != rows[0].end(); ++it) keys.push_back(it.key());
    for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << keys[i];
    os << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < keys.size(); ++i) {
            const auto& v = r.contains(keys[i]) ? r[keys[i]] : json(nullptr);
            os << (i ? "," : "") << (v.is_string() ? v.get<std::string>() : v.dump());
        }
        os << "\n";
    }
    return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw config_error("write to '" + path + "' failed");
}

inline void add_run_options(CLI::App* s, RunConfig& c) {
    s->add_option("--seed", c.seed, "base seed (default $FRACTRACE_SEED, else 1)")->envname("FRACTRACE_SEED");
    s->add_option("--jobs", c.jobs, "worker cap")->check(CLI::PositiveNumber);
    s->add_option("--out", c.out, "write the JSON report here instead of stdout");
    s->add_option("--csv", c.csv, "write the table as CSV");
    s->add_flag("--timing", c.timing, "include wall-clock runtimes (reports are then not reproducible)");
}

inline void add_param_options(CLI::App* s, RunConfig& c) {
    s->add_option("--n", c.n, "spatial dimension");
    s->add_option("--m", c.m, "factor count");
    s->add_option("--alphas", c.alphas, "alpha_k list")->delimiter(',');
    s->add_option("--beta", c.beta, "weight exponent");
    s->add_option("--p", c.p, "Lebesgue exponent p");
    s->add_option("--q", c.q, "Lebesgue exponent q");
    s->add_option("--variant", c.variant, "statement | derivation | both");
}

inline void add_verify_options(CLI::App* s, RunConfig& c) {
    add_param_options(s, c);
    s->add_option("--theorem", c.theorem, "theorem id")->required();
    s->add_option("--betas-high", c.betas_high, "Bessel orders beta_l >= n (Theorem 5)")->delimiter(',');
    s->add_option("--k", c.k_sub, "subvariety dimension");
    s->add_option("--grid", c.N, "grid points per axis (power of two)");
    s->add_option("--L", c.L, "box half-width");
    s->add_option("--family", c.family, "test family kind");
    s->add_option("--count", c.count, "family size");
    s->add_option("--t", c.t, "concentration parameter");
    s->add_option("--tol", c.tol, "ratio tolerance override");
    s->add_option("--degree", c.degree, "harmonic degree of sphere test fields");
    s->add_option("--nodes", c.nodes, "sphere quadrature size");
    s->add_option("--operator", c.op, "Theorem 7 operator family: riesz | bessel | identity");
    s->add_flag("--estimate-error", c.estimate_error, "rerun each member at N/2");
    add_run_options(s, c);
}

// CLI11 reads --config only before the subcommand; move it there.
inline std::vector<std::string> hoist_config(std::vector<std::string> args) {
    std::vector<std::string> head, rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            head.push_back(args[i]);
            head.push_back(args[++i]);
        } else if (args[i].rfind("--config=", 0) == 0) {
            head.push_back(args[i]);
        } else {
            rest.push_back(args[i]);
        }
    }
    head.insert(head.end(), rest.begin(), rest.end());
    return head;
}

} // namespace detail

// Returns the process exit code. Reports go to `out` (or --out), diagnostics to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    using namespace detail;
    RunConfig c;
    CLI::App app{"Sharp trace-inequality constants and their numerical verification", "fractrace"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_config("--config", "", "key = value file; keys go under a [subcommand] section, flags win");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);

    auto* con = app.add_subcommand("constant", "evaluate a sharp constant");
    con->add_option("--formula", c.formula, "formula id")->required();
    add_param_options(con, c);
    con->add_option("--sigma", c.sigma, "sigma_k list")->delimiter(',');
    con->add_option("--betas", c.betas, "iterated inner weights")->delimiter(',');
    con->add_option("--rhos", c.rhos, "iterated outer weights")->delimiter(',');
    con->add_option("--lambda", c.lambda, "kernel power");
    con->add_option("--k", c.k_sub, "subvariety dimension");
    add_run_options(con, c);

    auto* ver = app.add_subcommand("verify", "run an inequality over a seeded test family");
    add_verify_options(ver, c);
    auto* sph = app.add_subcommand("sphere", "verify with a sphere theorem (sphere_hls, sphere_classical, sphere6)");
    add_verify_options(sph, c);

    auto* shp = app.add_subcommand("sharpness", "ratio-vs-resolution trend for a sharpness probe");
    add_param_options(shp, c);
    shp->add_option("--theorem", c.theorem, "2 | 6 | lemma1 | thm4-q2 | 1")->required();
    shp->add_option("--grids", c.grids, "resolutions (N list, or sphere node counts)")->delimiter(',');
    shp->add_option("--grid", c.N, "grid points per axis where the axis is not N");
    shp->add_option("--L", c.L, "box half-width");
    shp->add_option("--scales", c.scales, "profile dilations tried at each N (Theorem 2)")->delimiter(',');
    shp->add_option("--widths", c.widths, "probe widths (lemma1, thm4-q2)")->delimiter(',');
    shp->add_option("--ts", c.ts, "concentration parameters (Theorem 1)")->delimiter(',');
    shp->add_option("--threshold", c.threshold, "required final ratio");
    shp->add_option("--tol", c.tol, "equality tolerance (Theorem 6)");
    add_run_options(shp, c);

    auto* sw = app.add_subcommand("sw", "Monte-Carlo Stein-Weiss constants");
    sw->add_option("--mode", c.mode, "riesz | iterated | B | factor");
    sw->add_option("--n", c.n, "spatial dimension");
    sw->add_option("--m", c.m, "factor count (riesz, when --sigma is absent)");
    sw->add_option("--sigma", c.sigma, "kernel degrees sigma_k")->delimiter(',');
    sw->add_option("--beta", c.beta, "Stein-Weiss weight");
    sw->add_option("--alphas", c.alphas, "iterated alpha_k")->delimiter(',');
    sw->add_option("--betas", c.betas, "iterated beta_k")->delimiter(',');
    sw->add_option("--rhos", c.rhos, "iterated rho_k")->delimiter(',');
    sw->add_option("--alpha", c.alpha, "factor mode alpha_k");
    sw->add_option("--rho", c.rho, "factor mode rho_k");
    sw->add_option("--x", c.x, "B_k argument");
    sw->add_option("--k", c.k, "B_k factor index");
    sw->add_option("--eta1", c.eta1, "unit vector")->delimiter(',');
    sw->add_option("--eta2", c.eta2, "unit vector")->delimiter(',');
    sw->add_option("--samples", c.samples, "Monte-Carlo samples");
    sw->add_option("--scheme", c.scheme, "plain | stratified");
    sw->add_flag("--no-quadrature", c.no_quadrature, "skip the n = 1 quadrature cross-check");
    add_run_options(sw, c);

    std::vector<std::string> args(argv + 1, argv + argc);
    args = hoist_config(std::move(args));
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_pass;
    } catch (const CLI::ConfigError& e) {
        err << "fractrace: config error: unknown or malformed config entry (" << e.what() << ")\n";
        return exit_config;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return exit_pass;
        }
        err << "fractrace: config error: " << e.what() << "\n";
        return exit_config;
    }
    for (auto* s : {con, ver, sph, shp, sw})
        if (s->parsed()) c.command = s->get_name();

    try {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        if (c.command == "constant") o = cmd_constant(c);
        else if (c.command == "verify" || c.command == "sphere") o = cmd_verify(c);
        else if (c.command == "sharpness") o = cmd_sharpness(c);
        else o = cmd_sw(c);
        if (c.timing)
            o.report["runtime_ms"] =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        o.report["seed"] = c.seed;
        o.report["exit_code"] = o.code;
        const std::string text = o.report.dump(2) + "\n";
        if (c.out.empty()) out << text;
        else write_file(c.out, text);
        if (!c.csv.empty()) write_file(c.csv, csv_of(o.table));
        return o.code;
    } catch (const regime_error& e) {
        err << "fractrace: regime error: " << e.what() << "\n";
        return exit_config;
    } catch (const divergence_error& e) {
        err << "fractrace: divergence: " << e.what() << "\n";
        return exit_divergence;
    } catch (const grid_error& e) {
        err << "fractrace: grid error: " << e.what() << "\n";
        return exit_config;
    } catch (const config_error& e) {
        err << "fractrace: config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        err << "fractrace: error: " << e.what() << "\n";
        return exit_config;
    }
}

} // namespace fractrace::cli
