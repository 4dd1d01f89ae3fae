#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <nlohmann/json.hpp>

#include "bessel.hpp"
#include "constants.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "params.hpp"
#include "potentials.hpp"
#include "rng.hpp"

namespace fractrace {

inline constexpr double tol_homogeneous = 0.01;
inline constexpr double tol_weighted = 0.02;

struct VerificationReport {
    std::string theorem_id;
    ParamSet params;
    double lhs = 0.0;
    double rhs = 0.0; // the functional on the right, without the constant
    ConstantValue constant;
    double ratio = 0.0;
    double margin = 0.0;
    GridSpec grid;
    double tol = tol_homogeneous;
    bool pass = false;
    bool outside_regime = false;
    bool constant_on_lhs = false; // d·lhs ≤ rhs forms: ratio = C·lhs/rhs
    std::optional<std::uint64_t> seed;
    std::optional<double> disc_error; // |ratio(N) - ratio(N/2)| when requested
    std::optional<double> runtime_ms;
    std::vector<std::string> notes;
};

inline void to_json(nlohmann::json& j, const VerificationReport& r) {
    j = nlohmann::json::object();
    j["theorem_id"] = r.theorem_id;
    j["params"] = r.params;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["constant"] = r.constant;
    j["ratio"] = r.ratio;
    j["margin"] = r.margin;
    j["grid"] = {{"n", r.grid.n}, {"m", r.grid.m}, {"N", r.grid.N}, {"L", r.grid.L}};
    j["tol"] = r.tol;
    j["pass"] = r.pass;
    j["non_sharp"] = !r.constant.sharp;
    j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
    j["runtime_ms"] = r.runtime_ms ? nlohmann::json(*r.runtime_ms) : nlohmann::json(nullptr);
    if (r.disc_error) j["disc_error"] = *r.disc_error;
    if (r.outside_regime) j["outside_regime"] = true;
    if (r.constant_on_lhs) j["constant_on_lhs"] = true;
    if (!r.notes.empty()) j["notes"] = r.notes;
}

namespace detail {

inline GridField as_physical(const GridField& f) {
    return f.space == Space::physical ? f : inverse_transform(f);
}

inline GridField as_spectral(const GridField& f) {
    return f.space == Space::spectral ? f : forward_transform(f);
}

inline void require_shape(const GridField& f, int n, int m, const char* who) {
    if (f.spec.n != n || f.spec.m != m)
        throw grid_error(std::string(who) + ": field lives on (R^" + std::to_string(f.spec.n) + ")^" +
                         std::to_string(f.spec.m) + ", expected (R^" + std::to_string(n) + ")^" + std::to_string(m));
}

inline VerificationReport finish(VerificationReport r) {
    if (!(r.rhs > 0.0) || !std::isfinite(r.rhs))
        throw grid_error(r.theorem_id + ": right-hand functional is zero or non-finite on this grid");
    r.ratio = r.constant_on_lhs ? r.constant.value * r.lhs / r.rhs : r.lhs / (r.constant.value * r.rhs);
    if (!std::isfinite(r.ratio)) throw divergence_error(r.theorem_id + ": ratio is not finite");
    r.margin = 1.0 - r.ratio;
    r.pass = !r.outside_regime && r.ratio <= 1.0 + r.tol;
    return r;
}

inline std::vector<double> abs_pow(const GridField& f, double q) {
    std::vector<double> g(f.values.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::pow(std::abs(f.values[i]), q);
    return g;
}

inline double lq_norm_sq(const GridField& f, double q) {
    const double v = weighted_lq_norm(f, 0.0, q);
    return v * v;
}

} // namespace detail

// Λ (homogeneous): ∏|ξ_k|^{α_k}; Λ* (bessel): ∏(1+4π²|ξ_k|²)^{α_k/2};
// Λ_# (mixed): Bessel factors with α on the first factors and β on the rest.
enum class LambdaKind { homogeneous, bessel, mixed };

// corrected: homogeneous weights get the lattice-zeta correction at ξ_k = 0
// (continuum value for sampled smooth f). plain: the bare lattice sum, which is
// the exact functional of the trigonometric polynomial on the box.
enum class LambdaQuadrature { corrected, plain };

struct CheckOptions {
    LambdaQuadrature quadrature = LambdaQuadrature::corrected;
};

namespace detail {

inline std::pair<MultiplierKind, std::vector<double>> lambda_exponents(const GridSpec& s, std::span<const double> alphas,
                                                                      LambdaKind kind, std::span<const double> betas) {
    std::vector<double> e(alphas.begin(), alphas.end());
    if (kind == LambdaKind::mixed) e.insert(e.end(), betas.begin(), betas.end());
    else if (!betas.empty()) throw regime_error("lambda_functional: beta orders only belong to the mixed functional");
    if (static_cast<int>(e.size()) != s.m)
        throw regime_error("lambda_functional: need " + std::to_string(s.m) + " exponents, got " + std::to_string(e.size()));
    for (double a : e)
        if (!std::isfinite(a) || a < 0.0) throw regime_error("lambda_functional: exponents must be finite and >= 0");
    return {kind == LambdaKind::homogeneous ? MultiplierKind::homogeneous : MultiplierKind::bessel_operator, e};
}

} // namespace detail

inline double lambda_functional(const GridField& f, std::span<const double> alphas, LambdaKind kind,
                                std::span<const double> betas = {},
                                LambdaQuadrature quad = LambdaQuadrature::corrected) {
    const auto [mk, e] = detail::lambda_exponents(f.spec, alphas, kind, betas);
    if (mk == MultiplierKind::homogeneous && quad == LambdaQuadrature::corrected)
        return homogeneous_form_corrected(detail::as_spectral(f), e);
    return spectral_quadratic_form(detail::as_spectral(f), mk, e);
}

inline double lambda_functional(const GridField& f, const std::vector<double>& alphas, LambdaKind kind,
                                const std::vector<double>& betas = {},
                                LambdaQuadrature quad = LambdaQuadrature::corrected) {
    return lambda_functional(f, std::span<const double>(alphas), kind, std::span<const double>(betas), quad);
}

// ‖∏(multiplier)^{1/2} f‖² in physical space; equals the plain lattice sum.
inline double lambda_functional_physical(const GridField& f, const std::vector<double>& alphas, LambdaKind kind,
                                         const std::vector<double>& betas = {}) {
    auto [mk, e] = detail::lambda_exponents(f.spec, alphas, kind, betas);
    for (double& v : e) v *= 0.5;
    return l2_norm_sq(inverse_transform(apply_multiplier(detail::as_spectral(f), mk, e)));
}

inline VerificationReport check_theorem1(const GridField& f, const ParamSet& ps, const CheckOptions& opt = {}) {
    const ParamSet p = theorem1_params(ps.n, ps.alphas, ps.beta);
    detail::require_shape(f, p.n, p.m, "check_theorem1");
    VerificationReport r;
    r.theorem_id = "theorem1";
    r.params = p;
    r.grid = f.spec;
    r.tol = tol_weighted;
    const GridField tr = diagonal_trace(detail::as_physical(f));
    r.lhs = weighted_integral(tr.spec, detail::abs_pow(tr, 2.0), *p.beta);
    r.rhs = lambda_functional(f, p.alphas, LambdaKind::homogeneous, {}, opt.quadrature);
    r.constant = pitt_trace_constant(p, Variant::statement);
    return detail::finish(r);
}

inline VerificationReport check_theorem2(const GridField& f, const ParamSet& ps, const CheckOptions& opt = {}) {
    const ParamSet p = theorem2_params(ps.n, ps.alphas);
    detail::require_shape(f, p.n, p.m, "check_theorem2");
    VerificationReport r;
    r.theorem_id = "theorem2";
    r.params = p;
    r.grid = f.spec;
    r.lhs = detail::lq_norm_sq(diagonal_trace(detail::as_physical(f)), *p.q);
    r.rhs = lambda_functional(f, p.alphas, LambdaKind::homogeneous, {}, opt.quadrature);
    r.constant = hls_trace_constant(p);
    return detail::finish(r);
}

// Transform of (1+|w|²)^{-ν} on R^n: 2π^ν/Γ(ν) |η|^{ν-n/2} K_{ν-n/2}(2π|η|).
inline double profile_transform(int n, double nu, double eta) {
    if (!(nu > 0.5 * n)) throw regime_error("profile_transform: (1+|w|^2)^{-nu} needs nu > n/2 to be integrable");
    if (eta == 0.0) return std::exp(0.5 * n * std::log(pi) + log_gamma_ratio(nu - 0.5 * n, nu));
    const double mu = std::abs(nu - 0.5 * n), z = 2.0 * pi * eta;
    if (z > 700.0) return 0.0;
    return 2.0 * std::exp(nu * std::log(pi) - log_gamma(nu)) * std::pow(eta, nu - 0.5 * n) *
           boost::math::cyl_bessel_k(mu, z);
}

// Profile g(w) = g₀((w - c)/s) of the Theorem 2 extremal, g₀ = (1+|w|²)^{-n/p}.
struct ExtremalProfile {
    double scale = 1.0;
    std::vector<double> shift; // empty = origin
    bool drop_zero_lines = true; // false: cell average of the Riesz symbol there
};

// f(x_1..x_m) = ∫∏|x_k - w|^{-(n-α_k)} g(w) dw, assembled spectrally:
// f̂ = ∏ c_k|ξ_k|^{-α_k} · ĝ(Σξ_k). By default the singular lines ξ_k = 0 are
// dropped: Λ puts no weight there, so mass on them would raise the trace for
// free. That removes per-axis means, so the field is not positive; the
// cell-average variant is the faithful (positive) periodization. Evaluate Λ
// with LambdaQuadrature::plain (f̂ is not smooth).
inline GridField build_extremal_thm2(const ParamSet& ps, const GridSpec& spec, const ExtremalProfile& prof = {}) {
    const ParamSet p = theorem2_params(ps.n, ps.alphas);
    if (spec.n != p.n || spec.m != p.m) throw grid_error("build_extremal_thm2: grid shape does not match (n, m)");
    spec.validate();
    if (!(prof.scale > 0.0)) throw regime_error("build_extremal_thm2: profile scale must be > 0");
    if (!prof.shift.empty() && static_cast<int>(prof.shift.size()) != p.n)
        throw regime_error("build_extremal_thm2: profile shift must have n components");
    const int n = p.n, m = p.m, d = spec.dim();
    const double nu = n / *p.p;
    std::vector<RadialSymbol> syms;
    for (double a : p.alphas) syms.push_back(riesz_symbol(n, n - a, spec.dxi()));
    GridField g{spec, std::vector<cplx>(spec.size()), Space::spectral};
    std::array<std::size_t, max_grid_dim> a{};
    std::array<double, max_grid_dim> eta{};
    for (std::size_t idx = 0; idx < g.values.size(); ++idx) {
        detail::decode(idx, spec.N, d, std::span(a.data(), d));
        double w = 1.0;
        std::fill(eta.begin(), eta.begin() + n, 0.0);
        for (int k = 0; k < m; ++k) {
            double r2 = 0.0;
            for (int i = 0; i < n; ++i) {
                const double xi = spec.freq(a[k * n + i]);
                r2 += xi * xi;
                eta[i] += xi;
            }
            w *= r2 != 0.0 ? syms[k].at(std::sqrt(r2)) : prof.drop_zero_lines ? 0.0 : syms[k].zero_cell;
        }
        double e2 = 0.0, phase = 0.0;
        for (int i = 0; i < n; ++i) {
            e2 += eta[i] * eta[i];
            if (!prof.shift.empty()) phase += prof.shift[i] * eta[i];
        }
        const double gh = std::pow(prof.scale, n) * profile_transform(n, nu, prof.scale * std::sqrt(e2));
        g.values[idx] = w * gh * std::polar(1.0, 2.0 * pi * phase);
    }
    GridField f = inverse_transform(g);
    for (auto& v : f.values) v = v.real();
    return f;
}

// Lemma 2: ∫|f|² ≤ C_p [∫|(-Δ/4π²)^{α/2} f|^p]^{2/p}, α = n(1/p - 1/2).
inline VerificationReport check_lemma2(const GridField& f, double p_exp) {
    const ParamSet p = lemma2_params(f.spec.n, p_exp);
    detail::require_shape(f, p.n, 1, "check_lemma2");
    VerificationReport r;
    r.theorem_id = "lemma2";
    r.params = p;
    r.grid = f.spec;
    const GridField u = inverse_transform(apply_multiplier(detail::as_spectral(f), MultiplierKind::homogeneous, p.alphas));
    r.lhs = l2_norm_sq(detail::as_physical(f));
    r.rhs = detail::lq_norm_sq(u, *p.p);
    r.constant = l2_hls_constant(p.n, *p.p);
    return detail::finish(r);
}

namespace detail {

// Coefficient of the Riesz kernel bound G_a(x) ≤ c |x|^{a-n}.
inline double riesz_bound_coeff(int n, double a) {
    return std::exp(-a * std::log(2.0) - 0.5 * n * std::log(pi) + log_gamma_ratio(0.5 * (n - a), 0.5 * a));
}

// Constant for [∫|tr f|^q]^{2/q} ≤ C ∫∏(1+4π²|ξ_k|²)^{o_k/2}|f̂|², the dual
// kernel being ∏G_{o_k}. low = orders below n, which set the critical index.
inline ConstantValue bessel_trace_constant(const ParamSet& p, const std::vector<double>& low,
                                           const std::vector<double>& high) {
    std::vector<double> orders = low;
    orders.insert(orders.end(), high.begin(), high.end());
    const double q = *p.q;
    ConstantValue c;
    c.params = p;
    if (q == 2.0) {
        c = bessel_l2_constant(p.n, orders);
        c.params = p;
        return c;
    }
    c.formula_id = FormulaId::C_alpha_q;
    c.sharp = false;
    const double lam = *p.lambda_kernel, qcrit = 2.0 * p.n / lam;
    if (q < qcrit * (1.0 - 1e-12)) {
        // Young: ⟨h, K*h⟩ ≤ ‖K‖_{q/2} ‖h‖_p².
        const auto ki = bessel_product_integral(p.n, orders, 1e-10, 0.5 * q);
        c.value = std::pow(ki.value, 2.0 / q);
        c.error_estimate = c.value * ki.rel_change;
        c.note = "Young bound ||prod G||_{q/2}";
        return c;
    }
    // Critical index: ∏G_{α_k} ≤ ∏c_k |x|^{-λ}, G_β ≤ G_β(0), then HLS.
    double lv = std::log(classical_hls_constant(p.n, lam).value);
    for (double a : low) lv += std::log(riesz_bound_coeff(p.n, a));
    for (double b : high) {
        if (b == p.n)
            throw regime_error("theorem5: at the critical index an order beta_l = n leaves an unbounded kernel factor");
        lv += -0.5 * p.n * std::log(4.0 * pi) + log_gamma_ratio(0.5 * (b - p.n), 0.5 * b);
    }
    c.value = std::exp(lv);
    c.note = "critical index: Riesz domination and classical HLS";
    return c;
}

} // namespace detail

inline ConstantValue theorem4_constant(const ParamSet& ps) {
    const ParamSet p = theorem4_params(ps.n, ps.alphas, *ps.q);
    return detail::bessel_trace_constant(p, p.alphas, {});
}

inline ConstantValue theorem5_constant(const ParamSet& ps) {
    const ParamSet p = theorem5_params(ps.n, ps.alphas, ps.betas_high, *ps.q);
    return detail::bessel_trace_constant(p, p.alphas, p.betas_high);
}

inline VerificationReport check_theorem4(const GridField& f, const ParamSet& ps) {
    if (!ps.q) throw regime_error("check_theorem4: q is required");
    const ParamSet p = theorem4_params(ps.n, ps.alphas, *ps.q);
    detail::require_shape(f, p.n, p.m, "check_theorem4");
    VerificationReport r;
    r.theorem_id = "theorem4";
    r.params = p;
    r.grid = f.spec;
    r.lhs = detail::lq_norm_sq(diagonal_trace(detail::as_physical(f)), *p.q);
    r.rhs = lambda_functional(f, p.alphas, LambdaKind::bessel);
    r.constant = theorem4_constant(p);
    return detail::finish(r);
}

inline VerificationReport check_theorem5(const GridField& f, const ParamSet& ps) {
    if (!ps.q) throw regime_error("check_theorem5: q is required");
    const ParamSet p = theorem5_params(ps.n, ps.alphas, ps.betas_high, *ps.q);
    const int m_total = p.m + static_cast<int>(p.betas_high.size());
    detail::require_shape(f, p.n, m_total, "check_theorem5");
    VerificationReport r;
    r.theorem_id = "theorem5";
    r.params = p;
    r.grid = f.spec;
    r.lhs = detail::lq_norm_sq(diagonal_trace(detail::as_physical(f)), *p.q);
    r.rhs = lambda_functional(f, p.alphas, LambdaKind::mixed, p.betas_high);
    r.constant = theorem5_constant(p);
    return detail::finish(r);
}

// ---------------------------------------------------------------------------
// Corollary: [∫|tr f|^q]^{2/q} ≤ D [∫|f|²]^{1-θ} [Λ]^θ.

inline double corollary_raw_ratio(const GridField& f, const ParamSet& p, const CheckOptions& opt = {}) {
    const double lhs = detail::lq_norm_sq(diagonal_trace(detail::as_physical(f)), *p.q);
    const double l2 = l2_norm_sq(detail::as_physical(f));
    const double lam = lambda_functional(f, p.alphas, LambdaKind::homogeneous, {}, opt.quadrature);
    return lhs / (std::pow(l2, 1.0 - *p.theta) * std::pow(lam, *p.theta));
}

struct CorollaryResult {
    ConstantValue D;                        // max raw ratio over the family
    std::vector<VerificationReport> reports; // ratio = raw / D
};

inline CorollaryResult check_corollary(std::span<const GridField> family, const ParamSet& ps,
                                       const CheckOptions& opt = {}) {
    if (!ps.q) throw regime_error("check_corollary: q is required");
    const ParamSet p = corollary_params(ps.n, ps.alphas, *ps.q);
    if (family.empty()) throw config_error("check_corollary: empty test family");
    CorollaryResult out;
    std::vector<double> raw;
    for (const auto& f : family) {
        detail::require_shape(f, p.n, p.m, "check_corollary");
        raw.push_back(corollary_raw_ratio(f, p, opt));
    }
    out.D.value = *std::max_element(raw.begin(), raw.end());
    out.D.formula_id = FormulaId::D_alpha_q;
    out.D.params = p;
    out.D.sharp = false;
    out.D.note = "max ratio over the test family";
    for (std::size_t i = 0; i < family.size(); ++i) {
        const auto& f = family[i];
        VerificationReport r;
        r.theorem_id = "corollary";
        r.params = p;
        r.grid = f.spec;
        r.lhs = detail::lq_norm_sq(diagonal_trace(detail::as_physical(f)), *p.q);
        const double l2 = l2_norm_sq(detail::as_physical(f));
        const double lam = lambda_functional(f, p.alphas, LambdaKind::homogeneous, {}, opt.quadrature);
        r.rhs = std::pow(l2, 1.0 - *p.theta) * std::pow(lam, *p.theta);
        r.constant = out.D;
        out.reports.push_back(detail::finish(r));
    }
    return out;
}

inline CorollaryResult check_corollary(const std::vector<GridField>& family, const ParamSet& ps,
                                       const CheckOptions& opt = {}) {
    return check_corollary(std::span<const GridField>(family), ps, opt);
}

struct MultiplierBound {
    double C;
    bool grid_dependent; // m ≥ 2: the supremum over R^{mn} is infinite
};

// max over the frequency grid of ∏(1+|ξ_k|²)^{α_k/2} / (1 + ∏|ξ_k|^{α_k}).
inline MultiplierBound corollary_multiplier_bound(const ParamSet& ps, const GridSpec& spec) {
    const ParamSet p = theorem4_params(ps.n, ps.alphas, ps.q.value_or(2.0));
    if (spec.n != p.n || spec.m != p.m) throw grid_error("corollary_multiplier_bound: grid shape does not match");
    spec.validate();
    double best = 0.0;
    std::array<double, max_grid_dim> r{};
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
        factor_freq_norms(spec, idx, std::span(r.data(), p.m));
        const auto rs = std::span<const double>(r.data(), p.m);
        const double num = multiplier_value(MultiplierKind::bessel, rs, p.alphas);
        const double den = 1.0 + multiplier_value(MultiplierKind::homogeneous, rs, p.alphas);
        best = std::max(best, num / den);
    }
    return {best, p.m >= 2};
}

// ---------------------------------------------------------------------------
// Uncertainty / restriction to R^k:
//   d ∫_{R^k} |𝓡f|² ≤ ∫ |(-Δ/4π²)^{α/4} |x|^{β/2} f|²,  n - α = k - β.

namespace detail {

// f on R^k × {0}: the pinned axes are interpolated to 0 with the 8-point
// midpoint stencil (the origin is a cell corner).
inline GridField restrict_to_origin_plane(const GridField& f, int k_sub) {
    const int n = f.spec.n;
    const GridSpec out_spec = f.spec.with_shape(k_sub, 1);
    GridField out{out_spec, std::vector<cplx>(out_spec.size()), Space::physical};
    const int extra = n - k_sub;
    const std::size_t base = f.spec.N / 2 - 4;
    std::size_t combos = 1;
    for (int i = 0; i < extra; ++i) combos *= 8;
    std::array<std::size_t, max_grid_dim> a{}, full{};
    for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
        detail::decode(idx, f.spec.N, k_sub, std::span(a.data(), k_sub));
        for (int i = 0; i < k_sub; ++i) full[i] = a[i];
        cplx acc = 0.0;
        for (std::size_t c = 0; c < combos; ++c) {
            double w = 1.0;
            std::size_t cc = c;
            for (int i = 0; i < extra; ++i) {
                const std::size_t s = cc % 8;
                cc /= 8;
                full[k_sub + i] = base + s;
                w *= stencil_value[s];
            }
            acc += w * f.values[detail::encode(std::span<const std::size_t>(full.data(), n), f.spec.N)];
        }
        out.values[idx] = acc;
    }
    return out;
}

// ∫ outside [-1,1]^n of |ξ|^{-n-k} dξ = (2n/k) ∫_{[-1,1]^{n-1}} (1+|u|²)^{-(n+k)/2} du.
inline double cube_exterior_power(int n, double k) {
    if (n == 1) return 2.0 / k;
    using Q = boost::math::quadrature::gauss<double, 30>;
    const double e = -0.5 * (n + k);
    std::function<double(int, double)> nest = [&](int depth, double s2) -> double {
        if (depth == 0) return std::pow(1.0 + s2, e);
        return Q::integrate([&](double u) { return nest(depth - 1, s2 + u * u); }, -1.0, 1.0);
    };
    return 2.0 * n / k * nest(n - 1, 0.0);
}

} // namespace detail

inline VerificationReport check_subvariety(const GridField& f_in, const ParamSet& ps, Variant variant = Variant::statement,
                                           const CheckOptions& opt = {}) {
    if (!ps.k_sub || !ps.beta) throw regime_error("check_subvariety: k_sub and beta are required");
    const ParamSet p = subvariety_params(ps.n, *ps.k_sub, *ps.beta);
    detail::require_shape(f_in, p.n, 1, "check_subvariety");
    const GridField f = detail::as_physical(f_in);
    const int n = p.n, k = *p.k_sub;
    const double beta = *p.beta, gam = 0.5 * beta;
    VerificationReport r;
    r.theorem_id = k == n ? "uncertainty" : "subvariety";
    r.params = p;
    r.grid = f.spec;
    r.tol = tol_weighted;
    r.lhs = l2_norm_sq(k == n ? f : detail::restrict_to_origin_plane(f, k));
    GridField v = f;
    std::array<std::size_t, max_grid_dim> a{};
    for (std::size_t idx = 0; idx < v.values.size(); ++idx) {
        detail::decode(idx, f.spec.N, n, std::span(a.data(), n));
        double r2 = 0.0;
        for (int i = 0; i < n; ++i) r2 += f.spec.node(a[i]) * f.spec.node(a[i]);
        v.values[idx] *= std::pow(r2, 0.5 * gam);
    }
    const double in_box = lambda_functional(v, p.alphas, LambdaKind::homogeneous, {}, opt.quadrature);
    // |x|^{β/2} f has a kink at 0, so |ξ|^α|v̂|² ~ f(0)² c² |ξ|^{-n-k}; add the
    // part of that tail outside the frequency cube.
    std::vector<double> fr(f.values.size());
    for (std::size_t i = 0; i < fr.size(); ++i) fr[i] = f.values[i].real();
    const double f0 = detail::origin_jet(f.spec, fr).first;
    const double c = std::exp(-(gam + 0.5 * n) * std::log(pi) + log_gamma(0.5 * (n + gam)) -
                              std::lgamma(-0.5 * gam));
    const double K = f.spec.N * f.spec.dxi() / 2.0 - 0.5 * f.spec.dxi();
    const double tail = f0 * f0 * c * c * std::pow(K, -static_cast<double>(k)) * detail::cube_exterior_power(n, k);
    r.rhs = in_box + tail;
    r.constant = subvariety_constant(n, k, beta, variant);
    r.constant_on_lhs = true;
    if (k == n) r.notes.push_back("k_sub = n: uncertainty constant c taken as d(k = n)");
    r.notes.push_back("rhs includes analytic high-frequency tail " + detail::fmt(tail));
    return detail::finish(r);
}

inline VerificationReport check_uncertainty(const GridField& f, const ParamSet& ps, Variant variant = Variant::statement,
                                            const CheckOptions& opt = {}) {
    ParamSet p = ps;
    p.k_sub = ps.n;
    return check_subvariety(f, p, variant, opt);
}

// ---------------------------------------------------------------------------
// Generic operator families (translation-invariant T_k with symbols t_k).

struct OperatorFamily {
    std::string name;
    int n = 1;
    std::vector<std::function<double(double)>> symbol;       // t_k(|ξ|)
    std::vector<double> inverse_zero_cell;                    // 1/t_k on the ξ = 0 cell
    std::vector<std::function<double(double)>> inverse_kernel; // T_k^{-1}(x, w) = κ_k(|x - w|), empty if not a function
    std::function<std::optional<ConstantValue>(double q)> known_constant;
    std::vector<double> homogeneous; // t_k = |ξ|^{a_k}: degrees, enabling the corrected quadrature
    bool smoothing = true;

    int m() const { return static_cast<int>(symbol.size()); }

    double kernel(int k, std::span<const double> x, std::span<const double> w) const {
        if (inverse_kernel.empty()) throw regime_error("OperatorFamily: " + name + " has no pointwise inverse kernel");
        double r2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - w[i]) * (x[i] - w[i]);
        return inverse_kernel[k](std::sqrt(r2));
    }
};

inline OperatorFamily riesz_family(int n, std::vector<double> alphas, double dxi) {
    OperatorFamily fam;
    fam.name = "riesz";
    fam.n = n;
    for (double a : alphas) {
        if (!(a > 0.0 && a < n)) throw regime_error("riesz_family: alpha_k must lie in (0, n)");
        fam.symbol.push_back([a](double r) { return std::pow(r, a); });
        fam.inverse_zero_cell.push_back(std::pow(0.5 * dxi, -a) * cube_mean_inverse_power(n, a));
        const double c = 1.0 / riesz_fourier_coeff(n, n - a);
        fam.inverse_kernel.push_back([c, n, a](double r) { return c * std::pow(r, a - n); });
    }
    fam.homogeneous = alphas;
    fam.known_constant = [n, alphas](double q) -> std::optional<ConstantValue> {
        const double lam = alphas.size() * double(n) - std::accumulate(alphas.begin(), alphas.end(), 0.0);
        if (!(lam > 0.0 && lam < n) || std::abs(q - 2.0 * n / lam) > 1e-12 * q) return std::nullopt;
        return hls_trace_constant(theorem2_params(n, alphas));
    };
    return fam;
}

inline OperatorFamily bessel_family(int n, std::vector<double> alphas) {
    OperatorFamily fam;
    fam.name = "bessel";
    fam.n = n;
    for (double a : alphas) {
        if (!(a > 0.0)) throw regime_error("bessel_family: orders must be > 0");
        fam.symbol.push_back([a](double r) { return std::pow(1.0 + 4.0 * pi * pi * r * r, 0.5 * a); });
        fam.inverse_zero_cell.push_back(1.0);
        fam.inverse_kernel.push_back([n, a](double r) { return bessel_eval({n, a, 1e-10, 200000}, r); });
    }
    fam.known_constant = [n, alphas](double q) -> std::optional<ConstantValue> {
        if (q != 2.0) return std::nullopt;
        return bessel_l2_constant(n, alphas);
    };
    return fam;
}

// Not a smoothing family: Theorem 7 does not apply and reports never pass.
inline OperatorFamily identity_family(int n, int m) {
    OperatorFamily fam;
    fam.name = "identity";
    fam.n = n;
    for (int k = 0; k < m; ++k) {
        fam.symbol.push_back([](double) { return 1.0; });
        fam.inverse_zero_cell.push_back(1.0);
    }
    fam.known_constant = [](double q) -> std::optional<ConstantValue> {
        if (q != 2.0) return std::nullopt;
        ConstantValue c;
        c.value = 1.0;
        c.formula_id = FormulaId::E_T;
        c.note = "identity family";
        return c;
    };
    fam.smoothing = false;
    return fam;
}

namespace detail {

// 1/t_k at every frequency of a one-factor grid; throws on a non-positive symbol.
inline std::vector<double> inverse_symbol_table(const OperatorFamily& fam, int k, const GridSpec& one) {
    std::vector<double> out(one.size());
    std::array<double, 1> rr{};
    const GridSpec s1 = one.with_shape(fam.n, 1);
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        factor_freq_norms(s1, idx, std::span(rr.data(), 1));
        if (rr[0] == 0.0) {
            out[idx] = fam.inverse_zero_cell[k];
        } else {
            const double t = fam.symbol[k](rr[0]);
            if (!(t > 0.0) || !std::isfinite(t))
                throw regime_error("check_generic_trace: operator " + fam.name + " is not positive on the grid");
            out[idx] = 1.0 / t;
        }
    }
    return out;
}

inline void check_family(const OperatorFamily& fam, const GridSpec& s) {
    if (fam.m() < 1) throw regime_error("OperatorFamily: empty family");
    if (static_cast<int>(fam.inverse_zero_cell.size()) != fam.m())
        throw regime_error("OperatorFamily: one zero-cell value per factor is required");
    if (s.n != fam.n) throw grid_error("OperatorFamily: grid factor dimension does not match the family");
    for (double z : fam.inverse_zero_cell)
        if (!(z > 0.0) || !std::isfinite(z)) throw regime_error("OperatorFamily: zero-cell inverse must be positive");
}

} // namespace detail

// Dual bilinear form ⟨h, K h⟩ with the discrete kernel K(x_a - x_b) = ∏κ_k,
// κ_k the inverse DFT of 1/t_k on the difference lattice. h lives on R^n.
inline double dual_form(const GridField& h_in, const OperatorFamily& fam) {
    const GridField h = detail::as_physical(h_in);
    detail::check_family(fam, h.spec);
    if (h.spec.m != 1) throw grid_error("dual_form: probe must live on R^n");
    GridSpec lat = h.spec;
    lat.offset = false;
    const int n = fam.n;
    const std::size_t N = lat.N, sz = lat.size();
    std::vector<cplx> K(sz, 1.0);
    for (int k = 0; k < fam.m(); ++k) {
        const auto inv = detail::inverse_symbol_table(fam, k, lat);
        GridField s{lat, std::vector<cplx>(inv.begin(), inv.end()), Space::spectral};
        const GridField kap = inverse_transform(s);
        for (std::size_t i = 0; i < sz; ++i) K[i] *= kap.values[i];
    }
    // Reindex by the difference a - b mod N: lattice node c sits at -L + c h,
    // i.e. difference index (c - N/2) mod N.
    std::vector<cplx> Kc(sz), hv(h.values);
    std::array<std::size_t, max_grid_dim> a{};
    for (std::size_t idx = 0; idx < sz; ++idx) {
        detail::decode(idx, N, n, std::span(a.data(), n));
        for (int i = 0; i < n; ++i) a[i] = (a[i] + N / 2) % N;
        Kc[detail::encode(std::span<const std::size_t>(a.data(), n), N)] = K[idx];
    }
    detail::fft_inplace(Kc, N, n, FFTW_FORWARD);
    detail::fft_inplace(hv, N, n, FFTW_FORWARD);
    for (std::size_t i = 0; i < sz; ++i) hv[i] *= Kc[i];
    detail::fft_inplace(hv, N, n, FFTW_BACKWARD);
    const double hn = std::pow(h.spec.h(), n);
    std::vector<double> t(sz);
    for (std::size_t i = 0; i < sz; ++i) t[i] = (std::conj(h.values[i]) * hv[i]).real() / static_cast<double>(sz);
    return hn * hn * pairwise_sum(t);
}

// f = T^{-1}(Tr* h) on (R^n)^m, where Tr* h = h^{n-mn} h(x_a) on the diagonal.
inline GridField dual_field(const GridField& h_in, const OperatorFamily& fam) {
    const GridField h = detail::as_physical(h_in);
    detail::check_family(fam, h.spec);
    const int n = fam.n, m = fam.m();
    const GridSpec full = h.spec.with_shape(n, m);
    full.validate();
    GridField t{full, std::vector<cplx>(full.size()), Space::physical};
    const double scale = std::pow(full.h(), n - n * m);
    std::array<std::size_t, max_grid_dim> a{}, fa{};
    for (std::size_t idx = 0; idx < h.values.size(); ++idx) {
        detail::decode(idx, full.N, n, std::span(a.data(), n));
        for (int k = 0; k < m; ++k)
            for (int i = 0; i < n; ++i) fa[k * n + i] = a[i];
        t.values[detail::encode(std::span<const std::size_t>(fa.data(), n * m), full.N)] = scale * h.values[idx];
    }
    GridField g = forward_transform(t);
    std::vector<std::vector<double>> inv;
    for (int k = 0; k < m; ++k) inv.push_back(detail::inverse_symbol_table(fam, k, full.with_shape(n, 1)));
    for (std::size_t idx = 0; idx < g.values.size(); ++idx) {
        detail::decode(idx, full.N, n * m, std::span(fa.data(), n * m));
        double w = 1.0;
        for (int k = 0; k < m; ++k)
            w *= inv[k][detail::encode(std::span<const std::size_t>(fa.data() + k * n, n), full.N)];
        g.values[idx] *= w;
    }
    return inverse_transform(g);
}

// ∫ f ∏T_k f. plain: Σ ∏t̃_k(ξ_k)|f̂|² with the discrete operator (t̃_k = 1/zero
// cell at ξ = 0), the exact dual of dual_form. corrected: for homogeneous
// families, the lattice-zeta corrected integral.
inline double primal_form(const GridField& f, const OperatorFamily& fam, LambdaQuadrature quad = LambdaQuadrature::plain) {
    const GridField g = detail::as_spectral(f);
    detail::check_family(fam, g.spec);
    if (g.spec.m != fam.m()) throw grid_error("primal_form: field factor count does not match the family");
    if (quad == LambdaQuadrature::corrected && !fam.homogeneous.empty())
        return homogeneous_form_corrected(g, fam.homogeneous);
    std::vector<double> t(g.values.size());
    std::array<double, max_grid_dim> r{};
    for (std::size_t idx = 0; idx < t.size(); ++idx) {
        factor_freq_norms(g.spec, idx, std::span(r.data(), fam.m()));
        double w = 1.0;
        for (int k = 0; k < fam.m(); ++k) w *= r[k] == 0.0 ? 1.0 / fam.inverse_zero_cell[k] : fam.symbol[k](r[k]);
        t[idx] = w * std::norm(g.values[idx]);
    }
    return std::pow(g.spec.dxi(), g.spec.dim()) * pairwise_sum(t);
}

// Probe set v1 for E_T: Gaussians, two-bump mixtures, and the
// (1+|x|²/s²)^{-n/p} profiles that match a |x|^{-λ} kernel peak.
inline constexpr int probe_set_version = 1;

inline std::vector<GridField> dual_probes(const GridSpec& one, double q) {
    const GridSpec s = one.with_shape(one.n, 1);
    const double p = q == 2.0 ? 2.0 : q / (q - 1.0);
    std::vector<GridField> out;
    auto r2 = [](std::span<const double> x, double c) {
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) v += (x[i] - (i == 0 ? c : 0.0)) * (x[i] - (i == 0 ? c : 0.0));
        return v;
    };
    for (double w : {0.25, 0.5, 1.0, 2.0, s.L / 4.0})
        out.push_back(sample(s, [&](std::span<const double> x) { return cplx(std::exp(-pi * r2(x, 0.0) / (w * w))); }));
    for (auto [w, c] : {std::pair{0.5, 1.0}, std::pair{1.0, 2.0}})
        out.push_back(sample(s, [&](std::span<const double> x) {
            return cplx(std::exp(-pi * r2(x, c) / (w * w)) + std::exp(-pi * r2(x, -c) / (w * w)));
        }));
    for (double w : {0.5, 1.0, 2.0})
        out.push_back(sample(s, [&](std::span<const double> x) {
            return cplx(std::pow(1.0 + r2(x, 0.0) / (w * w), -one.n / p));
        }));
    return out;
}

struct GenericTraceResult {
    VerificationReport report;
    double E_T_probe = 0.0;           // max dual-form ratio over the probe set
    std::vector<double> probe_ratios; // ⟨h,Kh⟩ / ‖h‖_p²
};

inline GenericTraceResult check_generic_trace(const GridField& f, const OperatorFamily& fam, double q,
                                              const CheckOptions& opt = {}) {
    if (!(q >= 2.0) || !std::isfinite(q)) throw regime_error("check_generic_trace: q must be >= 2");
    detail::check_family(fam, f.spec);
    detail::require_shape(f, fam.n, fam.m(), "check_generic_trace");
    GenericTraceResult out;
    const double p = q == 2.0 ? 2.0 : q / (q - 1.0);
    for (const auto& h : dual_probes(f.spec, q)) {
        const double num = dual_form(h, fam);
        const double den = std::pow(weighted_lq_norm(h, 0.0, p), 2.0);
        out.probe_ratios.push_back(num / den);
    }
    out.E_T_probe = *std::max_element(out.probe_ratios.begin(), out.probe_ratios.end());
    VerificationReport& r = out.report;
    r.theorem_id = "theorem7";
    r.params.n = fam.n;
    r.params.m = fam.m();
    r.params.q = q;
    r.params.p = p;
    r.grid = f.spec;
    r.lhs = detail::lq_norm_sq(diagonal_trace(detail::as_physical(f)), q);
    r.rhs = primal_form(f, fam, opt.quadrature);
    auto known = fam.known_constant ? fam.known_constant(q) : std::nullopt;
    if (known) {
        r.constant = *known;
        r.notes.push_back("family constant known in closed form; probe estimate " + detail::fmt(out.E_T_probe));
    } else {
        r.constant.value = out.E_T_probe;
        r.constant.formula_id = FormulaId::E_T;
        r.constant.sharp = false;
        r.constant.note = "probe set v" + std::to_string(probe_set_version);
    }
    r.constant.params = r.params;
    if (!fam.smoothing) {
        r.outside_regime = true;
        r.notes.push_back("family " + fam.name + " is not smoothing: outside the Theorem 7 regime");
    }
    out.report = detail::finish(r);
    return out;
}

// Dual-form probe against the Theorem 4 constant: h a wide Gaussian, the kernel
// ∏G_{α_k}. At q = 2 the ratio approaches 1 as the width grows.
inline double theorem4_dual_ratio(const ParamSet& ps, const GridSpec& one, double width) {
    const ParamSet p = theorem4_params(ps.n, ps.alphas, *ps.q);
    const GridSpec s = one.with_shape(p.n, 1);
    const OperatorFamily fam = bessel_family(p.n, p.alphas);
    const GridField h = sample(s, [&](std::span<const double> x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return cplx(std::exp(-pi * r2 / (width * width)));
    });
    const double pp = *p.p;
    return dual_form(h, fam) / (theorem4_constant(p).value * std::pow(weighted_lq_norm(h, 0.0, pp), 2.0));
}

// ---------------------------------------------------------------------------
// Test families and the parallel runner.

enum class FamilyKind { gaussian, gaussian_mixture, hermite_modulated, extremal_thm2, concentrating, product };

struct TestFamily {
    FamilyKind kind = FamilyKind::gaussian_mixture;
    std::uint64_t base_seed = 1;
    std::size_t count = 20;
    double t = 1.0;   // concentrating: f_t(x) = t^{mn/2} f(t x)
    ParamSet params;  // extremal_thm2: Theorem 2 parameters
};

inline const char* to_string(FamilyKind k) {
    switch (k) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::gaussian_mixture: return "gaussian_mixture";
    case FamilyKind::hermite_modulated: return "hermite_modulated";
    case FamilyKind::extremal_thm2: return "extremal_thm2";
    case FamilyKind::concentrating: return "concentrating";
    case FamilyKind::product: return "product";
    }
    return "unknown";
}

inline FamilyKind family_kind_from_string(const std::string& s) {
    for (auto k : {FamilyKind::gaussian, FamilyKind::gaussian_mixture, FamilyKind::hermite_modulated,
                   FamilyKind::extremal_thm2, FamilyKind::concentrating, FamilyKind::product})
        if (s == to_string(k)) return k;
    throw config_error("unknown test family '" + s + "'");
}

inline std::vector<std::uint64_t> family_seeds(const TestFamily& fam) {
    std::vector<std::uint64_t> s(fam.count);
    for (std::size_t i = 0; i < fam.count; ++i) s[i] = fam.base_seed + i;
    return s;
}

namespace detail {

struct GaussTerm {
    double weight;
    std::vector<double> centre, width;
};

inline std::vector<GaussTerm> random_terms(std::mt19937_64& rng, int d, int count) {
    std::uniform_real_distribution<double> wt(0.2, 1.0), ce(-1.0, 1.0), wd(0.5, 1.5);
    std::vector<GaussTerm> out;
    for (int j = 0; j < count; ++j) {
        GaussTerm t{wt(rng), std::vector<double>(d), std::vector<double>(d)};
        for (int i = 0; i < d; ++i) {
            t.centre[i] = ce(rng);
            t.width[i] = wd(rng);
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline double eval_terms(const std::vector<GaussTerm>& terms, std::span<const double> x) {
    double v = 0.0;
    for (const auto& t : terms) {
        double e = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double z = (x[i] - t.centre[i]) / t.width[i];
            e += z * z;
        }
        v += t.weight * std::exp(-pi * e);
    }
    return v;
}

// Physicists' Hermite polynomial H_k.
inline double hermite(int k, double x) {
    double h0 = 1.0, h1 = 2.0 * x;
    if (k == 0) return h0;
    for (int j = 1; j < k; ++j) {
        const double h2 = 2.0 * x * h1 - 2.0 * j * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

inline void check_decay(const GridField& f) {
    double peak = 0.0, edge = 0.0;
    const int d = f.spec.dim();
    std::array<std::size_t, max_grid_dim> a{};
    for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
        const double v = std::abs(f.values[idx]);
        peak = std::max(peak, v);
        detail::decode(idx, f.spec.N, d, std::span(a.data(), d));
        for (int i = 0; i < d; ++i)
            if (a[i] == 0 || a[i] == f.spec.N - 1) {
                edge = std::max(edge, v);
                break;
            }
    }
    if (!(edge < 1e-10 * peak))
        throw grid_error("test family member does not decay on the box (edge/peak = " + fmt(edge / peak) +
                         "); enlarge L");
}

} // namespace detail

inline GridField make_member(const TestFamily& fam, const GridSpec& spec, std::uint64_t seed) {
    spec.validate();
    auto rng = make_stream(seed, static_cast<std::uint64_t>(fam.kind));
    const int d = spec.dim(), n = spec.n, m = spec.m;
    GridField f;
    switch (fam.kind) {
    case FamilyKind::gaussian: {
        const auto terms = detail::random_terms(rng, d, 1);
        f = sample(spec, [&](std::span<const double> x) { return cplx(detail::eval_terms(terms, x)); });
        break;
    }
    case FamilyKind::gaussian_mixture: {
        const int count = std::uniform_int_distribution<int>(2, 4)(rng);
        const auto terms = detail::random_terms(rng, d, count);
        f = sample(spec, [&](std::span<const double> x) { return cplx(detail::eval_terms(terms, x)); });
        break;
    }
    case FamilyKind::hermite_modulated: {
        const auto terms = detail::random_terms(rng, d, 1);
        std::vector<int> deg(d);
        for (auto& k : deg) k = std::uniform_int_distribution<int>(0, 3)(rng);
        f = sample(spec, [&](std::span<const double> x) {
            double poly = 1.0;
            for (int i = 0; i < d; ++i)
                poly *= detail::hermite(deg[i], std::sqrt(2.0 * pi) * (x[i] - terms[0].centre[i]) / terms[0].width[i]);
            return cplx(poly * detail::eval_terms(terms, x));
        });
        break;
    }
    case FamilyKind::concentrating: {
        const auto terms = detail::random_terms(rng, d, 1);
        const double t = fam.t, amp = std::pow(t, 0.5 * d);
        if (!(t > 0.0)) throw config_error("concentrating family: t must be > 0");
        std::vector<double> y(d);
        f = sample(spec, [&](std::span<const double> x) {
            for (int i = 0; i < d; ++i) y[i] = t * x[i];
            return cplx(amp * detail::eval_terms(terms, y));
        });
        break;
    }
    case FamilyKind::product: {
        const int count = std::uniform_int_distribution<int>(1, 3)(rng);
        const auto terms = detail::random_terms(rng, n, count);
        f = sample(spec, [&](std::span<const double> x) {
            double v = 1.0;
            for (int k = 0; k < m; ++k) v *= detail::eval_terms(terms, x.subspan(k * n, n));
            return cplx(v);
        });
        break;
    }
    case FamilyKind::extremal_thm2: {
        ExtremalProfile prof;
        prof.scale = std::uniform_real_distribution<double>(0.7, 1.4)(rng);
        std::uniform_real_distribution<double> sh(-0.5, 0.5);
        for (int i = 0; i < n; ++i) prof.shift.push_back(sh(rng));
        return build_extremal_thm2(fam.params, spec, prof); // power-law tails: exempt from the decay check
    }
    }
    detail::check_decay(f);
    return f;
}

using Checker = std::function<VerificationReport(const GridField&)>;

struct RunOptions {
    unsigned jobs = 1;
    bool estimate_error = false; // rerun each member at N/2
};

struct FamilyResult {
    std::vector<VerificationReport> reports; // sorted by seed
    double max_ratio = 0.0;
    double min_margin = 0.0;
    bool all_pass = true;
};

inline FamilyResult aggregate(std::vector<VerificationReport> reports) {
    std::sort(reports.begin(), reports.end(),
              [](const auto& a, const auto& b) { return a.seed.value_or(0) < b.seed.value_or(0); });
    FamilyResult out;
    out.max_ratio = -std::numeric_limits<double>::infinity();
    out.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& r : reports) {
        out.max_ratio = std::max(out.max_ratio, r.ratio);
        out.min_margin = std::min(out.min_margin, r.margin);
        out.all_pass = out.all_pass && r.pass;
    }
    out.reports = std::move(reports);
    return out;
}

// Members are independent; the result does not depend on `jobs`.
inline FamilyResult run_family(const TestFamily& fam, const GridSpec& spec, const Checker& check,
                               const RunOptions& opt = {}) {
    const auto seeds = family_seeds(fam);
    std::vector<VerificationReport> reports(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                auto r = check(make_member(fam, spec, seeds[i]));
                if (opt.estimate_error && spec.N >= 16) {
                    GridSpec half = spec;
                    half.N /= 2;
                    r.disc_error = std::abs(r.ratio - check(make_member(fam, half, seeds[i])).ratio);
                }
                r.seed = seeds[i];
                reports[i] = std::move(r);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(seeds.size())));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return aggregate(std::move(reports));
}

// Times a single check; reports are otherwise free of wall-clock data.
template <class F>
VerificationReport timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    VerificationReport r = f();
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

} // namespace fractrace
