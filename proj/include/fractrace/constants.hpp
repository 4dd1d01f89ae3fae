#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <nlohmann/json.hpp>

#include "bessel.hpp"
#include "error.hpp"
#include "params.hpp"
#include "special.hpp"

namespace fractrace {

enum class FormulaId {
    C_p,
    C_beta,
    F_alpha,
    E_beta,
    H_classical,
    A_sigma,
    C_alpha2,
    F_alpha_S,
    A_alpha_S,
    d_subvariety,
    D_beta,
    G_alpha_dual,
    H_alpha,
    K_sphere,   // ∫|ξ-η|^{-λ} dη on S^n, normalized measure
    C_alpha_q,  // Gagliardo-Nirenberg constant at q > 2 (upper estimate)
    D_alpha_q,  // interpolation constant (estimate)
    E_T,        // generic operator-family constant (estimate)
    C_iterated, // iterated Stein-Weiss constant
    S_hls,      // sphere HLS in harmonic form: the sharp weights carry the constant, so 1
};

// Where the stated formula and its derivation disagree, both are kept.
enum class Variant { none, statement, derivation };

inline const char* to_string(FormulaId f) {
    switch (f) {
    case FormulaId::C_p: return "C_p";
    case FormulaId::C_beta: return "C_beta";
    case FormulaId::F_alpha: return "F_alpha";
    case FormulaId::E_beta: return "E_beta";
    case FormulaId::H_classical: return "H_classical";
    case FormulaId::A_sigma: return "A_sigma";
    case FormulaId::C_alpha2: return "C_alpha2";
    case FormulaId::F_alpha_S: return "F_alpha_S";
    case FormulaId::A_alpha_S: return "A_alpha_S";
    case FormulaId::d_subvariety: return "d_subvariety";
    case FormulaId::D_beta: return "D_beta";
    case FormulaId::G_alpha_dual: return "G_alpha_dual";
    case FormulaId::H_alpha: return "H_alpha";
    case FormulaId::K_sphere: return "K_sphere";
    case FormulaId::C_alpha_q: return "C_alpha_q";
    case FormulaId::D_alpha_q: return "D_alpha_q";
    case FormulaId::E_T: return "E_T";
    case FormulaId::C_iterated: return "C_iterated";
    case FormulaId::S_hls: return "S_hls";
    }
    return "unknown";
}

inline const char* to_string(Variant v) {
    switch (v) {
    case Variant::none: return "none";
    case Variant::statement: return "statement";
    case Variant::derivation: return "derivation";
    }
    return "unknown";
}

struct ConstantValue {
    double value = 0.0;
    FormulaId formula_id = FormulaId::C_p;
    ParamSet params;
    Variant variant = Variant::none;
    bool sharp = true;
    double error_estimate = 0.0; // quadrature/MC uncertainty, 0 for closed forms
    std::string note;
};

inline void to_json(nlohmann::json& j, const ConstantValue& c) {
    j = nlohmann::json{{"value", c.value},
                       {"formula_id", to_string(c.formula_id)},
                       {"variant", to_string(c.variant)},
                       {"sharp", c.sharp}};
    if (c.error_estimate != 0.0) j["error_estimate"] = c.error_estimate;
    if (!c.note.empty()) j["note"] = c.note;
}

namespace detail {

inline ConstantValue make_constant(double log_value, FormulaId id, const ParamSet& ps, Variant v = Variant::none) {
    ConstantValue c;
    c.value = checked_positive(std::exp(log_value), to_string(id));
    c.formula_id = id;
    c.params = ps;
    c.variant = v;
    return c;
}

inline double lgr(double a, double b) { return log_gamma_ratio(a, b); }

} // namespace detail

// 𝓕[|x|^{-λ}] = riesz_fourier_coeff(n, λ)·|ξ|^{-(n-λ)} under 𝓕f(ξ) = ∫e^{2πixξ}f(x)dx.
inline double riesz_fourier_coeff(int n, double lam) {
    if (n < 1) throw regime_error("riesz_fourier_coeff: n must be >= 1");
    if (!(lam > 0.0 && lam < n)) throw regime_error("riesz_fourier_coeff: need 0 < lambda < n");
    return std::exp((-0.5 * n + lam) * std::log(pi) + detail::lgr(0.5 * (n - lam), 0.5 * lam));
}

// ∫|x-y|^{-a}|y-w|^{-b} dy = beta_integral_coeff(n,a,b)·|x-w|^{n-a-b}, 0 < a,b < n < a+b.
inline double beta_integral_coeff(int n, double a, double b) {
    if (!(a > 0 && a < n && b > 0 && b < n && a + b > n))
        throw regime_error("beta_integral_coeff: need 0 < a, b < n < a + b");
    using detail::lgr;
    const double lv = 0.5 * n * std::log(pi) + log_gamma(0.5 * (n - a)) + log_gamma(0.5 * (n - b)) +
                      log_gamma(0.5 * (a + b - n)) - log_gamma(0.5 * a) - log_gamma(0.5 * b) -
                      log_gamma(n - 0.5 * (a + b));
    return std::exp(lv);
}

// ∫|f|² ≤ C_p [∫|(-Δ/4π²)^{α/2} f|^p]^{2/p}, α = n(1/p - 1/2).
inline ConstantValue l2_hls_constant(int n, double p) {
    const ParamSet ps = lemma2_params(n, p);
    if (p == 2.0) {
        ConstantValue c;
        c.value = 1.0;
        c.formula_id = FormulaId::C_p;
        c.params = ps;
        return c;
    }
    const double pp = p / (p - 1.0);
    const double lv = (n / p - 0.5 * n) * std::log(pi) + detail::lgr(n / pp, n / p) +
                      (2.0 / p - 1.0) * detail::lgr(n, 0.5 * n);
    return detail::make_constant(lv, FormulaId::C_p, ps);
}

// E_β: sharp constant of ∫∫ h(x)|x|^{-β/2} |x-w|^{-(n-β)} |w|^{-β/2} h(w) ≤ E_β ‖h‖₂².
inline ConstantValue stein_weiss_l2_constant(int n, double beta) {
    if (n < 1) throw regime_error("stein_weiss_l2_constant: n must be >= 1");
    if (!(beta > 0.0)) throw regime_error("β must be strictly positive (the requirement β > 0 is strict)");
    if (!(beta < n)) throw regime_error("stein_weiss_l2_constant: need beta < n");
    ParamSet ps;
    ps.n = n;
    ps.beta = beta;
    const double lv = 0.5 * n * std::log(pi) + detail::lgr(0.5 * beta, 0.5 * (n - beta)) +
                      2.0 * detail::lgr(0.25 * (n - beta), 0.25 * (n + beta));
    return detail::make_constant(lv, FormulaId::E_beta, ps);
}

// Sharp constant of ∫∫ g(x)|x-w|^{-λ} g(w) ≤ H ‖g‖_p², p = 2n/(2n-λ) (Lieb's form).
inline ConstantValue classical_hls_constant(int n, double lam) {
    if (n < 1) throw regime_error("classical_hls_constant: n must be >= 1");
    if (!(lam > 0.0 && lam < n)) throw regime_error("classical_hls_constant: need 0 < lambda < n");
    ParamSet ps;
    ps.n = n;
    ps.lambda_kernel = lam;
    ps.p = 2.0 * n / (2.0 * n - lam);
    const double lv = 0.5 * lam * std::log(pi) + detail::lgr(0.5 * (n - lam), n - 0.5 * lam) +
                      (1.0 - lam / n) * detail::lgr(n, 0.5 * n);
    return detail::make_constant(lv, FormulaId::H_classical, ps);
}

// Pitt trace constant C_β. The stated formula carries π^{-(m-1)n/2+α}; the
// last display of its derivation carries π^{-(m-1)n+α}. They agree at m = 1.
inline ConstantValue pitt_trace_constant(const ParamSet& in, Variant variant = Variant::statement) {
    const ParamSet ps = theorem1_params(in.n, in.alphas, in.beta);
    const double n = ps.n, m = ps.m, a = ps.alpha(), b = *ps.beta;
    double pexp;
    switch (variant) {
    case Variant::statement: pexp = -(m - 1) * n / 2 + a; break;
    case Variant::derivation: pexp = -(m - 1) * n + a; break;
    default: throw regime_error("pitt_trace_constant: variant must be statement or derivation");
    }
    double lv = pexp * std::log(pi);
    for (double ak : ps.alphas) lv += detail::lgr(0.5 * (n - ak), 0.5 * ak);
    lv += detail::lgr(0.5 * b, 0.5 * (n - b)) + 2.0 * detail::lgr(0.25 * (n - b), 0.25 * (n + b));
    // Both variants carry the tag so reports can state which one was used.
    return detail::make_constant(lv, FormulaId::C_beta, ps, variant);
}

// HLS trace constant F_α.
inline ConstantValue hls_trace_constant(const ParamSet& in) {
    const ParamSet ps = theorem2_params(in.n, in.alphas);
    const double n = ps.n, m = ps.m, a = ps.alpha();
    const double e = a - (m - 1) * n;
    double lv = 0.5 * a * std::log(pi);
    for (double ak : ps.alphas) lv += detail::lgr(0.5 * (n - ak), 0.5 * ak);
    lv += detail::lgr(0.5 * e, n - 0.5 * (m * n - a)) + (e / n) * detail::lgr(n, 0.5 * n);
    return detail::make_constant(lv, FormulaId::F_alpha, ps);
}

struct ChainTerms {
    std::vector<double> riesz_coeff_sq; // [riesz_fourier_coeff(n, α_k/2)]²
    std::vector<double> beta_integral;  // composition ∫|x-y|^{-(n-α_k/2)}|y-w|^{-(n-α_k/2)} dy
    ConstantValue dual;                 // D_β (resp. G_α): ∏ beta_integral · last
    ConstantValue last;                 // E_β (resp. H_classical at λ = mn - α)
    ConstantValue result;               // C_β (resp. F_α)
};

namespace detail {

inline ChainTerms chain_common(const ParamSet& ps, const ConstantValue& last, FormulaId dual_id, FormulaId out_id) {
    ChainTerms t;
    t.last = last;
    double log_dual = std::log(last.value), log_out = log_dual;
    for (double ak : ps.alphas) {
        const double s = ps.n - 0.5 * ak;
        const double rc = riesz_fourier_coeff(ps.n, 0.5 * ak);
        const double bi = beta_integral_coeff(ps.n, s, s);
        t.riesz_coeff_sq.push_back(rc * rc);
        t.beta_integral.push_back(bi);
        log_dual += std::log(bi);
        log_out += std::log(bi) + 2.0 * std::log(rc);
    }
    t.dual = make_constant(log_dual, dual_id, ps);
    t.result = make_constant(log_out, out_id, ps);
    t.result.note = "chain";
    return t;
}

} // namespace detail

// C_β rebuilt from its pieces: the kernel with transform |ξ|^{-α_k/2} is
// riesz_fourier_coeff(n, α_k/2)|x|^{-(n-α_k/2)}; two such kernels compose by
// the beta integral into |x-w|^{-(n-α_k)}; the product over k is the
// Stein-Weiss kernel |x-w|^{-(n-β)} whose L² norm is E_β.
inline ChainTerms pitt_chain_terms(const ParamSet& in) {
    const ParamSet ps = theorem1_params(in.n, in.alphas, in.beta);
    return detail::chain_common(ps, stein_weiss_l2_constant(ps.n, *ps.beta), FormulaId::D_beta, FormulaId::C_beta);
}

inline ConstantValue constant_chain_pitt(const ParamSet& in) {
    auto c = pitt_chain_terms(in).result;
    c.variant = Variant::statement;
    return c;
}

// F_α rebuilt the same way, ending in the classical HLS constant at λ = mn - α.
inline ChainTerms hls_chain_terms(const ParamSet& in) {
    const ParamSet ps = theorem2_params(in.n, in.alphas);
    auto h = classical_hls_constant(ps.n, *ps.lambda_kernel);
    h.formula_id = FormulaId::H_alpha;
    return detail::chain_common(ps, h, FormulaId::G_alpha_dual, FormulaId::F_alpha);
}

inline ConstantValue constant_chain_hls(const ParamSet& in) { return hls_chain_terms(in).result; }

// ∫∏ G_{α_k}. Closed form at m = 2: (4π)^{-n/2} Γ((α-n)/2)/Γ(α/2); otherwise
// radial quadrature of the kernel product.
inline ConstantValue bessel_l2_constant(int n, const std::vector<double>& orders, bool force_quadrature = false) {
    if (n < 1) throw regime_error("bessel_l2_constant: n must be >= 1");
    if (orders.empty()) throw regime_error("bessel_l2_constant: need at least one order");
    ParamSet ps;
    ps.n = n;
    ps.m = static_cast<int>(orders.size());
    ps.alphas = orders;
    double excess = n;
    for (double a : orders) {
        if (!(a > 0.0) || !std::isfinite(a)) throw regime_error("bessel_l2_constant: orders must be > 0");
        if (a < n) excess += a - n;
    }
    if (!(excess > 0.0))
        throw regime_error("bessel_l2_constant: divergent kernel product (need sum of (n - a_k)^+ < n)");
    ConstantValue c;
    c.formula_id = FormulaId::C_alpha2;
    c.params = ps;
    if (orders.size() == 1 && !force_quadrature) {
        c.value = 1.0;
        return c;
    }
    if (orders.size() == 2 && !force_quadrature) {
        const double a = orders[0] + orders[1];
        if (!(a > n)) throw regime_error("bessel_l2_constant: m = 2 needs alpha > n");
        c.value = std::exp(-0.5 * n * std::log(4.0 * pi) + detail::lgr(0.5 * (a - n), 0.5 * a));
        return c;
    }
    auto q = bessel_product_integral(n, orders);
    c.value = checked_positive(q.value, "C_alpha2");
    c.error_estimate = q.rel_change * q.value;
    c.note = "radial quadrature";
    return c;
}

// m = 2 route through Plancherel: ∫ (1+4π²|ξ|²)^{-(a_1+a_2)/2} dξ.
inline double bessel_l2_plancherel(int n, double a1, double a2) {
    const double a = a1 + a2;
    if (!(a > n)) throw regime_error("bessel_l2_plancherel: need a1 + a2 > n");
    boost::math::quadrature::exp_sinh<double> integrator;
    auto f = [&](double r) { return std::pow(r, n - 1) * std::pow(1.0 + 4.0 * pi * pi * r * r, -0.5 * a); };
    return sphere_area(n) * integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
}

// A_α = 2^{2n/q} [Γ(n/2)/Γ(n)]^m ∏ Γ((n+α_k)/2)/Γ(α_k/2): the product of the
// fractional-integral realizations of T_{α_k}^{-1} is A_α |ξ-η|^{-2n/q}.
inline ConstantValue sphere_A_alpha(const ParamSet& in) {
    const ParamSet ps = sphere6_params(in.n, in.alphas);
    const double n = ps.n, q = *ps.q;
    double lv = (2.0 * n / q) * std::log(2.0) + ps.m * detail::lgr(0.5 * n, n);
    for (double ak : ps.alphas) lv += detail::lgr(0.5 * (n + ak), 0.5 * ak);
    return detail::make_constant(lv, FormulaId::A_alpha_S, ps);
}

// ∫_{S^n} |ξ-η|^{-λ} dη (normalized measure, chordal distance)
//   = 2^{-λ} Γ(n)/Γ(n/2) · Γ((n-λ)/2)/Γ(n-λ/2).
inline double sphere_kernel_mean(int n, double lam) {
    if (!(lam > 0.0 && lam < n)) throw regime_error("sphere_kernel_mean: need 0 < lambda < n");
    return std::exp(-lam * std::log(2.0) + detail::lgr(n, 0.5 * n) + detail::lgr(0.5 * (n - lam), n - 0.5 * lam));
}

// F_{α,S}. Derivation (default): [Γ(n/2)/Γ(n)]^{m-1}; statement: [Γ(n/q)/Γ(n)]^{m-1}.
inline ConstantValue sphere_trace_constant(const ParamSet& in, Variant variant = Variant::derivation) {
    const ParamSet ps = sphere6_params(in.n, in.alphas);
    const double n = ps.n, q = *ps.q, p = *ps.p;
    double head;
    switch (variant) {
    case Variant::derivation: head = detail::lgr(0.5 * n, n); break;
    case Variant::statement: head = detail::lgr(n / q, n); break;
    default: throw regime_error("sphere_trace_constant: variant must be statement or derivation");
    }
    double lv = (ps.m - 1) * head + detail::lgr(0.5 * n - n / q, n / p);
    for (double ak : ps.alphas) lv += detail::lgr(0.5 * (n + ak), 0.5 * ak);
    return detail::make_constant(lv, FormulaId::F_alpha_S, ps, variant);
}

// Constant d of d∫_{R^k}|𝓡f|² ≤ ∫|(-Δ/4π²)^{α/4}|x|^{β/2} f|², α = n - k + β.
// statement: π^{-α}[Γ(α/2)/Γ(β/2)][Γ((k+β)/4)/Γ((k-β)/4)]².
// derivation: π^{-(α+β)/2}[...]. Restriction in frequency, Cauchy-Schwarz over
// the normal fibre, then Pitt on R^k gives this larger admissible value; the
// two agree at k = n.
inline ConstantValue subvariety_constant(int n, int k_sub, double beta, Variant variant = Variant::statement) {
    const ParamSet ps = subvariety_params(n, k_sub, beta);
    const double a = ps.alphas[0], k = k_sub;
    double pexp;
    switch (variant) {
    case Variant::statement: pexp = -a; break;
    case Variant::derivation: pexp = -0.5 * (a + beta); break;
    default: throw regime_error("subvariety_constant: variant must be statement or derivation");
    }
    const double lv = pexp * std::log(pi) + detail::lgr(0.5 * a, 0.5 * beta) +
                      2.0 * detail::lgr(0.25 * (k + beta), 0.25 * (k - beta));
    auto c = detail::make_constant(lv, FormulaId::d_subvariety, ps, variant);
    if (k_sub == n) c.note = "uncertainty constant c identified with d at k = n";
    return c;
}

// Riesz instance of the Stein-Weiss trace constant: kernels |x-y|^{-σ_k}
// (σ_k > n/2 so each inner integral converges) give ∏ beta_integral · E_β.
inline ConstantValue stein_weiss_riesz_constant(const ParamSet& in) {
    const ParamSet ps = theorem3_params(in.n, in.sigma, in.beta.value_or(0.0));
    double lv = std::log(stein_weiss_l2_constant(ps.n, *ps.beta).value);
    for (double s : ps.sigma) lv += std::log(beta_integral_coeff(ps.n, s, s));
    return detail::make_constant(lv, FormulaId::A_sigma, ps);
}

} // namespace fractrace
