#pragma once

#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"

namespace fractrace {

// Inequality parameters. Only the fields relevant to a given result are set;
// the builders below fill the derived ones (β, q, p, θ, λ) and enforce the
// admissible region.
struct ParamSet {
    int n = 1;
    int m = 1;
    std::vector<double> alphas;
    std::vector<double> rhos;       // iterated Stein-Weiss outer weights ρ_k
    std::vector<double> betas;      // iterated Stein-Weiss inner weights β_k
    std::vector<double> betas_high; // Bessel orders β_ℓ ≥ n (Theorem 5)
    std::vector<double> sigma;      // kernel homogeneity degrees σ_k
    std::optional<double> beta;
    std::optional<double> q;
    std::optional<double> p;
    std::optional<double> theta;
    std::optional<double> lambda_kernel;
    std::optional<int> k_sub;

    double alpha() const { return std::accumulate(alphas.begin(), alphas.end(), 0.0); }
    double sigma_total() const { return std::accumulate(sigma.begin(), sigma.end(), 0.0); }
};

namespace detail {

inline double rel_tol(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw regime_error(msg);
}

inline void check_dim(int n, int m) {
    require(n >= 1, "n must be a positive integer");
    require(m >= 1, "m must be a positive integer");
}

inline void check_alphas(const ParamSet& ps) {
    require(static_cast<int>(ps.alphas.size()) == ps.m,
            "expected " + std::to_string(ps.m) + " alpha values, got " + std::to_string(ps.alphas.size()));
    for (double a : ps.alphas) {
        require(std::isfinite(a), "alpha values must be finite");
        require(a > 0.0, "each alpha_k must be strictly positive (alpha_k -> 0 makes the constants unbounded)");
        require(a < ps.n, "each alpha_k must be < n");
    }
}

inline double conjugate(double q) { return q / (q - 1.0); }

} // namespace detail

// Theorem 1 (Pitt): n - β = mn - α, 0 < β < n.
inline ParamSet theorem1_params(int n, std::vector<double> alphas, std::optional<double> beta = {}) {
    using namespace detail;
    check_dim(n, static_cast<int>(alphas.size()));
    ParamSet ps;
    ps.n = n;
    ps.m = static_cast<int>(alphas.size());
    ps.alphas = std::move(alphas);
    if (beta) {
        require(std::isfinite(*beta), "beta must be finite");
        require(*beta > 0.0, "β must be strictly positive (the requirement β > 0 is strict)");
        require(*beta < n, "β must be < n");
    }
    check_alphas(ps);
    const double a = ps.alpha(), N = n, M = ps.m;
    const double b = N - (M * N - a);
    require(b > 0.0, "β must be strictly positive: need alpha > (m-1)n, got alpha=" + fmt(a));
    require(b < N, "β must be < n: need alpha < mn");
    if (beta)
        require(std::abs(*beta - b) <= rel_tol(N),
                "n - β = mn - α violated: given beta=" + fmt(*beta) + ", derived " + fmt(b));
    ps.beta = b;
    return ps;
}

// Theorem 2 (HLS trace): mn - α = 2n/q, q > 2.
inline ParamSet theorem2_params(int n, std::vector<double> alphas) {
    using namespace detail;
    check_dim(n, static_cast<int>(alphas.size()));
    ParamSet ps;
    ps.n = n;
    ps.m = static_cast<int>(alphas.size());
    ps.alphas = std::move(alphas);
    check_alphas(ps);
    const double lam = ps.m * double(n) - ps.alpha();
    require(lam > 0.0, "need alpha < mn");
    require(lam < n, "q > 2 requires mn - alpha < n");
    ps.lambda_kernel = lam;
    ps.q = 2.0 * n / lam;
    ps.p = conjugate(*ps.q);
    return ps;
}

// Lemma 2: 1 < p ≤ 2 with α = n(1/p - 1/2) (multiplier |ξ|^α on f).
inline ParamSet lemma2_params(int n, double p) {
    using namespace detail;
    check_dim(n, 1);
    require(std::isfinite(p) && p > 1.0 && p <= 2.0, "Lemma 2 requires 1 < p <= 2, got p=" + fmt(p));
    ParamSet ps;
    ps.n = n;
    ps.m = 1;
    ps.p = p;
    ps.q = p == 2.0 ? 2.0 : conjugate(p);
    ps.alphas = {n * (1.0 / p - 0.5)};
    return ps;
}

// Theorem 4 (Gagliardo-Nirenberg): 2 ≤ q ≤ 2n/(mn-α), mn - α < n.
inline ParamSet theorem4_params(int n, std::vector<double> alphas, double q) {
    using namespace detail;
    check_dim(n, static_cast<int>(alphas.size()));
    ParamSet ps;
    ps.n = n;
    ps.m = static_cast<int>(alphas.size());
    ps.alphas = std::move(alphas);
    require(std::isfinite(q) && q >= 2.0, "Theorem 4 requires q >= 2");
    // At q = 2 only integrability of ∏G_{α_k} is used, so α_k ≥ n is admitted.
    if (q > 2.0) {
        check_alphas(ps);
    } else {
        require(static_cast<int>(ps.alphas.size()) == ps.m, "expected one alpha per factor");
        for (double a : ps.alphas) require(std::isfinite(a) && a > 0.0, "each alpha_k must be strictly positive");
    }
    const double lam = ps.m * double(n) - ps.alpha();
    require(lam < n, "Theorem 4 requires mn - alpha < n");
    if (lam > 0.0) require(q <= 2.0 * n / lam * (1 + 1e-14), "Theorem 4 requires q <= 2n/(mn-alpha) = " + fmt(2.0 * n / lam));
    ps.lambda_kernel = lam;
    ps.q = q;
    ps.p = q == 2.0 ? 2.0 : conjugate(q);
    return ps;
}

// Theorem 5: α_k < n (m1 factors), β_ℓ ≥ n, 2 ≤ q ≤ 2n/(m1 n - α), m1 n - α < n.
inline ParamSet theorem5_params(int n, std::vector<double> alphas, std::vector<double> betas_high, double q) {
    using namespace detail;
    require(!betas_high.empty(), "Theorem 5 requires at least one beta_l >= n");
    for (double b : betas_high) require(std::isfinite(b) && b >= n, "each beta_l must satisfy beta_l >= n");
    ParamSet ps = theorem4_params(n, std::move(alphas), q);
    ps.betas_high = std::move(betas_high);
    return ps;
}

// Corollary: 2 ≤ q < 2n/(mn-α), θ = (mn - 2n/q)/α with 1 - 1/n < θ < 1.
inline ParamSet corollary_params(int n, std::vector<double> alphas, double q) {
    using namespace detail;
    ParamSet ps = theorem4_params(n, std::move(alphas), q);
    const double lam = *ps.lambda_kernel;
    if (lam > 0.0) require(q < 2.0 * n / lam, "Corollary requires q < 2n/(mn-alpha)");
    const double th = (ps.m * double(n) - 2.0 * n / q) / ps.alpha();
    require(th > 1.0 - 1.0 / n && th < 1.0,
            "Corollary requires 1 - 1/n < theta < 1, got theta=" + fmt(th));
    ps.theta = th;
    return ps;
}

// Theorem 3 (Stein-Weiss trace): 0 < σ_k < n, 0 < β < n, 2σ + β - mn = n.
inline ParamSet theorem3_params(int n, std::vector<double> sigma, double beta) {
    using namespace detail;
    check_dim(n, static_cast<int>(sigma.size()));
    ParamSet ps;
    ps.n = n;
    ps.m = static_cast<int>(sigma.size());
    ps.sigma = std::move(sigma);
    for (double s : ps.sigma) require(std::isfinite(s) && s > 0.0 && s < n, "each sigma_k must lie in (0, n)");
    require(std::isfinite(beta), "beta must be finite");
    require(beta > 0.0, "β must be strictly positive (the requirement β > 0 is strict)");
    require(beta < n, "β must be < n");
    const double rel = 2.0 * ps.sigma_total() + beta - ps.m * double(n);
    require(std::abs(rel - n) <= rel_tol(n * ps.m),
            "2σ + β - mn = n violated: 2σ + β - mn = " + fmt(rel) + ", n = " + std::to_string(n));
    ps.beta = beta;
    return ps;
}

// Restriction to a k-dimensional subspace: n - α = k - β, n ≥ k > β > 0.
// k = n is the weighted uncertainty inequality.
inline ParamSet subvariety_params(int n, int k_sub, double beta) {
    using namespace detail;
    check_dim(n, 1);
    require(k_sub >= 1 && k_sub <= n, "k_sub must satisfy 1 <= k_sub <= n");
    require(std::isfinite(beta), "beta must be finite");
    require(beta > 0.0, "β must be strictly positive (the requirement β > 0 is strict)");
    require(beta < k_sub, "need beta < k_sub");
    ParamSet ps;
    ps.n = n;
    ps.m = 1;
    ps.k_sub = k_sub;
    ps.beta = beta;
    ps.alphas = {n - k_sub + beta};
    return ps;
}

// Theorem 6 on (S^n)^m: mn - α = 2n/q, 0 < α_k < n, (m-1)n < α < mn.
inline ParamSet sphere6_params(int n, std::vector<double> alphas) {
    using namespace detail;
    require(n == 1 || n == 2, "sphere computations support n = 1, 2");
    return theorem2_params(n, std::move(alphas));
}

// Single-sphere HLS (harmonic and fractional-integral forms): q > 2, α = n - 2n/q.
inline ParamSet sphere_hls_params(int n, double q) {
    using namespace detail;
    require(n == 1 || n == 2, "sphere computations support n = 1, 2");
    require(std::isfinite(q) && q > 2.0, "sphere HLS requires q > 2, got q=" + fmt(q));
    ParamSet ps;
    ps.n = n;
    ps.m = 1;
    ps.q = q;
    ps.p = conjugate(q);
    ps.alphas = {n - 2.0 * n / q};
    ps.lambda_kernel = 2.0 * n / q;
    return ps;
}

// Iterated Stein-Weiss: 0 < α_k, β_k, ρ_k < n, n - β - ρ = mn - α, 0 < β + ρ < n.
inline ParamSet iterated_sw_params(int n, std::vector<double> alphas, std::vector<double> betas,
                                   std::vector<double> rhos) {
    using namespace detail;
    check_dim(n, static_cast<int>(alphas.size()));
    ParamSet ps;
    ps.n = n;
    ps.m = static_cast<int>(alphas.size());
    ps.alphas = std::move(alphas);
    ps.betas = std::move(betas);
    ps.rhos = std::move(rhos);
    check_alphas(ps);
    require(static_cast<int>(ps.betas.size()) == ps.m && static_cast<int>(ps.rhos.size()) == ps.m,
            "iterated Stein-Weiss needs m values each of beta_k and rho_k");
    for (double b : ps.betas) require(std::isfinite(b) && b > 0.0 && b < n, "each beta_k must lie in (0, n)");
    for (double r : ps.rhos) require(std::isfinite(r) && r > 0.0 && r < n, "each rho_k must lie in (0, n)");
    const double b = std::accumulate(ps.betas.begin(), ps.betas.end(), 0.0);
    const double r = std::accumulate(ps.rhos.begin(), ps.rhos.end(), 0.0);
    require(b + r > 0.0 && b + r < n, "need 0 < beta + rho < n");
    require(std::abs((n - b - r) - (ps.m * double(n) - ps.alpha())) <= rel_tol(n * ps.m),
            "n - β - ρ = mn - α violated: n - beta - rho = " + fmt(n - b - r) + ", mn - alpha = " +
                fmt(ps.m * double(n) - ps.alpha()));
    ps.beta = b;
    return ps;
}

inline void to_json(nlohmann::json& j, const ParamSet& ps) {
    j = nlohmann::json::object();
    j["n"] = ps.n;
    j["m"] = ps.m;
    if (!ps.alphas.empty()) j["alphas"] = ps.alphas;
    if (!ps.rhos.empty()) j["rhos"] = ps.rhos;
    if (!ps.betas.empty()) j["betas"] = ps.betas;
    if (!ps.betas_high.empty()) j["betas_high"] = ps.betas_high;
    if (!ps.sigma.empty()) j["sigma"] = ps.sigma;
    if (ps.beta) j["beta"] = *ps.beta;
    if (ps.q) j["q"] = *ps.q;
    if (ps.p) j["p"] = *ps.p;
    if (ps.theta) j["theta"] = *ps.theta;
    if (ps.lambda_kernel) j["lambda_kernel"] = *ps.lambda_kernel;
    if (ps.k_sub) j["k_sub"] = *ps.k_sub;
}

} // namespace fractrace
