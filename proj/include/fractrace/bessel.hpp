#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "error.hpp"
#include "numeric.hpp"
#include "special.hpp"

namespace fractrace {

struct BesselParams {
    int n = 1;
    double alpha = 1.0;
    double rel_tol = 1e-10;
    std::size_t max_nodes = 200000;
};

struct BesselValue {
    double value;
    double rel_change;
    std::size_t nodes;
};

// G_α(|x| = r) from the Gaussian subordination integral
//   G_α(x) = [(4π)^{α/2} Γ(α/2)]^{-1} ∫_0^∞ e^{-π|x|²/δ} e^{-δ/4π} δ^{(α-n)/2} dδ/δ
// after δ = e^t, which makes the integrand decay double-exponentially for r > 0.
inline BesselValue bessel_eval_detail(const BesselParams& bp, double r) {
    if (!(bp.alpha > 0.0) || !std::isfinite(bp.alpha)) throw regime_error("bessel_eval: alpha must be > 0");
    if (bp.n < 1) throw regime_error("bessel_eval: n must be >= 1");
    if (!(bp.rel_tol <= 1e-8) || !(bp.rel_tol > 0.0)) throw regime_error("bessel_eval: rel_tol must lie in (0, 1e-8]");
    if (!(r >= 0.0) || !std::isfinite(r)) throw regime_error("bessel_eval: radius must be finite and >= 0");
    const double c = 0.5 * (bp.alpha - bp.n);
    if (r == 0.0 && c <= 0.0) throw divergence_error("bessel_eval: G_alpha(0) diverges for alpha <= n");
    const double a = pi * r * r;
    auto dphi = [&](double t) { return a * std::exp(-t) - std::exp(t) / (4.0 * pi) + c; };
    // φ' is strictly decreasing; bracket and bisect for the mode.
    double lo = -1.0, hi = 1.0;
    while (dphi(lo) < 0.0) lo -= 2.0 * (1.0 - lo);
    while (dphi(hi) > 0.0) hi += 2.0 * (1.0 + hi);
    for (int i = 0; i < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        (dphi(mid) > 0.0 ? lo : hi) = mid;
    }
    const double t0 = 0.5 * (lo + hi);
    auto phi = [&](double t) { return -a * std::exp(-t) - std::exp(t) / (4.0 * pi) + c * t; };
    const double phi0 = phi(t0);
    auto q = integrate_line([&](double t) { return std::exp(phi(t) - phi0); }, t0, 0.01 * bp.rel_tol,
                            bp.max_nodes, 1e-20, 0.5);
    if (!q.converged && q.rel_change > bp.rel_tol)
        throw divergence_error("bessel_eval: subordination quadrature did not converge");
    const double logpref = -0.5 * bp.alpha * std::log(4.0 * pi) - log_gamma(0.5 * bp.alpha);
    return {std::exp(logpref + phi0) * q.value, q.rel_change, q.nodes};
}

inline double bessel_eval(const BesselParams& bp, double r) { return bessel_eval_detail(bp, r).value; }

// Fourier transform of G_α.
inline double bessel_symbol(double alpha, double xi_abs) {
    return std::pow(1.0 + 4.0 * pi * pi * xi_abs * xi_abs, -0.5 * alpha);
}

struct KernelIntegral {
    double value;
    double rel_change;
};

// ∫_{R^n} [∏_k G_{a_k}(x)]^power dx, radially with r = e^u. Finite iff every
// order is positive and n + power·Σ_{a_k<n} (a_k - n) > 0.
inline KernelIntegral bessel_product_integral(int n, std::span<const double> orders, double rtol = 1e-10,
                                              double power = 1.0) {
    if (orders.empty()) throw regime_error("bessel_product_integral: need at least one order");
    if (!(power > 0.0) || !std::isfinite(power)) throw regime_error("bessel_product_integral: power must be > 0");
    double excess = n;
    for (double a : orders) {
        if (!(a > 0.0)) throw regime_error("bessel_product_integral: orders must be > 0");
        if (a < n) excess += power * (a - n);
    }
    bool has_log = false;
    for (double a : orders) has_log |= (a == n);
    if (!(excess > 0.0) || (excess == 0.0 && has_log))
        throw divergence_error("bessel_product_integral: the kernel product is not integrable at the origin");
    const double area = sphere_area(n);
    std::vector<BesselParams> bps;
    for (double a : orders) bps.push_back({n, a, 1e-12, 200000});
    auto f = [&](double u) {
        const double r = std::exp(u);
        double v = area * std::exp(n * u);
        for (const auto& bp : bps) {
            if (v == 0.0) break;
            v *= power == 1.0 ? bessel_eval(bp, r) : std::pow(bessel_eval(bp, r), power);
        }
        return v;
    };
    auto q = integrate_line(f, 0.0, rtol, 400000, 1e-17, 0.5);
    if (!q.converged) throw divergence_error("bessel_product_integral: quadrature did not converge");
    return {q.value, q.rel_change};
}

} // namespace fractrace
