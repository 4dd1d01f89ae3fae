#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "bessel.hpp"
#include "constants.hpp"
#include "error.hpp"
#include "grid.hpp"

namespace fractrace {

// |x - y|^{-σ}.
inline double riesz_eval(int n, double sigma, std::span<const double> x, std::span<const double> y) {
    if (x.size() != static_cast<std::size_t>(n) || y.size() != static_cast<std::size_t>(n))
        throw regime_error("riesz_eval: points must have n coordinates");
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += (x[i] - y[i]) * (x[i] - y[i]);
    if (r2 == 0.0) throw regime_error("riesz_eval: coincident points");
    return std::pow(r2, -0.5 * sigma);
}

enum class KernelKind { riesz, bessel, custom };

struct KernelSpec {
    KernelKind kind = KernelKind::custom;
    int n = 1;
    double degree = 0.0; // σ for riesz, α for bessel
    bool rotation_invariant = false;
    bool homogeneous = false;
    std::function<double(std::span<const double>, std::span<const double>)> eval;
    // Optional K as a function of (|x|, |y|, |x - y|), for rotation-invariant
    // kernels; lets callers keep precision when x and y nearly coincide.
    std::function<double(double, double, double)> radial;

    double operator()(std::span<const double> x, std::span<const double> y) const { return eval(x, y); }
};

inline KernelSpec riesz_kernel(int n, double sigma) {
    if (!(sigma > 0.0 && sigma < n)) throw regime_error("riesz_kernel: sigma must lie in (0, n)");
    KernelSpec k{KernelKind::riesz, n, sigma, true, true, {}, {}};
    k.eval = [n, sigma](std::span<const double> x, std::span<const double> y) { return riesz_eval(n, sigma, x, y); };
    k.radial = [sigma](double, double, double rxy) { return std::pow(rxy, -sigma); };
    return k;
}

inline KernelSpec bessel_kernel(int n, double alpha) {
    const BesselParams bp{n, alpha, 1e-10, 200000};
    KernelSpec k{KernelKind::bessel, n, alpha, true, false, {}, {}};
    k.eval = [bp](std::span<const double> x, std::span<const double> y) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - y[i]) * (x[i] - y[i]);
        return bessel_eval(bp, std::sqrt(r2));
    };
    return k;
}

inline KernelSpec custom_kernel(int n, std::function<double(std::span<const double>, std::span<const double>)> f,
                                bool rotation_invariant = false, double homogeneity = 0.0) {
    return KernelSpec{KernelKind::custom, n, homogeneity, rotation_invariant, homogeneity != 0.0, std::move(f), {}};
}

// Mean of |u|^{-b} over the unit cube [0,1]^n, b < n: by symmetry about the
// largest coordinate, n/(n-b) ∫_{[0,1]^{n-1}} (1+|v|²)^{-b/2} dv.
inline double cube_mean_inverse_power(int n, double b) {
    if (!(b < n)) throw divergence_error("cube_mean_inverse_power: |u|^{-b} is not integrable for b >= n");
    if (n == 1) return 1.0 / (1.0 - b);
    using GL = boost::math::quadrature::gauss<double, 20>;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    // Gauss nodes on [0,1] from the symmetric rule on [-1,1].
    std::vector<double> t, w;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double signs[2] = {1.0, -1.0};
        for (int s = 0; s < (xs[i] == 0.0 ? 1 : 2); ++s) {
            t.push_back(0.5 * (1.0 + signs[s] * xs[i]));
            w.push_back(0.5 * ws[i]);
        }
    }
    const int k = n - 1;
    std::size_t total = 1;
    for (int i = 0; i < k; ++i) total *= t.size();
    double acc = 0.0;
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t u = idx;
        double r2 = 1.0, wt = 1.0;
        for (int i = 0; i < k; ++i) {
            const std::size_t j = u % t.size();
            u /= t.size();
            r2 += t[j] * t[j];
            wt *= w[j];
        }
        acc += wt * std::pow(r2, -0.5 * b);
    }
    return n / (n - b) * acc;
}

// Spectral symbol of a per-factor kernel, as a function of |ξ_k|, plus the value
// to use on the zero-frequency cell.
struct RadialSymbol {
    std::function<double(double)> at;
    double zero_cell = 0.0;
};

// 𝓕[|x|^{-σ}] = c(n, σ)|ξ|^{σ-n}; the zero cell carries the cell average of the
// integrable singularity.
inline RadialSymbol riesz_symbol(int n, double sigma, double dxi) {
    if (!(sigma > 0.0 && sigma < n)) throw regime_error("riesz_symbol: sigma must lie in (0, n)");
    const double c = riesz_fourier_coeff(n, sigma);
    RadialSymbol s;
    s.at = [c, n, sigma](double r) { return c * std::pow(r, sigma - n); };
    s.zero_cell = c * std::pow(0.5 * dxi, sigma - n) * cube_mean_inverse_power(n, n - sigma);
    return s;
}

inline RadialSymbol bessel_radial_symbol(double alpha) {
    RadialSymbol s;
    s.at = [alpha](double r) { return bessel_symbol(alpha, r); };
    s.zero_cell = 1.0;
    return s;
}

// Multiply a spectral field on (R^n)^m by ∏_k s_k(|ξ_k|).
inline GridField apply_symbols(const GridField& g, std::span<const RadialSymbol> syms) {
    if (g.space != Space::spectral) throw grid_error("apply_symbols: field must be spectral");
    if (syms.size() != static_cast<std::size_t>(g.spec.m)) throw grid_error("apply_symbols: need one symbol per factor");
    GridField out = g;
    std::array<double, max_grid_dim> r{};
    for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
        factor_freq_norms(g.spec, idx, std::span(r.data(), g.spec.m));
        double w = 1.0;
        for (int k = 0; k < g.spec.m; ++k) w *= r[k] == 0.0 ? syms[k].zero_cell : syms[k].at(r[k]);
        out.values[idx] *= w;
    }
    return out;
}

// Riesz potential |x|^{-σ_k} ∗ in each factor, computed spectrally.
inline GridField riesz_potential(const GridField& f, std::span<const double> sigmas) {
    if (f.space != Space::physical) throw grid_error("riesz_potential: field must be physical");
    std::vector<RadialSymbol> syms;
    for (double s : sigmas) syms.push_back(riesz_symbol(f.spec.n, s, f.spec.dxi()));
    return inverse_transform(apply_symbols(forward_transform(f), syms));
}

// F(x) = ∫ ∏ g_k(x - y_k) H(y_1, ..., y_m) dy: convolution in every factor, then
// the diagonal.
inline GridField multilinear_map(std::span<const GridField> g, const GridField& H) {
    if (H.space != Space::physical) throw grid_error("multilinear_map: H must be physical");
    if (g.size() != static_cast<std::size_t>(H.spec.m)) throw grid_error("multilinear_map: need one g_k per factor");
    std::vector<GridField> gh;
    for (const auto& gk : g) {
        if (gk.spec.m != 1 || gk.spec.n != H.spec.n || !same_axes(gk.spec, H.spec))
            throw grid_error("multilinear_map: g_k must live on the per-factor grid of H");
        gh.push_back(gk.space == Space::spectral ? gk : forward_transform(gk));
    }
    GridField Hh = forward_transform(H);
    const int n = H.spec.n, m = H.spec.m;
    std::array<std::size_t, max_grid_dim> a{};
    for (std::size_t idx = 0; idx < Hh.values.size(); ++idx) {
        detail::decode(idx, H.spec.N, n * m, std::span(a.data(), n * m));
        for (int k = 0; k < m; ++k) {
            const std::size_t sub = detail::encode(std::span<const std::size_t>(a.data() + k * n, n), H.spec.N);
            Hh.values[idx] *= gh[k].values[sub];
        }
    }
    return diagonal_trace(inverse_transform(Hh));
}

inline GridField multilinear_map(const std::vector<GridField>& g, const GridField& H) {
    return multilinear_map(std::span<const GridField>(g), H);
}

// Same map with kernels given by their radial spectral symbols.
inline GridField multilinear_map(std::span<const RadialSymbol> syms, const GridField& H) {
    return diagonal_trace(inverse_transform(apply_symbols(forward_transform(H), syms)));
}

struct YoungCertificate {
    double p, q, p_conj;
    std::vector<double> s;
    std::vector<double> betas; // β_k = q/s_k - q/p′, Σβ_k = 1
    double residual;           // m/p′ + 1/q - Σ 1/s_k
};

inline YoungCertificate young_exponent_check(double p, double q, std::span<const double> s) {
    if (!(p >= 1.0) || !(q >= 1.0) || !std::isfinite(p) || !std::isfinite(q))
        throw regime_error("young_exponent_check: need 1 <= p, q < inf");
    if (s.empty()) throw regime_error("young_exponent_check: need at least one s_k");
    const double pc = p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
    YoungCertificate c{p, q, pc, std::vector<double>(s.begin(), s.end()), {}, 0.0};
    const double m = static_cast<double>(s.size());
    double inv_sum = 0.0;
    for (double sk : s) {
        if (!(sk >= 1.0) || !(sk <= pc)) throw regime_error("young_exponent_check: each s_k must lie in [1, p']");
        inv_sum += 1.0 / sk;
    }
    c.residual = m / pc + 1.0 / q - inv_sum;
    if (std::abs(c.residual) > 1e-12)
        throw regime_error("young_exponent_check: m/p' + 1/q = sum 1/s_k fails (residual " + detail::fmt(c.residual) + ")");
    double bsum = 0.0;
    for (double sk : s) {
        const double b = q / sk - q / pc;
        if (b < -1e-14) throw regime_error("young_exponent_check: negative beta_k");
        c.betas.push_back(std::max(b, 0.0));
        bsum += c.betas.back();
    }
    if (std::abs(bsum - 1.0) > 1e-12) throw regime_error("young_exponent_check: beta_k do not sum to 1");
    return c;
}

inline YoungCertificate young_exponent_check(double p, double q, const std::vector<double>& s) {
    return young_exponent_check(p, q, std::span<const double>(s));
}

// Autocorrelations a_k = g_k ∗ g̃_k (g̃(x) = g(-x)) via â_k = |ĝ_k|².
inline std::vector<GridField> autocorrelations(std::span<const GridField> g) {
    std::vector<GridField> out;
    for (const auto& gk : g) {
        if (gk.spec.m != 1) throw grid_error("autocorrelations: g_k must be one-factor fields");
        GridField gh = gk.space == Space::spectral ? gk : forward_transform(gk);
        for (auto& v : gh.values) v = std::norm(v);
        out.push_back(inverse_transform(gh));
    }
    return out;
}

// Sharp p = q = 2 constant of the multilinear map: the symbol of TT* is the
// Fourier transform of k = ∏_k (g_k ∗ g̃_k), so the constant is sup|k̂|, which is
// ∫k = ∫∏(g_k ∗ g̃_k) when k ≥ 0 (in particular for non-negative g_k).
inline double lemma1_sharp_l2_constant(std::span<const GridField> g) {
    if (g.empty()) throw regime_error("lemma1_sharp_l2_constant: need at least one g_k");
    for (const auto& gk : g)
        if (!same_axes(gk.spec, g[0].spec) || gk.spec.n != g[0].spec.n)
            throw grid_error("lemma1_sharp_l2_constant: g_k on different grids");
    const auto a = autocorrelations(g);
    GridField k = a[0];
    for (std::size_t j = 1; j < a.size(); ++j)
        for (std::size_t i = 0; i < k.values.size(); ++i) k.values[i] *= a[j].values[i];
    const auto kh = forward_transform(k);
    double sup = 0.0;
    for (auto v : kh.values) sup = std::max(sup, std::abs(v));
    if (!std::isfinite(sup)) throw divergence_error("lemma1_sharp_l2_constant: divergent kernel product");
    return sup;
}

inline double lemma1_sharp_l2_constant(const std::vector<GridField>& g) {
    return lemma1_sharp_l2_constant(std::span<const GridField>(g));
}

struct Lemma1Probe {
    double lhs;      // ‖F‖₂²
    double rhs;      // ‖H‖₂²
    double constant; // lemma1_sharp_l2_constant
    double ratio;    // lhs / (constant · rhs)
};

inline Lemma1Probe lemma1_ratio(std::span<const GridField> g, const GridField& H) {
    const auto F = multilinear_map(g, H);
    Lemma1Probe p{l2_norm_sq(F), l2_norm_sq(H), lemma1_sharp_l2_constant(g), 0.0};
    p.ratio = p.lhs / (p.constant * p.rhs);
    return p;
}

using PointFunction = std::function<double(std::span<const double>)>;

// Matched probe for sharpness: H = T*u, H(y) = ∫ u(x) ∏ g_k(x - y_k) dx, with u a
// wide centred Gaussian of width w·L. Then ‖TH‖²/‖H‖² = ⟨k̂², |û|²⟩/⟨k̂, |û|²⟩,
// which tends to k̂(0) as w grows. H is assembled by the midpoint rule in x with
// g_k tabulated on node differences (a - b)h.
inline Lemma1Probe lemma1_matched_probe(std::span<const PointFunction> g, const GridSpec& one, double width = 0.25) {
    if (g.empty()) throw regime_error("lemma1_matched_probe: need at least one g_k");
    if (one.m != 1) throw grid_error("lemma1_matched_probe: expects the one-factor grid");
    const int n = one.n, m = static_cast<int>(g.size());
    const GridSpec full = one.with_shape(n, m);
    full.validate();
    const std::size_t N = one.N;
    const double wl = width * one.L, h = one.h();
    // Difference lattice: index e ∈ [0, 2N-1) ↦ (e - (N-1))h per axis.
    const std::size_t D = 2 * N - 1;
    std::size_t dcount = 1;
    for (int i = 0; i < n; ++i) dcount *= D;
    std::vector<std::vector<double>> table(m, std::vector<double>(dcount));
    std::array<std::size_t, max_grid_dim> e{};
    std::array<double, max_grid_dim> z{};
    for (std::size_t idx = 0; idx < dcount; ++idx) {
        detail::decode(idx, D, n, std::span(e.data(), n));
        for (int i = 0; i < n; ++i) z[i] = (static_cast<double>(e[i]) - static_cast<double>(N - 1)) * h;
        for (int k = 0; k < m; ++k) table[k][idx] = g[k](std::span<const double>(z.data(), n));
    }
    const auto u = sample(one, [&](std::span<const double> x) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return std::exp(-pi * r2 / (wl * wl));
    });
    const double hn = std::pow(h, n);
    GridField H{full, std::vector<cplx>(full.size()), Space::physical};
    std::array<std::size_t, max_grid_dim> ya{}, xa{}, de{};
    std::vector<double> terms(u.values.size());
    for (std::size_t idx = 0; idx < H.values.size(); ++idx) {
        detail::decode(idx, N, n * m, std::span(ya.data(), n * m));
        for (std::size_t xi = 0; xi < u.values.size(); ++xi) {
            detail::decode(xi, N, n, std::span(xa.data(), n));
            double prod = u.values[xi].real();
            for (int k = 0; k < m; ++k) {
                for (int i = 0; i < n; ++i) de[i] = xa[i] + (N - 1) - ya[k * n + i];
                prod *= table[k][detail::encode(std::span<const std::size_t>(de.data(), n), D)];
            }
            terms[xi] = prod;
        }
        H.values[idx] = hn * pairwise_sum(terms);
    }
    std::vector<GridField> gf;
    for (int k = 0; k < m; ++k) gf.push_back(sample(one, [&](std::span<const double> x) { return g[k](x); }));
    return lemma1_ratio(gf, H);
}

inline Lemma1Probe lemma1_matched_probe(const std::vector<PointFunction>& g, const GridSpec& one, double width = 0.25) {
    return lemma1_matched_probe(std::span<const PointFunction>(g), one, width);
}

// One (r, G(r)) row per radius.
inline void write_kernel_csv(const KernelSpec& k, std::span<const double> radii, std::ostream& os) {
    os << "r,value\n";
    os.precision(17);
    std::vector<double> x(k.n, 0.0), y(k.n, 0.0);
    for (double r : radii) {
        x[0] = r;
        os << r << ',' << k(x, y) << '\n';
    }
}

} // namespace fractrace
