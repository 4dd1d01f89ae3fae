#pragma once

#include <fftw3.h>

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "error.hpp"
#include "numeric.hpp"
#include "special.hpp"

namespace fractrace {

using cplx = std::complex<double>;

inline constexpr int max_grid_dim = 4;
inline constexpr std::size_t grid_budget = std::size_t{1} << 24;

// Uniform periodic box [-L, L)^{mn}. Nodes sit at cell centres -L + (a+½)h, so
// the origin is a cell corner and never a node.
struct GridSpec {
    int n = 1;
    int m = 1;
    std::size_t N = 64;
    double L = 6.0;
    bool offset = true;

    int dim() const { return n * m; }
    double h() const { return 2.0 * L / static_cast<double>(N); }
    double dxi() const { return 1.0 / (2.0 * L); }
    std::size_t size() const {
        std::size_t s = 1;
        for (int i = 0; i < dim(); ++i) s *= N;
        return s;
    }
    double node(std::size_t a) const { return -L + (static_cast<double>(a) + (offset ? 0.5 : 0.0)) * h(); }
    // Spectral index i ↦ j = i - N/2 ∈ [-N/2, N/2).
    long freq_index(std::size_t i) const { return static_cast<long>(i) - static_cast<long>(N / 2); }
    double freq(std::size_t i) const { return static_cast<double>(freq_index(i)) * dxi(); }

    void validate() const {
        if (n < 1 || m < 1) throw grid_error("grid: n and m must be >= 1");
        if (dim() > max_grid_dim) throw grid_error("grid: total dimension m*n = " + std::to_string(dim()) + " exceeds 4");
        if (N < 8 || !std::has_single_bit(N)) throw grid_error("grid: N must be a power of two >= 8");
        if (!(L > 0.0) || !std::isfinite(L)) throw grid_error("grid: L must be positive");
        double cells = std::pow(static_cast<double>(N), dim());
        if (cells > static_cast<double>(grid_budget))
            throw grid_error("grid: N^d = " + std::to_string(static_cast<long long>(cells)) + " exceeds the budget 2^24");
    }

    // Same axes, different factor structure (used for traces and restrictions).
    GridSpec with_shape(int n_new, int m_new) const {
        GridSpec g = *this;
        g.n = n_new;
        g.m = m_new;
        return g;
    }
};

inline bool same_axes(const GridSpec& a, const GridSpec& b) {
    return a.N == b.N && a.L == b.L && a.offset == b.offset;
}

enum class Space { physical, spectral };

struct GridField {
    GridSpec spec;
    std::vector<cplx> values;
    Space space = Space::physical;
};

namespace detail {

inline void decode(std::size_t idx, std::size_t N, int d, std::span<std::size_t> out) {
    for (int i = d - 1; i >= 0; --i) {
        out[i] = idx % N;
        idx /= N;
    }
}

inline std::size_t encode(std::span<const std::size_t> a, std::size_t N) {
    std::size_t idx = 0;
    for (std::size_t v : a) idx = idx * N + v;
    return idx;
}

inline std::mutex& fftw_planner_mutex() {
    static std::mutex mu;
    return mu;
}

// dir = FFTW_BACKWARD computes Σ_a x_a e^{+2πi a i/N}.
inline void fft_inplace(std::vector<cplx>& v, std::size_t N, int d, int dir) {
    std::array<int, max_grid_dim> dims{};
    for (int i = 0; i < d; ++i) dims[i] = static_cast<int>(N);
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * v.size()));
    if (!buf) throw std::bad_alloc();
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_dft(d, dims.data(), buf, buf, dir, FFTW_ESTIMATE);
    }
    std::memcpy(static_cast<void*>(buf), static_cast<const void*>(v.data()), sizeof(fftw_complex) * v.size());
    fftw_execute(plan);
    std::memcpy(static_cast<void*>(v.data()), static_cast<const void*>(buf), sizeof(fftw_complex) * v.size());
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(buf);
}

// Per-axis phase tables for the centred, offset transform.
struct AxisPhases {
    std::vector<cplx> pre;  // applied on physical index a
    std::vector<cplx> post; // applied on spectral index i
};

inline AxisPhases axis_phases(const GridSpec& s) {
    AxisPhases ph;
    ph.pre.resize(s.N);
    ph.post.resize(s.N);
    const double shift = s.offset ? 0.5 : 0.0;
    for (std::size_t a = 0; a < s.N; ++a) ph.pre[a] = (a % 2 == 0) ? 1.0 : -1.0;
    for (std::size_t i = 0; i < s.N; ++i) {
        const long j = s.freq_index(i);
        // e^{2πi x_a ξ_j} = e^{2πi a i/N} (-1)^a (-1)^j e^{2πi shift j/N}
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        ph.post[i] = sign * std::polar(1.0, 2.0 * pi * shift * static_cast<double>(j) / static_cast<double>(s.N));
    }
    return ph;
}

inline void apply_axis_tables(std::vector<cplx>& v, const GridSpec& s, const std::vector<cplx>& table, bool conj) {
    const int d = s.dim();
    std::array<std::size_t, max_grid_dim> a{};
    for (std::size_t idx = 0; idx < v.size(); ++idx) {
        decode(idx, s.N, d, std::span(a.data(), d));
        cplx w = 1.0;
        for (int i = 0; i < d; ++i) w *= conj ? std::conj(table[a[i]]) : table[a[i]];
        v[idx] *= w;
    }
}

} // namespace detail

// Samples gen(x) at every node; x is the full mn-vector, factor-major.
template <class Gen>
GridField sample(const GridSpec& spec, Gen&& gen) {
    spec.validate();
    const int d = spec.dim();
    GridField f{spec, std::vector<cplx>(spec.size()), Space::physical};
    std::array<std::size_t, max_grid_dim> a{};
    std::array<double, max_grid_dim> x{};
    for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
        detail::decode(idx, spec.N, d, std::span(a.data(), d));
        for (int i = 0; i < d; ++i) x[i] = spec.node(a[i]);
        const cplx v = gen(std::span<const double>(x.data(), d));
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw grid_error("sample: generator returned a non-finite value");
        f.values[idx] = v;
    }
    return f;
}

// f̂(ξ) = ∫ e^{2πixξ} f(x) dx, by the midpoint rule on the box.
inline GridField forward_transform(const GridField& f) {
    if (f.space != Space::physical) throw grid_error("forward_transform: field is already spectral");
    f.spec.validate();
    const auto ph = detail::axis_phases(f.spec);
    GridField g{f.spec, f.values, Space::spectral};
    detail::apply_axis_tables(g.values, f.spec, ph.pre, false);
    detail::fft_inplace(g.values, f.spec.N, f.spec.dim(), FFTW_BACKWARD);
    detail::apply_axis_tables(g.values, f.spec, ph.post, false);
    const double scale = std::pow(f.spec.h(), f.spec.dim());
    for (auto& v : g.values) v *= scale;
    return g;
}

inline GridField inverse_transform(const GridField& g) {
    if (g.space != Space::spectral) throw grid_error("inverse_transform: field is not spectral");
    g.spec.validate();
    const auto ph = detail::axis_phases(g.spec);
    GridField f{g.spec, g.values, Space::physical};
    detail::apply_axis_tables(f.values, g.spec, ph.post, true);
    detail::fft_inplace(f.values, g.spec.N, g.spec.dim(), FFTW_FORWARD);
    detail::apply_axis_tables(f.values, g.spec, ph.pre, false);
    const double scale = std::pow(g.spec.dxi(), g.spec.dim());
    for (auto& v : f.values) v *= scale;
    return f;
}

// homogeneous: ∏|ξ_k|^{s_k};  bessel: ∏(1+|ξ_k|²)^{s_k/2};
// bessel_operator: ∏(1+4π²|ξ_k|²)^{s_k/2}, the symbol of ∏(1-Δ_k)^{s_k/2}.
enum class MultiplierKind { homogeneous, bessel, bessel_operator };

// Per-factor frequency magnitudes |ξ_k| at spectral index idx.
inline void factor_freq_norms(const GridSpec& s, std::size_t idx, std::span<double> out) {
    std::array<std::size_t, max_grid_dim> a{};
    detail::decode(idx, s.N, s.dim(), std::span(a.data(), s.dim()));
    for (int k = 0; k < s.m; ++k) {
        double r2 = 0.0;
        for (int i = 0; i < s.n; ++i) {
            const double xi = s.freq(a[k * s.n + i]);
            r2 += xi * xi;
        }
        out[k] = std::sqrt(r2);
    }
}

inline double multiplier_value(MultiplierKind kind, std::span<const double> r, std::span<const double> s) {
    double w = 1.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        if (s[k] == 0.0) continue;
        switch (kind) {
        case MultiplierKind::homogeneous: w *= (r[k] == 0.0) ? 0.0 : std::pow(r[k], s[k]); break;
        case MultiplierKind::bessel: w *= std::pow(1.0 + r[k] * r[k], 0.5 * s[k]); break;
        case MultiplierKind::bessel_operator: w *= std::pow(1.0 + 4.0 * pi * pi * r[k] * r[k], 0.5 * s[k]); break;
        }
    }
    return w;
}

inline GridField apply_multiplier(const GridField& g, MultiplierKind kind, std::span<const double> exponents) {
    if (g.space != Space::spectral) throw grid_error("apply_multiplier: field must be spectral");
    if (exponents.size() != static_cast<std::size_t>(g.spec.m))
        throw grid_error("apply_multiplier: need one exponent per factor");
    for (double s : exponents) {
        if (!std::isfinite(s)) throw grid_error("apply_multiplier: non-finite exponent");
        if (kind == MultiplierKind::homogeneous && s < 0.0)
            throw grid_error("apply_multiplier: negative homogeneous exponents belong to the Riesz potentials");
    }
    GridField out = g;
    std::array<double, max_grid_dim> r{};
    for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
        factor_freq_norms(g.spec, idx, std::span(r.data(), g.spec.m));
        out.values[idx] *= multiplier_value(kind, std::span<const double>(r.data(), g.spec.m), exponents);
    }
    return out;
}

inline GridField apply_multiplier(const GridField& g, MultiplierKind kind, const std::vector<double>& exponents) {
    return apply_multiplier(g, kind, std::span<const double>(exponents));
}

// f(x, ..., x) on R^n.
inline GridField diagonal_trace(const GridField& f) {
    if (f.space != Space::physical) throw grid_error("diagonal_trace: field must be physical");
    const GridSpec out_spec = f.spec.with_shape(f.spec.n, 1);
    GridField out{out_spec, std::vector<cplx>(out_spec.size()), Space::physical};
    const int n = f.spec.n, m = f.spec.m;
    std::array<std::size_t, max_grid_dim> a{}, full{};
    for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
        detail::decode(idx, f.spec.N, n, std::span(a.data(), n));
        for (int k = 0; k < m; ++k)
            for (int i = 0; i < n; ++i) full[k * n + i] = a[i];
        out.values[idx] = f.values[detail::encode(std::span<const std::size_t>(full.data(), n * m), f.spec.N)];
    }
    return out;
}

inline GridField diagonal_trace(const GridField& f, int m, int n) {
    if (f.spec.m != m || f.spec.n != n) throw grid_error("diagonal_trace: field shape does not match (m, n)");
    return diagonal_trace(f);
}

// Restriction to the first k coordinates; the rest are pinned at the node
// x = +h/2 nearest the origin.
inline GridField subspace_restrict(const GridField& f, int k_sub) {
    if (f.space != Space::physical) throw grid_error("subspace_restrict: field must be physical");
    if (f.spec.m != 1) throw grid_error("subspace_restrict: expects a field on R^n (m = 1)");
    const int n = f.spec.n;
    if (k_sub < 1 || k_sub > n) throw grid_error("subspace_restrict: k_sub must lie in [1, n]");
    const GridSpec out_spec = f.spec.with_shape(k_sub, 1);
    GridField out{out_spec, std::vector<cplx>(out_spec.size()), Space::physical};
    const std::size_t pin = f.spec.N / 2;
    std::array<std::size_t, max_grid_dim> a{}, full{};
    for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
        detail::decode(idx, f.spec.N, k_sub, std::span(a.data(), k_sub));
        for (int i = 0; i < n; ++i) full[i] = i < k_sub ? a[i] : pin;
        out.values[idx] = f.values[detail::encode(std::span<const std::size_t>(full.data(), n), f.spec.N)];
    }
    return out;
}

// Upper incomplete Γ(a, x), x > 0, any real a. Negative orders go through
// Γ(a, x) = (Γ(a+1, x) - x^a e^{-x}) / a, starting from Γ(0, x) = E_1(x) when a
// is a non-positive integer.
inline double upper_gamma(double a, double x) {
    if (a > 0.0) return boost::math::tgamma(a, x);
    const double k = std::ceil(-a);
    double base = a + k; // in [0, 1)
    double g = base == 0.0 ? boost::math::expint(1, x) : boost::math::tgamma(base, x);
    for (double b = base - 1.0; b >= a - 1e-12; b -= 1.0) g = (g - std::pow(x, b) * std::exp(-x)) / b;
    return g;
}

// Z_d(s) = Σ_{a ∈ (Z+½)^d} |a|^{-s}, analytically continued in s (Epstein zeta of
// the half-shifted lattice). For s < d, h^d Σ|x_a|^{-s} g(x_a) - ∫|x|^{-s} g has
// leading term h^{d-s} Z_d(s) g(0). Ewald split at t = 1 of the Gaussian
// representation of |a|^{-s}; both lattice sums converge like e^{-π r²}.
inline double epstein_zeta_half(int d, double s) {
    if (d < 1 || d > max_grid_dim) throw grid_error("epstein_zeta_half: d out of range");
    if (s == static_cast<double>(d)) throw divergence_error("epstein_zeta_half: pole at s = d");
    // 1/Γ(s/2) vanishes at s = 0, -2, ...
    const double hs = 0.5 * s;
    if (hs <= 0.0 && hs == std::floor(hs)) return 0.0;
    constexpr int R = 6;
    std::vector<double> real_terms, dual_terms;
    std::array<int, max_grid_dim> k{};
    const int side = 2 * R + 1;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= side;
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t t = idx;
        double ra = 0.0, rk = 0.0;
        int parity = 0;
        for (int i = 0; i < d; ++i) {
            k[i] = static_cast<int>(t % side) - R;
            t /= side;
            const double ai = k[i] + 0.5; // real-space point of the shifted lattice
            ra += ai * ai;
            rk += static_cast<double>(k[i]) * k[i];
            parity += std::abs(k[i]);
        }
        const double xa = pi * ra;
        real_terms.push_back(std::pow(xa, -hs) * upper_gamma(hs, xa));
        if (rk > 0.0) {
            const double xk = pi * rk;
            const double e = 0.5 * (d - s);
            dual_terms.push_back(((parity % 2) ? -1.0 : 1.0) * std::pow(xk, -e) * upper_gamma(e, xk));
        }
    }
    const double bracket = pairwise_sum(real_terms) + pairwise_sum(dual_terms) + 2.0 / (s - d);
    return std::pow(pi, hs) * bracket / boost::math::tgamma(hs);
}

// Z(s) = Σ_{a ∈ Z^d, a ≠ 0} |a|^{-s}, analytically continued (Epstein zeta of
// the integer lattice; Z = 2ζ(s) for d = 1). Same Ewald split as above, the
// lattice being self-dual.
inline double epstein_zeta_int(int d, double s) {
    if (d < 1 || d > max_grid_dim) throw grid_error("epstein_zeta_int: d out of range");
    if (s == static_cast<double>(d)) throw divergence_error("epstein_zeta_int: pole at s = d");
    const double hs = 0.5 * s;
    if (hs == 0.0) return -1.0;
    if (hs < 0.0 && hs == std::floor(hs)) return 0.0;
    constexpr int R = 6;
    std::vector<double> terms;
    std::array<int, max_grid_dim> k{};
    const int side = 2 * R + 1;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= side;
    const double e = 0.5 * (d - s);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::size_t t = idx;
        double r2 = 0.0;
        for (int i = 0; i < d; ++i) {
            k[i] = static_cast<int>(t % side) - R;
            t /= side;
            r2 += static_cast<double>(k[i]) * k[i];
        }
        if (r2 == 0.0) continue;
        const double x = pi * r2;
        terms.push_back(std::pow(x, -hs) * upper_gamma(hs, x) + std::pow(x, -e) * upper_gamma(e, x));
    }
    const double bracket = pairwise_sum(terms) - 2.0 / s + 2.0 / (s - d);
    return std::pow(pi, hs) * bracket / boost::math::tgamma(hs);
}

namespace detail {

// Symmetric 8-point Lagrange stencils at x = 0 from the nodes ±h/2, ..., ±7h/2
// (indices N/2-4 .. N/2+3): value and second derivative (× h^{-2}), both O(h^8).
inline constexpr std::array<double, 8> stencil_value{-5.0 / 2048, 49.0 / 2048, -245.0 / 2048, 1225.0 / 2048,
                                                     1225.0 / 2048, -245.0 / 2048, 49.0 / 2048, -5.0 / 2048};
inline constexpr std::array<double, 8> stencil_second{259.0 / 11520, -499.0 / 2304, 1299.0 / 1280, -1891.0 / 2304,
                                                      -1891.0 / 2304, 1299.0 / 1280, -499.0 / 2304, 259.0 / 11520};

// g(0) and Δg(0) from the 8^d nodes around the origin.
inline std::pair<double, double> origin_jet(const GridSpec& s, const std::vector<double>& g) {
    const int d = s.dim();
    double v0 = 0.0, lap = 0.0;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= 8;
    std::array<std::size_t, max_grid_dim> a{};
    for (std::size_t t = 0; t < total; ++t) {
        std::size_t u = t;
        std::array<int, max_grid_dim> c{};
        for (int i = 0; i < d; ++i) {
            c[i] = static_cast<int>(u % 8);
            u /= 8;
            a[i] = s.N / 2 - 4 + c[i];
        }
        const double gv = g[encode(std::span<const std::size_t>(a.data(), d), s.N)];
        double w0 = 1.0;
        for (int i = 0; i < d; ++i) w0 *= stencil_value[c[i]];
        v0 += w0 * gv;
        for (int j = 0; j < d; ++j) {
            double w = 1.0;
            for (int i = 0; i < d; ++i) w *= (i == j) ? stencil_second[c[i]] : stencil_value[c[i]];
            lap += w * gv;
        }
    }
    const double h = s.h();
    return {v0, lap / (h * h)};
}

} // namespace detail

// ∫ |x|^{-β} g(x) dx for nodal values g on the whole box (any m, |x| is the
// full-dimensional norm). For β > 0 the midpoint sum is corrected by the two
// leading lattice-zeta terms, leaving an O(h^{d+4-β}) error for smooth g.
inline double weighted_integral(const GridSpec& s, const std::vector<double>& g, double beta) {
    const int d = s.dim();
    if (!(beta < d)) throw divergence_error("weighted_integral: |x|^{-beta} is not integrable at the origin for beta >= d");
    if (beta < 0.0) throw grid_error("weighted_integral: weight exponent must be -beta with beta >= 0");
    if (beta > 0.0 && !s.offset) throw grid_error("weighted_integral: a singular weight needs the half-cell offset grid");
    std::vector<double> terms(g.size());
    std::array<std::size_t, max_grid_dim> a{};
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        double w = 1.0;
        if (beta > 0.0) {
            detail::decode(idx, s.N, d, std::span(a.data(), d));
            double r2 = 0.0;
            for (int i = 0; i < d; ++i) r2 += s.node(a[i]) * s.node(a[i]);
            w = std::pow(r2, -0.5 * beta);
        }
        terms[idx] = w * g[idx];
    }
    const double h = s.h();
    double total = std::pow(h, d) * pairwise_sum(terms);
    if (beta > 0.0) {
        const auto [g0, lap] = detail::origin_jet(s, g);
        total -= std::pow(h, d - beta) * epstein_zeta_half(d, beta) * g0;
        total -= std::pow(h, d + 2 - beta) * epstein_zeta_half(d, beta - 2.0) * lap / (2.0 * d);
    }
    return total;
}

// (∫ |x|^{-β} |f|^q dx)^{1/q}.
inline double weighted_lq_norm(const GridField& f, double beta, double q) {
    if (f.space != Space::physical) throw grid_error("weighted_lq_norm: field must be physical");
    if (!(q >= 1.0)) throw grid_error("weighted_lq_norm: q must be >= 1");
    std::vector<double> g(f.values.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::pow(std::abs(f.values[i]), q);
    const double v = weighted_integral(f.spec, g, beta);
    return std::pow(std::max(v, 0.0), 1.0 / q);
}

// Σ|f|² times the cell volume of the field's space.
inline double l2_norm_sq(const GridField& f) {
    std::vector<double> t(f.values.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::norm(f.values[i]);
    const double cell = f.space == Space::physical ? f.spec.h() : f.spec.dxi();
    return std::pow(cell, f.spec.dim()) * pairwise_sum(t);
}

// Σ_ξ w(ξ)|f̂(ξ)|² (1/2L)^d for a spectral field and multiplier w.
inline double spectral_quadratic_form(const GridField& g, MultiplierKind kind, std::span<const double> s) {
    if (g.space != Space::spectral) throw grid_error("spectral_quadratic_form: field must be spectral");
    std::vector<double> t(g.values.size());
    std::array<double, max_grid_dim> r{};
    for (std::size_t idx = 0; idx < t.size(); ++idx) {
        factor_freq_norms(g.spec, idx, std::span(r.data(), g.spec.m));
        t[idx] = multiplier_value(kind, std::span<const double>(r.data(), g.spec.m), s) * std::norm(g.values[idx]);
    }
    return std::pow(g.spec.dxi(), g.spec.dim()) * pairwise_sum(t);
}

// Per-node weights c(a) on one n-dimensional factor of the frequency lattice
// such that Σ_a c(a) G(ξ_a) = ∫|ξ|^s G(ξ) dξ + O(Δ^{n+s+4}) for smooth G
// (O(Δ^{s+7}) for n = 1): the lattice sum minus the leading zeta terms at the
// ξ = 0 node, derivatives from central differences.
inline std::vector<double> homogeneous_weight_table(const GridSpec& one, double s) {
    const int n = one.n;
    const GridSpec f = one.with_shape(n, 1);
    const double dxi = f.dxi();
    std::vector<double> c(f.size());
    std::array<double, 1> r{};
    for (std::size_t idx = 0; idx < c.size(); ++idx) {
        factor_freq_norms(f, idx, std::span(r.data(), 1));
        c[idx] = std::pow(dxi, n) * (r[0] == 0.0 ? (s == 0.0 ? 1.0 : 0.0) : std::pow(r[0], s));
    }
    if (s == 0.0) return c;
    if (f.N < 16) throw grid_error("homogeneous_weight_table: need N >= 16 for the origin stencil");
    static constexpr std::array<double, 5> d2{-205.0 / 72, 8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
    std::array<std::size_t, max_grid_dim> a{};
    const std::size_t z = f.N / 2;
    for (int i = 0; i < n; ++i) a[i] = z;
    const auto at = [&](int axis, int off) {
        auto b = a;
        b[axis] = static_cast<std::size_t>(static_cast<long>(z) + off);
        return detail::encode(std::span<const std::size_t>(b.data(), n), f.N);
    };
    const std::size_t origin = detail::encode(std::span<const std::size_t>(a.data(), n), f.N);
    c[origin] -= std::pow(dxi, n + s) * epstein_zeta_int(n, -s);
    const double c2 = std::pow(dxi, n + s + 2.0) * epstein_zeta_int(n, -s - 2.0) / (2.0 * n) / (dxi * dxi);
    for (int axis = 0; axis < n; ++axis) {
        c[origin] -= c2 * d2[0];
        for (int off = 1; off <= 4; ++off) {
            c[at(axis, off)] -= c2 * d2[off];
            c[at(axis, -off)] -= c2 * d2[off];
        }
    }
    if (n == 1) {
        // Quartic term 2ζ(-s-4) G^{(4)}(0)/24 Δ^{5+s}; for n > 1 it needs the
        // anisotropic lattice moments and is omitted.
        static constexpr std::array<double, 4> d4{28.0 / 3, -13.0 / 2, 2.0, -1.0 / 6};
        const double c4 = std::pow(dxi, 1.0 + s) * epstein_zeta_int(1, -s - 4.0) / 24.0;
        c[origin] -= c4 * d4[0];
        for (int off = 1; off <= 3; ++off) {
            c[at(0, off)] -= c4 * d4[off];
            c[at(0, -off)] -= c4 * d4[off];
        }
    }
    return c;
}

// ∫∏|ξ_k|^{s_k}|f̂|² dξ with the lattice-zeta correction in every factor
// (tensor product of homogeneous_weight_table). Needs |f̂|² smooth, which holds
// for sampled rapidly decaying f.
inline double homogeneous_form_corrected(const GridField& g, std::span<const double> s) {
    if (g.space != Space::spectral) throw grid_error("homogeneous_form_corrected: field must be spectral");
    const int n = g.spec.n, m = g.spec.m;
    if (s.size() != static_cast<std::size_t>(m)) throw grid_error("homogeneous_form_corrected: one exponent per factor");
    std::vector<std::vector<double>> tab;
    for (double e : s) {
        if (!std::isfinite(e) || e < 0.0) throw grid_error("homogeneous_form_corrected: exponents must be >= 0");
        tab.push_back(homogeneous_weight_table(g.spec, e));
    }
    std::vector<double> t(g.values.size());
    std::array<std::size_t, max_grid_dim> a{};
    for (std::size_t idx = 0; idx < t.size(); ++idx) {
        detail::decode(idx, g.spec.N, n * m, std::span(a.data(), n * m));
        double w = 1.0;
        for (int k = 0; k < m; ++k) w *= tab[k][detail::encode(std::span<const std::size_t>(a.data() + k * n, n), g.spec.N)];
        t[idx] = w * std::norm(g.values[idx]);
    }
    return pairwise_sum(t);
}

// Flat binary snapshot: int32 d, int32 N, float64 L, int32 space, then N^d
// (re, im) float64 pairs, all little-endian.
inline void write_binary(const GridField& f, const std::string& path) {
    static_assert(std::endian::native == std::endian::little, "binary export assumes a little-endian host");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("write_binary: cannot open " + path);
    const std::int32_t d = f.spec.dim(), N = static_cast<std::int32_t>(f.spec.N);
    const std::int32_t sp = f.space == Space::physical ? 0 : 1;
    const double L = f.spec.L;
    os.write(reinterpret_cast<const char*>(&d), 4);
    os.write(reinterpret_cast<const char*>(&N), 4);
    os.write(reinterpret_cast<const char*>(&L), 8);
    os.write(reinterpret_cast<const char*>(&sp), 4);
    os.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(16 * f.values.size()));
}

// The header carries d but not the (n, m) split; the caller supplies n.
inline GridField read_binary(const std::string& path, int n) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("read_binary: cannot open " + path);
    std::int32_t d = 0, N = 0, sp = 0;
    double L = 0;
    is.read(reinterpret_cast<char*>(&d), 4);
    is.read(reinterpret_cast<char*>(&N), 4);
    is.read(reinterpret_cast<char*>(&L), 8);
    is.read(reinterpret_cast<char*>(&sp), 4);
    if (!is || n < 1 || d % n != 0) throw config_error("read_binary: malformed header in " + path);
    GridSpec s{n, d / n, static_cast<std::size_t>(N), L, true};
    s.validate();
    GridField f{s, std::vector<cplx>(s.size()), sp == 0 ? Space::physical : Space::spectral};
    is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(16 * f.values.size()));
    if (!is) throw config_error("read_binary: truncated data in " + path);
    return f;
}

// One row per node: coordinates (or frequencies), re, im.
inline void write_csv(const GridField& f, std::ostream& os) {
    const int d = f.spec.dim();
    for (int i = 0; i < d; ++i) os << (f.space == Space::physical ? "x" : "xi") << i << ',';
    os << "re,im\n";
    os.precision(17);
    std::array<std::size_t, max_grid_dim> a{};
    for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
        detail::decode(idx, f.spec.N, d, std::span(a.data(), d));
        for (int i = 0; i < d; ++i) os << (f.space == Space::physical ? f.spec.node(a[i]) : f.spec.freq(a[i])) << ',';
        os << f.values[idx].real() << ',' << f.values[idx].imag() << '\n';
    }
}

} // namespace fractrace
