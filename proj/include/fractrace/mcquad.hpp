#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <nlohmann/json.hpp>

#include "constants.hpp"
#include "error.hpp"
#include "numeric.hpp"
#include "params.hpp"
#include "potentials.hpp"
#include "rng.hpp"
#include "special.hpp"

namespace fractrace {

enum class MCScheme { plain, stratified };

inline const char* to_string(MCScheme s) { return s == MCScheme::plain ? "plain" : "stratified"; }

inline MCScheme mc_scheme_from_string(const std::string& s) {
    if (s == "plain") return MCScheme::plain;
    if (s == "stratified") return MCScheme::stratified;
    throw config_error("unknown Monte-Carlo scheme '" + s + "' (plain, stratified)");
}

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    MCScheme scheme = MCScheme::plain;

    double rel_error() const { return std_error / std::abs(mean); }
};

inline void to_json(nlohmann::json& j, const MCEstimate& e) {
    j = nlohmann::json{{"mean", e.mean},
                       {"stderr", e.std_error},
                       {"n_samples", e.n_samples},
                       {"seed", e.seed},
                       {"scheme", to_string(e.scheme)}};
}

inline MCEstimate scaled(MCEstimate e, double c) {
    e.mean *= c;
    e.std_error *= std::abs(c);
    return e;
}

struct MCOptions {
    std::size_t samples = 1'000'000;
    std::uint64_t seed = 1;
    MCScheme scheme = MCScheme::plain;
    unsigned jobs = 1;
};

namespace detail {

inline constexpr std::size_t mc_block = 1u << 14;

struct BlockSums {
    std::vector<double> sum, sum_sq;
    std::vector<std::size_t> count;
};

// Importance-sampling driver. The proposal is a mixture of `strata` equally
// weighted components; draw(rng, s) samples component s and returns the
// weight f/q_mix. Plain MC picks s uniformly, stratified assigns it by sample
// index. Block b always uses stream b, and blocks are merged by pairwise sums
// in block order, so the result does not depend on the thread count.
template <class Draw>
MCEstimate run_mc(const MCOptions& opt, std::size_t strata, Draw&& draw) {
    if (opt.samples < 2) throw divergence_error("Monte-Carlo: need at least 2 samples");
    const std::size_t blocks = (opt.samples + mc_block - 1) / mc_block;
    std::vector<BlockSums> res(blocks);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> bad{false};
    auto work = [&] {
        std::vector<std::vector<double>> w(strata), w2(strata);
        for (std::size_t b; (b = next.fetch_add(1)) < blocks;) {
            auto rng = make_stream(opt.seed, b);
            std::uniform_int_distribution<std::size_t> pick(0, strata - 1);
            for (auto& v : w) v.clear();
            for (auto& v : w2) v.clear();
            const std::size_t lo = b * mc_block, hi = std::min(opt.samples, lo + mc_block);
            for (std::size_t i = lo; i < hi; ++i) {
                const std::size_t s = opt.scheme == MCScheme::stratified ? i % strata : pick(rng);
                const double v = draw(rng, s);
                if (!std::isfinite(v)) bad = true;
                w[s].push_back(v);
                w2[s].push_back(v * v);
            }
            BlockSums& r = res[b];
            for (std::size_t s = 0; s < strata; ++s) {
                r.sum.push_back(pairwise_sum(w[s]));
                r.sum_sq.push_back(pairwise_sum(w2[s]));
                r.count.push_back(w[s].size());
            }
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(blocks)));
    if (jobs == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (bad) throw divergence_error("Monte-Carlo: non-finite sample weight");

    MCEstimate e;
    e.n_samples = opt.samples;
    e.seed = opt.seed;
    e.scheme = opt.scheme;
    const double N = static_cast<double>(opt.samples);
    std::vector<double> S(strata), Q(strata), C(strata);
    for (std::size_t s = 0; s < strata; ++s) {
        std::vector<double> a(blocks), q(blocks);
        std::size_t c = 0;
        for (std::size_t b = 0; b < blocks; ++b) {
            a[b] = res[b].sum[s];
            q[b] = res[b].sum_sq[s];
            c += res[b].count[s];
        }
        S[s] = pairwise_sum(a);
        Q[s] = pairwise_sum(q);
        C[s] = static_cast<double>(c);
    }
    if (opt.scheme == MCScheme::plain) {
        const double sum = pairwise_sum(S), sq = pairwise_sum(Q);
        e.mean = sum / N;
        const double var = std::max(0.0, (sq - N * e.mean * e.mean) / (N - 1.0));
        e.std_error = std::sqrt(var / N);
    } else {
        // Σ_s (1/S) mean_s, variance Σ_s (1/S)² var_s / n_s.
        double mean = 0.0, var = 0.0;
        const double ws = 1.0 / static_cast<double>(strata);
        for (std::size_t s = 0; s < strata; ++s) {
            if (C[s] < 2) throw divergence_error("Monte-Carlo: too few samples per stratum");
            const double ms = S[s] / C[s];
            const double vs = std::max(0.0, (Q[s] - C[s] * ms * ms) / (C[s] - 1.0));
            mean += ws * ms;
            var += ws * ws * vs / C[s];
        }
        e.mean = mean;
        e.std_error = std::sqrt(var);
    }
    if (!(std::abs(e.mean) > 0.0) || e.rel_error() > 0.5)
        throw divergence_error("Monte-Carlo: estimate diverging (stderr/mean = " + std::to_string(e.rel_error()) + ")");
    return e;
}

using Vec = std::vector<double>;

inline double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

template <class R>
void uniform_direction(R& rng, int n, double* out) {
    std::normal_distribution<double> nd;
    double s = 0.0;
    do {
        s = 0.0;
        for (int i = 0; i < n; ++i) {
            out[i] = nd(rng);
            s += out[i] * out[i];
        }
    } while (s == 0.0);
    s = std::sqrt(s);
    for (int i = 0; i < n; ++i) out[i] /= s;
}

// Proposal pieces on R^n, sampled as offsets from a centre: a power peak
// |d|^{-a} on the ball of the given radius (0 ≤ a < n), or a multivariate
// Student-t. Log densities are functions of the distance to the centre.
struct Component {
    enum Kind { peak, student } kind = peak;
    double a = 0.0;     // peak exponent
    double nu = 1.0;    // Student degrees of freedom
    double scale = 1.0; // Student scale, or the peak radius

    template <class R>
    void sample(R& rng, int n, double* d) const {
        std::uniform_real_distribution<double> U(0.0, 1.0);
        if (kind == peak) {
            uniform_direction(rng, n, d);
            const double r = scale * std::pow(1.0 - U(rng), 1.0 / (n - a)); // 1 - U ∈ (0, 1]
            for (int i = 0; i < n; ++i) d[i] *= r;
            return;
        }
        std::normal_distribution<double> nd;
        std::gamma_distribution<double> gd(0.5 * nu, 2.0);
        double w;
        do w = gd(rng); while (!(w > 0.0));
        const double f = scale / std::sqrt(w / nu);
        for (int i = 0; i < n; ++i) d[i] = f * nd(rng);
    }

    // -inf off the support; logs keep far Student draws finite.
    double log_density(int n, double r) const {
        if (kind == peak) {
            if (r >= scale) return -std::numeric_limits<double>::infinity();
            return std::log((n - a) / sphere_area(n)) - (n - a) * std::log(scale) - a * std::log(r);
        }
        const double z = r / scale;
        const double lc = log_gamma(0.5 * (nu + n)) - log_gamma(0.5 * nu) - 0.5 * n * std::log(nu * pi) -
                          n * std::log(scale);
        const double l = z < 1e150 ? std::log1p(z * z / nu) : 2.0 * std::log(z) - std::log(nu);
        return lc - 0.5 * (nu + n) * l;
    }
};

// log of the equal-weight mixture of the given component log densities.
inline double log_mix(std::span<const double> l) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : l) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double v : l) s += std::exp(v - mx);
    return mx + std::log(s / static_cast<double>(l.size()));
}

} // namespace detail

// |x|^{-a}|x - y|^{-b}|y|^{-c}: rotation invariant, homogeneous of degree
// -(a + b + c).
inline KernelSpec stein_weiss_kernel(int n, double a, double b, double c) {
    auto radial = [a, b, c](double rx, double ry, double rxy) {
        return std::pow(rx, -a) * std::pow(rxy, -b) * std::pow(ry, -c);
    };
    auto eval = [radial](std::span<const double> x, std::span<const double> y) {
        double xy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) xy += (x[i] - y[i]) * (x[i] - y[i]);
        return radial(detail::norm2(x), detail::norm2(y), std::sqrt(xy));
    };
    KernelSpec k = custom_kernel(n, eval, true, a + b + c);
    k.radial = radial;
    return k;
}

// A_σ = ∫|x|^{-β/2-n/2} ∏_k ∫K_k(x,y)K_k(ξ₁,y) dy dx.
// One x and one y_k per factor per sample. x comes from a mixture with power
// peaks at 0 and ξ₁ and a Student tail; each y_k from peaks at x, ξ₁, 0 and a
// Student tail; every y piece has scale 1 + |x|, the range over which the
// y-integrals spread once x is far out. Peak exponents sit between the local
// singularity and n, so the weight stays bounded near every singular point.
// Where x nears ξ₁ the two y-singularities merge and the second moment
// behaves like ∫ r^{a₁ - n + 2β - Σ(n - a_y)} dr/r, so the y exponents sit
// within β/(2m) of n to keep it finite.
// Much of the mass sits within 1e-16 of ξ₁, so points are stored as an anchor
// (0 or ξ₁) plus an offset and distances are formed from the offsets.
inline MCEstimate stein_weiss_trace_constant(const std::vector<KernelSpec>& kernels, double beta, int n,
                                             const MCOptions& opt, std::vector<double> direction = {}) {
    std::vector<double> sig;
    for (const auto& k : kernels) {
        if (!k.homogeneous || !k.rotation_invariant || k.n != n || !(k.radial || k.eval))
            throw regime_error("stein_weiss_trace_constant: kernels must be homogeneous, rotation-invariant kernels on R^n");
        sig.push_back(k.degree);
    }
    const ParamSet ps = theorem3_params(n, sig, beta);
    const int m = ps.m;
    if (direction.empty()) {
        direction.assign(n, 0.0);
        direction[0] = 1.0;
    }
    if (static_cast<int>(direction.size()) != n || std::abs(detail::norm2(direction) - 1.0) > 1e-12)
        throw regime_error("stein_weiss_trace_constant: direction must be a unit vector in R^n");

    using detail::Component;
    const double s_at_e = std::max(0.0, 2.0 * ps.sigma_total() - m * double(n)); // = n - β
    const std::vector<Component> px{{Component::peak, 0.5 * ((0.5 * beta + 0.5 * n) + n), 1.0, 1.0},
                                    {Component::peak, 0.5 * (std::min(s_at_e, n - 1e-3) + n), 1.0, 1.0},
                                    {Component::student, 0.0, 0.5 * (n - beta), 1.0}};
    std::vector<double> ay(m), nuy(m);
    for (int k = 0; k < m; ++k) {
        ay[k] = n - std::min(n - sig[k], beta) / (2.0 * m);
        nuy[k] = std::clamp(2.0 * sig[k] - n, 0.1, 1.0);
    }

    struct Pt {
        int anchor; // 0: origin, 1: ξ₁
        detail::Vec off;
    };
    auto dist = [&](const Pt& p, const Pt& q) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double da = p.anchor == q.anchor ? 0.0 : (p.anchor == 1 ? direction[i] : -direction[i]);
            const double d = da + (p.off[i] - q.off[i]);
            s += d * d;
        }
        return std::sqrt(s);
    };
    const Pt O{0, detail::Vec(n, 0.0)}, E{1, detail::Vec(n, 0.0)};
    // Kernels without a radial form see the reassembled coordinates, where
    // offsets below rounding near an anchor are lost.
    auto kernel = [&](int k, const Pt& p, const Pt& q, double rp, double rq, double rpq) {
        const auto& K = kernels[k];
        if (K.radial) return K.radial(rp, rq, rpq);
        detail::Vec a(p.off), b(q.off);
        for (int i = 0; i < n; ++i) {
            if (p.anchor == 1) a[i] += direction[i];
            if (q.anchor == 1) b[i] += direction[i];
        }
        return K.eval(a, b);
    };

    auto draw = [&](std::mt19937_64& rng, std::size_t s) {
        Pt x{s == 1 ? 1 : 0, detail::Vec(n)};
        px[s].sample(rng, n, x.off.data());
        const double rx = dist(x, O), rxe = dist(x, E);
        const double lqx[3] = {px[0].log_density(n, rx), px[1].log_density(n, rxe), px[2].log_density(n, rx)};
        double lw = -(0.5 * beta + 0.5 * n) * std::log(rx) - detail::log_mix(lqx);
        std::uniform_int_distribution<int> pick(0, 3);
        detail::Vec d(n);
        for (int k = 0; k < m; ++k) {
            const Component peak{Component::peak, ay[k], 1.0, 1.0 + rx}, tail{Component::student, 0.0, nuy[k], 1.0 + rx};
            const int c = pick(rng);
            (c == 3 ? tail : peak).sample(rng, n, d.data());
            Pt y{c == 0 ? x.anchor : (c == 1 ? 1 : 0), d};
            if (c == 0)
                for (int i = 0; i < n; ++i) y.off[i] += x.off[i];
            const double ryx = c == 0 ? detail::norm2(d) : dist(y, x), ry = dist(y, O), rye = dist(y, E);
            const double lq[4] = {peak.log_density(n, ryx), peak.log_density(n, rye), peak.log_density(n, ry),
                                  tail.log_density(n, ry)};
            lw += std::log(kernel(k, x, y, rx, ry, ryx)) + std::log(kernel(k, E, y, 1.0, ry, rye)) - detail::log_mix(lq);
        }
        return std::exp(lw);
    };
    return detail::run_mc(opt, px.size(), draw);
}

// Iterated Stein-Weiss building blocks. A factor of B_k is
// e^{c_k t}[(cosh(x/2 - t) - ξ·η₁)(cosh(x/2 + t) - ξ·η₂)]^{-p_k} with
// c_k = α_k/2 - ρ_k and p_k = n/2 - α_k/4; see the ledger for the exponent.
struct IteratedFactor {
    double c = 0.0;
    double p = 0.0;
};

// Exponents of one B_k factor. Inside the joint regime |c| < 2p always holds;
// the check matters for factors built directly from (α_k, ρ_k).
inline IteratedFactor iterated_factor(int n, double alpha, double rho) {
    const IteratedFactor f{0.5 * alpha - rho, 0.5 * n - 0.25 * alpha};
    if (!(std::abs(f.c) < 2.0 * f.p))
        throw divergence_error("iterated Stein-Weiss: t-integral diverges (|alpha_k/2 - rho_k| = " +
                               detail::fmt(std::abs(f.c)) + " must be < n - alpha_k/2 = " + detail::fmt(2.0 * f.p) + ")");
    return f;
}

inline std::vector<IteratedFactor> iterated_factors(const ParamSet& ps) {
    std::vector<IteratedFactor> f;
    for (int k = 0; k < ps.m; ++k) f.push_back(iterated_factor(ps.n, ps.alphas[k], ps.rhos[k]));
    return f;
}

namespace detail {

// log(cosh(u) - s), accurate near u = 0 when s = 1 and free of overflow for
// large |u|.
inline double log_cosh_minus(double u, double s) {
    const double a = std::abs(u);
    if (a > 40.0) return a - std::log(2.0) + std::log1p(-2.0 * s * std::exp(-a) + std::exp(-2.0 * a));
    const double sh = std::sinh(0.5 * u);
    return std::log(2.0 * sh * sh + (1.0 - s));
}

// Integrand in the cosh arguments u = x/2 - t, v = x/2 + t; callers pass u, v
// directly so a sample drawn at u ≈ 0 is not lost to cancellation.
inline double iterated_integrand_uv(const IteratedFactor& f, double u, double v, double s1, double s2) {
    return std::exp(0.5 * f.c * (v - u) - f.p * (log_cosh_minus(u, s1) + log_cosh_minus(v, s2)));
}

inline double iterated_integrand(const IteratedFactor& f, double x, double t, double s1, double s2) {
    return iterated_integrand_uv(f, 0.5 * x - t, 0.5 * x + t, s1, s2);
}

// ∫_R with integrable singularities at the given points.
template <class F>
double integrate_split(F&& f, std::vector<double> cuts) {
    boost::math::quadrature::tanh_sinh<double> ts;
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const double inf = std::numeric_limits<double>::infinity();
    // Abscissae that round onto a cut hit the singularity itself; the mass
    // within one ulp of an integrable singularity is negligible.
    auto g = [&](double t) {
        const double v = f(t);
        return std::isfinite(v) ? v : 0.0;
    };
    double s = ts.integrate(g, -inf, cuts.front(), 1e-12);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s += ts.integrate(g, cuts[i], cuts[i + 1], 1e-12);
    return s + ts.integrate(g, cuts.back(), inf, 1e-12);
}

// 1-D proposal r(u) = ½ peak_a(u) + ½ Student(ν = 1, scale 2), used for the
// cosh arguments u = x/2 ∓ t where the integrand is singular.
struct LineProposal {
    Component peak, tail;
    explicit LineProposal(double a) : peak{Component::peak, a, 1.0, 1.0}, tail{Component::student, 0.0, 1.0, 2.0} {}
    template <class R>
    double sample(R& rng, int part) const {
        double u;
        (part == 0 ? peak : tail).sample(rng, 1, &u);
        return u;
    }
    double density(double u) const {
        return 0.5 * (std::exp(peak.log_density(1, std::abs(u))) + std::exp(tail.log_density(1, std::abs(u))));
    }
};

inline double line_peak_exponent(const ParamSet& ps, const std::vector<IteratedFactor>& fs) {
    if (ps.n != 1) return 0.5;
    double a = 0.0;
    for (const auto& f : fs) a = std::max(a, 2.0 * f.p);
    return 0.5 * (a + 1.0);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace detail

// B_k(x, η₁, η₂) for n = 1 (S⁰ = {±1}, counting measure) by adaptive
// double-exponential quadrature split at the singular points t = ±x/2.
inline double iterated_sw_B_quadrature(double x, const IteratedFactor& f, double eta1, double eta2) {
    double total = 0.0;
    for (double xi : {1.0, -1.0}) {
        const double s1 = xi * eta1, s2 = xi * eta2;
        if (x == 0.0 && s1 == 1.0 && s2 == 1.0) throw divergence_error("iterated_sw_B: B_k diverges at x = 0, eta1 = eta2");
        total += detail::integrate_split([&](double t) { return detail::iterated_integrand(f, x, t, s1, s2); },
                                         {-0.5 * x, 0.5 * x});
    }
    return total;
}

inline double iterated_sw_B_quadrature(double x, const ParamSet& in, int k, double eta1, double eta2) {
    const ParamSet ps = iterated_sw_params(in.n, in.alphas, in.betas, in.rhos);
    if (ps.n != 1) throw regime_error("iterated_sw_B_quadrature: n = 1 only (use the Monte-Carlo estimate)");
    return iterated_sw_B_quadrature(x, iterated_factors(ps).at(k), eta1, eta2);
}

// Monte-Carlo B_k(x, η₁, η₂): t from ½[r(x/2 - t) + r(x/2 + t)], the sphere
// variable ξ summed exactly on S⁰ and sampled uniformly on S^{n-1}, n ≥ 2.
inline MCEstimate iterated_sw_B(double x, const ParamSet& in, int k, const std::vector<double>& eta1,
                                const std::vector<double>& eta2, const MCOptions& opt) {
    const ParamSet ps = iterated_sw_params(in.n, in.alphas, in.betas, in.rhos);
    const int n = ps.n;
    if (static_cast<int>(eta1.size()) != n || static_cast<int>(eta2.size()) != n)
        throw regime_error("iterated_sw_B: eta vectors must live in R^n");
    const auto fs = iterated_factors(ps);
    const auto f = fs.at(k);
    const detail::LineProposal r(detail::line_peak_exponent(ps, fs));
    const double area = sphere_area(n);
    auto draw = [&](std::mt19937_64& rng, std::size_t s) {
        const int side = static_cast<int>(s / 2), part = static_cast<int>(s % 2);
        const double w = r.sample(rng, part);
        const double a = side == 0 ? w : x - w, b = side == 0 ? x - w : w; // u, v
        const double q = 0.5 * (r.density(a) + r.density(b));
        double v = 0.0;
        if (n == 1) {
            for (double xi : {1.0, -1.0}) v += detail::iterated_integrand_uv(f, a, b, xi * eta1[0], xi * eta2[0]);
        } else {
            detail::Vec xi(n);
            detail::uniform_direction(rng, n, xi.data());
            v = area * detail::iterated_integrand_uv(f, a, b, detail::dot(xi, eta1), detail::dot(xi, eta2));
        }
        return v / q;
    };
    return detail::run_mc(opt, 4, draw);
}

// π^{-mn+α} ∏[Γ((2n-α_k)/4)/Γ(α_k/4)]² · 2^{-mn+α/2}/σ(S^{n-1}).
inline double iterated_sw_prefactor(const ParamSet& ps) {
    const double n = ps.n, m = ps.m, a = ps.alpha();
    double lv = (-m * n + a) * std::log(pi) + (-m * n + 0.5 * a) * std::log(2.0) - std::log(sphere_area(ps.n));
    for (double ak : ps.alphas) lv += 2.0 * detail::lgr(0.25 * (2 * n - ak), 0.25 * ak);
    return std::exp(lv);
}

// H(x) = Σ_{η₁,η₂ ∈ S⁰} ∏_k B_k(x, η₁, η₂) for n = 1.
inline double iterated_sw_H_quadrature(double x, const ParamSet& ps) {
    double h = 0.0;
    for (double e1 : {1.0, -1.0})
        for (double e2 : {1.0, -1.0}) {
            double p = 1.0;
            for (int k = 0; k < ps.m; ++k) p *= iterated_sw_B_quadrature(x, ps, k, e1, e2);
            h += p;
        }
    return h;
}

// Deterministic n = 1 route: C = prefactor · 2∫_0^∞ H (H is even).
inline ConstantValue iterated_sw_constant_quadrature(const ParamSet& in) {
    const ParamSet ps = iterated_sw_params(in.n, in.alphas, in.betas, in.rhos);
    if (ps.n != 1) throw regime_error("iterated_sw_constant_quadrature: n = 1 only");
    boost::math::quadrature::tanh_sinh<double> ts;
    double err = 0.0;
    const double I = 2.0 * ts.integrate([&](double x) { return iterated_sw_H_quadrature(x, ps); }, 0.0,
                                        std::numeric_limits<double>::infinity(), 1e-9, &err);
    auto c = detail::make_constant(std::log(iterated_sw_prefactor(ps) * I), FormulaId::C_iterated, ps);
    c.error_estimate = 2.0 * err * iterated_sw_prefactor(ps);
    c.note = "tanh-sinh quadrature of the line integral of H";
    return c;
}

// Monte-Carlo C. With u = x/2 - t₁, v = x/2 + t₁ (unit Jacobian) the first
// factor's singularities sit on the axes, so (u, v) ~ r(u)r(v); the other t_k
// are drawn given x as in iterated_sw_B.
inline MCEstimate iterated_sw_constant(const ParamSet& in, const MCOptions& opt) {
    const ParamSet ps = iterated_sw_params(in.n, in.alphas, in.betas, in.rhos);
    const int n = ps.n, m = ps.m;
    const auto fs = iterated_factors(ps);
    const detail::LineProposal r(detail::line_peak_exponent(ps, fs));
    const double area = sphere_area(n);
    auto draw = [&](std::mt19937_64& rng, std::size_t s) {
        const double u = r.sample(rng, static_cast<int>(s / 2)), v = r.sample(rng, static_cast<int>(s % 2));
        const double x = u + v;
        std::vector<double> us(m), vs(m);
        us[0] = u;
        vs[0] = v;
        double q = r.density(u) * r.density(v);
        std::uniform_int_distribution<int> pick(0, 3);
        for (int k = 1; k < m; ++k) {
            const int c = pick(rng);
            const double w = r.sample(rng, c % 2);
            us[k] = c / 2 == 0 ? w : x - w;
            vs[k] = c / 2 == 0 ? x - w : w;
            q *= 0.5 * (r.density(us[k]) + r.density(vs[k]));
        }
        double h = 0.0;
        if (n == 1) {
            for (double e1 : {1.0, -1.0})
                for (double e2 : {1.0, -1.0}) {
                    double p = 1.0;
                    for (int k = 0; k < m; ++k) {
                        double b = 0.0;
                        for (double xi : {1.0, -1.0}) b += detail::iterated_integrand_uv(fs[k], us[k], vs[k], xi * e1, xi * e2);
                        p *= b;
                    }
                    h += p;
                }
        } else {
            detail::Vec e1(n), e2(n), xi(n);
            detail::uniform_direction(rng, n, e1.data());
            detail::uniform_direction(rng, n, e2.data());
            double p = area * area;
            for (int k = 0; k < m; ++k) {
                detail::uniform_direction(rng, n, xi.data());
                p *= area * detail::iterated_integrand_uv(fs[k], us[k], vs[k], detail::dot(xi, e1), detail::dot(xi, e2));
            }
            h = p;
        }
        return h / q;
    };
    return scaled(detail::run_mc(opt, 4, draw), iterated_sw_prefactor(ps));
}

} // namespace fractrace
