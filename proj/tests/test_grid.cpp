#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <thread>

#include <boost/math/special_functions/zeta.hpp>
#include <gtest/gtest.h>

#include "fractrace/grid.hpp"

using namespace fractrace;

namespace {

double gauss(std::span<const double> x, double a = 1.0) {
    double r2 = 0;
    for (double v : x) r2 += v * v;
    return std::exp(-pi * a * r2);
}

GridField random_smooth(const GridSpec& s, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> c(s.dim()), w(3);
    for (auto& v : c) v = 0.7 * nd(rng);
    for (auto& v : w) v = nd(rng);
    return sample(s, [&](std::span<const double> x) {
        double r2 = 0, lin = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            r2 += (x[i] - c[i]) * (x[i] - c[i]);
            lin += x[i];
        }
        return cplx(w[0], w[1]) * std::exp(-pi * r2) * std::polar(1.0, w[2] * lin);
    });
}

double max_abs_diff(const GridField& a, const GridField& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

} // namespace

TEST(GridSpec, Validation) {
    EXPECT_NO_THROW((GridSpec{1, 2, 64, 6.0}.validate()));
    EXPECT_THROW((GridSpec{1, 1, 48, 6.0}.validate()), grid_error);
    EXPECT_THROW((GridSpec{1, 1, 4, 6.0}.validate()), grid_error);
    EXPECT_THROW((GridSpec{1, 5, 8, 6.0}.validate()), grid_error);
    EXPECT_THROW((GridSpec{2, 2, 128, 6.0}.validate()), grid_error); // 2^28 > budget
    EXPECT_THROW((GridSpec{1, 1, 64, 0.0}.validate()), grid_error);
    const GridSpec s{1, 1, 64, 6.0};
    for (std::size_t a = 0; a < s.N; ++a) EXPECT_NE(s.node(a), 0.0);
    EXPECT_DOUBLE_EQ(s.freq(0), -32.0 / 12.0);
    EXPECT_DOUBLE_EQ(s.freq(32), 0.0);
}

TEST(Sample, GaussianPeakAtNodeNearestOrigin) {
    const GridSpec s{1, 1, 64, 6.0};
    const auto f = sample(s, [](auto x) { return gauss(x); });
    double mx = 0;
    for (auto v : f.values) mx = std::max(mx, v.real());
    const double h = s.h();
    EXPECT_DOUBLE_EQ(mx, std::exp(-pi * h * h / 4));
    EXPECT_DOUBLE_EQ(f.values[32].real(), mx);
    EXPECT_DOUBLE_EQ(f.values[31].real(), mx);
}

TEST(Sample, SeparableProduct) {
    const GridSpec s{1, 2, 32, 4.0};
    const auto f = sample(s, [](auto x) { return gauss(x); });
    for (std::size_t a = 0; a < s.N; ++a)
        for (std::size_t b = 0; b < s.N; ++b) {
            const double ua = std::exp(-pi * s.node(a) * s.node(a)), ub = std::exp(-pi * s.node(b) * s.node(b));
            EXPECT_NEAR(f.values[a * s.N + b].real(), ua * ub, 1e-15);
        }
}

TEST(Sample, RejectsNonFinite) {
    const GridSpec s{1, 1, 16, 2.0};
    EXPECT_THROW(sample(s, [](auto) { return std::nan(""); }), grid_error);
    // The extremal profile is finite everywhere
    EXPECT_NO_THROW(sample(s, [](auto x) { return std::pow(1 + x[0] * x[0], -0.25); }));
}

TEST(Transform, GaussianSelfDual) {
    for (int m : {1, 2}) {
        const GridSpec s{1, m, 64, 6.0};
        const auto g = forward_transform(sample(s, [](auto x) { return gauss(x); }));
        // The Nyquist row j = -N/2 is excluded: there the alias f̂(ξ + 1/h) has the
        // same size e^{-π(N/4L)²} ≈ 2e-10 as the value itself.
        double err = 0;
        std::array<std::size_t, 4> a{};
        for (std::size_t idx = 0; idx < g.values.size(); ++idx) {
            detail::decode(idx, s.N, s.dim(), std::span(a.data(), s.dim()));
            if (std::find(a.begin(), a.begin() + s.dim(), 0) != a.begin() + s.dim()) continue;
            double r2 = 0;
            for (int i = 0; i < s.dim(); ++i) r2 += s.freq(a[i]) * s.freq(a[i]);
            err = std::max(err, std::abs(g.values[idx] - std::exp(-pi * r2)));
        }
        EXPECT_LT(err, 1e-10) << "m=" << m;
    }
}

TEST(Transform, ImpulseHasFlatModulus) {
    for (int d : {1, 2}) {
        const GridSpec s{d, 1, 16, 3.0};
        GridField f{s, std::vector<cplx>(s.size()), Space::physical};
        f.values[s.size() / 2 + 3] = 1.0;
        const auto g = forward_transform(f);
        for (auto v : g.values) EXPECT_NEAR(std::abs(v), std::pow(s.h(), d), 1e-15);
    }
}

TEST(Transform, RoundTripAndPlancherel) {
    for (auto s : {GridSpec{1, 1, 64, 6.0}, GridSpec{1, 2, 32, 5.0}, GridSpec{2, 1, 32, 5.0}, GridSpec{1, 3, 16, 4.0},
                   GridSpec{2, 2, 16, 4.0}}) {
        for (unsigned seed : {1u, 2u, 3u}) {
            const auto f = random_smooth(s, seed);
            const auto g = forward_transform(f);
            const auto back = inverse_transform(g);
            double mx = 0;
            for (auto v : f.values) mx = std::max(mx, std::abs(v));
            EXPECT_LT(max_abs_diff(f, back), 1e-12 * mx);
            const double p = l2_norm_sq(f), q = l2_norm_sq(g);
            EXPECT_NEAR(p, q, 1e-12 * p);
        }
    }
}

TEST(Transform, SpaceTagMismatch) {
    const GridSpec s{1, 1, 16, 2.0};
    const auto f = sample(s, [](auto x) { return gauss(x); });
    EXPECT_THROW(inverse_transform(f), grid_error);
    EXPECT_THROW(forward_transform(forward_transform(f)), grid_error);
    EXPECT_THROW(apply_multiplier(f, MultiplierKind::bessel, std::vector<double>{1.0}), grid_error);
}

TEST(Transform, ConcurrentCallsAreBitIdentical) {
    const GridSpec s{1, 2, 64, 6.0};
    const auto f = random_smooth(s, 11);
    const auto ref = forward_transform(f);
    std::vector<GridField> out(6);
    std::vector<std::thread> th;
    for (int i = 0; i < 6; ++i) th.emplace_back([&, i] { out[i] = forward_transform(f); });
    for (auto& t : th) t.join();
    for (const auto& o : out) EXPECT_EQ(o.values, ref.values);
}

TEST(Multiplier, ZeroExponentIsIdentity) {
    const GridSpec s{1, 2, 32, 4.0};
    const auto g = forward_transform(random_smooth(s, 5));
    for (auto kind : {MultiplierKind::homogeneous, MultiplierKind::bessel, MultiplierKind::bessel_operator})
        EXPECT_EQ(apply_multiplier(g, kind, std::vector<double>{0.0, 0.0}).values, g.values);
}

TEST(Multiplier, HomogeneousSquareIsScaledLaplacian) {
    // (-Δ/4π²) e^{-πx²} = (1/2π - x²) e^{-πx²}
    const GridSpec s{1, 1, 128, 8.0};
    const auto f = sample(s, [](auto x) { return gauss(x); });
    const auto u = inverse_transform(apply_multiplier(forward_transform(f), MultiplierKind::homogeneous, std::vector<double>{2.0}));
    double err = 0;
    for (std::size_t a = 0; a < s.N; ++a) {
        const double x = s.node(a);
        err = std::max(err, std::abs(u.values[a] - (1 / (2 * pi) - x * x) * std::exp(-pi * x * x)));
    }
    EXPECT_LT(err, 1e-6);
}

TEST(Multiplier, BesselOnFlatSpectrum) {
    const GridSpec s{1, 1, 32, 4.0};
    GridField g{s, std::vector<cplx>(s.size(), 1.0), Space::spectral};
    const auto b = apply_multiplier(g, MultiplierKind::bessel, std::vector<double>{0.7});
    const auto bo = apply_multiplier(g, MultiplierKind::bessel_operator, std::vector<double>{0.7});
    for (std::size_t i = 0; i < s.N; ++i) {
        const double xi = s.freq(i);
        EXPECT_NEAR(b.values[i].real(), std::pow(1 + xi * xi, 0.35), 1e-14);
        EXPECT_NEAR(bo.values[i].real(), std::pow(1 + 4 * pi * pi * xi * xi, 0.35), 1e-13);
    }
}

TEST(Multiplier, BesselDominatesHomogeneousOnGrid) {
    const GridSpec s{1, 2, 64, 6.0};
    GridField g{s, std::vector<cplx>(s.size(), 1.0), Space::spectral};
    const std::vector<double> al{0.9, 0.6};
    const auto b = apply_multiplier(g, MultiplierKind::bessel, al);
    const auto hm = apply_multiplier(g, MultiplierKind::homogeneous, al);
    for (std::size_t i = 0; i < g.values.size(); ++i) EXPECT_GE(b.values[i].real(), hm.values[i].real());
}

TEST(Multiplier, RejectsNegativeHomogeneous) {
    const GridSpec s{1, 1, 16, 2.0};
    GridField g{s, std::vector<cplx>(s.size(), 1.0), Space::spectral};
    EXPECT_THROW(apply_multiplier(g, MultiplierKind::homogeneous, std::vector<double>{-0.5}), grid_error);
    EXPECT_THROW(apply_multiplier(g, MultiplierKind::homogeneous, std::vector<double>{0.5, 0.5}), grid_error);
}

TEST(Trace, DiagonalOfProductAndGaussian) {
    const GridSpec s{1, 2, 32, 4.0};
    auto u = [](double x) { return std::exp(-x * x) * (1 + 0.3 * x); };
    const auto f = sample(s, [&](auto x) { return u(x[0]) * u(x[1]); });
    const auto t = diagonal_trace(f, 2, 1);
    EXPECT_EQ(t.spec.m, 1);
    for (std::size_t a = 0; a < s.N; ++a) EXPECT_NEAR(t.values[a].real(), std::pow(u(s.node(a)), 2), 1e-15);
    const auto gt = diagonal_trace(sample(s, [](auto x) { return gauss(x); }));
    for (std::size_t a = 0; a < s.N; ++a)
        EXPECT_NEAR(gt.values[a].real(), std::exp(-2 * pi * s.node(a) * s.node(a)), 1e-15);
    EXPECT_THROW(diagonal_trace(f, 1, 2), grid_error);
}

TEST(Trace, MOneIdentityAndHigherDims) {
    const GridSpec s1{2, 1, 16, 3.0};
    const auto f = random_smooth(s1, 3);
    EXPECT_EQ(diagonal_trace(f).values, f.values);
    // n = 2, m = 2: f(x, y) ↦ f(x, x) with x ∈ R².
    const GridSpec s{2, 2, 16, 3.0};
    const auto g = sample(s, [](auto x) { return x[0] + 10 * x[1] + 100 * x[2] + 1000 * x[3]; });
    const auto t = diagonal_trace(g);
    for (std::size_t a = 0; a < s.N; ++a)
        for (std::size_t b = 0; b < s.N; ++b)
            EXPECT_NEAR(t.values[a * s.N + b].real(), 101 * s.node(a) + 1010 * s.node(b), 1e-12);
}

TEST(Trace, CommutesWithPointwiseProducts) {
    const GridSpec s{1, 3, 16, 3.0};
    const auto f = random_smooth(s, 1), g = random_smooth(s, 2);
    GridField fg = f;
    for (std::size_t i = 0; i < fg.values.size(); ++i) fg.values[i] *= g.values[i];
    const auto tf = diagonal_trace(f), tg = diagonal_trace(g), tfg = diagonal_trace(fg);
    for (std::size_t i = 0; i < tfg.values.size(); ++i) EXPECT_EQ(tfg.values[i], tf.values[i] * tg.values[i]);
}

TEST(Restrict, SubspaceSection) {
    const GridSpec s{2, 1, 32, 4.0};
    auto u = [](double x) { return std::exp(-x * x); };
    auto v = [](double y) { return 1.0 / (1.0 + y * y); };
    const auto f = sample(s, [&](auto x) { return u(x[0]) * v(x[1]); });
    EXPECT_EQ(subspace_restrict(f, 2).values, f.values);
    const auto r = subspace_restrict(f, 1);
    ASSERT_EQ(r.spec.n, 1);
    const double y0 = s.node(s.N / 2);
    EXPECT_DOUBLE_EQ(y0, s.h() / 2);
    for (std::size_t a = 0; a < s.N; ++a) EXPECT_DOUBLE_EQ(r.values[a].real(), u(s.node(a)) * v(y0));
    // Gaussian: section equals the 1-D Gaussian times the offset factor e^{-π(h/2)²}.
    const auto gsec = subspace_restrict(sample(s, [](auto x) { return gauss(x); }), 1);
    for (std::size_t a = 0; a < s.N; ++a)
        EXPECT_NEAR(gsec.values[a].real(), std::exp(-pi * s.node(a) * s.node(a)) * std::exp(-pi * y0 * y0), 1e-15);
    EXPECT_THROW(subspace_restrict(f, 0), grid_error);
    EXPECT_THROW(subspace_restrict(f, 3), grid_error);
}

TEST(EpsteinZeta, OneDimensionMatchesHurwitz) {
    // Σ_{a∈Z+½}|a|^{-s} = 2ζ(s, ½) = 2(2^s - 1)ζ(s).
    for (double s : {0.2, 0.5, 0.9, -0.5, -1.5, -1.8}) {
        const double ref = 2 * (std::pow(2.0, s) - 1) * boost::math::zeta(s);
        EXPECT_NEAR(epstein_zeta_half(1, s), ref, 1e-12 * std::max(1.0, std::abs(ref))) << s;
    }
    EXPECT_EQ(epstein_zeta_half(2, 0.0), 0.0);
    EXPECT_EQ(epstein_zeta_half(2, -2.0), 0.0);
}

TEST(EpsteinZeta, TwoDimensionsDirectSumAboveAbscissa) {
    // For s > d the defining sum converges; compare with a brute-force partial sum
    // plus its integral tail estimate.
    const double s = 5.0;
    double direct = 0;
    const int R = 400;
    for (int i = -R; i < R; ++i)
        for (int j = -R; j < R; ++j) direct += std::pow(std::pow(i + 0.5, 2) + std::pow(j + 0.5, 2), -s / 2);
    direct += 2 * pi * std::pow(double(R), 2 - s) / (s - 2);
    EXPECT_NEAR(epstein_zeta_half(2, s), direct, 1e-8 * direct);
}

TEST(WeightedNorm, UnweightedGaussian) {
    const GridSpec s{1, 1, 128, 8.0};
    const auto f = sample(s, [](auto x) { return gauss(x); });
    EXPECT_NEAR(weighted_lq_norm(f, 0.0, 2.0), std::pow(2.0, -0.25), 1e-8);
}

TEST(WeightedNorm, ConstantFieldLOne) {
    for (int d : {1, 2}) {
        const GridSpec s{d, 1, 16, 3.0};
        GridField f{s, std::vector<cplx>(s.size(), 2.5), Space::physical};
        EXPECT_NEAR(weighted_lq_norm(f, 0.0, 1.0), std::pow(6.0, d) * 2.5, 1e-12);
    }
}

TEST(WeightedNorm, SingularWeightOneDim) {
    // ∫|x|^{-β} e^{-2πx²} dx = Γ((1-β)/2) (2π)^{-(1-β)/2}
    const GridSpec s{1, 1, 128, 8.0};
    const auto f = sample(s, [](auto x) { return gauss(x); });
    for (double beta : {0.25, 0.5, 0.8}) {
        const double ref = std::tgamma((1 - beta) / 2) * std::pow(2 * pi, -(1 - beta) / 2);
        const double got = std::pow(weighted_lq_norm(f, beta, 2.0), 2);
        EXPECT_NEAR(got, ref, 1e-4 * ref) << beta;
    }
    // The corrected rule converges much faster than the bare midpoint sum.
    const double beta = 0.5, ref = std::tgamma(0.25) * std::pow(2 * pi, -0.25);
    std::vector<double> g(s.N);
    double bare = 0;
    for (std::size_t a = 0; a < s.N; ++a) bare += s.h() * std::pow(std::abs(s.node(a)), -beta) * std::norm(f.values[a]);
    EXPECT_GT(std::abs(bare - ref), 1e3 * std::abs(std::pow(weighted_lq_norm(f, beta, 2.0), 2) - ref));
}

TEST(WeightedNorm, SingularWeightTwoDim) {
    // ∫_{R²}|x|^{-β} e^{-2π|x|²} = π Γ(1-β/2) (2π)^{-(1-β/2)}. The remaining error is
    // the first uncorrected term, O(h^{6-β}).
    for (double beta : {0.5, 1.0, 1.5}) {
        const double ref = pi * std::tgamma(1 - beta / 2) * std::pow(2 * pi, -(1 - beta / 2));
        std::vector<double> err;
        for (std::size_t N : {64u, 128u}) {
            const GridSpec s{2, 1, N, 6.0};
            const auto f = sample(s, [](auto x) { return gauss(x); });
            err.push_back(std::abs(std::pow(weighted_lq_norm(f, beta, 2.0), 2) - ref) / ref);
        }
        EXPECT_LT(err[1], 1e-4) << beta;
        EXPECT_GT(err[0] / err[1], std::pow(2.0, 6 - beta) * 0.7) << beta;
    }
}

TEST(WeightedNorm, Rejections) {
    const GridSpec s{1, 1, 16, 2.0};
    GridField f{s, std::vector<cplx>(s.size(), 1.0), Space::physical};
    EXPECT_THROW(weighted_lq_norm(f, 1.0, 2.0), divergence_error);
    EXPECT_THROW(weighted_lq_norm(f, 0.0, 0.5), grid_error);
    EXPECT_THROW(weighted_lq_norm(forward_transform(f), 0.0, 2.0), grid_error);
}

TEST(Export, BinaryRoundTripAndCsv) {
    const GridSpec s{1, 2, 16, 3.0};
    const auto f = random_smooth(s, 9);
    const std::string path = ::testing::TempDir() + "/field.bin";
    write_binary(f, path);
    const auto g = read_binary(path, 1);
    EXPECT_EQ(g.spec.m, 2);
    EXPECT_EQ(g.values, f.values);
    std::remove(path.c_str());
    std::ostringstream os;
    write_csv(diagonal_trace(f), os);
    const std::string out = os.str();
    EXPECT_EQ(out.substr(0, out.find('\n')), "x0,re,im");
    EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 17);
}
