#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "ehrlab/spaces.hpp"
#include "gen.hpp"
#include "oracles.hpp"

using namespace ehrlab;

TEST(Element, RejectsNonfiniteAndEmpty) {
    EXPECT_THROW(Element(std::vector<double>{}), Error);
    EXPECT_THROW(Element({1.0, std::numeric_limits<double>::quiet_NaN()}), Error);
    EXPECT_THROW(Element({std::numeric_limits<double>::infinity()}), Error);
    try {
        Element({1.0, std::nan("")});
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invalid_entry);
    }
}

TEST(Element, ArithmeticZeroPadsShorterOperand) {
    const Element a({1.0, 2.0});
    const Element b({1.0, 1.0, 1.0});
    const Element s = a + b;
    ASSERT_EQ(s.dim(), 3u);
    EXPECT_EQ(s.vec(), (std::vector<double>{2.0, 3.0, 1.0}));
    EXPECT_EQ((a - b).vec(), (std::vector<double>{0.0, 1.0, -1.0}));
    EXPECT_EQ((2.0 * a).vec(), (std::vector<double>{2.0, 4.0}));
    EXPECT_EQ(Element::basis(2, 4).vec(), (std::vector<double>{0.0, 1.0, 0.0, 0.0}));
    EXPECT_THROW(Element::basis(5, 4), Error);
}

TEST(Norm, ClosedFormValues) {
    EXPECT_EQ(norm(NormSpec::lp(2), Element::zero(5)), 0.0);
    EXPECT_DOUBLE_EQ(norm(NormSpec::lp(2), Element({3.0, 4.0})), 5.0);
    EXPECT_DOUBLE_EQ(norm(NormSpec::lp(1), Element({1.0, -2.0, 3.0})), 6.0);
    EXPECT_DOUBLE_EQ(norm(NormSpec::lp(std::numeric_limits<double>::infinity()), Element({1.0, -7.0, 3.0})), 7.0);
    EXPECT_NEAR(norm(NormSpec::lp(3), Element({1.0, 2.0, 3.0})), std::cbrt(36.0), 1e-14);
    EXPECT_DOUBLE_EQ(norm(NormSpec::weighted_lp(2, {4.0, 1.0}), Element({1.0, 1.0})), std::sqrt(5.0));
}

TEST(Norm, SobolevHandEvaluated) {
    // h = 1/2, u = (1, 0): h (1 + 0) + (1/h) ((1-0)^2 + (0-1)^2 + (0-0)^2) = 0.5 + 4
    EXPECT_DOUBLE_EQ(norm(NormSpec::sobolev_h1(0.5), Element({1.0, 0.0})), std::sqrt(4.5));
}

TEST(Norm, SobolevMatchesDenseGram) {
    gen::Source src(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 1 + src.below(12);
        const double h = src.uniform(0.05, 2.0);
        const auto u = src.vector(d);
        EXPECT_NEAR(norm(NormSpec::sobolev_h1(h), u), oracle::h1_norm(u, h), 1e-12 * (1 + oracle::h1_norm(u, h)));
    }
}

TEST(Norm, FixedDimensionRejectsLongerVectors) {
    EXPECT_THROW(norm(NormSpec::lp(2, 3), Element({1, 2, 3, 4})), Error);
    EXPECT_DOUBLE_EQ(norm(NormSpec::lp(2, 4), Element({3, 4})), 5.0);
    EXPECT_THROW(NormSpec::lp(0.5), Error);
    EXPECT_THROW(NormSpec::weighted_lp(2, {1.0, 0.0}), Error);
    EXPECT_THROW(NormSpec::sobolev_h1(0.0), Error);
}

TEST(NormProperty, AxiomsOnRandomElements) {
    gen::Source src(12);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t d = 1 + src.below(10);
        const NormSpec ns = src.norm_spec(d);
        const Element u(src.vector(d)), v(src.vector(d));
        const double c = src.uniform(-5.0, 5.0);
        const double nu = norm(ns, u);
        EXPECT_GT(nu, 0.0);
        EXPECT_NEAR(norm(ns, c * u), std::abs(c) * nu, 1e-12 * (1.0 + std::abs(c) * nu)) << ns.label;
        EXPECT_LE(norm(ns, u + v), nu + norm(ns, v) + 1e-10) << ns.label;
        EXPECT_LE(norm(ns, Element::zero(d)), 1e-12);
    }
}

TEST(NormProperty, GradientMatchesFiniteDifferences) {
    gen::Source src(13);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t d = 1 + src.below(6);
        NormSpec ns = src.norm_spec(d);
        if (ns.kind != NormSpec::Kind::sobolev_h1 && (ns.p == 1.0 || std::isinf(ns.p))) continue;  // kinks
        const auto u = src.vector(d);
        std::vector<double> g(d);
        norm_with_gradient(ns, u, g);
        for (std::size_t i = 0; i < d; ++i) {
            auto up = u, dn = u;
            const double step = 1e-6;
            up[i] += step;
            dn[i] -= step;
            const double fd = (norm(ns, up) - norm(ns, dn)) / (2 * step);
            EXPECT_NEAR(g[i], fd, 1e-5 * (1 + std::abs(fd))) << ns.label << " i=" << i;
        }
    }
}

TEST(Pair, Examples) {
    EXPECT_EQ(pair(Functional{{1.0}}, Element::basis(1, 3)), 1.0);
    EXPECT_EQ(pair(Functional{{1.0}}, Element::basis(2, 3)), 0.0);
    EXPECT_EQ(pair(Functional{{0.5, 0.5}}, Element({1.0, 1.0})), 1.0);
}

TEST(DualNorm, Examples) {
    EXPECT_DOUBLE_EQ(dual_norm(NormSpec::lp(2), std::vector<double>{3.0, 4.0}), 5.0);
    EXPECT_DOUBLE_EQ(dual_norm(NormSpec::lp(1), std::vector<double>{1.0, -2.0}), 2.0);
    EXPECT_DOUBLE_EQ(dual_norm(NormSpec::lp(std::numeric_limits<double>::infinity()), std::vector<double>{1.0, -2.0}), 3.0);
    // e_1* on a 5-point grid against a dense solve of the Riesz system
    const std::vector<double> e1{1.0, 0.0, 0.0, 0.0, 0.0};
    EXPECT_NEAR(dual_norm(NormSpec::sobolev_h1(1.0 / 6.0), e1), oracle::h1_dual_norm(e1, 1.0 / 6.0), 1e-14);
    EXPECT_NEAR(dual_norm(NormSpec::sobolev_h1(1.0 / 6.0, 5), std::vector<double>{1.0}), oracle::h1_dual_norm(e1, 1.0 / 6.0),
                1e-14);
}

TEST(DualNormProperty, SobolevMatchesDenseSolve) {
    gen::Source src(14);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 1 + src.below(20);
        const double h = src.uniform(0.01, 3.0);
        const auto f = src.vector(d);
        const double ref = oracle::h1_dual_norm(f, h);
        EXPECT_NEAR(dual_norm(NormSpec::sobolev_h1(h), f), ref, 1e-11 * (1 + ref));
    }
}

TEST(DualNormProperty, HoelderInequality) {
    gen::Source src(15);
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t d = 1 + src.below(10);
        const NormSpec ns = src.norm_spec(d);
        const auto f = src.vector(d), u = src.vector(d);
        EXPECT_LE(std::abs(pair(f, u)), dual_norm(ns, f) * norm(ns, u) * (1 + 1e-12) + 1e-10) << ns.label;
    }
}

TEST(DualNormProperty, AttainedByNormGradient) {
    // For smooth norms grad||u|| is a unit dual functional with <grad, u> = ||u||.
    gen::Source src(16);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t d = 1 + src.below(8);
        NormSpec ns = src.norm_spec(d);
        if (ns.kind != NormSpec::Kind::sobolev_h1 && (ns.p == 1.0 || std::isinf(ns.p))) continue;
        const auto u = src.vector(d);
        std::vector<double> g(d);
        const double nu = norm_with_gradient(ns, u, g);
        EXPECT_NEAR(pair(g, u), nu, 1e-10 * (1 + nu));
        EXPECT_NEAR(dual_norm(ns, g), 1.0, 1e-9) << ns.label;
    }
}

TEST(Enumeration, CoordinateMode) {
    const DualFamily fam{FamilyMode::coordinate, NormSpec::lp(2), 16};
    const Functional f = enumerate_phi(fam, 3);
    EXPECT_EQ(f.coeffs, (std::vector<double>{0.0, 0.0, 1.0}));
    // normalized to dual norm one in weighted spaces
    const DualFamily w{FamilyMode::coordinate, NormSpec::weighted_lp(2, {4.0, 9.0}), 2};
    EXPECT_DOUBLE_EQ(dual_norm(w.space, enumerate_phi(w, 2)), 1.0);
    // beyond a fixed dimension the coordinate functional vanishes
    const DualFamily fixed{FamilyMode::coordinate, NormSpec::lp(2, 4), 4};
    const Functional z = enumerate_phi(fixed, 6);
    EXPECT_EQ(pair(z, Element({1, 1, 1, 1})), 0.0);
    EXPECT_THROW(enumerate_phi(fam, 0), Error);
}

TEST(Enumeration, DenseRationalFirstTerms) {
    const DualFamily fam{FamilyMode::dense_rational, NormSpec::lp(2), 16};
    const double r = 1.0 / std::sqrt(2.0);
    const std::vector<std::vector<double>> expected{
        {1.0}, {-1.0}, {0.5}, {-0.5}, {1.0}, {-1.0}, {1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {r, r}, {-r, r}, {0.0, -1.0}};
    for (std::size_t k = 1; k <= expected.size(); ++k) {
        const auto f = enumerate_phi(fam, k);
        ASSERT_EQ(f.coeffs.size(), expected[k - 1].size()) << "k=" << k;
        for (std::size_t i = 0; i < f.coeffs.size(); ++i) EXPECT_NEAR(f.coeffs[i], expected[k - 1][i], 1e-15) << "k=" << k;
    }
}

TEST(Enumeration, MatchesExplicitListing) {
    for (std::size_t dmax : {1u, 2u, 3u, 5u}) {
        const DualFamily fam{FamilyMode::dense_rational, NormSpec::lp(2), dmax};
        const auto ref = oracle::dyadic_prefix(6000, dmax);
        for (std::size_t k = 1; k <= ref.size(); ++k) {
            const auto f = enumerate_phi(fam, k);
            const auto& v = ref[k - 1];
            const double dn = std::max(1.0, std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0)));
            ASSERT_EQ(f.coeffs.size(), ref[k - 1].size()) << "k=" << k << " dmax=" << dmax;
            for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
                ASSERT_NEAR(f.coeffs[i], ref[k - 1][i] / dn, 1e-15) << "k=" << k << " dmax=" << dmax;
            }
        }
    }
}

TEST(Enumeration, DenseNearTarget) {
    const DualFamily fam{FamilyMode::dense_rational, NormSpec::lp(2), 2};
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t k = 1; k <= 100000; ++k) {
        const auto f = enumerate_phi(fam, k);
        const double a = f.coeffs[0] - 0.7, b = (f.coeffs.size() > 1 ? f.coeffs[1] : 0.0) - 0.7;
        best = std::min(best, std::hypot(a, b));
    }
    EXPECT_LT(best, 0.05);
}

TEST(EnumerationProperty, DualNormAtMostOneAndTransparent) {
    gen::Source src(17);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t d = 1 + src.below(6);
        DualFamily fam{src.below(2) ? FamilyMode::coordinate : FamilyMode::dense_rational, src.norm_spec(d), d};
        for (int i = 0; i < 50; ++i) {
            const std::uint64_t k = 1 + src.below(fam.mode == FamilyMode::coordinate ? d : 20000);
            const auto f = enumerate_phi(fam, k);
            EXPECT_LE(dual_norm(fam.space, f.coeffs, fam.space.dim ? 0 : d), 1.0 + 1e-12) << fam.space.label;
            EXPECT_EQ(enumerate_phi(fam, k).coeffs, f.coeffs);
        }
    }
}

TEST(Enumeration, HugeIndexStaysInRange) {
    const auto t = dyadic_term(std::uint64_t{1} << 50, 16);
    EXPECT_GE(t.support, 1u);
    EXPECT_LE(t.support, 16u);
    for (auto a : t.numerators) EXPECT_LE(std::abs(a), std::int64_t{1} << t.level);
    EXPECT_THROW(dyadic_term(0, 4), Error);
    EXPECT_THROW(dyadic_term(1, 0), Error);
}
