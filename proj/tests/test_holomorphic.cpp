#include "fnv/holomorphic.hpp"

#include <gtest/gtest.h>

using namespace fnv;

TEST(ExpPoly, EvaluationAndDerivative) {
    // z e^{2z} has derivative (1 + 2z) e^{2z}
    const ExpPoly f{{{{0.0, 1.0}, 2.0}}};
    const Complex z(0.3, -0.7);
    EXPECT_LT(std::abs(f(z) - z * std::exp(2.0 * z)), 1e-14);
    EXPECT_LT(std::abs(f.derivative()(z) - (1.0 + 2.0 * z) * std::exp(2.0 * z)), 1e-13);
    EXPECT_TRUE(ExpPoly::constant(3.0).derivative().is_zero());
    EXPECT_TRUE((ExpPoly::monomial(2) + ExpPoly::monomial(2, -1.0)).is_zero());
}

TEST(Roots, PolynomialWithMultiplicities) {
    const auto r = polynomial_roots({-1.0, 0.0, 1.0});
    ASSERT_EQ(r.size(), 2u);
    EXPECT_NEAR(std::abs(r[0].z * r[1].z + 1.0), 0.0, 1e-12);
    const auto triple = polynomial_roots({0.0, 0.0, 0.0, 1.0});
    ASSERT_EQ(triple.size(), 1u);
    EXPECT_EQ(triple[0].multiplicity, 3);
    EXPECT_EQ(triple[0].z, Complex(0.0));
    const auto dbl = polynomial_roots({1.0, -2.0, 1.0});  // (z - 1)^2
    ASSERT_EQ(dbl.size(), 1u);
    EXPECT_EQ(dbl[0].multiplicity, 2);
    EXPECT_NEAR(std::abs(dbl[0].z - 1.0), 0.0, 1e-7);
    EXPECT_THROW(polynomial_roots({0.0}), Error);
}

TEST(Roots, ExponentialBranchesInDisc) {
    // e^z = 2: z = log 2 + 2 pi i k, seven of them satisfy |z| <= 20
    const ExpPoly f = ExpPoly::exponential(1.0) + ExpPoly::constant(-2.0);
    const auto r = roots_in_disc(f, 20.0);
    ASSERT_EQ(r.size(), 7u);
    for (const auto& x : r) EXPECT_LT(std::abs(f(x.z)), 1e-12);
    EXPECT_LT(std::abs(r[0].z - std::log(2.0)), 1e-14);
    EXPECT_THROW(roots_in_disc(ExpPoly::exponential(1.0) + ExpPoly::monomial(1), 5.0), Error);
}

TEST(Maps, CatalogAndPullback) {
    for (const auto& name : map_catalog_names()) EXPECT_EQ(map_catalog(name).target_dim(), 1) << name;
    const auto f = map_catalog("quadratic");
    const ExpPoly h = f.pullback(cvec({1.0, 1.0}));  // 1 + z^2 - 1 = z^2
    EXPECT_LT(std::abs(h(Complex(0.5, 0.5)) - Complex(0.5, 0.5) * Complex(0.5, 0.5)), 1e-15);
    EXPECT_THROW(map_catalog("nope"), Error);
    EXPECT_THROW(f.pullback(cvec({1.0})), Error);
}

TEST(Maps, CovectorParsing) {
    EXPECT_EQ(parse_covector("e1", 2), cvec({0.0, 1.0}));
    EXPECT_EQ(parse_covector("0.5,2", 2), cvec({0.5, 2.0}));
    EXPECT_THROW(parse_covector("e2", 2), Error);
    EXPECT_THROW(parse_covector("1,2,3", 2), Error);
}
