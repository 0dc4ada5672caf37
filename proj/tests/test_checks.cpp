#include "fnv/checks.hpp"

#include <gtest/gtest.h>

using namespace fnv;

TEST(Format, ComplexAndVector) {
    EXPECT_EQ(format_complex({1.5, -2.0}), "1.5-2i");
    EXPECT_EQ(format_g(1e-7), "1e-07");
    CVec v(2);
    v << Complex(0, 1), Complex(2, 0);
    EXPECT_EQ(format_cvec(v), "(0+1i, 2+0i)");
}

TEST(Tracker, KeepsWorstAndFailsOnNan) {
    detail::Tracker t("x", "tag", 1e-3);
    t.note(1e-5, "a");
    t.note(1e-4, "b");
    t.note(1e-6, "c");
    EXPECT_TRUE(t.rec.pass);
    EXPECT_EQ(t.rec.witness, "b");
    t.note(std::nan(""), "d");
    EXPECT_FALSE(t.rec.pass);
    EXPECT_EQ(t.rec.witness, "d");
}

TEST(IdentitySuite, FlatPassesOnSmallBudget) {
    CheckBudget b;
    b.base_probes = 3;
    b.fiber_probes = 2;
    b.direct_points = 2;
    const auto rs = identity_suite({"flat"}, b);
    ASSERT_FALSE(rs.empty());
    for (const auto& r : rs) EXPECT_TRUE(r.pass) << r.name << " " << r.worst << " at " << r.witness;
}

TEST(BaseSpaceSuite, DefaultModelPasses) {
    for (const auto& r : base_space_suite(BaseModel{1, 4.0})) EXPECT_TRUE(r.pass) << r.name << " " << r.detail;
}

TEST(SphereSuite, CircleMassIsExact) {
    for (const auto& r : sphere_suite(1000)) {
        EXPECT_TRUE(r.pass) << r.name;
        if (r.tol <= 1e-12) EXPECT_LE(r.worst, 1e-12);
    }
}

TEST(TuneKappa, FlatNeedsNoScaling) {
    const auto zs = sample_points(1, 8, 1e-3, 3.0, 5);
    const auto vs = finsler_fiber_probes(2, 3, 6);
    const KappaTuning k = tune_kappa(finsler_catalog("flat"), BaseModel{1, 4.0}, 2.0, zs, vs);
    EXPECT_TRUE(k.found);
    EXPECT_EQ(k.kappa, 1.0);
}
