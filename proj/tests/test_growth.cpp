#include "fnv/growth.hpp"

#include <gtest/gtest.h>

using namespace fnv;

namespace {

const std::vector<double> kRadii{2.0, 10.0, 50.0};

double t_affine(double r, double s) { return 0.5 * std::log((1.0 + r * r) / (1.0 + s * s)); }

double t_cubic(double r, double s) { return 0.5 * std::log((1.0 + std::pow(r, 6)) / (1.0 + std::pow(s, 6))); }

// Circle mean of log ||(1, e^z)|| minus its value at 0, a Jensen-type oracle.
double t_exponential(double r) {
    const int m = 1 << 16;
    std::vector<double> xs;
    for (int j = 0; j < m; ++j) {
        const double x = r * std::cos(2.0 * kPi * j / m);
        xs.push_back(std::max(x, 0.0) + 0.5 * std::log1p(std::exp(-2.0 * std::abs(x))));
    }
    return pairwise_sum(xs) / m - 0.5 * std::log(2.0);
}

bool nondecreasing(const GrowthCurve& c) {
    for (std::size_t i = 1; i < c.size(); ++i)
        if (c.values[i] < c.values[i - 1] - c.err[i] - c.err[i - 1] - 1e-12) return false;
    return true;
}

}  // namespace

TEST(Characteristic, AffineIdentityClosedForm) {
    const auto f = map_catalog("affine_identity");
    for (double s : {0.0, 0.5}) {
        const auto T = characteristic(f, kRadii, s);
        for (std::size_t i = 0; i < kRadii.size(); ++i) {
            const double e = std::abs(T.values[i] - t_affine(kRadii[i], s));
            EXPECT_LT(e, 1e-8) << "r=" << kRadii[i];
            EXPECT_LT(T.err[i], 1e-5);
            EXPECT_GE(T.err[i], e);
        }
    }
}

TEST(Characteristic, CubicClosedFormAndConstantMap) {
    const auto T = characteristic(map_catalog("cubic"), kRadii, 0.5);
    for (std::size_t i = 0; i < kRadii.size(); ++i) EXPECT_NEAR(T.values[i], t_cubic(kRadii[i], 0.5), 1e-7);
    const auto C = characteristic(map_catalog("constant"), kRadii, 0.5);
    for (double v : C.values) EXPECT_EQ(v, 0.0);
}

TEST(Characteristic, PullbackDensityMatchesFiniteDifferences) {
    const auto f = map_catalog("quadratic");
    ScalarField u;
    u.arity = 1;
    u.real_valued = true;
    u.eval = [&](Point p) { return Complex(std::log(f(p[0]).squaredNorm())); };
    for (Complex z : {Complex(0.3, 0.4), Complex(-1.2, 0.7), Complex(2.0, -1.0)}) {
        const double fd = ddc(u, cvec({z})).H(0, 0).real();
        EXPECT_NEAR(pullback_fs_density(f, z), fd, 1e-7 * std::max(1.0, std::abs(fd)));
    }
}

TEST(Characteristic, ExponentialMapAgainstCircleMeanOracle) {
    const std::vector<double> grid{5.0, 10.0, 20.0};
    const auto T = characteristic(map_catalog("exponential"), grid, 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(T.values[i], t_exponential(grid[i]), 1e-6);
    // the r / pi asymptote is approached from below by about (log 2) / 2
    EXPECT_NEAR(T.values[2] - 20.0 / kPi, -0.5 * std::log(2.0) + kPi / 480.0, 1e-4);
}

TEST(Characteristic, MonotoneInRadius) {
    const auto grid = geometric_grid(0.6, 40.0, 8);
    for (const char* name : {"affine_identity", "cubic", "quadratic", "exponential"})
        EXPECT_TRUE(nondecreasing(characteristic(map_catalog(name), grid, 0.5))) << name;
}

TEST(Counting, PointFormula) {
    const auto f = map_catalog("quadratic");
    const std::vector<double> g{4.0};
    EXPECT_NEAR(counting(f, cvec({0.0, 1.0}), g, 0.5).values[0], 2.0 * std::log(4.0), 1e-12);
    EXPECT_EQ(counting(std::vector<Root>{}, g, 0.5).values[0], 0.0);
    // (1; z^3) against e1 has a triple zero at the origin
    EXPECT_NEAR(counting(map_catalog("cubic"), cvec({0.0, 1.0}), g, 0.5).values[0], 3.0 * std::log(8.0), 1e-12);
    EXPECT_THROW(counting(map_catalog("cubic"), cvec({0.0, 1.0}), g, 0.0), Error);
}

TEST(Proximity, ClosedFormAndSign) {
    const auto f = map_catalog("affine_identity");
    const auto m = proximity(f, cvec({0.0, 1.0}), kRadii);
    for (std::size_t i = 0; i < kRadii.size(); ++i) {
        const double r = kRadii[i];
        EXPECT_NEAR(m.values[i], 0.5 * std::log(1.0 + r * r) - std::log(r), 1e-10);
    }
    const auto aligned = proximity(map_catalog("constant"), cvec({1.0, 2.0}), kRadii);
    for (double v : aligned.values) EXPECT_NEAR(v, 0.0, 1e-14);
    for (const char* name : {"cubic", "quadratic", "exponential"})
        for (const CVec& sigma : {cvec({1.0, 0.0}), cvec({0.6, -0.8}), cvec({Complex(0.3, 1.0), 2.0})})
            for (double v : proximity(map_catalog(name), sigma, kRadii).values) EXPECT_GE(v, -1e-8) << name;
}

TEST(Proximity, NodeOnZeroSetIsJittered) {
    // sigma o f = z - 2 vanishes at the node z = 2 of the unrotated grid
    const auto m = proximity(map_catalog("affine_identity"), cvec({-2.0, 1.0}), std::vector<double>{2.0});
    EXPECT_TRUE(std::isfinite(m.values[0]));
}

TEST(FirstMainTheorem, ClosedFormBalance) {
    for (double r : kRadii) {
        const auto b = fmt_residual(map_catalog("affine_identity"), cvec({0.0, 1.0}), r, 0.5);
        EXPECT_LE(b.residual, 1e-3);
        EXPECT_NEAR(b.T, t_affine(r, 0.5), 1e-4);
    }
    EXPECT_LE(fmt_residual(map_catalog("cubic"), cvec({0.0, 1.0}), 10.0, 0.5).residual, 1e-3);
    const auto c = fmt_residual(map_catalog("constant"), cvec({1.0, 0.0}), 10.0, 0.5);
    EXPECT_EQ(c.T, 0.0);
    EXPECT_EQ(c.N, 0.0);
    EXPECT_NEAR(c.m_r - c.m_s, 0.0, 1e-14);
}

TEST(FirstMainTheorem, ResidualWithinErrorEstimateOnCatalog) {
    for (const char* name : {"affine_identity", "cubic", "quadratic", "exponential"})
        for (const CVec& sigma : {cvec({0.0, 1.0}), cvec({1.0, -1.0}), cvec({Complex(0.2, 0.5), 1.0})}) {
            const auto b = fmt_residual(map_catalog(name), sigma, 12.0, 0.5);
            // the floor covers rounding in sums of a few hundred thousand terms
            EXPECT_LE(b.residual, std::max(3.0 * b.err, 1e-9)) << name << " err " << b.err;
            // Nevanlinna inequality with C = m(s)
            EXPECT_LE(b.N, b.T + b.m_s + 1e-9) << name;
        }
}

TEST(Crofton, AffineIdentityWithinInterval) {
    const auto res = crofton_mc(map_catalog("affine_identity"), 1, 10.0, 0.5, 2000, 11);
    EXPECT_NEAR(res.lhs, t_affine(10.0, 0.5), 1e-6);
    EXPECT_TRUE(res.contains(res.lhs)) << res.ci_lo << " " << res.ci_hi;
    EXPECT_EQ(res.discarded, 0);
}

TEST(Crofton, CubicMeanWithinTwoPercent) {
    const auto res = crofton_mc(map_catalog("cubic"), 1, 10.0, 0.5, 2000, 5);
    EXPECT_LE(std::abs(res.mean - t_cubic(10.0, 0.5)), 0.02 * t_cubic(10.0, 0.5));
}

TEST(Crofton, DegenerateMapRejected) {
    try {
        crofton_mc(map_catalog("constant"), 1, 10.0, 0.5, 100, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateMap);
    }
    EXPECT_THROW(crofton_mc(map_catalog("cubic"), 2, 10.0, 0.5, 100, 1), Error);
}

TEST(MaxModulus, MonomialsAndExponential) {
    const std::vector<double> grid{1.5, 3.0, 7.0};
    const auto m3 = max_modulus([](Complex z) { return z * z * z; }, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(m3.values[i], 3.0 * std::log(grid[i]), 1e-12);
    const auto me = max_modulus([](Complex z) { return std::exp(z); }, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(me.values[i], grid[i], 1e-12);
}

TEST(OrderFit, ConstantPowerAndErrors) {
    GrowthCurve c;
    c.r = geometric_grid(1.0, 100.0, 4);
    c.values.assign(c.r.size(), 2.0);
    c.err.assign(c.r.size(), 0.0);
    EXPECT_NEAR(order_fit(c, 1.0, 100.0).lambda_hat, 0.0, 1e-12);
    for (std::size_t i = 0; i < c.size(); ++i) c.values[i] = 3.0 * std::pow(c.r[i], 1.5);
    const auto o = order_fit(c, 1.0, 100.0);
    EXPECT_NEAR(o.lambda_hat, 1.5, 1e-12);
    EXPECT_NEAR(o.kappa_hat, 3.0, 1e-10);
    EXPECT_LT(o.residual, 1e-12);
    for (std::size_t i = 0; i < c.size(); ++i) c.values[i] = 1.0 / c.r[i];
    EXPECT_EQ(order_fit(c, 1.0, 100.0).lambda_hat, 0.0);
    try {
        order_fit(c, 1.0, 2.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::WindowTooSmall);
    }
}

TEST(OrderFit, ExponentialMapOrderAndRefinement) {
    const auto f = map_catalog("exponential");
    const auto coarse = order_fit(characteristic(f, geometric_grid(5.0, 30.0, 8), 0.0), 5.0, 30.0);
    const auto fine = order_fit(characteristic(f, geometric_grid(5.0, 30.0, 32), 0.0), 5.0, 30.0);
    EXPECT_GT(coarse.lambda_hat, 0.9);
    EXPECT_LT(coarse.lambda_hat, 1.2);
    EXPECT_NEAR(coarse.lambda_hat, fine.lambda_hat, 0.05);
    const auto M = max_modulus([](Complex z) { return std::exp(z); }, geometric_grid(5.0, 30.0, 8));
    EXPECT_NEAR(order_fit(M, 5.0, 30.0).lambda_hat, 1.0, 1e-9);
}

TEST(OrderFit, PolynomialMapSlopeDecaysLikeInverseLog) {
    const auto T = characteristic(map_catalog("cubic"), geometric_grid(100.0, 1e4, 8), 0.5);
    const auto o = order_fit(T, 100.0, 1e4);
    // T is about 3 log r, so the local slope is 1 / log r
    EXPECT_GT(o.lambda_hat, 1.0 / std::log(1e4));
    EXPECT_LT(o.lambda_hat, 1.0 / std::log(100.0));
}

TEST(SphereMeasure, IsOneInEveryDimension) {
    for (double r : {0.3, 1.0, 17.0}) EXPECT_NEAR(sphere_measure_check(1, r, 16), 1.0, 1e-12);
    EXPECT_NEAR(sphere_measure_check(2, 1.0, 20000), 1.0, 1e-10);
    EXPECT_NEAR(sphere_measure_check(2, 10.0, 20000), sphere_measure_check(2, 1.0, 20000), 1e-10);
    EXPECT_NEAR(sphere_measure_check(2, 3.0, 4096, ShellRule::Hopf), 1.0, 1e-10);
    EXPECT_NEAR(sphere_measure_check(3, 2.0, 5000), 1.0, 1e-10);
}

// ---------------------------------------------------------------------------
// P(E) over C with the flat metric, where everything has a closed form.

namespace {

BaseModel curve_base() { return BaseModel{1, 4.0, kDefaultSigmaFloor}; }

double half_rho_power_gain(const BaseModel& b, double r, double s) {
    return 0.5 * (std::pow(b.rho(cvec({r})), 2.0) - std::pow(b.rho(cvec({s})), 2.0));
}

PEOptions small_budget() {
    PEOptions o;
    o.angular = 8;
    o.fiber_polar = 6;
    o.fiber_azimuth = 6;
    return o;
}

}  // namespace

TEST(VolumePE, FlatMetricClosedForm) {
    const auto base = curve_base();
    const std::vector<double> grid{1.0, 3.0, 10.0, 30.0};
    const auto res = volume_growth_pe(finsler_catalog("flat"), base, 1.0, 2.0, grid, small_budget());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double exact = flat_volume_closed_form(base, 1.0, 2.0, grid[i]);
        EXPECT_LT(std::abs(res.vol.values[i] - exact) / exact, 1e-3) << grid[i];
    }
    EXPECT_TRUE(nondecreasing(res.vol));
}

TEST(VolumePE, SectionIntegralConverges) {
    const auto base = curve_base();
    const auto sigma = section_catalog("linear");
    const std::vector<double> grid{0.5, 1.0, 2.0, 4.0, 8.0};
    const auto res = volume_growth_pe(finsler_catalog("quartic_cross"), base, 1.0, 2.0, grid, small_budget(), &sigma);
    ASSERT_TRUE(res.section_integral.has_value());
    const auto& I = res.section_integral->values;
    EXPECT_GT(I[0], 0.0);
    EXPECT_LT(std::abs(I[4] - I[3]), 1e-6 * I[4]);
    EXPECT_TRUE(nondecreasing(res.vol));
}

TEST(SectionZeros, FlatGraphsHaveClosedForms) {
    const auto base = curve_base();
    const auto F = finsler_catalog("flat");
    const std::vector<double> grid{1.0, 2.0, 5.0, 20.0};
    const double s = 0.5;
    const auto c = section_zero_growth(F, section_catalog("constant"), base, 1.0, 2.0, grid, s, small_budget());
    const auto l = section_zero_growth(F, section_catalog("linear"), base, 1.0, 2.0, grid, s, small_budget());
    const auto f1 = section_zero_growth(F, section_catalog("fiber_at_one"), base, 1.0, 2.0, grid, s, small_budget());
    ASSERT_EQ(f1.fibers.size(), 1u);
    EXPECT_NEAR(f1.fibers[0].mass, 1.0, 1e-4);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double r = grid[i];
        const double kappa_part = half_rho_power_gain(base, r, s);
        EXPECT_LT(std::abs(c.N.values[i] - kappa_part), 1e-6 * kappa_part) << r;
        const double graph = kappa_part + t_affine(r, s);
        EXPECT_LT(std::abs(l.N.values[i] - graph), 1e-6 * graph) << r;
        EXPECT_LT(std::abs(f1.N.values[i] - graph - std::log(r / std::max(s, 1.0))), 1e-4 * graph) << r;
    }
}

TEST(SectionZeros, CurvedMetricGivesFiniteOrder) {
    const auto grid = geometric_grid(1.0, 100.0, 4);
    const auto z = section_zero_growth(finsler_catalog("quartic_cross_z"), section_catalog("linear"), curve_base(), 1.0,
                                       2.0, grid, 0.5, small_budget());
    EXPECT_TRUE(nondecreasing(z.N));
    const auto o = order_fit(z.N, 1.0, 100.0);
    EXPECT_TRUE(std::isfinite(o.lambda_hat));
    EXPECT_THROW(section_zero_growth(finsler_catalog("flat"), DualSection{ExpPoly{}, ExpPoly{}, "zero"}, curve_base(),
                                     1.0, 2.0, grid, 0.5),
                 Error);
}

TEST(SectionZeros, PreimageOfPointDivisorMatchesBaseCounting) {
    const auto pts = pullback_divisor(map_catalog("quadratic"), cvec({0.0, 1.0}), 50.0);
    const auto grid = geometric_grid(2.0, 50.0, 8);
    const auto Z = counting(pts, grid, 0.5);
    const auto Zt = preimage_counting(finsler_catalog("quartic_cross_z"), pts, grid, 0.5, small_budget());
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(Zt.values[i], Z.values[i], 1e-4 * Z.values[i]);
    EXPECT_NEAR(order_fit(Z, 2.0, 50.0).lambda_hat, order_fit(Zt, 2.0, 50.0).lambda_hat, 1e-3);
}
