#include "fnv/quadrature.hpp"
#include "fnv/wirtinger.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fnv;

namespace {

ScalarField field1(std::function<Complex(Complex)> f, bool real = false) {
    ScalarField s;
    s.arity = 1;
    s.real_valued = real;
    s.eval = [f](Point p) { return f(p[0]); };
    return s;
}

ScalarField field2(std::function<Complex(Complex, Complex)> f, bool real = false) {
    ScalarField s;
    s.arity = 2;
    s.real_valued = real;
    s.eval = [f](Point p) { return f(p[0], p[1]); };
    return s;
}

std::vector<CVec> sample_points(int m, int count, double radius, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-radius, radius);
    std::vector<CVec> pts;
    for (int k = 0; k < count; ++k) {
        CVec p(m);
        for (int i = 0; i < m; ++i) p(i) = Complex(u(gen), u(gen));
        pts.push_back(p);
    }
    return pts;
}

} // namespace

TEST(Jet2, SquareIsHolomorphic) {
    auto f = field1([](Complex z) { return z * z; });
    auto j = jet2(f, cvec({1.0}));
    EXPECT_NEAR(std::abs(j.d(0) - 2.0), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(j.dbar(0)), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(j.dd(0, 0) - 2.0), 0.0, 1e-6);
    EXPECT_NEAR(std::abs(j.ddbar(0, 0)), 0.0, 1e-6);
}

TEST(Jet2, SquaredModulusHasFlatLeviForm) {
    auto f = field1([](Complex z) { return std::norm(z); }, true);
    for (const auto& p : sample_points(1, 10, 5.0, 3)) {
        auto j = jet2(f, p);
        EXPECT_NEAR(std::abs(j.ddbar(0, 0) - 1.0), 0.0, 1e-6);
        EXPECT_NEAR(std::abs(j.dd(0, 0)), 0.0, 1e-6);
        EXPECT_NEAR(std::abs(j.d(0) - std::conj(p(0))), 0.0, 1e-8);
    }
}

TEST(Jet2, FubiniStudyPotentialAtOrigin) {
    auto f = field1([](Complex z) { return std::log(1.0 + std::norm(z)); }, true);
    auto j = jet2(f, cvec({0.0}));
    EXPECT_NEAR(j.ddbar(0, 0).real(), 1.0, 1e-7);
    EXPECT_NEAR(j.ddbar(0, 0).imag(), 0.0, 1e-12);
}

TEST(Jet2, MatchesAnalyticHessianInTwoVariables) {
    // u = |z1|^2 |z2|^2 + Re(z1^2 zbar2)
    auto f = field2([](Complex a, Complex b) { return std::norm(a) * std::norm(b) + (a * a * std::conj(b)).real(); }, true);
    for (const auto& p : sample_points(2, 10, 2.0, 5)) {
        const Complex a = p(0), b = p(1);
        auto j = jet2(f, p);
        CMat expect(2, 2);
        // d/dz_j dbar_k
        expect(0, 0) = std::norm(b);
        expect(0, 1) = std::conj(a) * b + a;
        expect(1, 0) = a * std::conj(b) + std::conj(a);
        expect(1, 1) = std::norm(a);
        EXPECT_LT((j.ddbar - expect).norm(), 1e-6 * (1.0 + expect.norm()));
        CMat dd(2, 2);
        dd << std::conj(b), std::conj(a) * std::conj(b), std::conj(a) * std::conj(b), 0.0;
        EXPECT_LT((j.dd - dd).norm(), 1e-6 * (1.0 + dd.norm()));
    }
}

TEST(Jet2, StencilOutsideDomainIsReported) {
    auto f = field1([](Complex z) { return std::log(std::norm(z)); }, true);
    f.domain_guard = [](Point p) { return std::abs(p[0]) > 0.5; };
    try {
        jet2(f, cvec({0.5 + 1e-5}));
        FAIL() << "expected StencilOutsideDomain";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::StencilOutsideDomain);
    }
}

TEST(Jet2, NonFiniteValuesAreReported) {
    auto f = field1([](Complex z) { return z.real() > 0.9995 ? Complex(NAN, 0.0) : z; });
    try {
        jet2(f, cvec({1.0}));
        FAIL() << "expected NonFinite";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonFinite);
    }
}

TEST(Jet2, GuardIsConsultedBeforeEvaluation) {
    bool called_outside = false;
    auto f = field1([&](Complex z) {
        if (z.real() < 0.0) called_outside = true;
        return z;
    });
    f.domain_guard = [](Point p) { return p[0].real() >= 0.0; };
    EXPECT_THROW(jet2(f, cvec({0.0})), Error);
    EXPECT_FALSE(called_outside);
}

TEST(Jet2, HolomorphicFieldsHaveVanishingAntiholomorphicPart) {
    std::vector<ScalarField> holo = {
        field2([](Complex a, Complex b) { return std::exp(a) * b; }),
        field2([](Complex a, Complex b) { return a * a * a - 2.0 * a * b + 1.0; }),
        field2([](Complex a, Complex b) { return std::sin(a + kI * b); }),
    };
    for (const auto& f : holo)
        for (const auto& p : sample_points(2, 20, 1.5, 7)) {
            auto j = jet2(f, p);
            EXPECT_LE(j.dbar.norm(), 1e-6 * (1.0 + j.d.norm()));
            EXPECT_LE(j.ddbar.norm(), 1e-6 * (1.0 + j.dd.norm()));
        }
}

TEST(Jet2, RealFieldsHaveHermitianLeviForm) {
    std::vector<ScalarField> real = {
        field2([](Complex a, Complex b) { return std::log(1.0 + std::norm(a) + std::norm(b)); }, true),
        field2([](Complex a, Complex b) { return std::exp(std::norm(a)) * (2.0 + std::cos(b.real())); }, true),
        field2([](Complex a, Complex b) { return std::norm(a * b + 1.0) + (a * std::conj(b)).real(); }, true),
    };
    for (const auto& f : real)
        for (const auto& p : sample_points(2, 20, 1.5, 11)) {
            auto j = jet2(f, p);
            EXPECT_LE(hermitian_defect(j.ddbar), 1e-6 * (1.0 + j.ddbar.norm()));
            EXPECT_LE((j.dbar - j.d.conjugate()).norm(), 1e-9 * (1.0 + j.d.norm()));
        }
}

TEST(Jet2, RichardsonEstimateIsConsistentUnderHalving) {
    auto f = field2([](Complex a, Complex b) { return std::log(1.0 + std::norm(a) + 2.0 * std::norm(b * b)); }, true);
    for (const auto& p : sample_points(2, 10, 1.0, 13)) {
        JetOptions coarse;
        coarse.step = 1e-2;
        JetOptions fine = coarse;
        fine.step = 5e-3;
        auto jc = jet2(f, p, coarse);
        auto jf = jet2(f, p, fine);
        for (int a = 0; a < 2; ++a) {
            EXPECT_LE(std::abs(jc.d(a) - jf.d(a)), 5.0 * jc.d_err(a));
            for (int b = 0; b < 2; ++b) {
                EXPECT_LE(std::abs(jc.ddbar(a, b) - jf.ddbar(a, b)), 5.0 * jc.ddbar_err(a, b));
                EXPECT_LE(std::abs(jc.dd(a, b) - jf.dd(a, b)), 5.0 * jc.dd_err(a, b));
            }
        }
    }
}

TEST(Jet2, HigherOrderStencilsAgree) {
    auto f = field1([](Complex z) { return std::exp(std::norm(z)) * std::cos(z.imag()); }, true);
    const CVec p = cvec({Complex(0.3, -0.7)});
    JetOptions o2, o4, o6;
    o2.order = 2;
    o4.order = 4;
    o6.order = 6;
    o2.step = 1e-4;
    auto j2 = jet2(f, p, o2), j4 = jet2(f, p, o4), j6 = jet2(f, p, o6);
    EXPECT_LT(std::abs(j4.ddbar(0, 0) - j6.ddbar(0, 0)), 1e-7);
    EXPECT_LT(std::abs(j2.ddbar(0, 0) - j6.ddbar(0, 0)), 1e-5);
}

TEST(Ddc, SquaredModulusCoefficient) {
    auto f = field1([](Complex z) { return std::norm(z); }, true);
    Form11 w = ddc(f, cvec({Complex(0.2, 0.1)}));
    EXPECT_NEAR(w.coefficient()(0, 0).real(), 1.0 / (2.0 * kPi), 1e-8);
    // the area form of C has density 1/pi under this normalization
    EXPECT_NEAR(w.volume_density(), 1.0 / kPi, 1e-8);
}

TEST(Ddc, LogModulusIsPluriharmonicAwayFromOrigin) {
    auto f = field1([](Complex z) { return std::log(std::norm(z)); }, true);
    for (const auto& p : sample_points(1, 10, 3.0, 17)) {
        if (std::abs(p(0)) < 0.3) continue;
        EXPECT_LT(ddc(f, p).H.norm(), 1e-6);
    }
}

TEST(Ddc, FubiniStudyPotentialHasUnitMass) {
    // integral over C of ddc log(1 + |z|^2), with r = tan(s)
    auto f = field1([](Complex z) { return std::log(1.0 + std::norm(z)); }, true);
    const Rule1D rule = gauss_legendre(60, 0.0, 0.5 * kPi);
    double mass = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double r = std::tan(rule.x[i]);
        const double sec2 = 1.0 + r * r;
        const Form11 w = ddc(f, cvec({r}));
        mass += rule.w[i] * w.volume_density() * 2.0 * kPi * r * sec2;
    }
    EXPECT_NEAR(mass, 1.0, 1e-4);
}

TEST(Form11, RealEvaluationMatchesDensity) {
    const Form11 w = Form11::euclidean(1);
    // omega(d/dx, d/dy) equals the Lebesgue density
    EXPECT_NEAR(w.evaluate(cvec({1.0}), cvec({kI})), w.volume_density(), 1e-14);
    EXPECT_NEAR(w.evaluate(cvec({kI}), cvec({1.0})), -w.volume_density(), 1e-14);
}

TEST(Form11, GradientSquareMatchesWedge) {
    // du ^ d^c u (X, Y) = du(X) d^c u(Y) - du(Y) d^c u(X)
    const CVec du = cvec({Complex(0.4, -1.1), Complex(2.0, 0.3)});
    const Form11 w = Form11::gradient_square(du);
    const CVec x = cvec({Complex(0.3, 0.2), Complex(-1.0, 0.5)});
    const CVec y = cvec({Complex(1.1, -0.4), Complex(0.2, 0.9)});
    const double lhs = w.evaluate(x, y);
    const double rhs = d_evaluate(du, x) * dc_evaluate(du, y) - d_evaluate(du, y) * dc_evaluate(du, x);
    EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(LeviMinEig, Signatures) {
    auto sq = field2([](Complex a, Complex b) { return std::norm(a) + std::norm(b); }, true);
    auto mixed = field2([](Complex a, Complex b) { return std::norm(a) - std::norm(b); }, true);
    const CVec p = cvec({Complex(0.5, 0.1), Complex(-0.3, 0.2)});
    EXPECT_NEAR(levi_min_eig(sq, p), 1.0, 1e-7);
    EXPECT_NEAR(levi_min_eig(mixed, p), -1.0, 1e-7);
}

TEST(Quadrature, GaussLegendreIntegratesPolynomialsExactly) {
    const Rule1D r = gauss_legendre(7, -1.0, 2.0);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.w[i] * std::pow(r.x[i], 12);
    EXPECT_NEAR(s, (std::pow(2.0, 13) + 1.0) / 13.0, 1e-10);
}

TEST(Quadrature, ShellNodesLieOnTheSphere) {
    for (int n : {1, 2})
        for (ShellRule rule : {ShellRule::Trapezoid, ShellRule::MonteCarlo, ShellRule::Hopf}) {
            if (n == 1 && rule == ShellRule::Hopf) continue;
            const ShellNodes s = shell_nodes(n, {7.5, 16, rule, 3});
            double wsum = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                EXPECT_LE(std::abs(s.z[i].norm() - 7.5), 1e-12 * 7.5);
                wsum += s.w[i];
            }
            EXPECT_NEAR(wsum, 1.0, 1e-12);
        }
}

TEST(Quadrature, StereographicRuleHasFubiniStudyMassOne) {
    const PlaneRule r = stereographic_rule(64, 8);
    double s = 0.0;
    for (std::size_t i = 0; i < r.w.size(); ++i) s += r.weight[i] / (kPi * std::pow(1.0 + std::norm(r.w[i]), 2));
    EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Quadrature, CumulativeSimpsonOnGeometricGrid) {
    std::vector<double> keep{3.0};
    auto grid = geometric_grid(0.5, 10.0, 64, keep);
    EXPECT_NE(std::find(grid.begin(), grid.end(), 3.0), grid.end());
    std::vector<double> u, y;
    for (double t : grid) {
        u.push_back(std::log(t));
        y.push_back(t * t);  // integral of t^2 d(log t) = t^2 / 2
    }
    auto c = cumulative_simpson(u, y);
    for (std::size_t i = 0; i < grid.size(); ++i)
        EXPECT_NEAR(c[i], 0.5 * (grid[i] * grid[i] - 0.25), 1e-6 * (1.0 + grid[i] * grid[i]));
}
