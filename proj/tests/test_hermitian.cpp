#include "fnv/hermitian.hpp"

#include <gtest/gtest.h>

using namespace fnv;

namespace {

std::vector<CVec> probes(int n, int count, unsigned seed) { return sample_points(n, count, 0.05, 3.0, seed); }

double curvature_scale(const CurvatureTensorH& K) {
    double s = 0.0;
    for (const auto& k : K.K) s += k.squaredNorm();
    return std::sqrt(s);
}

} // namespace

TEST(ChernConnection, FlatMetricHasNoConnection) {
    const auto h = hermitian_catalog("flat");
    for (const auto& g : chern_connection(h, cvec({Complex(0.3, 0.4)}))) EXPECT_LT(g.norm(), 1e-14);
}

TEST(ChernConnection, LineBundleClosedForm) {
    const auto h = hermitian_catalog("line_fs");
    for (const auto& z : probes(1, 10, 1)) {
        const auto g = chern_connection(h, z);
        const Complex expect = std::conj(z(0)) / (1.0 + std::norm(z(0)));
        EXPECT_LT(std::abs(g[0](0, 0) - expect), 1e-9);
    }
}

TEST(ChernConnection, DiagonalExponential) {
    const auto h = hermitian_catalog("diag_exp");
    const CVec z = cvec({Complex(0.7, -0.2)});
    const auto g = chern_connection(h, z);
    EXPECT_LT(std::abs(g[0](1, 1) - std::conj(z(0))), 1e-9);
    EXPECT_LT(std::abs(g[0](0, 0)), 1e-12);
    EXPECT_LT(std::abs(g[0](0, 1)), 1e-12);
    EXPECT_LT(std::abs(g[0](1, 0)), 1e-12);
}

TEST(Curvature, ClosedFormsForLineBundles) {
    const auto fs = hermitian_catalog("line_fs");
    const auto ex = hermitian_catalog("line_exp");
    for (const auto& z : probes(1, 10, 2)) {
        const double u = 1.0 + z.squaredNorm();
        EXPECT_NEAR(curvature_h(fs, z).at(0, 0)(0, 0).real(), -1.0 / (u * u), 1e-8);
        EXPECT_NEAR(curvature_h(ex, z).at(0, 0)(0, 0).real(), 1.0, 1e-7);
    }
    const auto flat = hermitian_catalog("flat");
    EXPECT_LT(curvature_h(flat, cvec({1.0})).at(0, 0).norm(), 1e-14);
}

TEST(Curvature, LineBundleFirstChernFormHasMassMinusOne) {
    // -ddc log(1 + |z|^2) integrates to -1; radial substitution r = tan(s)
    const auto fs = hermitian_catalog("line_fs");
    const Rule1D rule = gauss_legendre(60, 0.0, 0.5 * kPi);
    double mass = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double r = std::tan(rule.x[i]);
        mass += rule.w[i] * first_chern_form(fs, cvec({r})).volume_density() * 2.0 * kPi * r * (1.0 + r * r);
    }
    EXPECT_NEAR(mass, -1.0, 1e-4);
}

TEST(Curvature, EqualsDbarOfConnection) {
    for (const auto& name : hermitian_catalog_names())
        for (int n : {1, 2}) {
            const auto h = hermitian_catalog(name, n);
            for (const auto& z : probes(n, 8, 3)) {
                const auto K = curvature_h(h, z);
                const auto K2 = curvature_from_connection(h, z);
                const double scale = std::max(curvature_scale(K), 1e-3);
                for (std::size_t a = 0; a < K.K.size(); ++a)
                    EXPECT_LT((K.K[a] - K2.K[a]).norm(), 1e-5 * scale) << name << " n=" << n;
            }
        }
}

TEST(Curvature, PairingIsReal) {
    for (const auto& name : hermitian_catalog_names()) {
        const auto h = hermitian_catalog(name, 2);
        for (const auto& z : probes(2, 8, 4)) {
            const auto K = curvature_h(h, z);
            for (const auto& v : fiber_probes(h.rank, 4, 5))
                for (const auto& xi : sample_points(2, 3, 1.0, 1.0, 6)) {
                    const Complex p = curvature_pairing_h(K, xi, xi, v);
                    EXPECT_LE(std::abs(p.imag()), 1e-8 * std::max(std::abs(p), 1.0)) << name;
                }
        }
    }
}

TEST(Theta, RankOneIsFirstChernFormAndScaleInvariant) {
    const auto h = hermitian_catalog("line_exp_quartic");
    const CVec z = cvec({Complex(0.6, 0.3)});
    const Form11 c1 = first_chern_form(h, z);
    for (Complex v : {Complex(1.0), Complex(-2.0, 0.5), Complex(0.0, 1e-3)}) {
        const Form11 t = theta_of_v(h, z, cvec({v}));
        EXPECT_LT((t.H - c1.H).norm(), 1e-10 * c1.H.norm());
    }
    // closed form ddc |z|^4 = 4 |z|^2
    EXPECT_NEAR(c1.H(0, 0).real(), 4.0 * z.squaredNorm(), 1e-6);
    EXPECT_THROW(theta_of_v(h, z, cvec({0.0})), Error);
}

TEST(Theta, HomogeneousInTheFiberVector) {
    const auto h = hermitian_catalog("coupled", 2);
    const CVec z = cvec({Complex(0.4, 0.1), Complex(-0.3, 0.8)});
    const CVec v = cvec({Complex(0.3, 1.0), Complex(-0.5, 0.2)});
    const Form11 a = theta_of_v(h, z, v);
    const Form11 b = theta_of_v(h, z, v * Complex(-2.0, 3.0));
    EXPECT_LT((a.H - b.H).norm(), 1e-10 * a.H.norm());
    EXPECT_LT(hermitian_defect(a.H), 1e-8 * a.H.norm());
    EXPECT_LT(theta_of_v(hermitian_catalog("flat", 2), z, v).H.norm(), 1e-14);
}

TEST(Theta, GaugeInvariantUnderHolomorphicRescaling) {
    // h -> |e^{z}|^2 h leaves c1 unchanged
    const auto h = hermitian_catalog("line_fs");
    HermitianMetricField g = h;
    g.h = [f = h.h](const CVec& z) { return CMat(f(z) * std::exp(2.0 * z(0).real())); };
    for (const auto& z : probes(1, 5, 7))
        EXPECT_LT((first_chern_form(g, z).H - first_chern_form(h, z).H).norm(), 1e-7);
}

TEST(Bisectional, LineBundleAtOrigin) {
    const auto h = hermitian_catalog("line_fs");
    const Complex k = bisectional_h(h, cvec({0.0}), cvec({1.0}), cvec({1.0}), Form11::euclidean(1));
    EXPECT_NEAR(k.real(), -1.0, 1e-8);
    EXPECT_NEAR(k.imag(), 0.0, 1e-12);
}

TEST(Bisectional, InvariantUnderScaling) {
    const auto h = hermitian_catalog("coupled", 2);
    const CVec z = cvec({Complex(0.4, 0.1), Complex(-0.3, 0.8)});
    const CVec xi = cvec({Complex(1.0, 0.5), Complex(0.2, -0.7)});
    const CVec v = cvec({Complex(0.3, 1.0), Complex(-0.5, 0.2)});
    BaseModel b{2};
    const Form11 phi = b.phi(z);
    const Complex k1 = bisectional_h(h, z, xi, v, phi);
    const Complex k2 = bisectional_h(h, z, xi * Complex(0.0, 3.0), v * Complex(-0.5, 0.5), phi);
    EXPECT_LT(std::abs(k1 - k2), 1e-10 * std::abs(k1));
    EXPECT_NEAR(std::abs(bisectional_h(hermitian_catalog("flat", 2), z, xi, v, phi)), 0.0, 1e-14);
    EXPECT_THROW(bisectional_h(h, z, CVec::Zero(2), v, phi), Error);
}

TEST(Induced, DeterminantAndDual) {
    const auto flat = induced_metrics(hermitian_catalog("flat"));
    EXPECT_NEAR(flat.det(cvec({1.0}))(0, 0).real(), 1.0, 1e-15);
    EXPECT_LT((flat.dual(cvec({1.0})) - CMat::Identity(2, 2)).norm(), 1e-15);

    for (const auto& name : {"diag_twist", "diag_exp", "coupled"})
        for (const auto& z : probes(2, 5, 8)) {
            const auto h = hermitian_catalog(name, 2);
            const auto ind = induced_metrics(h);
            const Form11 c1det = first_chern_form(ind.det, z);
            const Form11 tr = curvature_trace(curvature_h(h, z));
            EXPECT_LT((c1det.H - tr.H).norm(), 1e-6 * std::max(1.0, tr.H.norm())) << name;
        }
}

TEST(Induced, DiagonalDeterminantIsAdditive) {
    const auto h = hermitian_catalog("diag_twist");
    const auto a = hermitian_catalog("line_fs");
    for (const auto& z : probes(1, 5, 9)) {
        const Form11 c1det = first_chern_form(det_metric(h), z);
        // the first diagonal entry is constant so c1(det) = c1(1 + |z|^2)
        EXPECT_LT((c1det.H - first_chern_form(a, z).H).norm(), 1e-7);
    }
}

TEST(Induced, DualNormIsMaximumOverFiber) {
    const auto h = hermitian_catalog("coupled");
    const auto grid = fiber_grid_rank2(200, 200);
    for (const auto& z : probes(1, 4, 10)) {
        const CMat hz = h(z);
        const CVec sigma = cvec({Complex(0.7, -0.1), Complex(0.2, 0.9)});
        const double exact = std::sqrt(dual_norm2(hz, sigma));
        const double grid_max = dual_norm_by_grid(hz, sigma, grid);
        EXPECT_LE(grid_max, exact * (1.0 + 1e-12));
        EXPECT_GT(grid_max, exact * (1.0 - 1e-3));
        // the dual metric matrix reproduces the same norm
        const CMat hd = dual_metric(h)(z);
        EXPECT_NEAR(norm2_h(hd, sigma), exact * exact, 1e-12 * exact * exact);
    }
}

TEST(Order, FlatHasZeroKappa) {
    BaseModel b{1};
    const auto pts = sample_points(1, 30, 1.0, 10.0, 11);
    FormField e = [](const CVec&) { return Form11::euclidean(1); };
    const auto oc = order_check_h(hermitian_catalog("flat"), b, e, 0.0, pts);
    EXPECT_EQ(oc.kappa, 0.0);
    EXPECT_TRUE(oc.pass);
}

TEST(Order, GaussianLineBundleHasOrderZero) {
    BaseModel b{1};
    const auto pts = sample_points(1, 60, 1.0, 10.0, 12);
    FormField e = [](const CVec&) { return Form11::euclidean(1); };
    const auto oc = order_check_h(hermitian_catalog("line_exp"), b, e, 0.0, pts);
    EXPECT_NEAR(oc.kappa, 1.0, 1e-6);
    EXPECT_TRUE(oc.pass);
}

TEST(Order, QuarticGaussianNeedsPositiveOrder) {
    BaseModel b{1};
    const auto pts = sample_points(1, 80, 1.0, 10.0, 13);
    FormField e = [](const CVec&) { return Form11::euclidean(1); };
    const auto h = hermitian_catalog("line_exp_quartic");
    EXPECT_FALSE(order_check_h(h, b, e, 0.0, pts).pass);
    EXPECT_TRUE(order_check_h(h, b, e, 2.0 / b.c, pts).pass);
}
