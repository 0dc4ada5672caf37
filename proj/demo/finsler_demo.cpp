// Chern form of the tautological metric at one point of P(E) for every catalog
// metric, with the smallest fiber eigenvalue (chart index dropped) and the horizontal
// coefficient.

#include "fnv/fnv.hpp"

#include <Eigen/Eigenvalues>
#include <cstdio>

int main() {
    using namespace fnv;
    const CVec z = cvec({Complex(0.5, 0.2)});
    const CVec v = cvec({1.0, Complex(0.3, -0.6)});
    std::printf("%-22s %14s %14s\n", "metric", "min eig fiber", "horizontal");
    for (const auto& name : finsler_catalog_names()) {
        const ChernFormL c1 = chern_form_fast(finsler_catalog(name), z, v);
        const double vmin = Eigen::SelfAdjointEigenSolver<CMat>(c1.fiber()).eigenvalues().minCoeff();
        std::printf("%-22s %14.6g %14.6g\n", name.c_str(), vmin, c1.horizontal(0, 0).real());
    }
}
