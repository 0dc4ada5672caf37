// Characteristic function of (1; e^z) against r/pi, and the first main theorem
// balance for (1; z^3) at a few radii.

#include "fnv/fnv.hpp"

#include <cstdio>

int main() {
    using namespace fnv;
    const MapToPn e = map_catalog("exponential");
    const auto grid = geometric_grid(1.0, 30.0, 8);
    const GrowthCurve T = characteristic(e, grid, 0.0);
    std::printf("%8s %14s %14s\n", "r", "T(r)", "r/pi");
    for (std::size_t i = 0; i < T.size(); ++i) std::printf("%8.3f %14.6f %14.6f\n", T.r[i], T.values[i], T.r[i] / kPi);

    const MapToPn cubic = map_catalog("cubic");
    for (double r : {2.0, 10.0, 50.0}) {
        const FmtBalance b = fmt_residual(cubic, cvec({1.0, -1.0}), r, 0.5);
        std::printf("r=%-5g N=%.6f m(r)-m(s)=%.6f T=%.6f residual=%.2e\n", r, b.N, b.m_r - b.m_s, b.T, b.residual);
    }
}
