// Acceptance run: one PASS/FAIL line per criterion with the measured numbers,
// the pinned tolerance and the wall time against its budget. Exits nonzero if
// any criterion fails.

#include "fnv/checks.hpp"
#include "fnv/growth.hpp"
#include "fnv/holomorphic.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace fnv;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream msg;
    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        msg << (msg.tellp() > 0 ? "; " : "") << (ok ? "" : "[x] ") << what;
    }
};

std::string g(double x) { return format_g(x); }

bool run(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.require(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.require(dt < budget_s, "runtime " + g(dt) + " s < " + g(budget_s) + " s");
    std::printf("%s  criterion %d  %s\n      %s\n", o.pass ? "PASS" : "FAIL", id, title, o.msg.str().c_str());
    std::fflush(stdout);
    return o.pass;
}

void records(Outcome& o, const std::vector<CheckRecord>& rs) {
    for (const auto& r : rs)
        o.require(r.pass, r.name + " " + g(r.worst) + " <= " + g(r.tol) + (r.pass ? "" : " at " + r.witness) +
                              (r.detail.empty() ? "" : " (" + r.detail + ")"));
}

double t_affine(double r, double s) { return 0.5 * std::log((1.0 + r * r) / (1.0 + s * s)); }

}  // namespace

int main() {
    int failed = 0;
    const auto metrics = finsler_catalog_names();

    failed += !run(1, "first main theorem balance for (1; z), sigma = e1, s = 0.5", 10.0, [](Outcome& o) {
        constexpr double kResidual = 1e-3, kT = 1e-4;
        const MapToPn f = map_catalog("affine_identity");
        for (double r : {2.0, 10.0, 50.0}) {
            const FmtBalance b = fmt_residual(f, cvec({0.0, 1.0}), r, 0.5);
            o.require(b.residual <= kResidual, "r=" + g(r) + " residual " + g(b.residual) + " <= " + g(kResidual));
            const double dT = std::abs(b.T - t_affine(r, 0.5));
            o.require(dT <= kT, "T error " + g(dT) + " <= " + g(kT));
        }
    });

    failed += !run(2, "Crofton average for (1; z^3), k = 1, 2000 planes x 20 seeds", 120.0, [](Outcome& o) {
        constexpr int kSeeds = 20, kSamples = 2000, kMinInside = 17;
        constexpr double kGap = 0.02, r = 10.0, s = 0.5;
        const MapToPn f = map_catalog("cubic");
        const double T = 0.5 * std::log((1.0 + std::pow(r, 6)) / (1.0 + std::pow(s, 6)));
        int inside = 0;
        double worst_gap = 0.0;
        for (int seed = 1; seed <= kSeeds; ++seed) {
            const CroftonResult c = crofton_mc(f, 1, r, s, kSamples, static_cast<std::uint64_t>(seed));
            inside += c.contains(T);
            worst_gap = std::max(worst_gap, std::abs(c.mean - T) / T);
        }
        o.require(inside >= kMinInside, "closed-form T inside the 95% interval in " + std::to_string(inside) + "/20 >= " +
                                            std::to_string(kMinInside));
        o.require(worst_gap <= kGap, "worst |mean - T| / T " + g(worst_gap) + " <= " + g(kGap));
    });

    failed += !run(3, "order fits: polynomial and exponential maps", 60.0, [](Outcome& o) {
        constexpr double kPolyMax = 0.1, kExpLo = 0.9, kExpHi = 1.1, kRatioLo = 0.95, kRatioHi = 1.05;
        constexpr int kPerDecade = 64;
        const auto cubic = characteristic(map_catalog("cubic"), geometric_grid(1e2, 1e4, kPerDecade), 0.5);
        const double lp = order_fit(cubic, 1e2, 1e4).lambda_hat;
        o.require(lp <= kPolyMax, "(1; z^3) lambda_hat on [1e2, 1e4] " + g(lp) + " <= " + g(kPolyMax));
        const MapToPn e = map_catalog("exponential");
        const double le = order_fit(characteristic(e, geometric_grid(5.0, 30.0, kPerDecade), 0.0), 5.0, 30.0).lambda_hat;
        o.require(le >= kExpLo && le <= kExpHi,
                  "(1; e^z) lambda_hat on [5, 30] " + g(le) + " in [" + g(kExpLo) + ", " + g(kExpHi) + "]");
        const double ratio = characteristic(e, std::vector<double>{20.0}, 0.0).values[0] / (20.0 / kPi);
        o.require(ratio >= kRatioLo && ratio <= kRatioHi,
                  "T(20) / (20/pi) " + g(ratio) + " in [" + g(kRatioLo) + ", " + g(kRatioHi) + "]");
    });

    failed += !run(4, "sphere measure has total mass 1", 30.0,
                   [](Outcome& o) { records(o, sphere_suite(1000000)); });

    failed += !run(5, "Finsler identities on the catalog", 120.0, [&](Outcome& o) {
        CheckBudget b;
        b.base_probes = 10;
        b.fiber_probes = 5;
        o.require(metrics.size() >= 4 && b.base_probes * b.fiber_probes >= 50,
                  std::to_string(metrics.size()) + " metrics x " + std::to_string(b.base_probes * b.fiber_probes) +
                      " probes (n=1) plus n=2 probes");
        records(o, identity_suite(metrics, b, {}, kFinslerIdentities));
    });

    failed += !run(6, "Chern form of the hyperplane bundle", 60.0, [&](Outcome& o) {
        CheckBudget b;
        b.direct_points = 10;
        records(o, identity_suite(metrics, b, {}, kChernForm));
    });

    failed += !run(7, "phi~ positivity and sandwich, lambda = 2, tuned kappa, 1000 probes per metric", 30.0,
                   [&](Outcome& o) {
                       CheckBudget b;
                       b.phi_tilde_points = 1000;
                       records(o, phi_tilde_suite(metrics, BaseModel{1, 4.0}, 2.0, b));
                   });

    failed += !run(8, "base-space estimates", 60.0, [](Outcome& o) { records(o, base_space_suite(BaseModel{1, 4.0})); });

    failed += !run(9, "growth on P(E): volume, section zeros, preimage of a divisor", 180.0, [](Outcome& o) {
        constexpr double kAgree = 0.1, s = 0.5;
        const BaseModel base{1, 4.0};
        PEOptions po;
        po.angular = 8;
        po.fiber_polar = po.fiber_azimuth = 6;
        const auto grid = geometric_grid(1.0, 100.0, 4);
        for (const char* name : {"flat", "quartic_cross_z"}) {
            const FinslerMetric F = finsler_catalog(name);
            const VolumeGrowth v = volume_growth_pe(F, base, 1.0, 2.0, grid, po);
            const OrderEstimate ev = order_fit(v.vol, 1.0, 100.0);
            o.require(std::isfinite(ev.lambda_hat), std::string(name) + " vol lambda_hat " + g(ev.lambda_hat) + " finite");
        }
        const FinslerMetric flat = finsler_catalog("flat");
        for (const char* sec : {"constant", "linear"}) {
            const auto z = section_zero_growth(flat, section_catalog(sec), base, 1.0, 2.0, grid, s, po);
            const OrderEstimate en = order_fit(z.N, 1.0, 100.0);
            o.require(std::isfinite(en.lambda_hat), std::string(sec) + " section zeros lambda_hat " + g(en.lambda_hat) +
                                                        " finite");
        }
        const auto pts = pullback_divisor(map_catalog("quadratic"), cvec({0.0, 1.0}), 100.0);
        const auto cgrid = geometric_grid(2.0, 100.0, 8);
        const double lz = order_fit(counting(pts, cgrid, s), 2.0, 100.0).lambda_hat;
        const double lt =
            order_fit(preimage_counting(finsler_catalog("quartic_cross_z"), pts, cgrid, s, po), 2.0, 100.0).lambda_hat;
        o.require(std::abs(lz - lt) <= kAgree,
                  "preimage vs base counting lambda_hat " + g(lt) + " vs " + g(lz) + ", |diff| <= " + g(kAgree));
    });

    std::printf("%d of 9 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
