#pragma once
// Verification suites shared by the CLI and the acceptance binary. Each record
// carries its worst defect and the probe that produced it.

#include "fnv/base_space.hpp"
#include "fnv/finsler.hpp"
#include "fnv/growth.hpp"
#include "fnv/hermitian.hpp"

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace fnv {

struct CheckRecord {
    std::string name;
    std::string tag;       // descriptive identity tag
    bool pass = true;
    double worst = 0.0;    // largest defect, or most negative margin as a positive number
    double tol = 0.0;
    std::string witness;   // probe attaining `worst`
    std::string detail;
};

inline std::string format_complex(Complex c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g%+.6gi", c.real(), c.imag());
    return buf;
}

inline std::string format_g(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline std::string format_cvec(const CVec& v) {
    std::string out = "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_complex(v(i));
    return out + ")";
}

struct CheckBudget {
    int base_probes = 10;     // per metric; times fiber_probes gives the probe count
    int fiber_probes = 5;
    int direct_points = 10;   // random (z, [v]) per metric for the direct Chern form comparison
    int phi_tilde_points = 1000;
    std::uint64_t seed = 1;
};

namespace detail {

/// Accumulates the worst defect of one identity.
struct Tracker {
    CheckRecord rec;
    Tracker(std::string name, std::string tag, double tol) {
        rec.name = std::move(name);
        rec.tag = std::move(tag);
        rec.tol = tol;
    }
    bool seen = false;
    void note(double defect, const std::string& witness) {
        if (std::isnan(defect)) defect = std::numeric_limits<double>::infinity();
        if (!seen || defect > rec.worst) {
            rec.worst = defect;
            rec.witness = witness;
            seen = true;
        }
        if (!(defect <= rec.tol)) rec.pass = false;
    }
    void fail(const std::string& witness, const std::string& why) {
        rec.pass = false;
        rec.worst = std::numeric_limits<double>::infinity();
        rec.witness = witness;
        rec.detail = why;
    }
};

inline std::string probe_label(const std::string& metric, const CVec& z, const CVec& v) {
    return metric + " z=" + format_cvec(z) + " v=" + format_cvec(v);
}

/// |a - b| / max(|b|, floor): relative to the reference with an absolute floor.
inline double rel_to(const CMat& a, const CMat& b, double floor) { return (a - b).norm() / std::max(b.norm(), floor); }

inline double max_norm(const std::vector<CMat>& ms) {
    double s = 0.0;
    for (const auto& m : ms) s = std::max(s, m.norm());
    return s;
}

}  // namespace detail

inline constexpr int kFinslerIdentities = 1;
inline constexpr int kChernForm = 2;

/// Euler identities, contractions, pairing and Hermitian reduction over the
/// Finsler catalog (kFinslerIdentities), and the Chern form of the hyperplane
/// bundle (kChernForm).
inline std::vector<CheckRecord> identity_suite(const std::vector<std::string>& metrics, const CheckBudget& b = {},
                                               const FinslerOptions& opt = {},
                                               int parts = kFinslerIdentities | kChernForm) {
    using detail::Tracker;
    Tracker euler1("euler_first_order", "euler_first_order", 1e-6);
    Tracker euler2("position_norm_equals_G", "euler_quadratic", 1e-6);
    Tracker hom("fiber_homogeneity", "homogeneity", 1e-8);
    Tracker psh("fiber_strict_psh", "fiber_strict_psh", 0.0);
    Tracker vconn("vertical_connection_contraction", "connection_contraction", 1e-5);
    Tracker curv("curvature_contraction", "curvature_contraction", 1e-5);
    Tracker pair("curvature_pairing_via_lifts", "curvature_pairing", 1e-5);
    Tracker hconn("hermitian_reduction_connection", "hermitian_reduction", 1e-5);
    Tracker hcurv("hermitian_reduction_curvature", "hermitian_reduction", 1e-5);
    Tracker direct("chern_form_vs_direct_ddc_log_G", "chern_form_direct", 1e-4);
    Tracker normal("normal_frame_splitting", "normal_frame", 1e-4);
    Tracker mass("fiber_fubini_study_mass", "fiber_mass", 1e-4);
    Tracker fconst("fiber_integral_constant", "fiber_integral_constant", 1e-3);

    for (const auto& name : metrics) {
        for (int n : {1, 2}) {
            const FinslerMetric F = finsler_catalog(name, n);
            const auto zs = sample_points(n, n == 1 ? b.base_probes : std::max(2, b.base_probes / 5), 0.05, 2.0,
                                          b.seed + static_cast<std::uint64_t>(n));
            const auto vs = finsler_fiber_probes(2, b.fiber_probes, b.seed + 10);

            if (parts & kFinslerIdentities) {
                const FinslerValidation val = validate_finsler(F, zs, vs, opt);
                auto carry = [&](Tracker& t, const char* cond) {
                    const ConditionReport& c = val[cond];
                    t.note(c.worst, detail::probe_label(name, c.z, c.v));
                };
                carry(euler1, "euler_first_order");
                carry(euler2, "euler_quadratic");
                carry(hom, "homogeneity");
                carry(psh, "fiber_strict_psh");

                const bool quadratic = name.rfind("quadratic_", 0) == 0;
                const HermitianMetricField h = quadratic ? hermitian_catalog(name.substr(10), n) : HermitianMetricField{};

                std::vector<std::pair<CVec, CVec>> probes;
                for (const auto& z : zs)
                    for (const auto& v : vs) probes.emplace_back(z, v);
                struct Out {
                    double vconn = 0, curv = 0, pair = 0, hconn = 0, hcurv = 0;
                    std::string err;
                };
                std::vector<Out> outs(probes.size());
                parallel_for(probes.size(), [&](std::size_t i) {
                    const auto& [z, v] = probes[i];
                    Out& o = outs[i];
                    try {
                        const FinslerJet j = finsler_jet(F, z, v, true, opt);
                        const FinslerConnection con = connection_from_jet(j);
                        o.vconn = con.contraction_defect() / std::max(v.norm() * detail::max_norm(con.gamma), 1.0);
                        const FinslerCurvature c = curvature_from_jet(j);
                        const double scale = std::max(c.scale(), 1.0);
                        o.curv = c.contraction_defect() / scale;
                        CVec x1(n), x2(n);
                        for (int k = 0; k < n; ++k) {
                            x1(k) = Complex(1.0, 0.3 * k);
                            x2(k) = Complex(0.2 * (k + 1), -0.7);
                        }
                        const CurvaturePairing p = curvature_pairing(c, x1, x2);
                        o.pair = std::abs(p.from_K - p.from_lifts) / scale;
                        if (quadratic) {
                            const auto ref = chern_connection(h, z);
                            const CurvatureTensorH K = curvature_h(h, z);
                            for (int k = 0; k < n; ++k) {
                                o.hconn = std::max(o.hconn, detail::rel_to(con.Gamma[static_cast<std::size_t>(k)],
                                                                           ref[static_cast<std::size_t>(k)], 1e-2));
                                for (int l = 0; l < n; ++l)
                                    o.hcurv = std::max(o.hcurv, detail::rel_to(c.K(k, l), K.at(k, l), 1e-2));
                            }
                        }
                    } catch (const Error& e) {
                        o.err = e.what();
                    }
                });
                for (std::size_t i = 0; i < probes.size(); ++i) {
                    const std::string w = detail::probe_label(name, probes[i].first, probes[i].second);
                    if (!outs[i].err.empty()) {
                        for (Tracker* t : {&vconn, &curv, &pair}) t->fail(w, outs[i].err);
                        continue;
                    }
                    vconn.note(outs[i].vconn, w);
                    curv.note(outs[i].curv, w);
                    pair.note(outs[i].pair, w);
                    if (quadratic) {
                        hconn.note(outs[i].hconn, w);
                        hcurv.note(outs[i].hcurv, w);
                    }
                }
            }

            if (parts & kChernForm) {
                // Chern form against ddc log G in the affine fiber chart
                const auto dz = sample_points(n, b.direct_points, 0.05, 2.0, b.seed + 20 + static_cast<std::uint64_t>(n));
                const auto dv = sample_points(2, b.direct_points, 1.0, 1.0, b.seed + 30 + static_cast<std::uint64_t>(n));
                std::vector<double> dd(dz.size());
                parallel_for(dz.size(), [&](std::size_t i) {
                    const ChernFormL c1 = chern_form_L(F, dz[i], dv[i], opt);
                    dd[i] = detail::rel_to(c1.affine(), chern_direct_affine(F, dz[i], dv[i], c1.chart), 1e-2);
                });
                for (std::size_t i = 0; i < dz.size(); ++i) direct.note(dd[i], detail::probe_label(name, dz[i], dv[i]));
            }
        }

        if (!(parts & kChernForm)) continue;
        // normal frame: ddc log G' is blockdiag(-Theta(P), FS) at the centre
        const FinslerMetric F = finsler_catalog(name);
        for (const auto& z : sample_points(1, 3, 0.05, 2.0, b.seed + 40)) {
            const CVec v = cvec({1.0, Complex(0.7, 0.7)});
            const std::string w = detail::probe_label(name, z, v);
            try {
                const NormalFrame nf = normal_frame_at(F, z, v, opt);
                const FinslerMetric Fn = nf.apply(F);
                const ChernFormL c1 = chern_form_L(F, z, v, opt);
                const double Gp = nf.v_prime.squaredNorm();
                const CMat fs = (Gp * CMat::Identity(2, 2) - nf.v_prime.conjugate() * nf.v_prime.transpose()) / (Gp * Gp);
                CMat expect = CMat::Zero(3, 3);
                expect(0, 0) = c1.horizontal(0, 0);
                expect.bottomRightCorner(2, 2) = fs;
                const int chart = affine_chart(nf.v_prime);
                const CMat got = chern_direct_affine(Fn, z, nf.v_prime, chart);
                normal.note(detail::rel_to(got, drop_index(expect, 1 + chart), 1e-2), w);
            } catch (const Error& e) {
                normal.fail(w, e.what());
            }
        }

        const CVec z0 = cvec({0.3});
        mass.note(std::abs(fiber_mass(F, z0, stereographic_rule(60, 32), opt) - 1.0), name + " z=" + format_cvec(z0));
    }

    if (parts & kChernForm) {
        // with the flat metric and sigma = (1, 0) the fiber integral of |sigma~|^2 is 1/2
        const FinslerMetric flat = finsler_catalog("flat");
        const CVec z0 = cvec({0.2});
        fconst.note(std::abs(fiber_integral_sigma(flat, cvec({1.0, 0.0}), z0, stereographic_rule(60, 16), opt) - 0.5),
                    "flat z=" + format_cvec(z0));
    }

    std::vector<CheckRecord> out;
    if (parts & kFinslerIdentities)
        for (Tracker* t : {&euler1, &euler2, &hom, &psh, &vconn, &curv, &pair, &hconn, &hcurv}) out.push_back(t->rec);
    if (parts & kChernForm)
        for (Tracker* t : {&direct, &normal, &mass, &fconst}) out.push_back(t->rec);
    return out;
}

/// Smallest kappa = 2^k on which the sandwich holds at every tuning probe.
struct KappaTuning {
    double kappa = 1.0;
    bool found = false;
};

inline KappaTuning tune_kappa(const FinslerMetric& F, const BaseModel& base, double lambda,
                              std::span<const CVec> zs, std::span<const CVec> vs, double tol = 1e-8,
                              const FinslerOptions& opt = {}, double kappa_max = 1048576.0) {
    std::vector<ChernFormL> forms;
    for (const auto& z : zs)
        for (const auto& v : vs) forms.push_back(chern_form_fast(F, z, v, opt));
    for (double k = 1.0; k <= kappa_max; k *= 2.0) {
        bool ok = true;
        for (const auto& c1 : forms) {
            const PhiTilde p = phi_tilde_from_chern(c1, base, k, lambda);
            if (!(p.min_eig > 0.0 && p.sandwich(tol))) {
                ok = false;
                break;
            }
        }
        if (ok) return {k, true};
    }
    return {kappa_max, false};
}

/// Positivity of phi~ and the two-sided bound of its horizontal part.
inline std::vector<CheckRecord> phi_tilde_suite(const std::vector<std::string>& metrics, const BaseModel& base,
                                                double lambda, const CheckBudget& b = {},
                                                const FinslerOptions& opt = {}) {
    constexpr double tol = 1e-8;
    std::vector<CheckRecord> out;
    const auto tune_z = sample_points(1, 40, 1e-3, 3.0, b.seed + 50);
    const auto tune_v = finsler_fiber_probes(2, 4, b.seed + 51);
    const int per_z = 5;
    const auto zs = sample_points(1, std::max(1, b.phi_tilde_points / per_z), 1e-3, 3.0, b.seed + 52);
    const auto vs = finsler_fiber_probes(2, per_z, b.seed + 53);
    for (const auto& name : metrics) {
        const FinslerMetric F = finsler_catalog(name);
        const KappaTuning kt = tune_kappa(F, base, lambda, tune_z, tune_v, tol, opt);
        detail::Tracker pos("phi_tilde_positive:" + name, "phi_tilde_positive", tol);
        detail::Tracker lo("phi_tilde_lower_bound:" + name, "phi_tilde_sandwich_lower", tol);
        detail::Tracker hi("phi_tilde_upper_bound:" + name, "phi_tilde_sandwich_upper", tol);
        std::vector<PhiTilde> ps(zs.size() * vs.size());
        parallel_for(ps.size(), [&](std::size_t i) {
            const CVec& z = zs[i / vs.size()];
            const CVec& v = vs[i % vs.size()];
            ps[i] = phi_tilde_from_chern(chern_form_fast(F, z, v, opt), base, kt.kappa, lambda);
        });
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const std::string w = detail::probe_label(name, zs[i / vs.size()], vs[i % vs.size()]);
            const PhiTilde& p = ps[i];
            // margins are relative to the horizontal block; positivity to the whole form
            pos.note(-p.min_eig / std::max(p.form.H.norm(), 1e-300), w);
            lo.note(-p.lower_margin / p.scale, w);
            hi.note(-p.upper_margin / p.scale, w);
        }
        const std::string k = "lambda=" + format_g(lambda) + " kappa=" + format_g(kt.kappa) +
                              (kt.found ? "" : " (tuning did not converge)");
        for (detail::Tracker* t : {&pos, &lo, &hi}) {
            t->rec.detail = k;
            out.push_back(t->rec);
        }
    }
    return out;
}

/// Exhaustion, Ricci and comparison estimates on the base, plus the Poincare model.
inline std::vector<CheckRecord> base_space_suite(const BaseModel& model, const CheckBudget& b = {}) {
    // Constants and exponents only need to exist; their records carry an infinite tolerance.
    constexpr double kFiniteOnly = std::numeric_limits<double>::infinity();
    std::vector<CheckRecord> out;
    auto record = [&](std::string name, std::string tag, bool pass, double worst, double tol, std::string witness,
                      std::string detail = {}) {
        out.push_back({std::move(name), std::move(tag), pass, worst, tol, std::move(witness), std::move(detail)});
    };
    for (int n : {1, 2}) {
        BaseModel base = model;
        base.n = n;
        const std::string sn = "n=" + std::to_string(n);
        const auto grid = sample_points(n, 100, 1e-3, 1e3, b.seed + 60 + static_cast<std::uint64_t>(n));

        // strict psh: closed-form Levi form and a finite-difference cross-check
        double worst = std::numeric_limits<double>::infinity();
        CVec wz;
        const ScalarField tau = base.tau_field();
        for (const auto& z : grid) {
            const double e = std::min(base.phi(z).min_eig(), levi_min_eig(tau, z));
            if (e < worst) {
                worst = e;
                wz = z;
            }
        }
        record("tau_strictly_psh:" + sn, "exhaustion_psh", worst > 0.0, -worst, 0.0, format_cvec(wz),
               "min Levi eigenvalue " + format_g(worst));

        const double K = rho_growth_constant(base, sample_points(n, 50, 10.0, 1e3, b.seed + 70));
        record("rho_comparable_to_norm_power:" + sn, "rho_growth", std::isfinite(K), K, kFiniteOnly, "",
               "rho / |z|^c in [1/K, K]");

        FormField phi = [base](const CVec& z) { return base.phi(z); };
        try {
            const RicciBound rb = ricci_bound(phi, sample_points(n, 40, 1e-2, 1e3, b.seed + 80));
            record("ricci_bounded_by_phi:" + sn, "ricci_bound", std::isfinite(rb.K), rb.K, kFiniteOnly, format_cvec(rb.witness),
                   "|Ric| <= K phi");
        } catch (const Error& e) {
            record("ricci_bounded_by_phi:" + sn, "ricci_bound", false, std::numeric_limits<double>::infinity(), kFiniteOnly, "",
                   e.what());
        }

        const auto pts = sample_points(n, 60, 1.0, 1e3, b.seed + 90);
        for (auto pair : {ComparisonPair::Psi, ComparisonPair::TauPrimeGradient, ComparisonPair::TauGradient}) {
            const std::string nm = std::string("comparison_exponent:") + to_string(pair) + ":" + sn;
            try {
                const ExponentEstimate est = estimate_exponent(base, pair, pts);
                record(nm, "comparison_exponent", std::isfinite(est.exponent), est.exponent, kFiniteOnly,
                       format_cvec(est.witness), "continuous " + format_g(est.continuous));
            } catch (const Error& e) {
                record(nm, "comparison_exponent", false, std::numeric_limits<double>::infinity(), kFiniteOnly, "", e.what());
            }
        }
    }

    const double c = 2.0;
    FormField poincare = [c](const CVec& z) { return poincare_form(z(0), c); };
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    CVec wz;
    for (const auto& z : sample_points(1, 50, 1e-3, 0.9, b.seed + 100)) {
        const double k = gauss_curvature(poincare, z(0));
        if (k < lo) {
            lo = k;
            wz = z;
        }
        hi = std::max(hi, k);
    }
    const double spread = (hi - lo) / std::abs(lo);
    record("poincare_constant_gauss_curvature", "poincare_curvature", hi < 0.0 && spread <= 1e-3, spread, 1e-3,
           format_cvec(wz), "curvature in [" + format_g(lo) + ", " + format_g(hi) + "]");
    return out;
}

/// Total mass of the sphere measure: exact for n = 1, Monte Carlo for n = 2.
inline std::vector<CheckRecord> sphere_suite(int mc_budget = 1000000, std::uint64_t seed = 7) {
    std::vector<CheckRecord> out;
    auto add = [&](int n, double r, double tol) {
        const ShellRule rule = n == 1 ? ShellRule::Trapezoid : ShellRule::MonteCarlo;
        const double v = sphere_measure_check(n, r, n == 1 ? 64 : mc_budget, rule, seed);
        const double d = std::abs(v - 1.0);
        out.push_back({"sphere_measure_total_mass:n=" + std::to_string(n) + ":r=" + format_g(r), "sphere_measure",
                       d <= tol, d, tol, "r=" + format_g(r), "mass " + format_g(v)});
    };
    for (double r : {0.5, 1.0, 10.0}) add(1, r, 1e-12);
    for (double r : {1.0, 10.0}) add(2, r, 1e-3);
    return out;
}

inline bool all_pass(const std::vector<CheckRecord>& rs) {
    return std::all_of(rs.begin(), rs.end(), [](const CheckRecord& r) { return r.pass; });
}

}  // namespace fnv
