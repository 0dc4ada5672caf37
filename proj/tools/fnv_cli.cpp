// Scenario runner: verify | curvature | growth | fmt | crofton | order | volume | catalog.
// Exit codes: 0 all checks pass, 1 a check failed, 2 schema or usage error,
// 3 numerical breakdown. Artifacts are written only after a run completes.

#include "fnv/checks.hpp"
#include "fnv/growth.hpp"
#include "fnv/holomorphic.hpp"
#include "plot.hpp"
#include "scenario.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>

namespace fs = std::filesystem;
using namespace fnv;
using cli::json;

namespace {

enum Exit { kOk = 0, kCheckFailure = 1, kSchema = 2, kNumerical = 3 };

struct Run {
    std::vector<CheckRecord> records;
    json results = json::object();
    std::vector<std::pair<std::string, GrowthCurve>> curves;
    std::vector<std::string> notes;  // extra console lines
};

json::json_pointer ptr(const char* p) { return json::json_pointer(p); }

template <class T>
T opt(const json& s, const char* p, T fallback) {
    return cli::get_or<T>(s, ptr(p), fallback);
}

CVec complex_vector(const json& list) {
    CVec v(static_cast<Eigen::Index>(list.size()));
    for (std::size_t i = 0; i < list.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = Complex(list[i][0].get<double>(), list[i][1].get<double>());
    return v;
}

json matrix_json(const CMat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

json record_json(const CheckRecord& r) {
    return {{"name", r.name},   {"tag", r.tag},         {"status", r.pass ? "PASS" : "FAIL"},
            {"worst", std::isfinite(r.worst) ? json(r.worst) : json(nullptr)},
            {"tol", std::isfinite(r.tol) ? json(r.tol) : json(nullptr)},     {"witness", r.witness}, {"detail", r.detail}};
}

CheckRecord bound_record(std::string name, std::string tag, double worst, double tol, std::string witness = {},
                         std::string detail = {}) {
    return {std::move(name), std::move(tag), worst <= tol, worst, tol, std::move(witness), std::move(detail)};
}

BaseModel base_model(const json& s, int n) {
    BaseModel b;
    b.n = opt(s, "/base/n", n);
    b.c = opt(s, "/base/c", 4.0);
    b.sigma_floor = opt(s, "/base/sigma_floor", kDefaultSigmaFloor);
    try {
        b.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::SchemaError, std::string("base: ") + e.what());
    }
    return b;
}

std::vector<double> radius_grid(const json& s, double r_min, double r_max, int per_decade) {
    const double a = opt(s, "/grid/r_min", r_min), b = opt(s, "/grid/r_max", r_max);
    if (!(b > a)) throw Error(ErrorKind::SchemaError, "grid: r_max must exceed r_min");
    std::vector<double> keep;
    if (s.contains(ptr("/grid/window")))
        for (const auto& w : s.at(ptr("/grid/window"))) keep.push_back(w.get<double>());
    return geometric_grid(a, b, opt(s, "/grid/per_decade", per_decade), keep);
}

std::vector<std::string> metric_list(const json& s) {
    if (!s.contains("metric")) return finsler_catalog_names();
    if (s["metric"].is_string()) return {s["metric"].get<std::string>()};
    return s["metric"].get<std::vector<std::string>>();
}

std::string single_metric(const json& s, const char* fallback) {
    const auto ms = s.contains("metric") ? metric_list(s) : std::vector<std::string>{fallback};
    if (ms.size() != 1) throw Error(ErrorKind::SchemaError, "metric: this task takes a single metric");
    return ms.front();
}

// -------------------------------------------------------------------------
// Tasks.

Run run_verify(const json& s) {
    Run run;
    const std::string suite = opt<std::string>(s, "/suite", "all");
    CheckBudget b;
    b.base_probes = opt(s, "/budget/probes", b.base_probes);
    b.fiber_probes = opt(s, "/budget/fiber", b.fiber_probes);
    b.phi_tilde_points = opt(s, "/budget/samples", b.phi_tilde_points);
    b.seed = opt<std::uint64_t>(s, "/budget/seed", b.seed);
    const auto metrics = metric_list(s);
    for (const auto& m : metrics) finsler_catalog(m);  // unknown names fail before any work
    const BaseModel base = base_model(s, 1);
    auto append = [&](std::vector<CheckRecord> rs) { run.records.insert(run.records.end(), rs.begin(), rs.end()); };
    if (suite == "identities" || suite == "all") append(identity_suite(metrics, b));
    if (suite == "phi_tilde" || suite == "all") append(phi_tilde_suite(metrics, base, opt(s, "/lambda", 2.0), b));
    if (suite == "base" || suite == "all") append(base_space_suite(base, b));
    if (suite == "sphere" || suite == "all")
        append(sphere_suite(opt(s, "/budget/mc", 1000000), b.seed));
    run.results["suite"] = suite;
    run.results["metrics"] = metrics;
    return run;
}

/// Tolerances applied inside validate_finsler, repeated here for the report.
double condition_tol(const std::string& name) {
    if (name == "homogeneity") return 1e-8;
    if (name == "projective_invariance") return 1e-7;
    if (name == "euler_first_order" || name == "euler_quadratic") return 1e-6;
    return 0.0;
}

Run run_curvature(const json& s) {
    Run run;
    const json zj = s.contains(ptr("/point/z")) ? s.at(ptr("/point/z")) : json::parse("[[0.5, 0.2]]");
    const json vj = s.contains(ptr("/point/v")) ? s.at(ptr("/point/v")) : json::parse("[[1, 0], [0.3, -0.6]]");
    const CVec z = complex_vector(zj), v = complex_vector(vj);
    if (v.size() != 2) throw Error(ErrorKind::SchemaError, "point.v: the catalog metrics have rank 2");
    const int n = static_cast<int>(z.size());
    const std::string name = single_metric(s, "quartic_cross");
    const FinslerMetric F = finsler_catalog(name, n);
    const BaseModel base = base_model(s, n);
    const double kappa = opt(s, "/kappa", 1.0), lambda = opt(s, "/lambda", 2.0);
    const std::string w = name + " z=" + format_cvec(z) + " v=" + format_cvec(v);

    const std::vector<CVec> zs{z}, vs{v};
    const FinslerValidation val = validate_finsler(F, zs, vs);
    for (const auto& c : val.conditions) run.records.push_back({c.name, c.name, c.pass, c.worst, condition_tol(c.name), w, {}});
    const FinslerCurvature curv = finsler_curvature(F, z, v);
    const double scale = std::max(curv.scale(), 1.0);
    run.records.push_back(
        bound_record("curvature_contraction", "curvature_contraction", curv.contraction_defect() / scale, 1e-5, w));
    const CVec xi = CVec::Ones(n);
    const CurvaturePairing p = curvature_pairing(curv, xi, xi);
    run.records.push_back(
        bound_record("curvature_pairing_via_lifts", "curvature_pairing", std::abs(p.from_K - p.from_lifts) / scale, 1e-5, w));
    const ChernFormL c1 = chern_from_curvature(curv);
    const CMat direct = chern_direct_affine(F, z, v, c1.chart);
    run.records.push_back(bound_record("chern_form_vs_direct_ddc_log_G", "chern_form_direct",
                                       (c1.affine() - direct).norm() / std::max(direct.norm(), 1e-2), 1e-4, w));
    const PhiTilde pt = phi_tilde_from_chern(c1, base, kappa, lambda);
    const std::string kl = "kappa=" + format_g(kappa) + " lambda=" + format_g(lambda);
    run.records.push_back(bound_record("phi_tilde_positive", "phi_tilde_positive",
                                       -pt.min_eig / std::max(pt.form.H.norm(), 1e-300), 1e-8, w, kl));
    run.records.push_back(bound_record("phi_tilde_lower_bound", "phi_tilde_sandwich_lower", -pt.lower_margin / pt.scale, 1e-8, w, kl));
    run.records.push_back(bound_record("phi_tilde_upper_bound", "phi_tilde_sandwich_upper", -pt.upper_margin / pt.scale, 1e-8, w, kl));

    run.results["G"] = curv.G;
    run.results["vertical_hessian"] = matrix_json(curv.M);
    run.results["chern_horizontal"] = matrix_json(c1.horizontal);
    run.results["chern_vertical"] = matrix_json(c1.vertical);
    run.results["lift_matrix"] = matrix_json(c1.B);
    run.results["pairing_matrix"] = matrix_json(curv.pairing_matrix());
    run.results["bisectional_sup"] = bisectional_sup(curv, base.phi(z));
    run.results["phi_tilde_min_eig"] = pt.min_eig;
    return run;
}

CheckRecord monotone_record(const GrowthCurve& c) {
    double worst = 0.0;
    std::string w;
    for (std::size_t i = 1; i < c.size(); ++i) {
        const double drop = (c.values[i - 1] - c.values[i]) / std::max(std::abs(c.values[i - 1]), 1.0);
        if (drop > worst) {
            worst = drop;
            w = "r=" + format_g(c.r[i]);
        }
    }
    return bound_record(c.kind + "_nondecreasing", "monotone_growth", worst, 1e-9, w);
}

Run run_growth(const json& s) {
    Run run;
    const std::string map = opt<std::string>(s, "/subject/map", "affine_identity");
    const std::string kind = opt<std::string>(s, "/subject/kind", "T");
    const MapToPn f = map_catalog(map);
    const CVec sigma = parse_covector(opt<std::string>(s, "/subject/sigma", "e1"), f.target_dim() + 1);
    const auto grid = radius_grid(s, 1.0, 100.0, 8);
    const double s0 = opt(s, "/grid/s", 0.5);
    GrowthCurve c;
    if (kind == "T") {
        c = characteristic(f, grid, s0);
    } else if (kind == "N") {
        c = counting(f, sigma, grid, s0);
    } else if (kind == "m") {
        c = proximity(f, sigma, grid);
    } else if (kind == "M") {
        const ExpPoly h = f.pullback(sigma);
        c = max_modulus([h](Complex z) { return h(z); }, grid);
    } else {
        throw Error(ErrorKind::SchemaError, "subject.kind: expected T, N, m or M");
    }
    if (kind == "T" || kind == "N") run.records.push_back(monotone_record(c));
    if (kind == "m") {
        const double lo = *std::min_element(c.values.begin(), c.values.end());
        run.records.push_back(bound_record("proximity_nonnegative", "proximity_nonnegative", -lo, 1e-8));
    }
    bool finite = std::all_of(c.values.begin(), c.values.end(), [](double x) { return std::isfinite(x); });
    run.records.push_back({"values_finite", "finite_values", finite, finite ? 0.0 : 1.0, 0.0, map, {}});
    run.curves.emplace_back(kind + "_" + map, c);
    run.results["points"] = c.size();
    return run;
}

Run run_fmt(const json& s) {
    Run run;
    const std::string map = opt<std::string>(s, "/subject/map", "affine_identity");
    const MapToPn f = map_catalog(map);
    const std::string sg = opt<std::string>(s, "/subject/sigma", "e1");
    const CVec sigma = parse_covector(sg, f.target_dim() + 1);
    const double r = opt(s, "/grid/r", 10.0), s0 = opt(s, "/grid/s", 0.5);
    const FmtBalance b = fmt_residual(f, sigma, r, s0);
    const std::string w = map + " sigma=" + sg + " r=" + format_g(r) + " s=" + format_g(s0);
    run.records.push_back(bound_record("first_main_theorem_balance", "first_main_theorem", b.residual, 1e-3, w,
                                       "quadrature error estimate " + format_g(b.err)));
    // m(r) >= 0 turns the balance into N <= T + m(s)
    run.records.push_back(bound_record("nevanlinna_inequality", "nevanlinna_inequality", b.N - b.T - b.m_s, 1e-9, w));
    run.results = {{"N", b.N}, {"m_r", b.m_r}, {"m_s", b.m_s}, {"T", b.T}, {"residual", b.residual}, {"err", b.err}};
    char line[200];
    std::snprintf(line, sizeof line, "residual = %.3e  (N = %.10g, m(r) = %.10g, m(s) = %.10g, T = %.10g, err = %.2e)",
                  b.residual, b.N, b.m_r, b.m_s, b.T, b.err);
    run.notes.push_back(line);
    return run;
}

Run run_crofton(const json& s) {
    Run run;
    const std::string map = opt<std::string>(s, "/subject/map", "cubic");
    const MapToPn f = map_catalog(map);
    const double r = opt(s, "/grid/r", 10.0), s0 = opt(s, "/grid/s", 0.5);
    const int samples = opt(s, "/budget/samples", 2000), k = opt(s, "/budget/k", 1);
    const auto seed = opt<std::uint64_t>(s, "/budget/seed", 1);
    const CroftonResult c = crofton_mc(f, k, r, s0, samples, seed);
    const std::string w = map + " seed=" + std::to_string(seed);
    const double outside = std::max({0.0, c.ci_lo - c.lhs, c.lhs - c.ci_hi});
    run.records.push_back(bound_record("crofton_interval_contains_T", "crofton", outside, 0.0, w,
                                       "95% interval [" + format_g(c.ci_lo) + ", " + format_g(c.ci_hi) + "]"));
    run.records.push_back(bound_record("crofton_relative_gap", "crofton", std::abs(c.mean - c.lhs) / c.lhs, 0.02, w));
    run.results = {{"T", c.lhs},         {"mean", c.mean}, {"sd", c.sd},     {"ci_lo", c.ci_lo},
                   {"ci_hi", c.ci_hi},   {"used", c.used}, {"discarded", c.discarded}};
    return run;
}

json order_json(const OrderEstimate& e) {
    return {{"lambda_hat", e.lambda_hat}, {"slope", e.slope}, {"kappa_hat", e.kappa_hat}, {"r_min", e.r_min},
            {"r_max", e.r_max},           {"residual", e.residual}, {"points", e.points}};
}

std::pair<double, double> window(const json& s, const std::vector<double>& grid) {
    if (!s.contains(ptr("/grid/window"))) return {grid.front(), grid.back()};
    const auto& w = s.at(ptr("/grid/window"));
    return {w[0].get<double>(), w[1].get<double>()};
}

Run run_order(const json& s) {
    Run run;
    const std::string map = opt<std::string>(s, "/subject/map", "exponential");
    const std::string kind = opt<std::string>(s, "/subject/kind", "T");
    const MapToPn f = map_catalog(map);
    json sw = s;
    if (!sw.contains(ptr("/grid/window"))) sw[ptr("/grid/window")] = {5.0, 30.0};
    const auto grid = radius_grid(sw, 1.0, 30.0, 64);
    GrowthCurve c;
    if (kind == "T") {
        c = characteristic(f, grid, opt(s, "/grid/s", 0.0));
    } else if (kind == "M") {
        const ExpPoly h = f.components.back();
        c = max_modulus([h](Complex z) { return h(z); }, grid);
    } else {
        throw Error(ErrorKind::SchemaError, "subject.kind: order fits take T or M");
    }
    const auto [a, b] = window(sw, grid);
    const OrderEstimate e = order_fit(c, a, b);
    run.records.push_back(bound_record("order_fit_finite", "finite_order", std::isfinite(e.lambda_hat) ? 0.0 : 1.0, 0.0,
                                       map, "lambda_hat " + format_g(e.lambda_hat)));
    run.results = order_json(e);
    run.curves.emplace_back(kind + "_" + map, c);
    char line[160];
    std::snprintf(line, sizeof line, "lambda_hat = %.4f on [%g, %g]  (kappa_hat = %.4g, residual = %.3g)", e.lambda_hat,
                  e.r_min, e.r_max, e.kappa_hat, e.residual);
    run.notes.push_back(line);
    return run;
}

Run run_volume(const json& s) {
    Run run;
    const std::string name = single_metric(s, "flat");
    const FinslerMetric F = finsler_catalog(name);
    const BaseModel base = base_model(s, 1);
    const double kappa = opt(s, "/kappa", 1.0), lambda = opt(s, "/lambda", 2.0);
    PEOptions po;
    po.angular = opt(s, "/budget/angular", po.angular);
    po.fiber_polar = po.fiber_azimuth = opt(s, "/budget/fiber", po.fiber_polar);
    const auto grid = radius_grid(s, 1.0, 100.0, 4);
    const auto [a, b] = window(s, grid);
    const VolumeGrowth vg = volume_growth_pe(F, base, kappa, lambda, grid, po);
    run.records.push_back(monotone_record(vg.vol));
    const OrderEstimate ev = order_fit(vg.vol, a, b);
    run.records.push_back(bound_record("volume_finite_order", "finite_order", std::isfinite(ev.lambda_hat) ? 0.0 : 1.0,
                                       0.0, name, "lambda_hat " + format_g(ev.lambda_hat)));
    if (name == "flat") {
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            worst = std::max(worst, rel_diff(vg.vol.values[i], flat_volume_closed_form(base, kappa, lambda, grid[i])));
        run.records.push_back(bound_record("flat_volume_closed_form", "volume_closed_form", worst, 1e-3, name));
    }
    run.results["volume_order"] = order_json(ev);
    run.curves.emplace_back("vol_" + name, vg.vol);
    if (s.contains(ptr("/subject/section"))) {
        const DualSection sigma = section_catalog(s.at(ptr("/subject/section")).get<std::string>());
        const SectionZeroGrowth z = section_zero_growth(F, sigma, base, kappa, lambda, grid, opt(s, "/grid/s", 0.5), po);
        const OrderEstimate en = order_fit(z.N, a, b);
        run.records.push_back(bound_record("section_zero_finite_order", "finite_order",
                                           std::isfinite(en.lambda_hat) ? 0.0 : 1.0, 0.0, sigma.name,
                                           "lambda_hat " + format_g(en.lambda_hat)));
        run.results["section_order"] = order_json(en);
        run.results["fiber_components"] = z.fibers.size();
        run.curves.emplace_back("N_" + sigma.name, z.N);
    }
    return run;
}

/// Errors caused by the request itself rather than by the numerics.
bool is_input_error(ErrorKind k) {
    switch (k) {
    case ErrorKind::SchemaError:
    case ErrorKind::InvalidArgument:
    case ErrorKind::DegenerateMap:
    case ErrorKind::SigmaIdenticallyZero:
    case ErrorKind::WindowTooSmall:
    case ErrorKind::OriginInDivisorImage: return true;
    default: return false;
    }
}

Run dispatch(const json& s) {
    const std::string task = s["task"].get<std::string>();
    if (task == "verify") return run_verify(s);
    if (task == "curvature") return run_curvature(s);
    if (task == "growth") return run_growth(s);
    if (task == "fmt") return run_fmt(s);
    if (task == "crofton") return run_crofton(s);
    if (task == "order") return run_order(s);
    return run_volume(s);
}

json catalog_json() {
    return {{"maps", map_catalog_names()},
            {"finsler_metrics", finsler_catalog_names()},
            {"hermitian_metrics", hermitian_catalog_names()},
            {"sections", section_catalog_names()},
            {"suites", {"identities", "phi_tilde", "base", "sphere", "all"}},
            {"tasks", cli::task_names()}};
}

void write_outputs(const json& s, const Run& run, bool pass, double seconds) {
    const fs::path dir = opt<std::string>(s, "/output", "fnv_out");
    fs::create_directories(dir);
    json report;
    report["task"] = s["task"];
    // the output directory is where the report lives, not part of the result
    json echoed = s;
    echoed.erase("output");
    report["scenario"] = echoed;
    report["status"] = pass ? "PASS" : "FAIL";
    report["records"] = json::array();
    for (const auto& r : run.records) report["records"].push_back(record_json(r));
    report["results"] = run.results;
    report["curves"] = json::array();
    for (const auto& [name, c] : run.curves) {
        report["curves"].push_back({{"name", name}, {"kind", c.kind}, {"file", name + ".csv"}, {"s", c.s}});
        std::ofstream csv(dir / (name + ".csv"));
        write_csv(csv, c);
    }
    const FinslerOptions fo;
    report["environment"] = {{"seed", opt<std::uint64_t>(s, "/budget/seed", 1)},
                             {"finsler_step", fo.step},
                             {"finsler_order", fo.order},
                             {"grid", s.contains("grid") ? s["grid"] : json::object()},
                             {"budget", s.contains("budget") ? s["budget"] : json::object()}};
    std::ofstream(dir / "report.json") << report.dump(2) << '\n';
    // wall time, thread count and location vary between runs, so they stay out of report.json
    std::ofstream(dir / "run_info.json")
        << json{{"wall_seconds", seconds}, {"threads", thread_count()}, {"output", dir.string()}}.dump(2) << '\n';
    if (opt(s, "/plot", false) && !run.curves.empty()) {
        std::ofstream svg(dir / (run.curves.front().first + ".svg"));
        cli::write_svg(svg, run.curves, s["task"].get<std::string>());
    }
}

void print_records(const Run& run) {
    for (const auto& r : run.records) {
        std::printf("%s  [%s] %s  worst=%.3e tol=%.1e", r.pass ? "PASS" : "FAIL", r.tag.c_str(), r.name.c_str(), r.worst,
                    r.tol);
        if (!r.pass && !r.witness.empty()) std::printf("  at %s", r.witness.c_str());
        std::printf("\n");
    }
    for (const auto& n : run.notes) std::printf("%s\n", n.c_str());
}

// Flags write into the scenario object at a JSON pointer, only when given.
struct Overrides {
    std::vector<std::function<void(json&)>> apply;

    template <class T>
    void value(CLI::App* app, const std::string& flag, const char* pointer, const std::string& help) {
        auto store = std::make_shared<T>();
        CLI::Option* o = app->add_option(flag, *store, help);
        apply.push_back([o, store, p = std::string(pointer)](json& s) {
            if (o->count()) s[json::json_pointer(p)] = *store;
        });
    }
    void complex_list(CLI::App* app, const std::string& flag, const char* pointer, const std::string& help) {
        auto store = std::make_shared<std::string>();
        CLI::Option* o = app->add_option(flag, *store, help);
        apply.push_back([o, store, p = std::string(pointer)](json& s) {
            if (o->count()) s[json::json_pointer(p)] = cli::parse_complex_list(*store);
        });
    }
    void window(CLI::App* app) {
        auto store = std::make_shared<std::vector<double>>();
        CLI::Option* o = app->add_option("--window", *store, "order-fit window: lo hi")->expected(2);
        apply.push_back([o, store](json& s) {
            if (o->count()) s[json::json_pointer("/grid/window")] = *store;
        });
    }
    void flag(CLI::App* app, const std::string& name, const char* pointer, const std::string& help) {
        CLI::Option* o = app->add_flag(name, help);
        apply.push_back([o, p = std::string(pointer)](json& s) {
            if (o->count()) s[json::json_pointer(p)] = true;
        });
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finsler bundle curvature and Nevanlinna growth runner"};
    app.require_subcommand(1);
    std::map<CLI::App*, std::string> task_of;
    std::map<CLI::App*, std::string> scenario_path;
    Overrides ov;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario_path[sub], "scenario JSON file");
        ov.value<std::string>(sub, "--out", "/output", "output directory (default fnv_out)");
        ov.flag(sub, "--plot", "/plot", "also write an SVG log-log plot");
        ov.value<long long>(sub, "--seed", "/budget/seed", "random seed");
        ov.value<int>(sub, "--base-n", "/base/n", "base dimension");
        ov.value<double>(sub, "--base-c", "/base/c", "exhaustion constant c");
    };
    auto grid = [&](CLI::App* sub) {
        ov.value<double>(sub, "--r-min", "/grid/r_min", "smallest radius");
        ov.value<double>(sub, "--r-max", "/grid/r_max", "largest radius");
        ov.value<int>(sub, "--per-decade", "/grid/per_decade", "grid points per decade");
        ov.value<double>(sub, "--s", "/grid/s", "inner radius s");
    };
    auto map = [&](CLI::App* sub) {
        ov.value<std::string>(sub, "--map", "/subject/map", "map catalog entry");
        ov.value<std::string>(sub, "--sigma", "/subject/sigma", "covector: e<i> or comma list");
    };

    CLI::App* verify = app.add_subcommand("verify", "run identity, positivity and base-space check suites");
    ov.value<std::string>(verify, "--suite", "/suite", "identities | phi_tilde | base | sphere | all");
    ov.value<std::vector<std::string>>(verify, "--metric", "/metric", "Finsler catalog entries (default: all)");
    ov.value<double>(verify, "--lambda", "/lambda", "order lambda for phi~");
    ov.value<int>(verify, "--probes", "/budget/probes", "base probes per metric");
    ov.value<int>(verify, "--mc", "/budget/mc", "Monte Carlo budget of the sphere suite");

    CLI::App* curvature = app.add_subcommand("curvature", "curvature data of one metric at one point");
    ov.value<std::string>(curvature, "--metric", "/metric", "Finsler catalog entry");
    ov.complex_list(curvature, "--z", "/point/z", "base point, re:im,...");
    ov.complex_list(curvature, "--v", "/point/v", "fiber vector, re:im,re:im");
    ov.value<double>(curvature, "--kappa", "/kappa", "kappa of phi~");
    ov.value<double>(curvature, "--lambda", "/lambda", "lambda of phi~");

    CLI::App* growth = app.add_subcommand("growth", "T, N, m or M curve of a catalog map");
    map(growth);
    ov.value<std::string>(growth, "--kind", "/subject/kind", "T | N | m | M");
    grid(growth);

    CLI::App* fmt = app.add_subcommand("fmt", "first main theorem balance at one radius");
    map(fmt);
    ov.value<double>(fmt, "--r", "/grid/r", "outer radius");
    ov.value<double>(fmt, "--s", "/grid/s", "inner radius");

    CLI::App* crofton = app.add_subcommand("crofton", "Monte Carlo average of hyperplane counting functions");
    ov.value<std::string>(crofton, "--map", "/subject/map", "map catalog entry");
    ov.value<int>(crofton, "--k", "/budget/k", "plane codimension (1)");
    ov.value<double>(crofton, "--r", "/grid/r", "outer radius");
    ov.value<double>(crofton, "--s", "/grid/s", "inner radius");
    ov.value<int>(crofton, "--samples", "/budget/samples", "number of planes");

    CLI::App* order = app.add_subcommand("order", "order of growth from a log-log fit");
    ov.value<std::string>(order, "--map", "/subject/map", "map catalog entry");
    ov.value<std::string>(order, "--kind", "/subject/kind", "T | M");
    grid(order);
    ov.window(order);

    CLI::App* volume = app.add_subcommand("volume", "volume and section-zero growth on P(E)");
    ov.value<std::string>(volume, "--metric", "/metric", "Finsler catalog entry");
    ov.value<std::string>(volume, "--section", "/subject/section", "section catalog entry");
    ov.value<double>(volume, "--kappa", "/kappa", "kappa of phi~");
    ov.value<double>(volume, "--lambda", "/lambda", "lambda of phi~");
    ov.value<int>(volume, "--angular", "/budget/angular", "base circle nodes");
    ov.value<int>(volume, "--fiber", "/budget/fiber", "fiber nodes per direction");
    grid(volume);
    ov.window(volume);

    CLI::App* catalog = app.add_subcommand("catalog", "list catalog entries");

    for (auto* sub : {verify, curvature, growth, fmt, crofton, order, volume}) {
        common(sub);
        task_of[sub] = sub->get_name();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kSchema;
    }

    if (catalog->parsed()) {
        std::cout << catalog_json().dump(2) << '\n';
        return kOk;
    }
    CLI::App* sub = app.get_subcommands().front();

    const auto t0 = std::chrono::steady_clock::now();
    json scenario;
    try {
        const std::string& path = scenario_path[sub];
        scenario = path.empty() ? json::object() : cli::load_scenario(path);
        if (scenario.contains("task") && scenario["task"] != task_of[sub])
            throw Error(ErrorKind::SchemaError, "scenario task '" + scenario["task"].get<std::string>() +
                                                    "' does not match subcommand '" + task_of[sub] + "'");
        scenario["task"] = task_of[sub];
        for (const auto& f : ov.apply) f(scenario);
        cli::validate_scenario(scenario);
    } catch (const Error& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return kSchema;
    }

    Run run;
    try {
        run = dispatch(scenario);
    } catch (const Error& e) {
        if (is_input_error(e.kind())) {
            std::cerr << "schema error: " << e.what() << '\n';
            return kSchema;
        }
        std::cerr << "numerical breakdown: " << e.what() << '\n';
        return kNumerical;
    }

    print_records(run);
    const bool pass = all_pass(run.records);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    try {
        write_outputs(scenario, run, pass, seconds);
    } catch (const std::exception& e) {
        std::cerr << "cannot write outputs: " << e.what() << '\n';
        return kSchema;
    }
    std::printf("%s: %zu checks, %s\n", task_of[sub].c_str(), run.records.size(), pass ? "all PASS" : "FAIL");
    return pass ? kOk : kCheckFailure;
}
