#pragma once

// Value distribution of holomorphic curves f: C -> P^N and growth of analytic
// sets in P(E) for a rank-2 bundle over C.
//
// Balls are X[t] = {|z| < t}. With g(rho) = d/drho (mass of f*omega on X[rho]),
//   T(r, s) = int_s^r dt/t int_0^t g = int_0^r g(rho) log(r / max(s, rho)) drho,
// so each characteristic or counting curve is one weighted radial integral.

#include "fnv/finsler.hpp"
#include "fnv/holomorphic.hpp"

#include <array>
#include <limits>
#include <optional>
#include <ostream>
#include <random>

namespace fnv {

struct GrowthCurve {
    std::string kind;  // T, N, m, M, vol
    std::vector<double> r;
    double s = 0.0;
    std::vector<double> values, err;

    std::size_t size() const { return r.size(); }
    double at(double radius) const {
        for (std::size_t i = 0; i < r.size(); ++i)
            if (std::abs(r[i] - radius) <= 1e-12 * radius) return values[i];
        throw Error(ErrorKind::InvalidArgument, "radius is not on the curve grid");
    }
};

inline void write_csv(std::ostream& out, const GrowthCurve& c) {
    out << "r,value,err\n";
    out.precision(17);
    for (std::size_t i = 0; i < c.size(); ++i) out << c.r[i] << ',' << c.values[i] << ',' << c.err[i] << '\n';
}

struct GrowthOptions {
    int panel_nodes = 8;  // Gauss nodes per radial panel; the half rule gives the error
    double panel_ratio = 1.5;
    double panel_width = std::numeric_limits<double>::infinity();
    int angular_min = 64;
    int angular_max = 1 << 14;
    double angular_tol = 1e-12;
};

namespace detail {

inline void require_grid(std::span<const double> r) {
    if (r.empty()) throw Error(ErrorKind::InvalidArgument, "radius grid is empty");
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] > 0.0) || !std::isfinite(r[i])) throw Error(ErrorKind::InvalidArgument, "radii must be positive");
        if (i > 0 && !(r[i] > r[i - 1])) throw Error(ErrorKind::InvalidArgument, "radius grid must increase");
    }
}

/// Breakpoints 0 = b0 < b1 < ... covering [0, r_max] that contain s and every
/// grid radius; panels away from 0 are geometric with bounded ratio and width.
inline std::vector<double> radial_breaks(std::span<const double> grid, double s, double ratio, double width,
                                         bool log_kernel) {
    std::vector<double> key{0.0};
    if (s > 0.0) key.push_back(s);
    key.insert(key.end(), grid.begin(), grid.end());
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    std::vector<double> out{0.0};
    for (std::size_t k = 0; k + 1 < key.size(); ++k) {
        const double a = key[k], b = key[k + 1];
        if (a == 0.0) {
            // with s = 0 the kernel log(r / rho) is singular at 0: grade panels toward it
            const int m = std::max(1, static_cast<int>(std::ceil(b / width)));
            const double first = b / m;
            if (log_kernel && s == 0.0)
                for (int j = 40; j >= 1; --j) out.push_back(first * std::ldexp(1.0, -j));
            for (int j = 1; j <= m; ++j) out.push_back(b * j / m);
        } else {
            int m = 1;
            while (std::pow(b / a, 1.0 / m) > ratio || b * (1.0 - std::pow(a / b, 1.0 / m)) > width) ++m;
            for (int j = 1; j <= m; ++j) out.push_back(a * std::pow(b / a, static_cast<double>(j) / m));
        }
        out.back() = b;
    }
    return out;
}

struct RadialNode {
    double x;
    double w_hi, w_lo;  // weights of the full and half Gauss rules (one of them may be 0)
    std::size_t panel;
};

inline std::vector<RadialNode> radial_nodes(std::span<const double> breaks, int p) {
    std::vector<RadialNode> out;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const Rule1D hi = gauss_legendre(p, breaks[k], breaks[k + 1]);
        const Rule1D lo = gauss_legendre(std::max(1, p / 2), breaks[k], breaks[k + 1]);
        for (std::size_t i = 0; i < hi.size(); ++i) out.push_back({hi.x[i], hi.w[i], 0.0, k});
        for (std::size_t i = 0; i < lo.size(); ++i) out.push_back({lo.x[i], 0.0, lo.w[i], k});
    }
    return out;
}

struct Sampled {
    double value = 0.0;
    double err = 0.0;
};

/// Integrals of g against log(r / max(s, rho)) (log kernel) or 1 over [0, r]
/// for each grid radius. The error adds |full - half rule| to the propagated
/// pointwise errors of g.
template <class G>
GrowthCurve radial_curve(std::string kind, G&& g, std::span<const double> grid, double s, bool log_kernel,
                         const GrowthOptions& opt) {
    require_grid(grid);
    const auto breaks = radial_breaks(grid, s, opt.panel_ratio, opt.panel_width, log_kernel);
    const auto nodes = radial_nodes(breaks, opt.panel_nodes);
    std::vector<Sampled> vals(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) { vals[i] = g(nodes[i].x); });
    GrowthCurve out;
    out.kind = std::move(kind);
    out.s = s;
    out.r.assign(grid.begin(), grid.end());
    for (double r : grid) {
        std::vector<double> hi, lo, pe;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto& nd = nodes[i];
            if (breaks[nd.panel + 1] > r * (1.0 + 1e-14)) continue;
            const double k = log_kernel ? std::log(r / std::max(s, nd.x)) : 1.0;
            hi.push_back(nd.w_hi * k * vals[i].value);
            lo.push_back(nd.w_lo * k * vals[i].value);
            pe.push_back(nd.w_hi * std::abs(k) * vals[i].err);
        }
        const double vh = pairwise_sum(hi), vl = pairwise_sum(lo);
        out.values.push_back(vh);
        out.err.push_back(std::abs(vh - vl) + pairwise_sum(pe));
    }
    return out;
}

/// Mean over theta of h(t e^{i theta}) by the periodic trapezoid rule, doubled
/// until two successive levels agree. `offset` rotates the nodes.
template <class H>
Sampled circle_mean(H&& h, double t, const GrowthOptions& opt, double offset = 0.0) {
    int m = opt.angular_min;
    auto level_sum = [&](int count, int stride, int start) {
        std::vector<double> xs;
        for (int j = start; j < count; j += stride)
            xs.push_back(h(std::polar(t, 2.0 * kPi * j / count + offset)));
        return pairwise_sum(xs);
    };
    double sum = level_sum(m, 1, 0);
    double mean = sum / m;
    while (true) {
        const double odd = level_sum(2 * m, 2, 1);
        const double next = (sum + odd) / (2 * m);
        const double diff = std::abs(next - mean);
        sum += odd;
        m *= 2;
        mean = next;
        if (diff <= opt.angular_tol * (1.0 + std::abs(mean))) return {mean, diff};
        if (m >= opt.angular_max) return {mean, diff};
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Curves in P^N.

/// Coefficient of f*omega = ddc log ||f||^2 at z, from f and f' exactly:
/// (||f||^2 ||f'||^2 - |<f', f>|^2) / ||f||^4.
inline double pullback_fs_density(const MapToPn& f, Complex z) {
    CVec a = f(z);
    CVec b(a.size());
    for (std::size_t i = 0; i < f.components.size(); ++i)
        b(static_cast<Eigen::Index>(i)) = f.components[i].derivative()(z);
    const double scale = a.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw Error(ErrorKind::IndeterminacyPoint, "all components vanish");
    if (!std::isfinite(scale) || !b.allFinite()) throw Error(ErrorKind::NonFinite, "map overflows");
    a /= scale;
    b /= scale;
    const double na = a.squaredNorm();
    const double num = na * b.squaredNorm() - std::norm(a.dot(b));
    return std::max(num, 0.0) / (na * na);
}

/// f is linearly nondegenerate when its Wronskian is nonzero somewhere.
inline bool is_linearly_nondegenerate(const MapToPn& f) {
    const int N = f.target_dim();
    for (Complex z0 : {Complex(0.31, 0.17), Complex(-0.6, 0.9), Complex(1.3, -0.4)}) {
        CMat W(N + 1, N + 1);
        for (int i = 0; i <= N; ++i) {
            ExpPoly d = f.components[static_cast<std::size_t>(i)];
            for (int k = 0; k <= N; ++k) {
                W(k, i) = d(z0);
                d = d.derivative();
            }
        }
        Eigen::FullPivLU<CMat> lu(W);
        lu.setThreshold(1e-10);
        if (lu.rank() == N + 1) return true;
    }
    return false;
}

/// T_f(r, s) on C for each r in the grid.
inline GrowthCurve characteristic(const MapToPn& f, std::span<const double> r_grid, double s,
                                  const GrowthOptions& opt = {}) {
    if (s < 0.0) throw Error(ErrorKind::InvalidArgument, "base radius must be nonnegative");
    auto g = [&](double rho) -> detail::Sampled {
        const auto m = detail::circle_mean([&](Complex z) { return pullback_fs_density(f, z); }, rho, opt);
        return {2.0 * rho * m.value, 2.0 * rho * m.err};
    };
    return detail::radial_curve("T", g, r_grid, s, true, opt);
}

// ---------------------------------------------------------------------------
// Point divisors on C.

/// N_Z(r, s) = sum mult log(r / max(s, |z_j|)) over |z_j| <= r; exact.
inline GrowthCurve counting(std::span<const Root> points, std::span<const double> r_grid, double s) {
    detail::require_grid(r_grid);
    if (s < 0.0) throw Error(ErrorKind::InvalidArgument, "base radius must be nonnegative");
    GrowthCurve out;
    out.kind = "N";
    out.s = s;
    out.r.assign(r_grid.begin(), r_grid.end());
    for (double r : r_grid) {
        std::vector<double> terms;
        for (const auto& p : points) {
            const double a = std::abs(p.z);
            if (a > r) continue;
            if (s == 0.0 && a == 0.0)
                throw Error(ErrorKind::OriginInDivisorImage, "divisor contains the origin; use s > 0");
            terms.push_back(p.multiplicity * std::log(r / std::max(s, a)));
        }
        out.values.push_back(pairwise_sum(terms));
        out.err.push_back(0.0);
    }
    return out;
}

/// Zeros of sigma o f in the disc of radius r_max.
inline std::vector<Root> pullback_divisor(const MapToPn& f, const CVec& sigma, double r_max) {
    const ExpPoly h = f.pullback(sigma);
    if (h.is_zero()) throw Error(ErrorKind::SigmaIdenticallyZero, "image of f lies in the hyperplane");
    if (h.normalized().terms.size() == 1 && h.normalized().terms[0].coeffs.size() == 1) return {};
    return roots_in_disc(h, r_max);
}

inline GrowthCurve counting(const MapToPn& f, const CVec& sigma, std::span<const double> r_grid, double s) {
    detail::require_grid(r_grid);
    const auto pts = pullback_divisor(f, sigma, r_grid.back());
    return counting(pts, r_grid, s);
}

// ---------------------------------------------------------------------------
// Proximity and the first main theorem.

/// m_sigma(r): circle mean of log(||f|| ||sigma|| / |<sigma, f>|), which is >= 0.
inline GrowthCurve proximity(const MapToPn& f, const CVec& sigma, std::span<const double> r_grid,
                             const GrowthOptions& opt = {}, int max_retries = 3) {
    if (sigma.size() != f.target_dim() + 1) throw Error(ErrorKind::InvalidArgument, "covector has wrong length");
    const double sn = sigma.norm();
    if (!(sn > 0.0)) throw Error(ErrorKind::SigmaIdenticallyZero, "covector is zero");
    const CVec u = sigma / sn;
    std::vector<double> grid(r_grid.begin(), r_grid.end());
    GrowthCurve out;
    out.kind = "m";
    out.r = grid;
    out.values.resize(grid.size());
    out.err.resize(grid.size());
    auto integrand = [&](Complex z) {
        CVec a = f(z);
        const double scale = a.cwiseAbs().maxCoeff();
        if (!(scale > 0.0)) throw Error(ErrorKind::IndeterminacyPoint, "all components vanish");
        a /= scale;
        const double p = std::abs((u.transpose() * a)(0, 0));
        if (!(p > 0.0)) throw Error(ErrorKind::SigmaVanishesOnShell, "node on the zero set");
        return std::log(a.norm() / p);
    };
    parallel_for(grid.size(), [&](std::size_t i) {
        for (int attempt = 0;; ++attempt) {
            try {
                const auto m = detail::circle_mean(integrand, grid[i], opt, attempt * 0.37 * kPi / opt.angular_max);
                out.values[i] = m.value;
                out.err[i] = m.err;
                return;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::SigmaVanishesOnShell || attempt >= max_retries) throw;
            }
        }
    });
    return out;
}

struct FmtBalance {
    double N = 0.0, m_r = 0.0, m_s = 0.0, T = 0.0;
    double residual = 0.0;  // |N + m(r) - m(s) - T|
    double err = 0.0;       // sum of the quadrature error estimates
};

inline FmtBalance fmt_residual(const MapToPn& f, const CVec& sigma, double r, double s, const GrowthOptions& opt = {}) {
    if (!(s > 0.0 && r > s)) throw Error(ErrorKind::InvalidArgument, "need 0 < s < r");
    const std::vector<double> g{r};
    const auto T = characteristic(f, g, s, opt);
    const auto N = counting(f, sigma, g, s);
    const auto m = proximity(f, sigma, std::vector<double>{s, r}, opt);
    FmtBalance b;
    b.T = T.values[0];
    b.N = N.values[0];
    b.m_s = m.values[0];
    b.m_r = m.values[1];
    b.residual = std::abs(b.N + b.m_r - b.m_s - b.T);
    b.err = T.err[0] + m.err[0] + m.err[1];
    return b;
}

// ---------------------------------------------------------------------------
// Crofton average over hyperplanes.

struct CroftonResult {
    double lhs = 0.0;  // T(r, s)
    double mean = 0.0, sd = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;  // 95% normal interval for the mean
    int used = 0, discarded = 0;
    bool contains(double x) const { return x >= ci_lo && x <= ci_hi; }
};

/// Hyperplanes {a . w = 0} with a a normalized complex Gaussian vector, which
/// is the unitary-invariant distribution on the dual projective space.
inline CroftonResult crofton_mc(const MapToPn& f, int k, double r, double s, int samples, std::uint64_t seed,
                                const GrowthOptions& opt = {}) {
    if (k != 1) throw Error(ErrorKind::InvalidArgument, "only k = 1 is supported on a one-dimensional base");
    if (!(s > 0.0 && r > s)) throw Error(ErrorKind::InvalidArgument, "need 0 < s < r");
    if (samples < 2) throw Error(ErrorKind::InvalidArgument, "need at least two samples");
    if (!is_linearly_nondegenerate(f)) throw Error(ErrorKind::DegenerateMap, "image lies in a hyperplane");
    const int dim = f.target_dim() + 1;
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<CVec> planes(static_cast<std::size_t>(samples), CVec(dim));
    for (auto& a : planes) {
        for (int i = 0; i < dim; ++i) a(i) = Complex(gauss(gen), gauss(gen));
        a.normalize();
    }
    std::vector<double> counts(planes.size(), 0.0);
    std::vector<char> ok(planes.size(), 1);
    const std::vector<double> grid{r};
    parallel_for(planes.size(), [&](std::size_t i) {
        try {
            counts[i] = counting(f, planes[i], grid, s).values[0];
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::RootFindingFailure && e.kind() != ErrorKind::SigmaIdenticallyZero) throw;
            ok[i] = 0;
        }
    });
    std::vector<double> kept;
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (ok[i]) kept.push_back(counts[i]);
    CroftonResult out;
    out.used = static_cast<int>(kept.size());
    out.discarded = samples - out.used;
    if (out.used < 2) throw Error(ErrorKind::RootFindingFailure, "too few usable samples");
    out.mean = pairwise_sum(kept) / out.used;
    std::vector<double> sq;
    for (double x : kept) sq.push_back((x - out.mean) * (x - out.mean));
    out.sd = std::sqrt(pairwise_sum(sq) / (out.used - 1));
    const double half = 1.959963984540054 * out.sd / std::sqrt(static_cast<double>(out.used));
    out.ci_lo = out.mean - half;
    out.ci_hi = out.mean + half;
    out.lhs = characteristic(f, grid, s, opt).values[0];
    return out;
}

// ---------------------------------------------------------------------------
// Maximum modulus and order.

/// M(r) = log max_{|z| = r} |h|: grid maximum refined by golden-section search.
inline GrowthCurve max_modulus(const std::function<Complex(Complex)>& h, std::span<const double> r_grid,
                               int nodes = 2048) {
    detail::require_grid(r_grid);
    GrowthCurve out;
    out.kind = "M";
    out.r.assign(r_grid.begin(), r_grid.end());
    for (double r : r_grid) {
        auto val = [&](double th) { return std::log(std::abs(h(std::polar(r, th)))); };
        const double dth = 2.0 * kPi / nodes;
        int best = 0;
        double bv = val(0.0);
        for (int j = 1; j < nodes; ++j) {
            const double v = val(j * dth);
            if (v > bv) {
                bv = v;
                best = j;
            }
        }
        double a = (best - 1) * dth, b = (best + 1) * dth;
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - phi * (b - a), d = a + phi * (b - a);
        double fc = val(c), fd = val(d);
        for (int it = 0; it < 60; ++it) {
            if (fc > fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = val(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = val(d);
            }
        }
        const double refined = std::max({bv, fc, fd});
        out.values.push_back(refined);
        out.err.push_back(refined - bv);
    }
    return out;
}

struct OrderEstimate {
    double lambda_hat = 0.0;  // slope clamped at 0
    double slope = 0.0;       // unclamped least-squares slope
    double kappa_hat = 0.0;   // exp(intercept)
    double r_min = 0.0, r_max = 0.0;
    double residual = 0.0;  // max |log value - fitted line|
    int points = 0;
};

/// Least-squares fit of log value against log r on [r_min, r_max].
inline OrderEstimate order_fit(const GrowthCurve& c, double r_min, double r_max) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c.r[i] < r_min * (1.0 - 1e-12) || c.r[i] > r_max * (1.0 + 1e-12)) continue;
        if (!(c.values[i] > 0.0)) throw Error(ErrorKind::NotPositive, "curve is not positive on the fit window");
        x.push_back(std::log(c.r[i]));
        y.push_back(std::log(c.values[i]));
    }
    if (x.size() < 5) throw Error(ErrorKind::WindowTooSmall, "fewer than 5 grid points in the fit window");
    const double n = static_cast<double>(x.size());
    const double mx = pairwise_sum(x) / n, my = pairwise_sum(y) / n;
    std::vector<double> sxy, sxx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy.push_back((x[i] - mx) * (y[i] - my));
        sxx.push_back((x[i] - mx) * (x[i] - mx));
    }
    OrderEstimate o;
    o.slope = pairwise_sum(sxy) / pairwise_sum(sxx);
    const double intercept = my - o.slope * mx;
    o.lambda_hat = std::max(o.slope, 0.0);
    o.kappa_hat = std::exp(intercept);
    o.r_min = r_min;
    o.r_max = r_max;
    o.points = static_cast<int>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        o.residual = std::max(o.residual, std::abs(y[i] - intercept - o.slope * x[i]));
    return o;
}

// ---------------------------------------------------------------------------
// The sphere measure d^c tau' ^ psi^{n-1}.

/// Total mass of d^c log||z||^2 ^ psi^{n-1} on {||z|| = r}. The density with
/// respect to surface measure is the Lebesgue density of the top form
/// d||z|| ^ d^c tau' ^ psi^{n-1}, whose (1,1) factor has coefficients
/// (a b^* + b a^*) / 2 with a = d||z||/dz and b = d tau'/dz.
inline double sphere_measure_check(int n, double r, int budget, ShellRule rule = ShellRule::MonteCarlo,
                                   std::uint64_t seed = 7) {
    if (n < 1 || !(r > 0.0) || budget < 1) throw Error(ErrorKind::InvalidArgument, "need n >= 1, r > 0, budget >= 1");
    ShellSpec spec;
    spec.radius = r;
    spec.seed = seed;
    if (n == 1) {
        spec.rule = ShellRule::Trapezoid;
        spec.node_count = budget;
    } else if (rule == ShellRule::Hopf) {
        spec.rule = rule;
        spec.node_count = std::max(2, static_cast<int>(std::cbrt(static_cast<double>(budget))));
    } else {
        spec.rule = ShellRule::MonteCarlo;
        spec.node_count = budget;
    }
    const ShellNodes nodes = shell_nodes(n, spec);
    const double area = 2.0 * std::pow(kPi, n) * std::pow(r, 2 * n - 1) / factorial(n - 1);
    std::vector<double> terms(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) {
        const CVec& z = nodes.z[i];
        const CVec a = z.conjugate() / (2.0 * z.norm());
        const CVec b = BaseModel::dtau_prime(z);
        std::vector<Form11> forms{Form11{0.5 * (a * b.adjoint() + b * a.adjoint())}};
        for (int k = 1; k < n; ++k) forms.push_back(BaseModel::psi(z));
        terms[i] = nodes.w[i] * wedge_density(forms);
    });
    return area * pairwise_sum(terms);
}

// ---------------------------------------------------------------------------
// P(E) for a rank-2 Finsler bundle over C.

/// Sections of E* given by their two components.
struct DualSection {
    ExpPoly s0, s1;
    std::string name;
    CVec operator()(Complex z) const { return cvec({s0(z), s1(z)}); }
};

inline DualSection section_catalog(const std::string& name) {
    if (name == "constant") return {ExpPoly::constant(1.0), ExpPoly::constant(0.0), name};
    if (name == "linear") return {ExpPoly::monomial(1), ExpPoly::constant(1.0), name};
    if (name == "fiber_at_one")
        return {ExpPoly::polynomial({-1.0, 1.0}), ExpPoly::polynomial({0.0, -1.0, 1.0}), name};
    throw Error(ErrorKind::InvalidArgument, "unknown section " + name);
}

inline std::vector<std::string> section_catalog_names() { return {"constant", "linear", "fiber_at_one"}; }

struct PEOptions {
    int angular = 16;  // base circle nodes; the half rule gives the angular error
    int fiber_polar = 8, fiber_azimuth = 8;
    GrowthOptions radial{6, 2.0, std::numeric_limits<double>::infinity(), 64, 1 << 10, 1e-10};
    FinslerOptions finsler;
};

namespace detail {

inline void require_rank2_curve(const FinslerMetric& F) {
    if (F.rank != 2 || F.base_dim != 1)
        throw Error(ErrorKind::InvalidArgument, "P(E) growth is implemented for rank 2 over a one-dimensional base");
}

/// phi~ in the (z, w) chart v = (1, w): ddc log G pulled back plus ddc(kappa rho^lambda).
inline CMat phi_tilde_chart0(const FinslerMetric& F, const BaseModel& base, double kappa, double lambda,
                             const CVec& z, Complex w, const FinslerOptions& opt) {
    const CVec v = cvec({1.0, w});
    CMat P = drop_index(chern_form_fast(F, z, v, opt).full(), 1);
    P.topLeftCorner(1, 1) += ddc_rho_power(base, z, kappa, lambda);
    return P;
}

/// Fixed-count angular mean with the even-node sub-rule as its error.
template <class H>
Sampled fixed_circle_mean(H&& h, double t, int m) {
    std::vector<double> all(static_cast<std::size_t>(m)), even;
    parallel_for(all.size(), [&](std::size_t j) { all[j] = h(std::polar(t, 2.0 * kPi * static_cast<double>(j) / m)); });
    for (std::size_t j = 0; j < all.size(); j += 2) even.push_back(all[j]);
    const double mean = pairwise_sum(all) / m;
    const double half = pairwise_sum(even) / static_cast<double>(even.size());
    return {mean, std::abs(mean - half)};
}

} // namespace detail

struct VolumeGrowth {
    GrowthCurve vol;
    std::optional<GrowthCurve> section_integral;  // truncated integral of |sigma~|^2 e^{-kappa rho^lambda} Phi~
};

/// vol(Y[r]) = int over pi^{-1}(X[r]) of phi~^{n+r}, fiber first. With a section,
/// also the truncated integral of |sigma~|^2_{l~} e^{-kappa rho^lambda} Phi~ on the same nodes.
inline VolumeGrowth volume_growth_pe(const FinslerMetric& F, const BaseModel& base, double kappa, double lambda,
                                     std::span<const double> r_grid, const PEOptions& opt = {},
                                     const DualSection* sigma = nullptr, const HermitianMetricField& det_metric = {}) {
    detail::require_rank2_curve(F);
    const PlaneRule fiber = stereographic_rule(opt.fiber_polar, opt.fiber_azimuth);
    const std::size_t nf = fiber.w.size();
    // Per base point: fiber integrals of the volume density and of the weighted section density.
    auto fiber_integrals = [&](Complex zc) -> std::pair<double, double> {
        const CVec z = cvec({zc});
        const double damp = sigma ? std::exp(-kappa * std::pow(base.rho(z), lambda)) : 0.0;
        std::vector<double> a(nf), b(nf);
        for (std::size_t i = 0; i < nf; ++i) {
            const CMat P = detail::phi_tilde_chart0(F, base, kappa, lambda, z, fiber.w[i], opt.finsler);
            const double dens = Form11{P}.volume_density();
            if (!(dens > 0.0)) throw Error(ErrorKind::NotPositive, "phi~ is not positive on a node");
            a[i] = fiber.weight[i] * dens;
            if (sigma) {
                const double l = section_lift(F, (*sigma)(zc), z, cvec({1.0, fiber.w[i]}), det_metric, opt.finsler).l_tilde;
                b[i] = a[i] * l * l * damp;
            }
        }
        return {pairwise_sum(a), pairwise_sum(b)};
    };
    // One pass over the base nodes fills both profiles.
    auto profile = [&](double rho) {
        std::array<detail::Sampled, 2> out{};
        std::vector<std::pair<double, double>> vals(static_cast<std::size_t>(opt.angular));
        for (int j = 0; j < opt.angular; ++j)
            vals[static_cast<std::size_t>(j)] = fiber_integrals(std::polar(rho, 2.0 * kPi * j / opt.angular));
        for (int c = 0; c < 2; ++c) {
            std::vector<double> all, even;
            for (std::size_t j = 0; j < vals.size(); ++j) {
                const double x = c == 0 ? vals[j].first : vals[j].second;
                all.push_back(x);
                if (j % 2 == 0) even.push_back(x);
            }
            const double mean = pairwise_sum(all) / static_cast<double>(all.size());
            const double half = pairwise_sum(even) / static_cast<double>(even.size());
            out[static_cast<std::size_t>(c)] = {2.0 * kPi * rho * mean, 2.0 * kPi * rho * std::abs(mean - half)};
        }
        return out;
    };
    detail::require_grid(r_grid);
    const auto breaks = detail::radial_breaks(r_grid, 0.0, opt.radial.panel_ratio, opt.radial.panel_width, false);
    const auto nodes = detail::radial_nodes(breaks, opt.radial.panel_nodes);
    std::vector<std::array<detail::Sampled, 2>> vals(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) { vals[i] = profile(nodes[i].x); });
    auto assemble = [&](int c, std::string kind) {
        GrowthCurve out;
        out.kind = std::move(kind);
        out.r.assign(r_grid.begin(), r_grid.end());
        for (double r : r_grid) {
            std::vector<double> hi, lo, pe;
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                if (breaks[nodes[i].panel + 1] > r * (1.0 + 1e-14)) continue;
                const auto& sv = vals[i][static_cast<std::size_t>(c)];
                hi.push_back(nodes[i].w_hi * sv.value);
                lo.push_back(nodes[i].w_lo * sv.value);
                pe.push_back(nodes[i].w_hi * sv.err);
            }
            const double vh = pairwise_sum(hi);
            out.values.push_back(vh);
            out.err.push_back(std::abs(vh - pairwise_sum(lo)) + pairwise_sum(pe));
        }
        return out;
    };
    VolumeGrowth res;
    res.vol = assemble(0, "vol");
    if (sigma) res.section_integral = assemble(1, "section_integral");
    return res;
}

/// Closed form of vol(Y[r]) for G = |v|^2 over C: r d/dr (kappa rho(r)^lambda).
inline double flat_volume_closed_form(const BaseModel& base, double kappa, double lambda, double r) {
    const double L = std::log((1.0 + r * r) / base.sigma_floor);
    const double rl = std::pow(base.rho(cvec({r})), lambda);
    return kappa * lambda * r * r * (base.c - 2.0 / L) / (1.0 + r * r) * rl;
}

/// Order of vanishing of h at z0, counting derivatives below `tol` relative to the
/// largest coefficient magnitude seen.
inline int vanishing_order(const ExpPoly& h, Complex z0, double tol = 1e-10, int max_order = 32) {
    ExpPoly d = h;
    double scale = 1.0;
    for (int k = 0; k < max_order; ++k) {
        const double a = std::abs(d(z0));
        if (a > tol * scale) return k;
        scale = std::max(scale, a);
        d = d.derivative();
        if (d.is_zero()) return max_order;
    }
    return max_order;
}

struct FiberComponent {
    Complex z;
    int multiplicity = 1;
    double mass = 0.0;  // integral of phi~ over the fiber, numerically
};

struct SectionZeroGrowth {
    GrowthCurve N;      // graph plus fibers
    GrowthCurve graph;  // graph part alone
    std::vector<FiberComponent> fibers;
};

/// Coefficient of phi~ pulled back to the base along the graph z -> [v(z)],
/// v = (-sigma_1, sigma_0): J^T (ddc log G) J^* plus ddc(kappa rho^lambda), J = (1, v').
inline double graph_density(const FinslerMetric& F, const BaseModel& base, double kappa, double lambda,
                            const DualSection& sigma, Complex zc, const FinslerOptions& opt = {}) {
    const CVec z = cvec({zc});
    const CVec v = cvec({-sigma.s1(zc), sigma.s0(zc)});
    const CVec dv = cvec({-sigma.s1.derivative()(zc), sigma.s0.derivative()(zc)});
    const CMat full = chern_form_fast(F, z, v, opt).full();
    const CVec J = cvec({1.0, dv(0), dv(1)});
    const Complex h = (J.transpose() * full * J.conjugate())(0, 0);
    return h.real() + ddc_rho_power(base, z, kappa, lambda)(0, 0).real();
}

/// Counting function of Z = {sigma~ = 0} in P(E): the graph over {sigma != 0}
/// plus one fiber per common zero of the components in the disc.
inline SectionZeroGrowth section_zero_growth(const FinslerMetric& F, const DualSection& sigma, const BaseModel& base,
                                             double kappa, double lambda, std::span<const double> r_grid, double s,
                                             const PEOptions& opt = {}) {
    detail::require_rank2_curve(F);
    if (sigma.s0.is_zero() && sigma.s1.is_zero())
        throw Error(ErrorKind::SigmaIdenticallyZero, "section vanishes identically");
    detail::require_grid(r_grid);
    SectionZeroGrowth out;
    // Common zeros: roots of the nonzero component where the other one vanishes too.
    const ExpPoly& lead = sigma.s0.is_zero() ? sigma.s1 : sigma.s0;
    const ExpPoly& other = sigma.s0.is_zero() ? sigma.s0 : sigma.s1;
    const bool lead_const = lead.normalized().terms.size() == 1 && lead.normalized().terms[0].coeffs.size() == 1;
    if (!lead_const) {
        const PlaneRule rule = stereographic_rule(2 * opt.fiber_polar, 2 * opt.fiber_azimuth);
        for (const auto& root : roots_in_disc(lead, r_grid.back())) {
            const int mo = other.is_zero() ? root.multiplicity : vanishing_order(other, root.z);
            const int m = std::min(root.multiplicity, mo);
            if (m == 0) continue;
            out.fibers.push_back({root.z, m, fiber_mass(F, cvec({root.z}), rule, opt.finsler)});
        }
    }
    // mass of a coefficient H on the disc is int H / pi dA, so g = 2 rho * circle mean of H
    auto g = [&](double rho) -> detail::Sampled {
        const auto m = detail::fixed_circle_mean(
            [&](Complex z) { return graph_density(F, base, kappa, lambda, sigma, z, opt.finsler); }, rho, opt.angular);
        return {2.0 * rho * m.value, 2.0 * rho * m.err};
    };
    out.graph = detail::radial_curve("N", g, r_grid, s, true, opt.radial);
    out.N = out.graph;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        const double r = r_grid[i];
        for (const auto& fc : out.fibers) {
            const double a = std::abs(fc.z);
            if (a > r) continue;
            if (s == 0.0 && a == 0.0) throw Error(ErrorKind::OriginInDivisorImage, "fiber over the origin with s = 0");
            out.N.values[i] += fc.multiplicity * fc.mass * std::log(r / std::max(s, a));
        }
    }
    return out;
}

/// Counting function of pi^{-1}(Z) for a point divisor Z: each fiber carries its
/// numerically integrated phi~ mass.
inline GrowthCurve preimage_counting(const FinslerMetric& F, std::span<const Root> points,
                                     std::span<const double> r_grid, double s, const PEOptions& opt = {}) {
    detail::require_rank2_curve(F);
    const PlaneRule rule = stereographic_rule(2 * opt.fiber_polar, 2 * opt.fiber_azimuth);
    std::vector<double> masses;
    for (const auto& p : points) masses.push_back(fiber_mass(F, cvec({p.z}), rule, opt.finsler));
    GrowthCurve out = counting(points, r_grid, s);
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        std::vector<double> terms;
        for (std::size_t j = 0; j < points.size(); ++j) {
            const double a = std::abs(points[j].z);
            if (a <= r_grid[i]) terms.push_back(points[j].multiplicity * masses[j] * std::log(r_grid[i] / std::max(s, a)));
        }
        out.values[i] = pairwise_sum(terms);
    }
    return out;
}

} // namespace fnv
