#pragma once

// Quadrature rules: Gauss-Legendre, periodic trapezoid, sphere rules in C^n
// and a stereographic rule for the projective line.

#include "fnv/core.hpp"

#include <cmath>
#include <random>

namespace fnv {

struct Rule1D {
    std::vector<double> x, w;
    std::size_t size() const { return x.size(); }
};

/// n-point Gauss-Legendre rule on [a, b].
inline Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0) {
    if (n < 1) throw Error(ErrorKind::InvalidArgument, "Gauss-Legendre needs at least one node");
    Rule1D r;
    r.x.resize(static_cast<std::size_t>(n));
    r.w.resize(static_cast<std::size_t>(n));
    const auto un = static_cast<unsigned>(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            const double p = std::legendre(un, x);
            const double pm = std::legendre(un - 1, x);
            dp = n * (x * p - pm) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            const double p = std::legendre(un, x);
            const double pm = std::legendre(un - 1, x);
            dp = n * (x * p - pm) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        r.x[lo] = -x;
        r.x[hi] = x;
        r.w[lo] = w;
        r.w[hi] = w;
    }
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r.x[i] = mid + half * r.x[i];
        r.w[i] *= half;
    }
    return r;
}

/// Composite Gauss-Legendre on consecutive panels [b_0, b_1], [b_1, b_2], ...
inline Rule1D composite_gauss_legendre(std::span<const double> breaks, int per_panel) {
    Rule1D out;
    const Rule1D ref = gauss_legendre(per_panel);
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double a = breaks[k], b = breaks[k + 1];
        for (std::size_t i = 0; i < ref.size(); ++i) {
            out.x.push_back(0.5 * (a + b) + 0.5 * (b - a) * ref.x[i]);
            out.w.push_back(0.5 * (b - a) * ref.w[i]);
        }
    }
    return out;
}

/// Equispaced rule on the circle [0, 2pi) with weights summing to 1 (an average).
inline Rule1D periodic_trapezoid(int n) {
    Rule1D r;
    for (int j = 0; j < n; ++j) {
        r.x.push_back(2.0 * kPi * j / n);
        r.w.push_back(1.0 / n);
    }
    return r;
}

enum class ShellRule { Trapezoid, GaussLegendre, MonteCarlo, Hopf };

inline ShellRule shell_rule_from_string(const std::string& s) {
    if (s == "trapezoid") return ShellRule::Trapezoid;
    if (s == "gauss_legendre") return ShellRule::GaussLegendre;
    if (s == "monte_carlo") return ShellRule::MonteCarlo;
    if (s == "hopf") return ShellRule::Hopf;
    throw Error(ErrorKind::SchemaError, "unknown shell rule '" + s + "'");
}

inline const char* to_string(ShellRule r) {
    switch (r) {
    case ShellRule::Trapezoid: return "trapezoid";
    case ShellRule::GaussLegendre: return "gauss_legendre";
    case ShellRule::MonteCarlo: return "monte_carlo";
    case ShellRule::Hopf: return "hopf";
    }
    return "unknown";
}

/// Nodes on the sphere {||z|| = r} in C^n with weights of a probability measure
/// (the unitary-invariant one).
struct ShellNodes {
    std::vector<CVec> z;
    std::vector<double> w;
    double radius = 0.0;
    std::size_t size() const { return z.size(); }
};

struct ShellSpec {
    double radius = 1.0;
    int node_count = 64;  // per angular dimension for product rules, total for Monte Carlo
    ShellRule rule = ShellRule::Trapezoid;
    std::uint64_t seed = 1;
};

inline ShellNodes shell_nodes(int n, const ShellSpec& spec) {
    ShellNodes out;
    out.radius = spec.radius;
    const double r = spec.radius;
    if (n == 1) {
        Rule1D th = spec.rule == ShellRule::GaussLegendre ? gauss_legendre(spec.node_count, 0.0, 2.0 * kPi)
                                                          : periodic_trapezoid(spec.node_count);
        const double norm = spec.rule == ShellRule::GaussLegendre ? 1.0 / (2.0 * kPi) : 1.0;
        for (std::size_t i = 0; i < th.size(); ++i) {
            out.z.push_back(cvec({std::polar(r, th.x[i])}));
            out.w.push_back(th.w[i] * norm);
        }
        return out;
    }
    if (spec.rule == ShellRule::Hopf) {
        if (n != 2) throw Error(ErrorKind::InvalidArgument, "Hopf shell rule is defined for n = 2");
        // z = r (sqrt(1-t) e^{ia}, sqrt(t) e^{ib}); the invariant measure is dt da db / (4 pi^2).
        const Rule1D t = gauss_legendre(spec.node_count, 0.0, 1.0);
        const Rule1D ang = periodic_trapezoid(spec.node_count);
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t a = 0; a < ang.size(); ++a)
                for (std::size_t b = 0; b < ang.size(); ++b) {
                    out.z.push_back(cvec({std::polar(r * std::sqrt(1.0 - t.x[i]), ang.x[a]),
                                          std::polar(r * std::sqrt(t.x[i]), ang.x[b])}));
                    out.w.push_back(t.w[i] * ang.w[a] * ang.w[b]);
                }
        return out;
    }
    std::mt19937_64 gen(spec.seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const double w = 1.0 / spec.node_count;
    for (int k = 0; k < spec.node_count; ++k) {
        CVec z(n);
        for (int i = 0; i < n; ++i) z(i) = Complex(g(gen), g(gen));
        out.z.push_back(z * (r / z.norm()));
        out.w.push_back(w);
    }
    return out;
}

/// Increasing geometric grid from a to b with at least per_decade points per
/// decade that contains every value of `must_include` lying in [a, b].
inline std::vector<double> geometric_grid(double a, double b, int per_decade,
                                          std::span<const double> must_include = {}) {
    if (!(a > 0.0 && b >= a)) throw Error(ErrorKind::InvalidArgument, "geometric grid needs 0 < a <= b");
    std::vector<double> pts{a, b};
    for (double x : must_include)
        if (x > a && x < b) pts.push_back(x);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<double> grid{pts.front()};
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double lo = pts[k], hi = pts[k + 1];
        int m = static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade));
        m = std::max(m, 2);
        if (m % 2) ++m;  // even panel count for Simpson
        for (int j = 1; j <= m; ++j) grid.push_back(lo * std::pow(hi / lo, static_cast<double>(j) / m));
        grid.back() = hi;
    }
    return grid;
}

/// Cumulative Simpson integral of y(u) du; returns the integral at every grid
/// point. Consecutive equal-width panel pairs use Simpson's rule (the midpoint
/// value comes from the three-point half-panel formula); unpaired panels fall
/// back to the trapezoid rule.
inline std::vector<double> cumulative_simpson(std::span<const double> u, std::span<const double> y) {
    const std::size_t n = u.size();
    std::vector<double> out(n, 0.0);
    std::size_t i = 0;
    while (i + 1 < n) {
        const double h = u[i + 1] - u[i];
        if (i + 2 < n && std::abs((u[i + 2] - u[i + 1]) - h) <= 1e-9 * std::abs(h)) {
            out[i + 1] = out[i] + h * (5.0 * y[i] + 8.0 * y[i + 1] - y[i + 2]) / 12.0;
            out[i + 2] = out[i] + h * (y[i] + 4.0 * y[i + 1] + y[i + 2]) / 3.0;
            i += 2;
        } else {
            out[i + 1] = out[i] + 0.5 * h * (y[i] + y[i + 1]);
            i += 1;
        }
    }
    return out;
}

/// Nodes for integrating over the projective line P^1 in the affine chart
/// w = tan(t/2) e^{ia}, t in (0, pi), a in [0, 2pi). Weights are for the
/// Lebesgue measure dA(w) on C.
struct PlaneRule {
    std::vector<Complex> w;
    std::vector<double> weight;
};

inline PlaneRule stereographic_rule(int n_polar, int n_azimuth) {
    PlaneRule r;
    const Rule1D t = gauss_legendre(n_polar, 0.0, kPi);
    const Rule1D a = periodic_trapezoid(n_azimuth);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double rho = std::tan(0.5 * t.x[i]);
        // dA = rho drho da, drho = (1 + rho^2)/2 dt
        const double jac = rho * 0.5 * (1.0 + rho * rho);
        for (std::size_t j = 0; j < a.size(); ++j) {
            r.w.push_back(std::polar(rho, a.x[j]));
            r.weight.push_back(t.w[i] * jac * a.w[j] * 2.0 * kPi);
        }
    }
    return r;
}

} // namespace fnv
