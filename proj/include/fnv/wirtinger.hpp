#pragma once

// Finite-difference Wirtinger calculus.
//
// Every complex coordinate z = x + iy is differentiated through its real and
// imaginary parts with central stencils; the real gradient and Hessian are then
// recombined into
//   d/dz = (d/dx - i d/dy)/2,   d/dzbar = (d/dx + i d/dy)/2.
// The engine is generic in the value type so the same code differentiates
// scalar fields and matrix-valued fields (flattened into vectors), which is how
// the curvature code obtains third and fourth derivatives by nesting.

#include "fnv/core.hpp"

#include <array>
#include <limits>
#include <optional>

namespace fnv {

using Point = std::span<const Complex>;
using Guard = std::function<bool(Point)>;

/// A smooth function on an open subset of C^m.
struct ScalarField {
    int arity = 1;
    std::function<Complex(Point)> eval;
    Guard domain_guard;        // empty: defined everywhere
    bool real_valued = false;  // eval returns values with zero imaginary part
    std::string name;

    bool defined_at(Point p) const { return !domain_guard || domain_guard(p); }
    Complex operator()(Point p) const { return eval(p); }
    Complex operator()(const CVec& p) const { return eval(as_span(p)); }
};

struct JetOptions {
    double step = 1e-3;
    bool relative = true;  // h = step * (1 + ||p||)
    int order = 4;         // stencil accuracy order: 2, 4 or 6
    bool estimate_error = true;

    double step_at(const CVec& p) const { return relative ? step * (1.0 + p.norm()) : step; }
};

namespace detail {

struct StencilTable {
    std::vector<int> first_offsets;
    std::vector<double> first_coeffs;  // derivative = sum c f(x + o h) / h
    std::vector<int> second_offsets;
    std::vector<double> second_coeffs; // derivative = sum c f(x + o h) / h^2
    double first_abs_sum = 0.0;
    double second_abs_sum = 0.0;
    double mixed_abs_sum = 0.0;
    int reach = 0;
};

inline StencilTable make_table(std::vector<int> fo, std::vector<double> fc, std::vector<int> so,
                               std::vector<double> sc) {
    StencilTable t{std::move(fo), std::move(fc), std::move(so), std::move(sc)};
    for (double c : t.first_coeffs) t.first_abs_sum += std::abs(c);
    for (double c : t.second_coeffs) t.second_abs_sum += std::abs(c);
    t.mixed_abs_sum = t.first_abs_sum * t.first_abs_sum;
    for (int o : t.second_offsets) t.reach = std::max(t.reach, std::abs(o));
    return t;
}

inline const StencilTable& stencil(int order) {
    static const StencilTable o2 = make_table({-1, 1}, {-0.5, 0.5}, {-1, 0, 1}, {1.0, -2.0, 1.0});
    static const StencilTable o4 =
        make_table({-2, -1, 1, 2}, {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12}, {-2, -1, 0, 1, 2},
                   {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12});
    static const StencilTable o6 = make_table(
        {-3, -2, -1, 1, 2, 3}, {-1.0 / 60, 9.0 / 60, -45.0 / 60, 45.0 / 60, -9.0 / 60, 1.0 / 60},
        {-3, -2, -1, 0, 1, 2, 3},
        {2.0 / 180, -27.0 / 180, 270.0 / 180, -490.0 / 180, 270.0 / 180, -27.0 / 180, 2.0 / 180});
    switch (order) {
    case 2: return o2;
    case 4: return o4;
    case 6: return o6;
    default: throw Error(ErrorKind::InvalidArgument, "stencil order must be 2, 4 or 6");
    }
}

inline bool all_finite(const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }
inline bool all_finite(const CVec& v) { return v.allFinite(); }
inline double magnitude(const Complex& v) { return std::abs(v); }
inline double magnitude(const CVec& v) { return v.cwiseAbs().maxCoeff(); }

/// Real gradient and Hessian of f at p, with respect to the 2m real coordinates
/// (x_0, y_0, x_1, y_1, ...). Value type T is Complex or CVec.
template <class T>
struct RealDerivatives {
    T value;
    std::vector<T> grad;  // 2m
    std::vector<T> hess;  // 2m x 2m, row-major, symmetric
    double fscale = 0.0;  // max |f| over the stencil
    int real_dim = 0;
    const T& H(int s, int t) const { return hess[static_cast<std::size_t>(s * real_dim + t)]; }
};

template <class F>
auto real_derivatives(F&& f, const CVec& p, std::span<const double> steps, int order, bool second,
                      const Guard* guard) {
    using T = std::decay_t<decltype(f(as_span(p)))>;
    const auto& st = stencil(order);
    const int m = static_cast<int>(p.size());
    const int dim = 2 * m;
    CVec x = p;
    double fscale = 0.0;

    auto shift = [&](int t, double amount) {
        const int a = t / 2;
        x(a) += (t % 2 == 0) ? Complex(amount, 0.0) : Complex(0.0, amount);
    };
    auto eval_here = [&]() -> T {
        Point pt = as_span(x);
        if (guard && *guard && !(*guard)(pt))
            throw Error(ErrorKind::StencilOutsideDomain, "finite-difference stencil leaves the domain");
        T v = f(pt);
        if (!all_finite(v)) throw Error(ErrorKind::NonFinite, "field returned a non-finite value");
        fscale = std::max(fscale, magnitude(v));
        return v;
    };

    RealDerivatives<T> out;
    out.real_dim = dim;
    out.value = eval_here();
    // Stencil weights sum to zero, so differences against the centre value are
    // used throughout; constants then difference to exactly zero.
    const T centre = out.value;
    auto eval_shifted = [&]() -> T { return eval_here() - centre; };
    out.grad.resize(static_cast<std::size_t>(dim));
    if (second) out.hess.resize(static_cast<std::size_t>(dim * dim));

    for (int t = 0; t < dim; ++t) {
        const double h = steps[static_cast<std::size_t>(t / 2)];
        // values along the axis, indexed by offset
        std::array<std::optional<T>, 7> along;
        auto at = [&](int o) -> const T& {
            auto& slot = along[static_cast<std::size_t>(o + 3)];
            if (!slot) {
                if (o == 0) {
                    slot = centre - centre;
                } else {
                    shift(t, o * h);
                    slot = eval_shifted();
                    x = p;
                }
            }
            return *slot;
        };
        T g = at(st.first_offsets[0]) * (st.first_coeffs[0] / h);
        for (std::size_t k = 1; k < st.first_offsets.size(); ++k)
            g += at(st.first_offsets[k]) * (st.first_coeffs[k] / h);
        out.grad[static_cast<std::size_t>(t)] = g;
        if (second) {
            T s2 = at(st.second_offsets[0]) * (st.second_coeffs[0] / (h * h));
            for (std::size_t k = 1; k < st.second_offsets.size(); ++k)
                s2 += at(st.second_offsets[k]) * (st.second_coeffs[k] / (h * h));
            out.hess[static_cast<std::size_t>(t * dim + t)] = s2;
        }
    }

    if (second) {
        for (int s = 0; s < dim; ++s) {
            for (int t = s + 1; t < dim; ++t) {
                const double hs = steps[static_cast<std::size_t>(s / 2)];
                const double ht = steps[static_cast<std::size_t>(t / 2)];
                std::optional<T> acc;
                for (std::size_t i = 0; i < st.first_offsets.size(); ++i) {
                    for (std::size_t j = 0; j < st.first_offsets.size(); ++j) {
                        shift(s, st.first_offsets[i] * hs);
                        shift(t, st.first_offsets[j] * ht);
                        T v = eval_shifted();
                        x = p;
                        const double c = st.first_coeffs[i] * st.first_coeffs[j] / (hs * ht);
                        if (acc)
                            *acc += v * c;
                        else
                            acc = v * c;
                    }
                }
                out.hess[static_cast<std::size_t>(s * dim + t)] = *acc;
                out.hess[static_cast<std::size_t>(t * dim + s)] = *acc;
            }
        }
    }
    out.fscale = fscale;
    return out;
}

} // namespace detail

/// Wirtinger derivatives of a (possibly vector-valued) field. For a value type
/// T, d[a] = df/dz^a, ddbar[a*m+b] = d^2 f / dz^a dzbar^b, dd[a*m+b] = d^2 f / dz^a dz^b.
template <class T>
struct FieldJet {
    T value;
    std::vector<T> d, dbar, ddbar, dd;
    int arity = 0;
    const T& mixed(int a, int b) const { return ddbar[static_cast<std::size_t>(a * arity + b)]; }
    const T& holo(int a, int b) const { return dd[static_cast<std::size_t>(a * arity + b)]; }
};

template <class T>
FieldJet<T> to_wirtinger(const detail::RealDerivatives<T>& rd, int m, bool second) {
    FieldJet<T> j;
    j.arity = m;
    j.value = rd.value;
    for (int a = 0; a < m; ++a) {
        const T& gx = rd.grad[static_cast<std::size_t>(2 * a)];
        const T& gy = rd.grad[static_cast<std::size_t>(2 * a + 1)];
        j.d.push_back((gx - gy * kI) * 0.5);
        j.dbar.push_back((gx + gy * kI) * 0.5);
    }
    if (second) {
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                const T& xx = rd.H(2 * a, 2 * b);
                const T& yy = rd.H(2 * a + 1, 2 * b + 1);
                const T& xy = rd.H(2 * a, 2 * b + 1);
                const T& yx = rd.H(2 * a + 1, 2 * b);
                j.ddbar.push_back(((xx + yy) + (xy - yx) * kI) * 0.25);
                j.dd.push_back(((xx - yy) - (xy + yx) * kI) * 0.25);
            }
        }
    }
    return j;
}

/// Jet of an arbitrary field with explicit per-coordinate steps; no error estimate.
template <class F>
auto field_jet(F&& f, const CVec& p, std::span<const double> steps, int order = 4, bool second = true,
               const Guard* guard = nullptr) {
    auto rd = detail::real_derivatives(f, p, steps, order, second, guard);
    return to_wirtinger(rd, static_cast<int>(p.size()), second);
}

template <class F>
auto field_jet(F&& f, const CVec& p, double step, int order = 4, bool second = true,
               const Guard* guard = nullptr) {
    std::vector<double> steps(static_cast<std::size_t>(p.size()), step);
    return field_jet(std::forward<F>(f), p, std::span<const double>(steps), order, second, guard);
}

/// Value plus first and second Wirtinger derivatives of a scalar field at a point.
struct WirtingerJet {
    Complex value;
    CVec d, dbar;
    CMat ddbar, dd;
    double step = 0.0;
    // Per-entry error estimates (Richardson difference plus a rounding bound);
    // zero when estimation was switched off.
    RVec d_err, dbar_err;
    RMat ddbar_err, dd_err;
};

namespace detail {

inline WirtingerJet scalar_jet_once(const ScalarField& f, const CVec& p, double h, int order,
                                    double* fscale) {
    std::vector<double> steps(static_cast<std::size_t>(p.size()), h);
    auto call = [&](Point q) { return f.eval(q); };
    const Guard* guard = f.domain_guard ? &f.domain_guard : nullptr;
    auto rd = real_derivatives(call, p, steps, order, true, guard);
    auto fj = to_wirtinger(rd, static_cast<int>(p.size()), true);
    const auto m = static_cast<std::size_t>(p.size());
    WirtingerJet j;
    j.value = fj.value;
    j.step = h;
    j.d.resize(static_cast<Eigen::Index>(m));
    j.dbar.resize(static_cast<Eigen::Index>(m));
    j.ddbar.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    j.dd.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t a = 0; a < m; ++a) {
        j.d(static_cast<Eigen::Index>(a)) = fj.d[a];
        j.dbar(static_cast<Eigen::Index>(a)) = fj.dbar[a];
        for (std::size_t b = 0; b < m; ++b) {
            j.ddbar(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = fj.ddbar[a * m + b];
            j.dd(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = fj.dd[a * m + b];
        }
    }
    if (fscale) *fscale = rd.fscale;
    return j;
}

} // namespace detail

/// Central-difference jet of f at p. With estimate_error, the jet is also
/// evaluated at twice the step and the difference (scaled by 1/(2^order - 1))
/// plus a floating-point rounding bound is reported per entry.
inline WirtingerJet jet2(const ScalarField& f, const CVec& p, const JetOptions& opt = {}) {
    if (p.size() != f.arity)
        throw Error(ErrorKind::InvalidArgument, "point dimension does not match field arity");
    const double h = opt.step_at(p);
    double fscale = 0.0;
    WirtingerJet j = detail::scalar_jet_once(f, p, h, opt.order, &fscale);
    const auto m = p.size();
    j.d_err = RVec::Zero(m);
    j.dbar_err = RVec::Zero(m);
    j.ddbar_err = RMat::Zero(m, m);
    j.dd_err = RMat::Zero(m, m);
    if (opt.estimate_error) {
        double fscale2 = 0.0;
        WirtingerJet coarse = detail::scalar_jet_once(f, p, 2.0 * h, opt.order, &fscale2);
        const double denom = std::pow(2.0, opt.order) - 1.0;
        const auto& st = detail::stencil(opt.order);
        const double eps = std::numeric_limits<double>::epsilon();
        const double fs = std::max(fscale, fscale2);
        const double r1 = 4.0 * eps * fs * st.first_abs_sum / h;
        const double r2 = 4.0 * eps * fs * std::max(st.second_abs_sum, st.mixed_abs_sum) / (h * h);
        j.d_err = (j.d - coarse.d).cwiseAbs() / denom + RVec::Constant(m, r1);
        j.dbar_err = (j.dbar - coarse.dbar).cwiseAbs() / denom + RVec::Constant(m, r1);
        j.ddbar_err = (j.ddbar - coarse.ddbar).cwiseAbs() / denom + RMat::Constant(m, m, r2);
        j.dd_err = (j.dd - coarse.dd).cwiseAbs() / denom + RMat::Constant(m, m, r2);
    }
    return j;
}

/// A real (1,1)-form at a point, written as (sqrt(-1)/2pi) sum H_jk dz^j ^ dzbar^k.
/// H is the complex Hessian of the potential: the form of ddc(u) has H = d^2u/dz dzbar.
struct Form11 {
    CMat H;

    static constexpr double scale = 1.0 / (2.0 * kPi);

    /// Coefficients of sqrt(-1) dz^j ^ dzbar^k.
    CMat coefficient() const { return H * scale; }
    Eigen::Index dim() const { return H.rows(); }
    double min_eig() const { return fnv::min_eig(H); }
    bool is_hermitian(double tol = 1e-8) const {
        return hermitian_defect(H) <= tol * std::max(1.0, H.norm());
    }

    /// Value of the real 2-form on real tangent vectors X, Y (given by their
    /// complex coordinates).
    double evaluate(const CVec& x, const CVec& y) const {
        const Complex a = (x.transpose() * H * y.conjugate())(0, 0);
        return -a.imag() / kPi;
    }

    /// Density of the top power with respect to Lebesgue measure on C^m = R^{2m}.
    double volume_density() const {
        std::vector<CMat> hs(static_cast<std::size_t>(H.rows()), H);
        return mixed_discriminant(hs).real() / std::pow(kPi, static_cast<double>(H.rows()));
    }

    Form11 operator+(const Form11& o) const { return {H + o.H}; }
    Form11 operator-(const Form11& o) const { return {H - o.H}; }
    Form11 operator*(double s) const { return {H * s}; }

    static Form11 euclidean(int m) { return {CMat::Identity(m, m)}; }
    static Form11 zero(int m) { return {CMat::Zero(m, m)}; }

    /// du ^ d^c u for real u, given the holomorphic gradient du/dz.
    static Form11 gradient_square(const CVec& du) { return {du * du.adjoint()}; }
};

/// Top-degree density of a wedge of (1,1)-forms with respect to Lebesgue measure.
inline double wedge_density(std::span<const Form11> forms) {
    std::vector<CMat> hs;
    for (const auto& f : forms) hs.push_back(f.H);
    return mixed_discriminant(hs).real() / std::pow(kPi, static_cast<double>(forms.size()));
}

/// d^c u evaluated on a real tangent vector, for real u with gradient du/dz.
inline double dc_evaluate(const CVec& du, const CVec& x) {
    return (du.transpose() * x)(0, 0).imag() / (2.0 * kPi);
}

/// du evaluated on a real tangent vector, for real u.
inline double d_evaluate(const CVec& du, const CVec& x) {
    return 2.0 * (du.transpose() * x)(0, 0).real();
}

inline Form11 ddc(const ScalarField& f, const CVec& p, const JetOptions& opt = {}) {
    JetOptions o = opt;
    o.estimate_error = false;
    return {jet2(f, p, o).ddbar};
}

/// Smallest eigenvalue of the Hermitian part of the Levi form.
inline double levi_min_eig(const ScalarField& f, const CVec& p, const JetOptions& opt = {}) {
    JetOptions o = opt;
    o.estimate_error = false;
    return min_eig(jet2(f, p, o).ddbar);
}

} // namespace fnv
