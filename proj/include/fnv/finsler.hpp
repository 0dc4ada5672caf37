#pragma once

// Finsler metrics G = h^2 on a trivialized bundle over a chart of C^n.
//
// Coordinates on the total space are c = (z, v), z in C^n, v in C^R, R = r + 1.
// M(z, v) = (G_{i jbar}) is the vertical Hessian. For combined indices a, b
//   R_ab = -(d_a dbar_b M) M^{-1} + (d_a M) M^{-1} (dbar_b M) M^{-1}
// packs every curvature family: K = R_{z z}, kappa = R_{v v}, mu = R_{z v}, nu = R_{v z}.
// Matrices are indexed (i, j) for the coefficient with lower i and upper j.

#include "fnv/hermitian.hpp"
#include "fnv/quadrature.hpp"

#include <optional>

namespace fnv {

using FinslerFunction = std::function<double(const CVec& z, const CVec& v)>;

struct FinslerMetric {
    int rank = 2;      // R = r + 1
    int base_dim = 1;  // n
    FinslerFunction G;
    std::optional<double> claimed_order;
    std::string name;

    double operator()(const CVec& z, const CVec& v) const { return G(z, v); }
    /// G as a scalar field on C^{n+R}.
    ScalarField field() const {
        ScalarField f;
        f.arity = base_dim + rank;
        f.real_valued = true;
        f.name = name;
        f.eval = [g = G, n = base_dim, r = rank](Point p) {
            const CVec c = to_cvec(p);
            return Complex(g(c.head(n), c.tail(r)));
        };
        return f;
    }
};

/// Nested differences lose roughly eps / (h_inner^2 h_outer^2); the default keeps
/// that near 1e-8 while sixth-order stencils hold truncation below it.
struct FinslerOptions {
    double step = 1e-2;
    int order = 6;
    double base_step(const CVec& z) const { return step * (1.0 + z.norm()); }
    double fiber_step(const CVec& v) const { return step * v.norm(); }
};

namespace detail {

inline void require_off_zero_section(const CVec& v) {
    if (!(v.norm() > 0.0)) throw Error(ErrorKind::ZeroSectionPoint, "fiber vector is zero");
}

inline CMat vertical_hessian_step(const FinslerMetric& F, const CVec& z, const CVec& v, double h, int order) {
    auto g = [&](Point p) { return Complex(F.G(z, to_cvec(p))); };
    const auto j = field_jet(g, v, h, order, true);
    const auto R = static_cast<Eigen::Index>(F.rank);
    CMat m(R, R);
    for (Eigen::Index i = 0; i < R; ++i)
        for (Eigen::Index k = 0; k < R; ++k) m(i, k) = j.mixed(static_cast<int>(i), static_cast<int>(k));
    return hermitian_part(m);
}

}  // namespace detail

/// G_{i jbar} = d^2 G / dv^i dvbar^j.
inline CMat vertical_hessian(const FinslerMetric& F, const CVec& z, const CVec& v, const FinslerOptions& opt = {}) {
    detail::require_off_zero_section(v);
    return detail::vertical_hessian_step(F, z, v, opt.fiber_step(v), opt.order);
}

/// Derivatives of M over the combined coordinates (z, v). The inner fiber step is
/// frozen at the centre so the outer stencil differentiates one fixed function.
struct FinslerJet {
    CVec z, v;
    int n = 0, R = 0;
    double G = 0.0;
    CMat M, Minv;
    std::vector<CMat> d, dbar, ddbar;  // combined index; ddbar[a * (n + R) + b]
    int dim() const { return n + R; }
    const CMat& mixed(int a, int b) const { return ddbar[static_cast<std::size_t>(a * dim() + b)]; }
};

inline FinslerJet finsler_jet(const FinslerMetric& F, const CVec& z, const CVec& v, bool second,
                              const FinslerOptions& opt = {}) {
    detail::require_off_zero_section(v);
    FinslerJet out;
    out.z = z;
    out.v = v;
    out.n = F.base_dim;
    out.R = F.rank;
    out.G = F.G(z, v);
    const double hv = opt.fiber_step(v);
    const auto n = static_cast<Eigen::Index>(out.n);
    const auto R = static_cast<Eigen::Index>(out.R);
    auto flat = [&](Point p) {
        const CVec c = to_cvec(p);
        return flatten(detail::vertical_hessian_step(F, c.head(n), c.tail(R), hv, opt.order));
    };
    CVec c(n + R);
    c << z, v;
    std::vector<double> steps(static_cast<std::size_t>(n + R), opt.base_step(z));
    for (Eigen::Index i = 0; i < R; ++i) steps[static_cast<std::size_t>(n + i)] = hv;
    const auto j = field_jet(flat, c, std::span<const double>(steps), opt.order, second);
    out.M = hermitian_part(unflatten(j.value, R));
    out.Minv = checked_inverse(out.M, ErrorKind::SingularVerticalMetric, "vertical Hessian is singular");
    for (const auto& x : j.d) out.d.push_back(unflatten(x, R));
    for (const auto& x : j.dbar) out.dbar.push_back(unflatten(x, R));
    for (const auto& x : j.ddbar) out.ddbar.push_back(unflatten(x, R));
    return out;
}

// ---------------------------------------------------------------------------
// Validation.

struct ConditionReport {
    std::string name;
    bool pass = true;
    double worst = 0.0;  // largest relative defect (or most negative margin)
    CVec z, v;
};

struct FinslerValidation {
    std::vector<ConditionReport> conditions;
    bool all_pass() const {
        return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.pass; });
    }
    const ConditionReport& operator[](const std::string& name) const {
        for (const auto& c : conditions)
            if (c.name == name) return c;
        throw Error(ErrorKind::InvalidArgument, "unknown condition " + name);
    }
};

/// Deterministic fiber probes: both coordinate axes, the diagonal, then random directions.
inline std::vector<CVec> finsler_fiber_probes(int rank, int count, std::uint64_t seed) {
    std::vector<CVec> out;
    for (int i = 0; i < rank; ++i) out.push_back(CVec::Unit(rank, i));
    out.push_back(CVec::Ones(rank));
    for (const auto& v : fiber_probes(rank, std::max(0, count - rank - 1), seed)) out.push_back(v);
    out.resize(static_cast<std::size_t>(std::max(count, 1)));
    return out;
}

inline FinslerValidation validate_finsler(const FinslerMetric& F, std::span<const CVec> zs,
                                          std::span<const CVec> vs, const FinslerOptions& opt = {}) {
    auto named = [](const char* name) {
        ConditionReport r;
        r.name = name;
        r.worst = -std::numeric_limits<double>::infinity();
        return r;
    };
    ConditionReport pos = named("positivity"), hom = named("homogeneity"), proj = named("projective_invariance"),
                    e1 = named("euler_first_order"), e2 = named("euler_quadratic"), psh = named("fiber_strict_psh");
    auto note = [](ConditionReport& r, double defect, double tol, const CVec& z, const CVec& v) {
        if (defect > r.worst || !std::isfinite(defect)) {
            r.worst = defect;
            r.z = z;
            r.v = v;
        }
        if (!(defect <= tol)) r.pass = false;
    };
    const std::array<Complex, 3> lambdas{Complex(0.5), Complex(2.0), std::polar(1.0, kPi / 3.0)};
    for (const auto& z : zs)
        for (const auto& v : vs) {
            const double g = F.G(z, v);
            note(pos, g > 0.0 ? 0.0 : 1.0, 0.0, z, v);
            for (Complex l : lambdas) note(hom, rel_diff(F.G(z, l * v), std::norm(l) * g), 1e-8, z, v);
            const CMat m = vertical_hessian(F, z, v, opt);
            // a vanishing direction shows up as a min eigenvalue at roundoff level
            note(psh, 1e-6 - min_eig(m) / m.norm(), 0.0, z, v);
            for (Complex l : lambdas) note(proj, (vertical_hessian(F, z, l * v, opt) - m).norm() / m.norm(), 1e-7, z, v);
            note(e2, rel_diff(norm2_h(m, v), g), 1e-6, z, v);
            try {
                const FinslerJet j = finsler_jet(F, z, v, false, opt);
                CMat sv = CMat::Zero(F.rank, F.rank), sw = sv;
                for (int p = 0; p < F.rank; ++p) {
                    sv += v(p) * j.d[static_cast<std::size_t>(j.n + p)];
                    sw += std::conj(v(p)) * j.dbar[static_cast<std::size_t>(j.n + p)];
                }
                note(e1, std::max(sv.norm(), sw.norm()) / j.M.norm(), 1e-6, z, v);
            } catch (const Error&) {
                note(e1, std::numeric_limits<double>::infinity(), 1e-6, z, v);
            }
        }
    return {{pos, hom, proj, e1, e2, psh}};
}

/// True iff G_{i jbar}(z, .) is constant along each fiber probed.
inline bool is_hermitian(const FinslerMetric& F, std::span<const CVec> zs, std::span<const CVec> vs,
                         const FinslerOptions& opt = {}) {
    for (const auto& z : zs) {
        const CMat m0 = vertical_hessian(F, z, vs.front(), opt);
        for (const auto& v : vs)
            if ((vertical_hessian(F, z, v, opt) - m0).norm() > 1e-6 * m0.norm()) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Connection and curvature.

struct FinslerConnection {
    std::vector<CMat> Gamma;  // horizontal, per z^k: (Gamma_k)_{ij} = Gamma^j_{ik}
    std::vector<CMat> gamma;  // vertical, per v^p
    CVec v;
    /// Row i of sum_i v^i gamma_p: the contraction that must vanish.
    double contraction_defect() const {
        double s = 0.0;
        for (const auto& g : gamma) s = std::max(s, (v.transpose() * g).norm());
        return s;
    }
};

inline FinslerConnection connection_from_jet(const FinslerJet& j) {
    FinslerConnection c;
    c.v = j.v;
    for (int k = 0; k < j.n; ++k) c.Gamma.push_back(j.d[static_cast<std::size_t>(k)] * j.Minv);
    for (int p = 0; p < j.R; ++p) c.gamma.push_back(j.d[static_cast<std::size_t>(j.n + p)] * j.Minv);
    return c;
}

inline FinslerConnection finsler_connection(const FinslerMetric& F, const CVec& z, const CVec& v,
                                            const FinslerOptions& opt = {}) {
    return connection_from_jet(finsler_jet(F, z, v, false, opt));
}

struct FinslerCurvature {
    int n = 0, R = 0;
    CVec z, v;
    double G = 0.0;
    CMat M;
    std::vector<CMat> R_;         // combined blocks, [a * (n + R) + b]
    std::vector<CMat> Gamma;      // horizontal connection, for lifts
    int dim() const { return n + R; }
    const CMat& block(int a, int b) const { return R_[static_cast<std::size_t>(a * dim() + b)]; }
    const CMat& K(int k, int l) const { return block(k, l); }
    const CMat& kappa(int p, int q) const { return block(n + p, n + q); }
    const CMat& mu(int k, int q) const { return block(k, n + q); }
    const CMat& nu(int p, int l) const { return block(n + p, l); }

    /// Q_ab = sum R^j_{i a bbar} v^i G_{j sbar} vbar^s.
    CMat pairing_matrix() const {
        CMat Q(dim(), dim());
        for (int a = 0; a < dim(); ++a)
            for (int b = 0; b < dim(); ++b) Q(a, b) = (v.transpose() * block(a, b) * M * v.conjugate())(0, 0);
        return Q;
    }
    /// B_ik = sum_j Gamma^i_{jk} v^j, so the coframe is zeta = dv + B dz.
    CMat lift_matrix() const {
        CMat B(R, n);
        for (int k = 0; k < n; ++k) B.col(k) = Gamma[static_cast<std::size_t>(k)].transpose() * v;
        return B;
    }
    /// Largest defect of the contractions that vanish for every Finsler metric.
    double contraction_defect() const {
        double s = 0.0;
        for (int p = 0; p < R; ++p) {
            for (int q = 0; q < R; ++q) s = std::max(s, (v.transpose() * kappa(p, q)).norm());
            for (int l = 0; l < n; ++l) s = std::max(s, (v.transpose() * nu(p, l)).norm());
        }
        for (int k = 0; k < n; ++k)
            for (int q = 0; q < R; ++q) s = std::max(s, (mu(k, q) * M * v.conjugate()).norm());
        return s;
    }
    /// Natural magnitude for relative comparisons: |v|_M^2 times the block norms.
    double scale() const {
        double s = 0.0;
        for (const auto& b : R_) s += b.squaredNorm();
        return std::sqrt(s) * v.norm() * M.norm() * v.norm();
    }
};

inline FinslerCurvature curvature_from_jet(const FinslerJet& j) {
    FinslerCurvature c;
    c.n = j.n;
    c.R = j.R;
    c.z = j.z;
    c.v = j.v;
    c.G = j.G;
    c.M = j.M;
    const int m = j.dim();
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            c.R_.push_back(-j.mixed(a, b) * j.Minv +
                           j.d[static_cast<std::size_t>(a)] * j.Minv * j.dbar[static_cast<std::size_t>(b)] * j.Minv);
    c.Gamma = connection_from_jet(j).Gamma;
    return c;
}

inline FinslerCurvature finsler_curvature(const FinslerMetric& F, const CVec& z, const CVec& v,
                                          const FinslerOptions& opt = {}) {
    return curvature_from_jet(finsler_jet(F, z, v, true, opt));
}

/// Tangent vector (xi, -B xi) at (z, v): the kernel of the covariant derivative of P.
inline CVec horizontal_lift(const FinslerCurvature& c, const CVec& xi) {
    CVec out(c.dim());
    out << xi, -(c.lift_matrix() * xi);
    return out;
}

inline CVec horizontal_lift(const FinslerMetric& F, const CVec& z, const CVec& v, const CVec& xi,
                            const FinslerOptions& opt = {}) {
    const FinslerConnection con = finsler_connection(F, z, v, opt);
    CVec b = CVec::Zero(F.rank);
    for (int k = 0; k < F.base_dim; ++k) b -= xi(k) * (con.Gamma[static_cast<std::size_t>(k)].transpose() * v);
    CVec out(F.base_dim + F.rank);
    out << xi, b;
    return out;
}

/// Both sides of the pairing identity: from K alone, and from the full curvature on lifts.
struct CurvaturePairing {
    Complex from_K, from_lifts;
};

inline CurvaturePairing curvature_pairing(const FinslerCurvature& c, const CVec& xi1, const CVec& xi2) {
    const CMat Q = c.pairing_matrix();
    const CMat Qzz = Q.topLeftCorner(c.n, c.n);
    const CVec a1 = horizontal_lift(c, xi1), a2 = horizontal_lift(c, xi2);
    return {(xi1.transpose() * Qzz * xi2.conjugate())(0, 0), (a1.transpose() * Q * a2.conjugate())(0, 0)};
}

/// k(zeta, v) for zeta = lift(xi) + V, with ||zeta||^2 = ||xi||_phi^2 + ||V||_M^2.
inline double bisectional_f(const FinslerCurvature& c, const CVec& xi, const CVec& V, const Form11& phi) {
    if (!(xi.norm() + V.norm() > 0.0)) throw Error(ErrorKind::ZeroVector, "tangent vector is zero");
    CVec a = horizontal_lift(c, xi);
    a.tail(c.R) += V;
    const double num = (a.transpose() * c.pairing_matrix() * a.conjugate())(0, 0).real();
    const double den = (norm2_h(phi.H, xi) + norm2_h(c.M, V)) * c.G;
    return num / den;
}

// ---------------------------------------------------------------------------
// Chern form of the tautological quotient on P(E).

/// Largest-modulus coordinate: the affine chart used for lifts of [v].
inline int affine_chart(const CVec& v) {
    Eigen::Index a = 0;
    v.cwiseAbs().maxCoeff(&a);
    return static_cast<int>(a);
}

inline CMat drop_index(const CMat& m, int a) {
    const auto k = m.rows();
    CMat out(k - 1, k - 1);
    for (Eigen::Index i = 0, oi = 0; i < k; ++i) {
        if (i == a) continue;
        for (Eigen::Index j = 0, oj = 0; j < k; ++j) {
            if (j == a) continue;
            out(oi, oj++) = m(i, j);
        }
        ++oi;
    }
    return out;
}

/// Rewrites a form given in the (dz, dv) basis in the (dz, zeta) coframe, zeta = dv + B dz.
inline CMat to_horizontal_coframe(const CMat& H, const CMat& B) {
    const auto n = B.cols(), R = B.rows();
    CMat T = CMat::Identity(n + R, n + R);
    T.bottomLeftCorner(R, n) = -B;
    return T.transpose() * H * T.conjugate();
}

struct ChernFormL {
    CMat vertical;    // R x R, coefficients of zeta^i ^ zetabar^j
    CMat horizontal;  // n x n, coefficients of dz^k ^ dzbar^l; equals -Theta(P)
    CMat B;           // zeta = dv + B dz
    CVec z, v;
    int chart = 0;

    int n() const { return static_cast<int>(horizontal.rows()); }
    int R() const { return static_cast<int>(vertical.rows()); }
    /// Coefficients in the (dz, dv) basis.
    CMat full() const {
        const int nn = n(), rr = R();
        CMat H(nn + rr, nn + rr);
        H.topLeftCorner(nn, nn) = horizontal + B.transpose() * vertical * B.conjugate();
        H.topRightCorner(nn, rr) = B.transpose() * vertical;
        H.bottomLeftCorner(rr, nn) = vertical * B.conjugate();
        H.bottomRightCorner(rr, rr) = vertical;
        return H;
    }
    /// Pullback to the affine chart (z, w) where v^chart is held fixed.
    CMat affine() const { return drop_index(full(), n() + chart); }
    /// Vertical part on the fiber tangent; v spans the kernel of `vertical`.
    CMat fiber() const { return drop_index(vertical, chart); }
};

inline ChernFormL chern_from_curvature(const FinslerCurvature& c) {
    ChernFormL out;
    out.z = c.z;
    out.v = c.v;
    out.chart = affine_chart(c.v);
    const CVec mv = c.M * c.v.conjugate();
    out.vertical = hermitian_part((c.G * c.M - mv * mv.adjoint()) / (c.G * c.G));
    const CMat Q = c.pairing_matrix();
    out.horizontal = hermitian_part(-Q.topLeftCorner(c.n, c.n) / c.G);
    out.B = c.lift_matrix();
    return out;
}

inline ChernFormL chern_form_L(const FinslerMetric& F, const CVec& z, const CVec& v, const FinslerOptions& opt = {}) {
    return chern_from_curvature(finsler_curvature(F, z, v, opt));
}

/// Vertical part alone; it needs only G and G_{i jbar} at the point.
inline CMat chern_vertical(const FinslerMetric& F, const CVec& z, const CVec& v, const FinslerOptions& opt = {}) {
    const CMat M = vertical_hessian(F, z, v, opt);
    const double G = F.G(z, v);
    const CVec mv = M * v.conjugate();
    return hermitian_part((G * M - mv * mv.adjoint()) / (G * G));
}

/// Same form from first z-derivatives of G_{i jbar} only: the zz block of the
/// (dz, dv) matrix is d_z dbar_z log G, so the horizontal part is that minus B^T V Bbar.
inline ChernFormL chern_form_fast(const FinslerMetric& F, const CVec& z, const CVec& v, const FinslerOptions& opt = {}) {
    detail::require_off_zero_section(v);
    const double hv = opt.fiber_step(v);
    const auto R = static_cast<Eigen::Index>(F.rank);
    auto flat = [&](Point p) { return flatten(detail::vertical_hessian_step(F, to_cvec(p), v, hv, opt.order)); };
    const auto jm = field_jet(flat, z, opt.base_step(z), opt.order, false);
    const CMat M = hermitian_part(unflatten(jm.value, R));
    const CMat Minv = checked_inverse(M, ErrorKind::SingularVerticalMetric, "vertical Hessian is singular");
    auto logg = [&](Point p) { return Complex(std::log(F.G(to_cvec(p), v))); };
    const auto jl = field_jet(logg, z, opt.base_step(z), opt.order, true);
    ChernFormL out;
    out.z = z;
    out.v = v;
    out.chart = affine_chart(v);
    const double G = F.G(z, v);
    const CVec mv = M * v.conjugate();
    out.vertical = hermitian_part((G * M - mv * mv.adjoint()) / (G * G));
    const int n = F.base_dim;
    out.B = CMat(R, n);
    CMat Hzz(n, n);
    for (int k = 0; k < n; ++k) {
        out.B.col(k) = (unflatten(jm.d[static_cast<std::size_t>(k)], R) * Minv).transpose() * v;
        for (int l = 0; l < n; ++l) Hzz(k, l) = jl.mixed(k, l);
    }
    out.horizontal = hermitian_part(Hzz - out.B.transpose() * out.vertical * out.B.conjugate());
    return out;
}

/// Direct ddc log G(z, v(w)) in the affine chart of [v], v(w)^chart fixed.
inline CMat chern_direct_affine(const FinslerMetric& F, const CVec& z, const CVec& v, int chart,
                                const JetOptions& opt = {}) {
    detail::require_off_zero_section(v);
    const auto n = z.size(), R = v.size();
    auto lift = [=](const CVec& c) {
        CVec full(R);
        for (Eigen::Index i = 0, k = 0; i < R; ++i) full(i) = i == chart ? v(chart) : c(n + k++);
        return full;
    };
    auto f = [&](Point p) {
        const CVec c = to_cvec(p);
        return Complex(std::log(F.G(c.head(n), lift(c))));
    };
    CVec c(n + R - 1);
    c.head(n) = z;
    for (Eigen::Index i = 0, k = 0; i < R; ++i)
        if (i != chart) c(n + k++) = v(i);
    std::vector<double> steps(static_cast<std::size_t>(c.size()), opt.step * (1.0 + z.norm()));
    for (Eigen::Index i = n; i < c.size(); ++i) steps[static_cast<std::size_t>(i)] = opt.step * v.norm();
    const auto j = field_jet(f, c, std::span<const double>(steps), opt.order, true);
    CMat H(c.size(), c.size());
    for (Eigen::Index a = 0; a < c.size(); ++a)
        for (Eigen::Index b = 0; b < c.size(); ++b) H(a, b) = j.mixed(static_cast<int>(a), static_cast<int>(b));
    return hermitian_part(H);
}

/// Total mass of the vertical form over P^1 at z, via stereographic coordinates.
inline double fiber_mass(const FinslerMetric& F, const CVec& z, const PlaneRule& rule, const FinslerOptions& opt = {}) {
    if (F.rank != 2) throw Error(ErrorKind::InvalidArgument, "fiber mass is implemented for rank 2");
    std::vector<double> terms(rule.w.size());
    parallel_for(rule.w.size(), [&](std::size_t i) {
        const CVec v = cvec({1.0, rule.w[i]});
        const CMat V = chern_vertical(F, z, v, opt);
        terms[i] = rule.weight[i] * V(1, 1).real() / kPi;
    });
    return pairwise_sum(terms);
}

// ---------------------------------------------------------------------------
// Normal frames.

/// Frame change e'(z') = M(z') e with M(z') = M0 (I + sum_k A_k (z'^k - z^k));
/// fiber components transform as v = M(z')^T v'.
struct NormalFrame {
    CVec z, v, v_prime;
    CMat M0;
    std::vector<CMat> A;

    CMat at(const CVec& zp) const {
        CMat m = CMat::Identity(M0.rows(), M0.cols());
        for (std::size_t k = 0; k < A.size(); ++k) m += A[k] * (zp(static_cast<Eigen::Index>(k)) - z(static_cast<Eigen::Index>(k)));
        return M0 * m;
    }
    FinslerMetric apply(const FinslerMetric& F) const {
        FinslerMetric out = F;
        out.name = F.name + "@normal";
        out.G = [g = F.G, self = *this](const CVec& zp, const CVec& vp) {
            return g(zp, CVec(self.at(zp).transpose() * vp));
        };
        return out;
    }
};

inline NormalFrame normal_frame_at(const FinslerMetric& F, const CVec& z, const CVec& v, const FinslerOptions& opt = {}) {
    const FinslerJet j = finsler_jet(F, z, v, false, opt);
    const int R = j.R;
    Eigen::LLT<CMat> llt(j.M);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularVerticalMetric, "vertical Hessian is not positive");
    NormalFrame nf;
    nf.z = z;
    nf.v = v;
    nf.M0 = checked_inverse(CMat(llt.matrixL()), ErrorKind::SingularVerticalMetric, "Cholesky factor is singular");
    nf.v_prime = nf.M0.transpose().fullPivLu().solve(v);
    // C M + sum_p (d_{v^p} M) (C^T v)_p = -d_{z^k} M, linear in the entries of C
    const int N = R * R;
    CMat L(N, N);
    for (int e = 0; e < N; ++e) {
        CMat E = CMat::Zero(R, R);
        E(e % R, e / R) = 1.0;
        CMat img = E * j.M;
        const CVec ev = E.transpose() * v;
        for (int p = 0; p < R; ++p) img += j.d[static_cast<std::size_t>(j.n + p)] * ev(p);
        L.col(e) = flatten(img);
    }
    Eigen::FullPivLU<CMat> lu(L);
    if (!lu.isInvertible()) throw Error(ErrorKind::SingularVerticalMetric, "normal-frame system is singular");
    for (int k = 0; k < j.n; ++k) nf.A.push_back(unflatten(lu.solve(CVec(-flatten(j.d[static_cast<std::size_t>(k)]))), R));
    return nf;
}

// ---------------------------------------------------------------------------
// The Kaehler form on P(E).

/// ddc(kappa rho^lambda) = kappa rho^lambda [(lambda/2) phi + (lambda^2/4) dtau ^ dctau].
inline CMat ddc_rho_power(const BaseModel& base, const CVec& z, double kappa, double lambda) {
    const CVec dt = base.dtau(z);
    return kappa * std::pow(base.rho(z), lambda) *
           (0.5 * lambda * base.phi(z).H + 0.25 * lambda * lambda * dt * dt.adjoint());
}

struct PhiTilde {
    Form11 form;        // (n + r) square, (dz, eta) coframe; eta drops the chart coordinate
    CMat horizontal;    // n x n
    CMat vertical;      // r x r
    double min_eig = 0.0;
    double lower_margin = 0.0;  // min eig(phi~^H - (kappa lambda/2) rho^lambda phi)
    double upper_margin = 0.0;  // min eig(2 kappa rho^{lambda+c} phi - phi~^H)
    double scale = 1.0;         // norm of the horizontal block, for relative margins
    bool sandwich(double tol = 1e-8) const { return lower_margin >= -tol * scale && upper_margin >= -tol * scale; }
};

inline PhiTilde phi_tilde_from_chern(const ChernFormL& c1, const BaseModel& base, double kappa, double lambda) {
    PhiTilde out;
    const CVec& z = c1.z;
    out.horizontal = c1.horizontal + ddc_rho_power(base, z, kappa, lambda);
    out.vertical = c1.fiber();
    const int n = c1.n(), r = static_cast<int>(out.vertical.rows());
    CMat H = CMat::Zero(n + r, n + r);
    H.topLeftCorner(n, n) = out.horizontal;
    H.bottomRightCorner(r, r) = out.vertical;
    out.form = Form11{H};
    out.min_eig = fnv::min_eig(H);
    const CMat phi = base.phi(z).H;
    const double rl = std::pow(base.rho(z), lambda);
    out.lower_margin = fnv::min_eig(out.horizontal - 0.5 * kappa * lambda * rl * phi);
    out.upper_margin = fnv::min_eig(2.0 * kappa * rl * std::pow(base.rho(z), base.c) * phi - out.horizontal);
    out.scale = std::max(out.horizontal.norm(), 1e-300);
    return out;
}

inline PhiTilde phi_tilde(const FinslerMetric& F, const BaseModel& base, double kappa, double lambda, const CVec& z,
                          const CVec& v, const FinslerOptions& opt = {}) {
    return phi_tilde_from_chern(chern_form_L(F, z, v, opt), base, kappa, lambda);
}

// ---------------------------------------------------------------------------
// Sections of the dual bundle lifted to P(E).

struct SectionLift {
    Complex value;   // <sigma(z), v>
    double h_tilde;  // |value| / h(v)
    double l_tilde;  // h_tilde (det G_{i jbar})^{-1/2} g^{1/2}
};

/// `det_metric` is a rank-one metric on det(E); pass an empty field for g = 1.
inline SectionLift section_lift(const FinslerMetric& F, const CVec& sigma, const CVec& z, const CVec& v,
                                const HermitianMetricField& det_metric = {}, const FinslerOptions& opt = {}) {
    detail::require_off_zero_section(v);
    SectionLift out;
    out.value = (sigma.transpose() * v)(0, 0);
    out.h_tilde = std::abs(out.value) / std::sqrt(F.G(z, v));
    const double detG = vertical_hessian(F, z, v, opt).determinant().real();
    const double g = det_metric.h ? det_metric(z)(0, 0).real() : 1.0;
    out.l_tilde = out.h_tilde * std::sqrt(g / detG);
    return out;
}

/// Integral over P^1 of |sigma~|^2 against the vertical form, rank 2 only.
inline double fiber_integral_sigma(const FinslerMetric& F, const CVec& sigma, const CVec& z, const PlaneRule& rule,
                                   const FinslerOptions& opt = {}) {
    if (F.rank != 2) throw Error(ErrorKind::InvalidArgument, "fiber integral is implemented for rank 2");
    std::vector<double> terms(rule.w.size());
    parallel_for(rule.w.size(), [&](std::size_t i) {
        const CVec v = cvec({1.0, rule.w[i]});
        const double s = section_lift(F, sigma, z, v, {}, opt).h_tilde;
        terms[i] = rule.weight[i] * s * s * chern_vertical(F, z, v, opt)(1, 1).real() / kPi;
    });
    return pairwise_sum(terms);
}

// ---------------------------------------------------------------------------
// Finite order.

/// Curvature of the determinant line (det G_{i jbar}) in the (dz, eta) coframe.
struct DetLineForm {
    CMat horizontal, vertical;
};

inline DetLineForm det_line_form(const FinslerCurvature& c) {
    const int m = c.dim();
    CMat H(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) H(a, b) = c.block(a, b).trace();
    const CMat T = to_horizontal_coframe(hermitian_part(H), c.lift_matrix());
    return {T.topLeftCorner(c.n, c.n), drop_index(T.bottomRightCorner(c.R, c.R), affine_chart(c.v))};
}

/// Worst ratio of the full bisectional curvature over every tangent direction at (z, v).
inline double bisectional_sup(const FinslerCurvature& c, const Form11& phi) {
    const int m = c.dim();
    CMat T = CMat::Identity(m, m);
    T.bottomLeftCorner(c.R, c.n) = -c.lift_matrix();
    const CMat num = hermitian_part(T.transpose() * c.pairing_matrix() * T.conjugate());
    CMat den = CMat::Zero(m, m);
    den.topLeftCorner(c.n, c.n) = phi.H;
    den.bottomRightCorner(c.R, c.R) = c.M;
    return generalized_eigenvalues(num, den).cwiseAbs().maxCoeff() / c.G;
}

struct FinslerOrderCheck {
    OrderCheck full;        // |k(zeta, v)| <= kappa rho^lambda
    OrderCheck horizontal;  // |Theta(P)| <= kappa rho^lambda phi
    OrderCheck det_horizontal;
    OrderCheck det_vertical;
};

inline FinslerOrderCheck finsler_order_check(const FinslerMetric& F, const BaseModel& base, const FormField& phi,
                                             double lambda, std::span<const CVec> zs, int fiber_count = 6,
                                             const FinslerOptions& opt = {}) {
    const auto vs = finsler_fiber_probes(F.rank, fiber_count, 7);
    std::array<std::vector<double>, 4> ratios;
    for (auto& r : ratios) r.assign(zs.size(), 0.0);
    parallel_for(zs.size(), [&](std::size_t i) {
        const CVec& z = zs[i];
        const Form11 ph = phi(z);
        const double rl = std::pow(base.rho(z), lambda);
        for (const auto& v : vs) {
            const FinslerCurvature c = finsler_curvature(F, z, v, opt);
            const ChernFormL c1 = chern_from_curvature(c);
            const DetLineForm d = det_line_form(c);
            const std::array<double, 4> w{
                bisectional_sup(c, ph),
                generalized_eigenvalues(c1.horizontal, ph.H).cwiseAbs().maxCoeff(),
                generalized_eigenvalues(d.horizontal, ph.H).cwiseAbs().maxCoeff(),
                generalized_eigenvalues(d.vertical, c1.fiber()).cwiseAbs().maxCoeff()};
            for (std::size_t q = 0; q < 4; ++q) ratios[q][i] = std::max(ratios[q][i], w[q] / rl);
        }
    });
    return {summarize_order(zs, ratios[0]), summarize_order(zs, ratios[1]), summarize_order(zs, ratios[2]),
            summarize_order(zs, ratios[3])};
}

// ---------------------------------------------------------------------------
// Catalog.

inline FinslerMetric quadratic_finsler(const HermitianMetricField& h) {
    FinslerMetric F;
    F.rank = h.rank;
    F.base_dim = h.base_dim;
    F.name = "quadratic_" + h.name;
    F.G = [h](const CVec& z, const CVec& v) { return norm2_h(h(z), v); };
    return F;
}

/// sqrt(|v0|^4 + beta(z) |v1|^4 + alpha |v0|^2 |v1|^2); strictly psh off the axes
/// needs 0 < alpha < 2 sqrt(beta).
inline FinslerMetric quartic_finsler(double alpha, bool z_dependent_beta, int n = 1) {
    FinslerMetric F;
    F.rank = 2;
    F.base_dim = n;
    F.name = z_dependent_beta ? "quartic_cross_z" : (alpha == 0.0 ? "quartic_pure" : "quartic_cross");
    F.G = [alpha, z_dependent_beta](const CVec& z, const CVec& v) {
        const double a = std::norm(v(0)), b = std::norm(v(1));
        const double u = 1.0 + z.squaredNorm();
        const double beta = z_dependent_beta ? u * u : 1.0;
        return std::sqrt(a * a + beta * b * b + alpha * a * b);
    };
    return F;
}

inline FinslerMetric finsler_catalog(const std::string& name, int n = 1) {
    if (name == "flat") {
        FinslerMetric F;
        F.rank = 2;
        F.base_dim = n;
        F.name = name;
        F.G = [](const CVec&, const CVec& v) { return v.squaredNorm(); };
        return F;
    }
    if (name == "quartic_cross") return quartic_finsler(1.0, false, n);
    if (name == "quartic_cross_z") return quartic_finsler(1.0, true, n);
    if (name == "quartic_pure") return quartic_finsler(0.0, false, n);
    if (name.rfind("quadratic_", 0) == 0) return quadratic_finsler(hermitian_catalog(name.substr(10), n));
    throw Error(ErrorKind::InvalidArgument, "unknown Finsler metric " + name);
}

/// Metrics that satisfy every Finsler condition; quartic_pure is a negative example.
inline std::vector<std::string> finsler_catalog_names() {
    return {"flat", "quartic_cross", "quartic_cross_z", "quadratic_diag_twist", "quadratic_diag_exp",
            "quadratic_coupled"};
}

}  // namespace fnv
