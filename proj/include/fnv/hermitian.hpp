#pragma once

// Hermitian metrics on a trivialized holomorphic bundle over a chart of C^n.
//
// h(z)_{ij} = <e_i, e_j>. With (Gamma_k)_{ij} = Gamma^j_{ik} and
// (K_kl)_{ij} = K^j_{ik lbar}:
//   Gamma_k = (d_k h) h^{-1}
//   K_kl    = -(d_k dbar_l h) h^{-1} + (d_k h) h^{-1} (dbar_l h) h^{-1} = -dbar_l Gamma_k
// A scalar weight e^w adds d_k w to Gamma_k and -d_k dbar_l w to K_kl.

#include "fnv/base_space.hpp"

namespace fnv {

using MatrixField = std::function<CMat(const CVec&)>;

/// The metric is e^{w(z)} h(z); the optional scalar weight w keeps rapidly
/// decaying or growing line-bundle metrics representable in double precision.
struct HermitianMetricField {
    int rank = 1;       // r + 1
    int base_dim = 1;   // n
    MatrixField h;
    std::function<double(const CVec&)> log_weight;  // empty: w = 0
    std::string name;

    double weight_log(const CVec& z) const { return log_weight ? log_weight(z) : 0.0; }
    /// Full metric matrix e^{w} h; may under- or overflow far out.
    CMat operator()(const CVec& z) const { return h(z) * std::exp(weight_log(z)); }
};

inline CVec flatten(const CMat& m) { return Eigen::Map<const CVec>(m.data(), m.size()); }
inline CMat unflatten(const CVec& v, Eigen::Index rows) {
    return Eigen::Map<const CMat>(v.data(), rows, v.size() / rows);
}

inline CMat checked_inverse(const CMat& h, ErrorKind kind, const char* what) {
    Eigen::FullPivLU<CMat> lu(h);
    if (!lu.isInvertible() || !h.allFinite()) throw Error(kind, what);
    return lu.inverse();
}

/// First and mixed second derivatives of a matrix-valued field.
struct MatrixJet {
    CMat value;
    std::vector<CMat> d, dbar;  // per base coordinate
    std::vector<CMat> ddbar;    // [k * n + l] = d_k dbar_l
    int n = 0;
    const CMat& mixed(int k, int l) const { return ddbar[static_cast<std::size_t>(k * n + l)]; }
};

inline MatrixJet matrix_jet(const MatrixField& f, const CVec& z, double step, int order = 4) {
    const CMat v0 = f(z);
    const Eigen::Index rows = v0.rows();
    auto flat = [&](Point p) { return flatten(f(to_cvec(p))); };
    auto j = field_jet(flat, z, step, order, true);
    MatrixJet out;
    out.n = static_cast<int>(z.size());
    out.value = v0;
    for (int k = 0; k < out.n; ++k) {
        out.d.push_back(unflatten(j.d[static_cast<std::size_t>(k)], rows));
        out.dbar.push_back(unflatten(j.dbar[static_cast<std::size_t>(k)], rows));
    }
    for (const auto& m : j.ddbar) out.ddbar.push_back(unflatten(m, rows));
    return out;
}

struct HermitianOptions {
    double step = 1e-4;  // scaled by (1 + ||z||)
    int order = 4;
    double step_at(const CVec& z) const { return step * (1.0 + z.norm()); }
};

/// Jet of the weight w: first and mixed second Wirtinger derivatives.
struct WeightJet {
    CVec d;
    CMat ddbar;
};

inline WeightJet weight_jet(const HermitianMetricField& h, const CVec& z, double step, int order, bool second) {
    const auto n = z.size();
    if (!h.log_weight) return {CVec::Zero(n), CMat::Zero(n, n)};
    auto w = [&](Point p) { return Complex(h.log_weight(to_cvec(p)), 0.0); };
    auto j = field_jet(w, z, step, order, second);
    WeightJet out{CVec(n), CMat::Zero(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.d(k) = j.d[static_cast<std::size_t>(k)];
        if (second)
            for (Eigen::Index l = 0; l < n; ++l) out.ddbar(k, l) = j.mixed(static_cast<int>(k), static_cast<int>(l));
    }
    return out;
}

/// Christoffel symbols: result[k](i, j) = Gamma^j_{ik}.
inline std::vector<CMat> connection_at(const HermitianMetricField& h, const CVec& z, double step, int order) {
    auto flat = [&](Point s) { return flatten(h.h(to_cvec(s))); };
    const CMat h0 = h.h(z);
    const Eigen::Index r = h0.rows();
    auto fj = field_jet(flat, z, step, order, false);
    const WeightJet wj = weight_jet(h, z, step, order, false);
    const CMat hinv = checked_inverse(h0, ErrorKind::SingularMetric, "metric is singular");
    std::vector<CMat> g;
    for (Eigen::Index k = 0; k < z.size(); ++k)
        g.push_back(unflatten(fj.d[static_cast<std::size_t>(k)], r) * hinv + wj.d(k) * CMat::Identity(r, r));
    return g;
}

inline std::vector<CMat> chern_connection(const HermitianMetricField& h, const CVec& z,
                                          const HermitianOptions& opt = {}) {
    return connection_at(h, z, opt.step_at(z), opt.order);
}

/// Curvature K^j_{ik lbar}, stored as K[k * n + l](i, j). `shape` is the
/// unweighted matrix h and `log_scale` the weight w, so the metric is e^w shape.
struct CurvatureTensorH {
    std::vector<CMat> K;
    CMat shape;
    double log_scale = 0.0;
    CVec base_point;
    int n = 0;
    const CMat& at(int k, int l) const { return K[static_cast<std::size_t>(k * n + l)]; }
    CMat metric() const { return shape * std::exp(log_scale); }
};

inline CurvatureTensorH curvature_h(const HermitianMetricField& h, const CVec& z, const HermitianOptions& opt = {}) {
    const double step = opt.step_at(z);
    const MatrixJet j = matrix_jet(h.h, z, step, opt.order);
    const WeightJet wj = weight_jet(h, z, step, opt.order, true);
    const CMat hinv = checked_inverse(j.value, ErrorKind::SingularMetric, "metric is singular");
    const Eigen::Index r = j.value.rows();
    CurvatureTensorH out;
    out.n = j.n;
    out.shape = j.value;
    out.log_scale = h.weight_log(z);
    out.base_point = z;
    for (int k = 0; k < j.n; ++k)
        for (int l = 0; l < j.n; ++l)
            out.K.push_back(-j.mixed(k, l) * hinv +
                            j.d[static_cast<std::size_t>(k)] * hinv * j.dbar[static_cast<std::size_t>(l)] * hinv -
                            wj.ddbar(k, l) * CMat::Identity(r, r));
    return out;
}

/// -dbar_l Gamma_k by differencing the connection itself (the inner step is
/// frozen at the outer base point so the nested difference is smooth).
inline CurvatureTensorH curvature_from_connection(const HermitianMetricField& h, const CVec& z,
                                                  const HermitianOptions& opt = {}) {
    const double inner = opt.step_at(z);
    const int n = static_cast<int>(z.size());
    const Eigen::Index r = h.h(z).rows();
    auto gamma_flat = [&](Point p) {
        const auto g = connection_at(h, to_cvec(p), inner, opt.order);
        CVec out(n * r * r);
        for (int k = 0; k < n; ++k) out.segment(k * r * r, r * r) = flatten(g[static_cast<std::size_t>(k)]);
        return out;
    };
    auto outer = field_jet(gamma_flat, z, inner, opt.order, false);
    CurvatureTensorH out;
    out.n = n;
    out.shape = h.h(z);
    out.log_scale = h.weight_log(z);
    out.base_point = z;
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
            out.K.push_back(-unflatten(outer.dbar[static_cast<std::size_t>(l)].segment(k * r * r, r * r), r));
    return out;
}

/// Pairing against the unweighted shape matrix; multiply by e^w for the metric value.
inline Complex curvature_pairing_shape(const CurvatureTensorH& K, const CVec& xi1, const CVec& xi2, const CVec& v) {
    Complex s = 0.0;
    for (int k = 0; k < K.n; ++k)
        for (int l = 0; l < K.n; ++l)
            s += xi1(k) * std::conj(xi2(l)) * (v.transpose() * K.at(k, l) * K.shape * v.conjugate())(0, 0);
    return s;
}

/// <K(xi1, xi2bar) v, v>_h = sum K^j_{ik lbar} xi1^k xi2bar^l v^i h_{j sbar} vbar^s.
inline Complex curvature_pairing_h(const CurvatureTensorH& K, const CVec& xi1, const CVec& xi2, const CVec& v) {
    return curvature_pairing_shape(K, xi1, xi2, v) * std::exp(K.log_scale);
}

inline double norm2_h(const CMat& h, const CVec& v) { return (v.transpose() * h * v.conjugate())(0, 0).real(); }

/// Theta(v) = (sqrt(-1)/2pi) <K v, v>_h / ||v||^2 as a (1,1)-form on the base.
inline Form11 theta_from_tensor(const CurvatureTensorH& K, const CVec& v) {
    const double nv = norm2_h(K.shape, v);
    if (!(v.norm() > 0.0) || !(nv > 0.0)) throw Error(ErrorKind::ZeroVector, "fiber vector is zero");
    CMat H(K.n, K.n);
    for (int k = 0; k < K.n; ++k)
        for (int l = 0; l < K.n; ++l) H(k, l) = (v.transpose() * K.at(k, l) * K.shape * v.conjugate())(0, 0) / nv;
    return {H};
}

inline Form11 theta_of_v(const HermitianMetricField& h, const CVec& z, const CVec& v, const HermitianOptions& opt = {}) {
    if (!(v.norm() > 0.0)) throw Error(ErrorKind::ZeroVector, "fiber vector is zero");
    return theta_from_tensor(curvature_h(h, z, opt), v);
}

/// Holomorphic bisectional curvature k(xi, v) = Theta(v)(xi, xibar) / phi(xi, xibar).
inline Complex bisectional_from_tensor(const CurvatureTensorH& K, const CVec& xi, const CVec& v, const Form11& phi) {
    if (!(xi.norm() > 0.0)) throw Error(ErrorKind::ZeroVector, "base direction is zero");
    if (!(v.norm() > 0.0)) throw Error(ErrorKind::ZeroVector, "fiber vector is zero");
    if (!(phi.min_eig() > 0.0)) throw Error(ErrorKind::SingularForm, "reference form is not positive");
    const double nxi = (xi.transpose() * phi.H * xi.conjugate())(0, 0).real();
    return curvature_pairing_shape(K, xi, xi, v) / (nxi * norm2_h(K.shape, v));
}

inline Complex bisectional_h(const HermitianMetricField& h, const CVec& z, const CVec& xi, const CVec& v,
                             const Form11& phi, const HermitianOptions& opt = {}) {
    return bisectional_from_tensor(curvature_h(h, z, opt), xi, v, phi);
}

// ---------------------------------------------------------------------------
// Induced metrics.

inline HermitianMetricField det_metric(const HermitianMetricField& h) {
    HermitianMetricField d;
    d.rank = 1;
    d.base_dim = h.base_dim;
    d.name = "det(" + h.name + ")";
    auto f = h.h;
    d.h = [f](const CVec& z) {
        CMat m(1, 1);
        m(0, 0) = f(z).determinant();
        if (!(m(0, 0).real() > 0.0)) throw Error(ErrorKind::SingularMetric, "determinant is not positive");
        return m;
    };
    if (h.log_weight) {
        const double r = h.rank;
        d.log_weight = [w = h.log_weight, r](const CVec& z) { return r * w(z); };
    }
    return d;
}

inline HermitianMetricField dual_metric(const HermitianMetricField& h) {
    HermitianMetricField d;
    d.rank = h.rank;
    d.base_dim = h.base_dim;
    d.name = "dual(" + h.name + ")";
    auto f = h.h;
    d.h = [f](const CVec& z) {
        return CMat(checked_inverse(f(z), ErrorKind::SingularMetric, "metric is singular").transpose());
    };
    if (h.log_weight) d.log_weight = [w = h.log_weight](const CVec& z) { return -w(z); };
    return d;
}

struct InducedMetrics {
    HermitianMetricField det, dual;
};

inline InducedMetrics induced_metrics(const HermitianMetricField& h) { return {det_metric(h), dual_metric(h)}; }

/// c1 = -ddc log h for a line bundle metric given as a positive scalar field.
inline Form11 first_chern_form(const HermitianMetricField& line, const CVec& z, const HermitianOptions& opt = {}) {
    if (line.rank != 1) throw Error(ErrorKind::InvalidArgument, "first_chern_form expects a line bundle");
    const CurvatureTensorH K = curvature_h(line, z, opt);
    CMat H(K.n, K.n);
    for (int k = 0; k < K.n; ++k)
        for (int l = 0; l < K.n; ++l) H(k, l) = K.at(k, l)(0, 0);
    return {H};
}

/// Trace of the curvature over the fiber indices.
inline Form11 curvature_trace(const CurvatureTensorH& K) {
    CMat H(K.n, K.n);
    for (int k = 0; k < K.n; ++k)
        for (int l = 0; l < K.n; ++l) H(k, l) = K.at(k, l).trace();
    return {H};
}

/// |sigma|^2 in the dual metric: sigma^H h^{-1} sigma.
inline double dual_norm2(const CMat& h, const CVec& sigma) {
    const CMat hinv = checked_inverse(h, ErrorKind::SingularMetric, "metric is singular");
    return (sigma.adjoint() * hinv * sigma)(0, 0).real();
}

/// Unit vectors for rank 2: v = (cos t, sin t e^{ia}) on a product grid.
inline std::vector<CVec> fiber_grid_rank2(int n_t, int n_a) {
    std::vector<CVec> out;
    for (int i = 0; i <= n_t; ++i) {
        const double t = 0.5 * kPi * i / n_t;
        for (int j = 0; j < (i == 0 || i == n_t ? 1 : n_a); ++j) {
            const double a = 2.0 * kPi * j / n_a;
            out.push_back(cvec({std::cos(t), std::sin(t) * std::polar(1.0, a)}));
        }
    }
    return out;
}

/// Deterministic unit fiber vectors of the given rank.
inline std::vector<CVec> fiber_probes(int rank, int count, std::uint64_t seed) {
    std::vector<CVec> out;
    for (int i = 0; i < rank && static_cast<int>(out.size()) < count; ++i) out.push_back(CVec::Unit(rank, i));
    for (const auto& v : sample_points(rank, std::max(0, count - rank), 1.0, 1.0, seed)) out.push_back(v);
    return out;
}

/// max over a fiber grid of |sigma(v)| / |v|_h; approximates the dual norm.
inline double dual_norm_by_grid(const CMat& h, const CVec& sigma, std::span<const CVec> grid) {
    double best = 0.0;
    for (const auto& v : grid) {
        const double val = std::abs((sigma.transpose() * v)(0, 0)) / std::sqrt(norm2_h(h, v));
        best = std::max(best, val);
    }
    return best;
}

// ---------------------------------------------------------------------------
// Order of a Hermitian metric.

/// Empirical growth test shared by the Hermitian and Finsler order checks:
/// ratios |k| / rho^lambda are grouped into radius bins and the log-log slope
/// of the per-bin maximum over the outer half of the bins must not exceed
/// kOrderSlopeTolerance. rho carries a logarithmic factor, which alone gives
/// apparent slopes of a few tenths at radii below 10^2.
inline constexpr double kOrderSlopeTolerance = 0.5;

struct OrderCheck {
    double kappa = 0.0;        // smallest kappa with |k| <= kappa rho^lambda on the samples
    double tail_slope = 0.0;   // log-log slope of the binned maxima over the outer half
    bool pass = false;
    CVec witness;
};

inline OrderCheck summarize_order(std::span<const CVec> samples, std::span<const double> ratios, int bins = 8) {
    OrderCheck out;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < ratios.size(); ++i)
        if (ratios[i] > ratios[worst]) worst = i;
    out.kappa = ratios.empty() ? 0.0 : ratios[worst];
    if (!samples.empty()) out.witness = samples[worst];
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    for (const auto& z : samples) {
        rmin = std::min(rmin, std::max(z.norm(), 1e-300));
        rmax = std::max(rmax, z.norm());
    }
    if (out.kappa <= 0.0 || !(rmax > rmin)) {
        out.pass = std::isfinite(out.kappa);
        return out;
    }
    std::vector<double> bmax(static_cast<std::size_t>(bins), 0.0), bsum(static_cast<std::size_t>(bins), 0.0);
    std::vector<int> bcount(static_cast<std::size_t>(bins), 0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double t = std::log(std::max(samples[i].norm(), rmin) / rmin) / std::log(rmax / rmin);
        const auto b = static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(t * bins)));
        bmax[b] = std::max(bmax[b], ratios[i]);
        bsum[b] += std::log(std::max(samples[i].norm(), rmin));
        ++bcount[b];
    }
    std::vector<double> xs, ys;
    for (int b = bins / 2; b < bins; ++b) {
        const auto ub = static_cast<std::size_t>(b);
        if (bcount[ub] == 0 || bmax[ub] <= 0.0) continue;
        xs.push_back(bsum[ub] / bcount[ub]);
        ys.push_back(std::log(bmax[ub]));
    }
    if (xs.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= xs.size();
        my /= ys.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        out.tail_slope = sxx > 0 ? sxy / sxx : 0.0;
    }
    out.pass = std::isfinite(out.kappa) && out.tail_slope <= kOrderSlopeTolerance;
    return out;
}

/// kappa = max over samples and fiber probes of |Theta(v)| relative to rho^lambda phi,
/// i.e. the largest |generalized eigenvalue| divided by rho^lambda.
inline OrderCheck order_check_h(const HermitianMetricField& h, const BaseModel& base, const FormField& phi,
                                double lambda, std::span<const CVec> samples, int fiber_count = 8,
                                const HermitianOptions& opt = {}) {
    const auto probes = fiber_probes(h.rank, fiber_count, 99);
    std::vector<double> ratios(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        const CurvatureTensorH K = curvature_h(h, samples[i], opt);
        const CMat ph = phi(samples[i]).H;
        double worst = 0.0;
        for (const auto& v : probes) {
            const RVec ev = generalized_eigenvalues(theta_from_tensor(K, v).H, ph);
            worst = std::max(worst, ev.cwiseAbs().maxCoeff());
        }
        ratios[i] = worst / std::pow(base.rho(samples[i]), lambda);
    });
    return summarize_order(samples, ratios);
}

// ---------------------------------------------------------------------------
// Catalog.

inline HermitianMetricField hermitian_catalog(const std::string& name, int n = 1, double eps = 0.5) {
    HermitianMetricField m;
    m.base_dim = n;
    m.name = name;
    auto scalar = [](double x) {
        CMat a(1, 1);
        a(0, 0) = x;
        return a;
    };
    if (name == "flat") {
        m.rank = 2;
        m.h = [](const CVec&) { return CMat(CMat::Identity(2, 2)); };
    } else if (name == "line_fs") {
        m.h = [scalar](const CVec& z) { return scalar(1.0 + z.squaredNorm()); };
    } else if (name == "line_exp") {
        m.h = [scalar](const CVec&) { return scalar(1.0); };
        m.log_weight = [](const CVec& z) { return -z.squaredNorm(); };
    } else if (name == "line_exp_quartic") {
        m.h = [scalar](const CVec&) { return scalar(1.0); };
        m.log_weight = [](const CVec& z) { return -std::pow(z.squaredNorm(), 2); };
    } else if (name == "diag_twist") {
        m.rank = 2;
        m.h = [](const CVec& z) {
            CMat a = CMat::Identity(2, 2);
            a(1, 1) = 1.0 + z.squaredNorm();
            return a;
        };
    } else if (name == "diag_exp") {
        m.rank = 2;
        m.h = [](const CVec& z) {
            CMat a = CMat::Identity(2, 2);
            a(1, 1) = std::exp(z.squaredNorm());
            return a;
        };
    } else if (name == "coupled") {
        m.rank = 2;
        m.h = [eps](const CVec& z) {
            const double s = z.squaredNorm();
            CMat a(2, 2);
            a << 1.0 + s, eps * std::conj(z(0)), eps * z(0), 2.0 + s;
            return a;
        };
    } else {
        throw Error(ErrorKind::SchemaError, "unknown Hermitian metric '" + name + "'");
    }
    return m;
}

inline std::vector<std::string> hermitian_catalog_names() {
    return {"flat", "line_fs", "line_exp", "line_exp_quartic", "diag_twist", "diag_exp", "coupled"};
}

} // namespace fnv
