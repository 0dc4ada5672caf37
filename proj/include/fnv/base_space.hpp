#pragma once

// The affine base X = C^n inside P^n with the hyperplane at infinity removed.
//
// With u = 1 + ||z||^2 and f = sigma_floor, the section defining the hyperplane
// has |sigma|^2 = f / u < 1 and the exhaustion is
//   tau = c log(1/|sigma|^2) - log(log(1/|sigma|^2))^2 = c L - 2 log L,  L = log(u/f).
// tau' = log ||z||^2, rho = e^{tau/2}, rho' = ||z||, phi = ddc tau, psi = ddc tau'.

#include "fnv/quadrature.hpp"
#include "fnv/wirtinger.hpp"

#include <optional>
#include <random>

namespace fnv {

inline constexpr double kDefaultSigmaFloor = 0.36787944117144233;  // 1/e

struct BaseModel {
    int n = 1;
    double c = 4.0;
    double sigma_floor = kDefaultSigmaFloor;

    void validate() const {
        if (n < 1) throw Error(ErrorKind::InvalidArgument, "base dimension must be at least 1");
        if (!(c > 1.0)) throw Error(ErrorKind::InvalidArgument, "exhaustion constant c must exceed 1");
        if (!(sigma_floor > 0.0 && sigma_floor < 1.0))
            throw Error(ErrorKind::InvalidArgument, "sigma_floor must lie in (0, 1)");
    }

    double log_ratio(const CVec& z) const { return std::log((1.0 + z.squaredNorm()) / sigma_floor); }

    double tau(const CVec& z) const;
    double rho(const CVec& z) const { return std::exp(0.5 * tau(z)); }
    static double tau_prime(const CVec& z) { return std::log(z.squaredNorm()); }
    static double rho_prime(const CVec& z) { return z.norm(); }

    /// d tau / dz (holomorphic gradient), closed form.
    CVec dtau(const CVec& z) const;
    /// phi = ddc tau, closed form.
    Form11 phi(const CVec& z) const;
    /// psi = ddc log ||z||^2, closed form; requires z != 0.
    static Form11 psi(const CVec& z);
    static CVec dtau_prime(const CVec& z);

    ScalarField tau_field() const;
    ScalarField tau_prime_field() const;
};

/// Exhaustion of the complement of the hyperplane at infinity; see BaseModel.
inline double tau_special(const CVec& z, double c, double sigma_floor) {
    if (!z.allFinite()) throw Error(ErrorKind::NonFinite, "point is not finite");
    const double L = std::log((1.0 + z.squaredNorm()) / sigma_floor);
    if (!(L > 0.0)) throw Error(ErrorKind::DegenerateLog, "inner logarithm vanishes");
    return c * L - 2.0 * std::log(L);
}

inline double BaseModel::tau(const CVec& z) const { return tau_special(z, c, sigma_floor); }

inline CVec BaseModel::dtau(const CVec& z) const {
    const double u = 1.0 + z.squaredNorm();
    const double L = log_ratio(z);
    return z.conjugate() * ((c - 2.0 / L) / u);
}

inline Form11 BaseModel::phi(const CVec& z) const {
    const double u = 1.0 + z.squaredNorm();
    const double L = log_ratio(z);
    const auto m = z.size();
    const CMat zz = z.conjugate() * z.transpose() / (u * u);  // zbar_j z_k / u^2
    const CMat ddL = CMat::Identity(m, m) / u - zz;
    return {(c - 2.0 / L) * ddL + (2.0 / (L * L)) * zz};
}

inline Form11 BaseModel::psi(const CVec& z) {
    const double s = z.squaredNorm();
    if (s == 0.0) throw Error(ErrorKind::OriginNotInDomain, "psi is singular at the origin");
    const auto m = z.size();
    return {CMat::Identity(m, m) / s - z.conjugate() * z.transpose() / (s * s)};
}

inline CVec BaseModel::dtau_prime(const CVec& z) {
    const double s = z.squaredNorm();
    if (s == 0.0) throw Error(ErrorKind::OriginNotInDomain, "tau' is singular at the origin");
    return z.conjugate() / s;
}

inline ScalarField BaseModel::tau_field() const {
    ScalarField f;
    f.arity = n;
    f.real_valued = true;
    f.name = "tau";
    const double cc = c, fl = sigma_floor;
    f.eval = [cc, fl](Point p) { return Complex(tau_special(to_cvec(p), cc, fl), 0.0); };
    return f;
}

inline ScalarField BaseModel::tau_prime_field() const {
    ScalarField f;
    f.arity = n;
    f.real_valued = true;
    f.name = "tau_prime";
    f.eval = [](Point p) {
        double s = 0.0;
        for (auto x : p) s += std::norm(x);
        return Complex(std::log(s), 0.0);
    };
    f.domain_guard = [](Point p) {
        double s = 0.0;
        for (auto x : p) s += std::norm(x);
        return s > 0.0;
    };
    return f;
}

/// ddc log(1 + ||z||^2) on C^n.
inline Form11 fubini_study_form(const CVec& z) {
    const double u = 1.0 + z.squaredNorm();
    const auto m = z.size();
    return {CMat::Identity(m, m) / u - z.conjugate() * z.transpose() / (u * u)};
}

/// Deterministic sample points in C^n with log-uniform radius in [rmin, rmax]
/// and unitary-invariant direction.
inline std::vector<CVec> sample_points(int n, int count, double rmin, double rmax, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<CVec> out;
    for (int k = 0; k < count; ++k) {
        CVec z(n);
        for (int i = 0; i < n; ++i) z(i) = Complex(g(gen), g(gen));
        const double r = rmin * std::pow(rmax / rmin, u(gen));
        out.push_back(z * (r / z.norm()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Punctured disc.

/// Complete finite-volume metric on the punctured unit disc:
/// H = 2 / (|z|^2 log^2(|z|^2 / c)), so the coefficient is 1 / (pi |z|^2 log^2).
inline Form11 poincare_form(Complex z, double c) {
    if (!(c > 1.0)) throw Error(ErrorKind::InvalidArgument, "Poincare constant must exceed 1");
    const double s = std::norm(z);
    if (s == 0.0) throw Error(ErrorKind::OriginNotInDomain, "the puncture is not in the domain");
    if (s > 1.0) throw Error(ErrorKind::InvalidArgument, "point lies outside the unit disc");
    const double L = std::log(s / c);
    CMat h(1, 1);
    h(0, 0) = 2.0 / (s * L * L);
    return {h};
}

/// Gauss curvature of the Riemannian metric g(X, X) = omega(X, JX) of a
/// one-dimensional form field: K = -Delta log(g) / (2 g).
inline double gauss_curvature(const std::function<Form11(const CVec&)>& form, Complex z,
                              const JetOptions& opt = {}) {
    ScalarField logg;
    logg.arity = 1;
    logg.real_valued = true;
    logg.eval = [&form](Point p) {
        const double g = form(to_cvec(p)).H(0, 0).real() / kPi;
        if (!(g > 0.0)) throw Error(ErrorKind::SingularMetric, "metric density is not positive");
        return Complex(std::log(g), 0.0);
    };
    const double g = form(cvec({z})).H(0, 0).real() / kPi;
    JetOptions o = opt;
    o.estimate_error = false;
    // the metric is singular at the puncture: scale the step with |z|
    o.relative = false;
    o.step = opt.step * std::abs(z);
    const double lap = 4.0 * jet2(logg, cvec({z}), o).ddbar(0, 0).real();
    return -lap / (2.0 * g);
}

/// Area of {eps <= |z| <= 1} for the Poincare form; tends to 2 / log c.
inline double poincare_area_closed_form(double eps, double c) {
    return 2.0 * (1.0 / std::log(c) + 1.0 / std::log(eps * eps / c));
}

// ---------------------------------------------------------------------------
// Ricci form and the comparison estimates.

using FormField = std::function<Form11(const CVec&)>;

/// Ric(omega) = ddc log det(H).
inline Form11 ricci(const FormField& form, const CVec& p, const JetOptions& opt = {}) {
    ScalarField logdet;
    logdet.arity = static_cast<int>(p.size());
    logdet.real_valued = true;
    logdet.eval = [&form](Point q) {
        const Complex d = form(to_cvec(q)).H.determinant();
        if (!(d.real() > 0.0)) throw Error(ErrorKind::SingularMetric, "determinant is not positive");
        return Complex(std::log(d.real()), 0.0);
    };
    return ddc(logdet, p, opt);
}

/// Largest |eigenvalue| of Ric relative to phi over the samples.
struct RicciBound {
    double K = 0.0;
    CVec witness;
};

inline RicciBound ricci_bound(const FormField& form, std::span<const CVec> samples, const JetOptions& opt = {}) {
    std::vector<double> ks(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        const Form11 ric = ricci(form, samples[i], opt);
        const RVec ev = generalized_eigenvalues(ric.H, form(samples[i]).H);
        ks[i] = ev.cwiseAbs().maxCoeff();
    });
    RicciBound out;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (ks[i] >= out.K) {
            out.K = ks[i];
            out.witness = samples[i];
        }
    return out;
}

enum class ComparisonPair { Psi, TauPrimeGradient, TauGradient };

inline const char* to_string(ComparisonPair p) {
    switch (p) {
    case ComparisonPair::Psi: return "psi_le_rho_c_phi";
    case ComparisonPair::TauPrimeGradient: return "dtau_prime_le_rho_c_phi";
    case ComparisonPair::TauGradient: return "dtau_le_rho_c_phi";
    }
    return "unknown";
}

inline ComparisonPair comparison_pair_from_string(const std::string& s) {
    for (auto p : {ComparisonPair::Psi, ComparisonPair::TauPrimeGradient, ComparisonPair::TauGradient})
        if (s == to_string(p)) return p;
    throw Error(ErrorKind::SchemaError, "unknown comparison pair '" + s + "'");
}

struct ExponentEstimate {
    double exponent = 0.0;      // smallest grid value that works at every sample
    double continuous = 0.0;    // smallest real exponent (before rounding to the grid)
    CVec witness;               // sample attaining the continuous exponent
    double grid_step = 0.25;
};

inline Form11 comparison_lhs(const BaseModel& base, ComparisonPair pair, const CVec& z) {
    switch (pair) {
    case ComparisonPair::Psi: return BaseModel::psi(z);
    case ComparisonPair::TauPrimeGradient: return Form11::gradient_square(BaseModel::dtau_prime(z));
    case ComparisonPair::TauGradient: return Form11::gradient_square(base.dtau(z));
    }
    throw Error(ErrorKind::InvalidArgument, "unknown comparison pair");
}

/// Smallest exponent e on the grid {0, step, ..., 64} with lhs <= rho^e phi at
/// every sample (as Hermitian forms). phi defaults to ddc tau.
inline ExponentEstimate estimate_exponent(const BaseModel& base, ComparisonPair pair, std::span<const CVec> samples,
                                          const std::optional<FormField>& phi = std::nullopt,
                                          double grid_step = 0.25, double grid_max = 64.0) {
    ExponentEstimate out;
    out.grid_step = grid_step;
    if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "no samples");
    auto phi_at = [&](const CVec& z) { return phi ? (*phi)(z) : base.phi(z); };
    std::vector<double> need(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        const CVec& z = samples[i];
        if (z.squaredNorm() == 0.0) throw Error(ErrorKind::OriginNotInDomain, "sample at the origin");
        const RVec ev = generalized_eigenvalues(comparison_lhs(base, pair, z).H, phi_at(z).H);
        const double mu = ev.maxCoeff();
        const double lr = std::log(base.rho(z));
        need[i] = mu <= 1.0 ? 0.0 : std::log(mu) / lr;
    });
    std::size_t worst = 0;
    for (std::size_t i = 1; i < need.size(); ++i)
        if (need[i] > need[worst]) worst = i;
    out.continuous = need[worst];
    out.witness = samples[worst];
    double e = std::ceil(out.continuous / grid_step - 1e-12) * grid_step;
    for (; e <= grid_max + 1e-12; e += grid_step) {
        bool ok = true;
        for (const auto& z : samples) {
            const CMat rhs = std::pow(base.rho(z), e) * phi_at(z).H;
            if (!matrix_leq(comparison_lhs(base, pair, z).H, rhs)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            out.exponent = std::max(0.0, e);
            return out;
        }
    }
    throw Error(ErrorKind::NoFiniteExponent, "no exponent up to " + std::to_string(grid_max) + " works");
}

/// Bound K with rho / ||z||^c in [1/K, K] over the samples.
inline double rho_growth_constant(const BaseModel& base, std::span<const CVec> samples) {
    double K = 1.0;
    for (const auto& z : samples) {
        const double ratio = base.rho(z) / std::pow(z.norm(), base.c);
        K = std::max({K, ratio, 1.0 / ratio});
    }
    return K;
}

/// Doubles c (starting from the model's value) until the finite-difference Levi
/// form of tau is positive definite at every sample.
inline BaseModel tune_exhaustion(BaseModel base, std::span<const CVec> samples, double c_max = 1024.0) {
    for (; base.c <= c_max; base.c *= 2.0) {
        const ScalarField tau = base.tau_field();
        bool ok = true;
        for (const auto& z : samples)
            if (!(levi_min_eig(tau, z) > 0.0)) {
                ok = false;
                break;
            }
        if (ok) return base;
    }
    throw Error(ErrorKind::NotPositive, "tau is not strictly plurisubharmonic for any tested c");
}

} // namespace fnv
