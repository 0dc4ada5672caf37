#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fnv {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

enum class ErrorKind {
    StencilOutsideDomain,
    NonFinite,
    DegenerateLog,
    OriginNotInDomain,
    SingularMetric,
    SingularForm,
    SingularVerticalMetric,
    ZeroVector,
    ZeroSectionPoint,
    NoFiniteExponent,
    NotPositive,
    IndeterminacyPoint,
    QuadratureBudgetExceeded,
    OriginInDivisorImage,
    SigmaVanishesOnShell,
    SigmaIdenticallyZero,
    RootFindingFailure,
    WindowTooSmall,
    DegenerateMap,
    InvalidArgument,
    SchemaError,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::StencilOutsideDomain: return "StencilOutsideDomain";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DegenerateLog: return "DegenerateLog";
    case ErrorKind::OriginNotInDomain: return "OriginNotInDomain";
    case ErrorKind::SingularMetric: return "SingularMetric";
    case ErrorKind::SingularForm: return "SingularForm";
    case ErrorKind::SingularVerticalMetric: return "SingularVerticalMetric";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::ZeroSectionPoint: return "ZeroSectionPoint";
    case ErrorKind::NoFiniteExponent: return "NoFiniteExponent";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::IndeterminacyPoint: return "IndeterminacyPoint";
    case ErrorKind::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorKind::OriginInDivisorImage: return "OriginInDivisorImage";
    case ErrorKind::SigmaVanishesOnShell: return "SigmaVanishesOnShell";
    case ErrorKind::SigmaIdenticallyZero: return "SigmaIdenticallyZero";
    case ErrorKind::RootFindingFailure: return "RootFindingFailure";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::DegenerateMap: return "DegenerateMap";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SchemaError: return "SchemaError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline CVec to_cvec(std::span<const Complex> p) {
    CVec v(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) v(static_cast<Eigen::Index>(i)) = p[i];
    return v;
}

inline std::span<const Complex> as_span(const CVec& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

inline CVec cvec(std::initializer_list<Complex> xs) {
    CVec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (auto x : xs) v(i++) = x;
    return v;
}

inline CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

inline double hermitian_defect(const CMat& a) {
    return (a - a.adjoint()).norm();
}

inline RVec hermitian_eigenvalues(const CMat& a) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(a), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

inline double min_eig(const CMat& a) { return hermitian_eigenvalues(a).minCoeff(); }
inline double max_eig(const CMat& a) { return hermitian_eigenvalues(a).maxCoeff(); }

/// Eigenvalues of B^{-1/2} A B^{-1/2} for Hermitian A and positive definite B.
inline RVec generalized_eigenvalues(const CMat& a, const CMat& b) {
    Eigen::GeneralizedSelfAdjointEigenSolver<CMat> es(hermitian_part(a), hermitian_part(b),
                                                      Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success)
        throw Error(ErrorKind::SingularForm, "reference form is not positive definite");
    return es.eigenvalues();
}

/// A <= B in the sense of Hermitian forms, with the slack used throughout:
/// min eig(B - A) >= -tol * ||B||.
inline double matrix_inequality_margin(const CMat& a, const CMat& b) {
    return min_eig(b - a);
}

inline bool matrix_leq(const CMat& a, const CMat& b, double tol = 1e-8) {
    return matrix_inequality_margin(a, b) >= -tol * std::max(b.norm(), 1e-300);
}

/// Mixed discriminant of Hermitian matrices, normalized so that D(H,...,H) = m! det H.
/// Computed by polarization of the determinant.
inline Complex mixed_discriminant(std::span<const CMat> hs) {
    const std::size_t m = hs.size();
    if (m == 0) return 1.0;
    Complex acc = 0.0;
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
        CMat sum = CMat::Zero(hs[0].rows(), hs[0].cols());
        int count = 0;
        for (std::size_t j = 0; j < m; ++j)
            if (mask & (1u << j)) {
                sum += hs[j];
                ++count;
            }
        const double sign = ((static_cast<int>(m) - count) % 2 == 0) ? 1.0 : -1.0;
        acc += sign * sum.determinant();
    }
    return acc;
}

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

inline double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

/// Pairwise summation; deterministic for a fixed input order.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t h = xs.size() / 2;
    return pairwise_sum(xs.first(h)) + pairwise_sum(xs.subspan(h));
}

inline Complex pairwise_sum(std::span<const Complex> xs) {
    if (xs.size() <= 8) {
        Complex s = 0.0;
        for (auto x : xs) s += x;
        return s;
    }
    const std::size_t h = xs.size() / 2;
    return pairwise_sum(xs.first(h)) + pairwise_sum(xs.subspan(h));
}

/// Worker count, capped by the FNV_THREADS environment variable.
inline unsigned thread_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FNV_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) hw = std::min(hw, static_cast<unsigned>(cap));
    }
    return hw;
}

/// Runs body(i) for i in [0, count). Results must be written to per-index
/// slots by the caller; reductions happen afterwards in index order.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// |a - b| / max(|a|, |b|, floor)
inline double rel_diff(double a, double b, double floor = 1e-300) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double rel_diff(const CMat& a, const CMat& b, double floor = 1e-300) {
    return (a - b).norm() / std::max({a.norm(), b.norm(), floor});
}

} // namespace fnv
