#pragma once

// Entire functions of one variable of the form sum_j P_j(z) e^{c_j z} with
// exact zero sets for the cases that admit them.

#include "fnv/core.hpp"

#include <Eigen/Eigenvalues>

#include <sstream>

namespace fnv {

/// sum_j P_j(z) e^{rate_j z}; coefficients are in increasing degree.
struct ExpPoly {
    struct Term {
        std::vector<Complex> coeffs;
        Complex rate = 0.0;
    };
    std::vector<Term> terms;

    static ExpPoly polynomial(std::vector<Complex> coeffs) { return {{{std::move(coeffs), 0.0}}}; }
    static ExpPoly constant(Complex c) { return polynomial({c}); }
    static ExpPoly monomial(int degree, Complex c = 1.0) {
        std::vector<Complex> co(static_cast<std::size_t>(degree + 1), 0.0);
        co.back() = c;
        return polynomial(std::move(co));
    }
    static ExpPoly exponential(Complex rate, Complex c = 1.0) { return {{{{c}, rate}}}; }

    Complex operator()(Complex z) const {
        Complex s = 0.0;
        for (const auto& t : terms) {
            Complex p = 0.0;
            for (auto it = t.coeffs.rbegin(); it != t.coeffs.rend(); ++it) p = p * z + *it;
            s += p * std::exp(t.rate * z);
        }
        return s;
    }

    ExpPoly derivative() const {
        ExpPoly out;
        for (const auto& t : terms) {
            Term d{std::vector<Complex>(t.coeffs.size(), 0.0), t.rate};
            for (std::size_t k = 0; k < t.coeffs.size(); ++k) {
                d.coeffs[k] += t.rate * t.coeffs[k];
                if (k > 0) d.coeffs[k - 1] += static_cast<double>(k) * t.coeffs[k];
            }
            out.terms.push_back(std::move(d));
        }
        return out.normalized();
    }

    ExpPoly operator*(Complex a) const {
        ExpPoly out = *this;
        for (auto& t : out.terms)
            for (auto& c : t.coeffs) c *= a;
        return out.normalized();
    }

    ExpPoly operator+(const ExpPoly& o) const {
        ExpPoly out = *this;
        out.terms.insert(out.terms.end(), o.terms.begin(), o.terms.end());
        return out.normalized();
    }

    /// Merges equal rates and drops zero coefficients at the top.
    ExpPoly normalized() const {
        ExpPoly out;
        for (const auto& t : terms) {
            auto it = std::find_if(out.terms.begin(), out.terms.end(), [&](const Term& u) { return u.rate == t.rate; });
            if (it == out.terms.end()) {
                out.terms.push_back(t);
                continue;
            }
            if (it->coeffs.size() < t.coeffs.size()) it->coeffs.resize(t.coeffs.size(), 0.0);
            for (std::size_t k = 0; k < t.coeffs.size(); ++k) it->coeffs[k] += t.coeffs[k];
        }
        for (auto& t : out.terms)
            while (!t.coeffs.empty() && t.coeffs.back() == 0.0) t.coeffs.pop_back();
        std::erase_if(out.terms, [](const Term& t) { return t.coeffs.empty(); });
        return out;
    }

    bool is_zero() const { return normalized().terms.empty(); }
};

struct Root {
    Complex z;
    int multiplicity = 1;
};

/// Roots of a polynomial (increasing-degree coefficients) from the companion
/// matrix; clusters closer than `merge_tol` (1 + |z|) are reported as one root.
inline std::vector<Root> polynomial_roots(std::vector<Complex> c, double merge_tol = 1e-6) {
    while (!c.empty() && std::abs(c.back()) == 0.0) c.pop_back();
    if (c.empty()) throw Error(ErrorKind::RootFindingFailure, "polynomial is identically zero");
    std::vector<Root> out;
    int zero_mult = 0;
    while (c.size() > 1 && std::abs(c.front()) == 0.0) {
        c.erase(c.begin());
        ++zero_mult;
    }
    if (zero_mult > 0) out.push_back({0.0, zero_mult});
    const int d = static_cast<int>(c.size()) - 1;
    if (d <= 0) return out;
    CMat comp = CMat::Zero(d, d);
    for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) comp(i, d - 1) = -c[static_cast<std::size_t>(i)] / c.back();
    Eigen::ComplexEigenSolver<CMat> es(comp, false);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::RootFindingFailure, "companion eigenvalues failed");
    std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + d);
    std::vector<bool> used(ev.size(), false);
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (used[i]) continue;
        Complex sum = ev[i];
        int m = 1;
        for (std::size_t j = i + 1; j < ev.size(); ++j)
            if (!used[j] && std::abs(ev[j] - ev[i]) <= merge_tol * (1.0 + std::abs(ev[i]))) {
                used[j] = true;
                sum += ev[j];
                ++m;
            }
        out.push_back({sum / static_cast<double>(m), m});
    }
    return out;
}

/// Zeros in the closed disc |z| <= radius. Supported shapes: P(z) e^{cz}, and
/// a e^{c1 z} + b e^{c2 z} with constant a, b (log branches enumerated).
inline std::vector<Root> roots_in_disc(const ExpPoly& f, double radius) {
    const ExpPoly g = f.normalized();
    std::vector<Root> all;
    if (g.terms.empty()) throw Error(ErrorKind::RootFindingFailure, "function is identically zero");
    if (g.terms.size() == 1) {
        all = polynomial_roots(g.terms[0].coeffs);
    } else if (g.terms.size() == 2 && g.terms[0].coeffs.size() == 1 && g.terms[1].coeffs.size() == 1) {
        // a e^{c1 z} + b e^{c2 z} = 0  <=>  e^{(c2 - c1) z} = -a / b
        const Complex a = g.terms[0].coeffs[0], b = g.terms[1].coeffs[0];
        const Complex d = g.terms[1].rate - g.terms[0].rate;
        const Complex base = std::log(-a / b);
        const double kmax = std::ceil((radius * std::abs(d) + std::abs(base)) / (2.0 * kPi)) + 1.0;
        for (double k = -kmax; k <= kmax; k += 1.0) all.push_back({(base + 2.0 * kPi * k * kI) / d, 1});
    } else {
        throw Error(ErrorKind::RootFindingFailure, "no exact zero finder for this exponential polynomial");
    }
    std::erase_if(all, [&](const Root& r) { return std::abs(r.z) > radius; });
    std::sort(all.begin(), all.end(), [](const Root& a, const Root& b) { return std::abs(a.z) < std::abs(b.z); });
    return all;
}

/// A holomorphic map C -> P^N in homogeneous components.
struct MapToPn {
    std::vector<ExpPoly> components;
    std::string name;

    int target_dim() const { return static_cast<int>(components.size()) - 1; }
    CVec operator()(Complex z) const {
        CVec out(static_cast<Eigen::Index>(components.size()));
        for (std::size_t i = 0; i < components.size(); ++i) out(static_cast<Eigen::Index>(i)) = components[i](z);
        return out;
    }
    /// sigma o f for a covector sigma on C^{N+1}.
    ExpPoly pullback(const CVec& sigma) const {
        if (sigma.size() != static_cast<Eigen::Index>(components.size()))
            throw Error(ErrorKind::InvalidArgument, "covector dimension does not match the map");
        ExpPoly s;
        for (std::size_t i = 0; i < components.size(); ++i)
            s = s + components[i] * sigma(static_cast<Eigen::Index>(i));
        return s;
    }
};

inline MapToPn map_catalog(const std::string& name) {
    const ExpPoly one = ExpPoly::constant(1.0);
    if (name == "affine_identity") return {{one, ExpPoly::monomial(1)}, name};
    if (name == "cubic") return {{one, ExpPoly::monomial(3)}, name};
    if (name == "quadratic") return {{one, ExpPoly::polynomial({-1.0, 0.0, 1.0})}, name};
    if (name == "exponential") return {{one, ExpPoly::exponential(1.0)}, name};
    if (name == "constant") return {{one, ExpPoly::constant(2.0)}, name};
    throw Error(ErrorKind::InvalidArgument, "unknown map " + name);
}

inline std::vector<std::string> map_catalog_names() {
    return {"affine_identity", "cubic", "quadratic", "exponential", "constant"};
}

/// "e<i>" is the i-th coordinate covector; otherwise a comma list of reals.
inline CVec parse_covector(const std::string& s, int dim) {
    if (s.size() > 1 && s[0] == 'e') {
        const int i = std::stoi(s.substr(1));
        if (i < 0 || i >= dim) throw Error(ErrorKind::InvalidArgument, "covector index out of range: " + s);
        return CVec::Unit(dim, i);
    }
    std::vector<Complex> xs;
    std::stringstream in(s);
    for (std::string tok; std::getline(in, tok, ',');) xs.push_back(std::stod(tok));
    if (static_cast<int>(xs.size()) != dim) throw Error(ErrorKind::InvalidArgument, "covector has wrong length: " + s);
    return Eigen::Map<const CVec>(xs.data(), dim);
}

}  // namespace fnv
