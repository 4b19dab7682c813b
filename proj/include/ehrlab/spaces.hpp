#pragma once

// Truncated sequence spaces X_d = span{e_1..e_d}: elements, the gallery of
// strong norms, duality pairing and the deterministic dual-family enumerators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ehrlab/error.hpp"

namespace ehrlab {

// Absolute tolerance used for floating comparisons unless stated otherwise.
inline constexpr double kAbsTol = 1e-10;

class Element {
public:
    Element() : coeffs_(1, 0.0) {}

    explicit Element(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) {
            throw Error(Errc::invalid_argument, "spaces", "element dimension must be positive");
        }
        for (double c : coeffs_) {
            if (!std::isfinite(c)) throw Error(Errc::invalid_entry, "spaces", "element has a non-finite entry");
        }
    }

    static Element zero(std::size_t dim) { return Element(std::vector<double>(checked_dim(dim), 0.0)); }

    // e_n with 1-based index n, zero-padded to `dim`.
    static Element basis(std::size_t n, std::size_t dim) {
        if (n == 0 || n > dim) {
            throw Error(Errc::out_of_range, "spaces", "basis index must lie in 1..dim");
        }
        std::vector<double> c(dim, 0.0);
        c[n - 1] = 1.0;
        return Element(std::move(c));
    }

    std::size_t dim() const noexcept { return coeffs_.size(); }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    const std::vector<double>& vec() const noexcept { return coeffs_; }
    double operator[](std::size_t i) const { return coeffs_[i]; }

    Element padded(std::size_t dim) const {
        if (dim < coeffs_.size()) throw Error(Errc::dimension_mismatch, "spaces", "cannot pad to a smaller dimension");
        std::vector<double> c(coeffs_);
        c.resize(dim, 0.0);
        return Element(std::move(c));
    }

    friend Element operator+(const Element& a, const Element& b) { return combine(1.0, a, 1.0, b); }
    friend Element operator-(const Element& a, const Element& b) { return combine(1.0, a, -1.0, b); }
    friend Element operator*(double s, const Element& a) { return combine(s, a, 0.0, Element::zero(1)); }

    bool operator==(const Element&) const = default;

private:
    static std::size_t checked_dim(std::size_t dim) {
        if (dim == 0) throw Error(Errc::invalid_argument, "spaces", "element dimension must be positive");
        return dim;
    }

    // Mixed dimensions are zero-padded to the larger one.
    static Element combine(double sa, const Element& a, double sb, const Element& b) {
        std::vector<double> c(std::max(a.dim(), b.dim()), 0.0);
        for (std::size_t i = 0; i < a.dim(); ++i) c[i] += sa * a.coeffs_[i];
        for (std::size_t i = 0; i < b.dim(); ++i) c[i] += sb * b.coeffs_[i];
        return Element(std::move(c));
    }

    std::vector<double> coeffs_;
};

struct NormSpec {
    enum class Kind { lp, weighted_lp, sobolev_h1 };

    Kind kind = Kind::lp;
    double p = 2.0;               // +inf allowed
    std::vector<double> weights;  // weighted_lp only; fixes the dimension
    double h = 1.0;               // sobolev_h1 grid spacing
    std::size_t dim = 0;          // 0: any dimension
    std::string label;

    static NormSpec lp(double p, std::size_t dim = 0) {
        check_p(p);
        NormSpec ns;
        ns.kind = Kind::lp;
        ns.p = p;
        ns.dim = dim;
        ns.label = std::isinf(p) ? "l_inf" : "l" + short_number(p);
        return ns;
    }

    static NormSpec weighted_lp(double p, std::vector<double> weights) {
        check_p(p);
        if (weights.empty()) throw Error(Errc::invalid_argument, "spaces", "weighted norm needs at least one weight");
        for (double w : weights) {
            if (!(w > 0.0) || !std::isfinite(w)) {
                throw Error(Errc::invalid_argument, "spaces", "weights must be finite and strictly positive");
            }
        }
        NormSpec ns;
        ns.kind = Kind::weighted_lp;
        ns.p = p;
        ns.dim = weights.size();
        ns.weights = std::move(weights);
        ns.label = "weighted_l" + (std::isinf(p) ? std::string("_inf") : short_number(p));
        return ns;
    }

    static NormSpec sobolev_h1(double h, std::size_t dim = 0) {
        if (!(h > 0.0) || !std::isfinite(h)) throw Error(Errc::invalid_argument, "spaces", "grid spacing h must be positive");
        NormSpec ns;
        ns.kind = Kind::sobolev_h1;
        ns.h = h;
        ns.dim = dim;
        ns.label = "h1";
        return ns;
    }

    // Hölder conjugate exponent.
    double conjugate() const {
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        if (std::isinf(p)) return 1.0;
        return p / (p - 1.0);
    }

    // Working dimension for a vector of length n, validating against `dim`.
    std::size_t resolve_dim(std::size_t n) const {
        if (dim != 0 && n > dim) {
            throw Error(Errc::dimension_mismatch, "spaces",
                        "vector of dimension " + std::to_string(n) + " exceeds norm dimension " + std::to_string(dim));
        }
        return std::max(n, dim);
    }

private:
    static void check_p(double p) {
        if (!(p >= 1.0)) throw Error(Errc::invalid_argument, "spaces", "exponent p must be >= 1");
    }
    static std::string short_number(double x) {
        if (x == std::floor(x) && x < 1e6) return std::to_string(static_cast<long long>(x));
        return std::to_string(x);
    }
};

namespace detail {

inline double lp_value(std::span<const double> u, double p, const std::vector<double>* w) {
    auto weight = [&](std::size_t i) { return w ? (*w)[i] : 1.0; };
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, weight(i) * std::abs(u[i]));
        return m;
    }
    if (p == 1.0) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += weight(i) * std::abs(u[i]);
        return s;
    }
    if (p == 2.0) {
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += weight(i) * u[i] * u[i];
        return std::sqrt(s);
    }
    // Scale by the largest entry to keep |u|^p representable.
    double scale = 0.0;
    for (double x : u) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += weight(i) * std::pow(std::abs(u[i]) / scale, p);
    return scale * std::pow(s, 1.0 / p);
}

// Solves (h I + K / h) x = b for the Dirichlet stiffness K = tridiag(-1, 2, -1)
// with the Thomas algorithm.
inline std::vector<double> riesz_solve(double h, std::span<const double> b) {
    const std::size_t n = b.size();
    const double diag = h + 2.0 / h;
    const double off = -1.0 / h;
    std::vector<double> c(n, 0.0), d(b.begin(), b.end());
    double denom = diag;
    c[0] = off / denom;
    d[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag - off * c[i - 1];
        c[i] = off / denom;
        d[i] = (d[i] - off * d[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    return d;
}

inline double sign(double x) { return (x > 0.0) - (x < 0.0); }

} // namespace detail

// ||u|| for the given norm; u shorter than the norm's dimension is zero-padded.
inline double norm(const NormSpec& ns, std::span<const double> u) {
    const std::size_t n = ns.resolve_dim(u.size());
    switch (ns.kind) {
        case NormSpec::Kind::lp:
            return detail::lp_value(u, ns.p, nullptr);
        case NormSpec::Kind::weighted_lp:
            return detail::lp_value(u, ns.p, &ns.weights);
        case NormSpec::Kind::sobolev_h1: {
            // h sum u_i^2 + (1/h) sum (u_{i+1} - u_i)^2, u_0 = u_{n+1} = 0.
            double mass = 0.0, stiff = 0.0, prev = 0.0;
            for (std::size_t i = 0; i <= n; ++i) {
                const double cur = i < u.size() ? u[i] : 0.0;
                if (i < n) mass += cur * cur;
                stiff += (cur - prev) * (cur - prev);
                prev = cur;
            }
            return std::sqrt(ns.h * mass + stiff / ns.h);
        }
    }
    return 0.0;
}

inline double norm(const NormSpec& ns, const Element& u) { return norm(ns, u.coeffs()); }

// Norm value plus a subgradient written to `grad` (same length as u).
inline double norm_with_gradient(const NormSpec& ns, std::span<const double> u, std::span<double> grad) {
    const double value = norm(ns, u);
    std::fill(grad.begin(), grad.end(), 0.0);
    if (value == 0.0) return 0.0;
    const std::vector<double>* w = ns.kind == NormSpec::Kind::weighted_lp ? &ns.weights : nullptr;
    auto weight = [&](std::size_t i) { return w ? (*w)[i] : 1.0; };
    switch (ns.kind) {
        case NormSpec::Kind::lp:
        case NormSpec::Kind::weighted_lp: {
            if (std::isinf(ns.p)) {
                std::size_t arg = 0;
                for (std::size_t i = 0; i < u.size(); ++i) {
                    if (weight(i) * std::abs(u[i]) > weight(arg) * std::abs(u[arg])) arg = i;
                }
                grad[arg] = weight(arg) * detail::sign(u[arg]);
            } else if (ns.p == 1.0) {
                for (std::size_t i = 0; i < u.size(); ++i) grad[i] = weight(i) * detail::sign(u[i]);
            } else {
                const double scale = std::pow(value, ns.p - 1.0);
                for (std::size_t i = 0; i < u.size(); ++i) {
                    grad[i] = weight(i) * detail::sign(u[i]) * std::pow(std::abs(u[i]), ns.p - 1.0) / scale;
                }
            }
            break;
        }
        case NormSpec::Kind::sobolev_h1: {
            const std::size_t n = u.size();
            for (std::size_t i = 0; i < n; ++i) {
                const double left = i > 0 ? u[i - 1] : 0.0;
                const double right = i + 1 < n ? u[i + 1] : 0.0;
                grad[i] = (ns.h * u[i] + (2.0 * u[i] - left - right) / ns.h) / value;
            }
            break;
        }
    }
    return value;
}

// Operator norm of u -> <f, u> over the unit ball of `ns`, computed in dimension
// max(f.size(), dim_hint, ns.dim).
inline double dual_norm(const NormSpec& ns, std::span<const double> f, std::size_t dim_hint = 0) {
    const std::size_t n = ns.resolve_dim(std::max(f.size(), dim_hint));
    switch (ns.kind) {
        case NormSpec::Kind::lp:
            return detail::lp_value(f, ns.conjugate(), nullptr);
        case NormSpec::Kind::weighted_lp: {
            // Dual of ||W^{1/p} u||_p is ||W^{-1/p} f||_q.
            std::vector<double> g(f.begin(), f.end());
            for (std::size_t i = 0; i < g.size(); ++i) {
                g[i] = std::isinf(ns.p) ? g[i] / ns.weights[i] : g[i] * std::pow(ns.weights[i], -1.0 / ns.p);
            }
            return detail::lp_value(g, ns.conjugate(), nullptr);
        }
        case NormSpec::Kind::sobolev_h1: {
            // Discrete Riesz map: ||f||_* = sqrt(f^T A^{-1} f), A = h I + K / h.
            std::vector<double> b(n, 0.0);
            std::copy(f.begin(), f.end(), b.begin());
            const auto x = detail::riesz_solve(ns.h, b);
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += b[i] * x[i];
            return std::sqrt(std::max(s, 0.0));
        }
    }
    throw Error(Errc::unsupported, "spaces", "unsupported norm kind");
}

struct Functional {
    std::vector<double> coeffs;
    double dual_norm_bound = 1.0;
};

inline double dual_norm(const NormSpec& ns, const Functional& f, std::size_t dim_hint = 0) {
    return dual_norm(ns, f.coeffs, dim_hint);
}

// <f, u>; the shorter operand is zero-padded.
inline double pair(std::span<const double> f, std::span<const double> u) {
    const std::size_t n = std::min(f.size(), u.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += f[i] * u[i];
    return s;
}

inline double pair(const Functional& f, const Element& u) { return pair(f.coeffs, u.coeffs()); }

enum class FamilyMode { coordinate, dense_rational };

inline const char* to_string(FamilyMode m) {
    return m == FamilyMode::coordinate ? "coordinate" : "dense-rational";
}

// Phi = (phi_k)_{k>=1}, a deterministic enumeration of functionals of dual norm
// at most one with respect to `space`, restricted to the truncation X_dim.
//
// Coordinate mode is not dense in the dual ball. For l^p with 1 < p < inf it
// still separates weak limits of bounded sequences, and it makes |.|_Phi
// closed-form; use dense_rational when density matters.
struct DualFamily {
    FamilyMode mode = FamilyMode::dense_rational;
    NormSpec space = NormSpec::lp(2.0);
    std::size_t dim = 16;
};

// Decoded position of phi_k in the dense-rational enumeration.
//
// Stages t = 1, 2, ... visit the blocks (s, l) with s + l = t, s = 1..min(t, dim)
// in increasing s. Block (s, l) lists every nonzero tuple a in {-2^l..2^l}^s
// (coefficients a / 2^l on e_1..e_s) in mixed-radix order with base 2^{l+1} + 1,
// coordinate 1 varying fastest and digits mapped to numerators as
// 0, 1, -1, 2, -2, .... So phi_1 = e_1*, phi_2 = -e_1*, phi_3 = e_1*/2.
struct DyadicTerm {
    std::size_t support = 1;
    int level = 0;
    std::vector<std::int64_t> numerators;
};

inline DyadicTerm dyadic_term(std::uint64_t k, std::size_t max_support) {
    if (k == 0) throw Error(Errc::out_of_range, "spaces", "enumeration index k must be >= 1");
    if (max_support == 0) throw Error(Errc::invalid_argument, "spaces", "family dimension must be positive");
    constexpr std::uint64_t kCap = std::uint64_t{1} << 62;
    auto block_size = [&](std::size_t s, int level) {
        const std::uint64_t base = (std::uint64_t{1} << (level + 1)) + 1;
        std::uint64_t size = 1;
        for (std::size_t i = 0; i < s; ++i) {
            if (size > kCap / base) return kCap;
            size *= base;
        }
        return size - 1;
    };
    std::uint64_t rem = k;
    for (std::size_t t = 1;; ++t) {
        for (std::size_t s = 1; s <= std::min(t, max_support); ++s) {
            const int level = static_cast<int>(t - s);
            if (level > 60) throw Error(Errc::out_of_range, "spaces", "enumeration index too large");
            const std::uint64_t size = block_size(s, level);
            if (rem > size) {
                rem -= size;
                continue;
            }
            const std::uint64_t base = (std::uint64_t{1} << (level + 1)) + 1;
            DyadicTerm term{s, level, std::vector<std::int64_t>(s, 0)};
            std::uint64_t j = rem;  // 1..size; 0 would be the zero tuple
            for (std::size_t i = 0; i < s; ++i) {
                const auto digit = static_cast<std::int64_t>(j % base);
                j /= base;
                term.numerators[i] = digit % 2 == 1 ? (digit + 1) / 2 : -(digit / 2);
            }
            return term;
        }
    }
}

// k-th member of Phi (k >= 1).
inline Functional enumerate_phi(const DualFamily& fam, std::uint64_t k) {
    if (k == 0) throw Error(Errc::out_of_range, "spaces", "enumeration index k must be >= 1");
    Functional f;
    if (fam.mode == FamilyMode::coordinate) {
        f.coeffs.assign(static_cast<std::size_t>(k), 0.0);
        f.coeffs.back() = 1.0;
        if (fam.space.dim != 0 && k > fam.space.dim) {
            // Outside a fixed-dimension norm the coordinate vanishes on the truncation.
            f.coeffs.assign(1, 0.0);
            f.dual_norm_bound = 0.0;
            return f;
        }
    } else {
        const DyadicTerm term = dyadic_term(k, fam.dim);
        f.coeffs.resize(term.support);
        for (std::size_t i = 0; i < term.support; ++i) {
            f.coeffs[i] = std::ldexp(static_cast<double>(term.numerators[i]), -term.level);
        }
    }
    const double dn = dual_norm(fam.space, f.coeffs, fam.space.dim != 0 ? 0 : fam.dim);
    const double scale = fam.mode == FamilyMode::coordinate ? 1.0 / dn : 1.0 / std::max(1.0, dn);
    for (double& c : f.coeffs) c *= scale;
    f.dual_norm_bound = dn * scale;
    return f;
}

} // namespace ehrlab
