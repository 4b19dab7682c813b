#pragma once

// The very weak norm |u|_Phi = sum_k 2^{-k} |<phi_k, u>| evaluated as a
// certified enclosure, and the metric it induces.

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ehrlab/spaces.hpp"

namespace ehrlab {

// Enclosure [lo, hi] of an infinite series; terms_used = M partial-sum terms.
struct CertifiedValue {
    double lo = 0.0;
    double hi = 0.0;
    std::uint64_t terms_used = 1;

    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

enum class Comparison { less, greater, ambiguous };

// a < b only when the enclosures are disjoint.
inline Comparison compare(const CertifiedValue& a, const CertifiedValue& b) {
    if (a.hi < b.lo) return Comparison::less;
    if (b.hi < a.lo) return Comparison::greater;
    return Comparison::ambiguous;
}

// Uniform majorant 2^{-M} R of sum_{k>M} 2^{-k} |<phi_k, u>| over ||u|| <= R.
inline double tail_bound(std::uint64_t M, double R) {
    if (M == 0) throw Error(Errc::invalid_argument, "veryweak", "tail_bound needs M >= 1");
    if (R < 0.0) throw Error(Errc::invalid_argument, "veryweak", "tail_bound needs R >= 0");
    return std::ldexp(R, -static_cast<int>(std::min<std::uint64_t>(M, 100000)));
}

// Least M >= 1 with 2^{-M} R <= tau.
inline std::uint64_t terms_for(double R, double tau) {
    if (!(tau > 0.0)) throw Error(Errc::invalid_argument, "veryweak", "tolerance must be positive");
    if (R == 0.0) return 1;
    auto M = static_cast<std::int64_t>(std::ceil(std::log2(R / tau)));
    M = std::max<std::int64_t>(M, 1);
    while (std::ldexp(R, -static_cast<int>(M)) > tau) ++M;
    while (M > 1 && std::ldexp(R, -static_cast<int>(M - 1)) <= tau) --M;
    return static_cast<std::uint64_t>(M);
}

// Cached evaluator for |.|_Phi. Holds an immutable prefix of Phi so repeated
// evaluations (optimizer inner loops) do not re-enumerate; terms beyond the
// cached prefix are enumerated on the fly.
class VeryWeakNorm {
public:
    explicit VeryWeakNorm(DualFamily family, double tolerance = 1e-12, std::size_t prefix = 64)
        : family_(std::move(family)), tolerance_(tolerance) {
        if (!(tolerance > 0.0)) throw Error(Errc::invalid_argument, "veryweak", "tolerance must be positive");
        auto cache = std::make_shared<std::vector<Functional>>();
        cache->reserve(prefix);
        for (std::size_t k = 1; k <= prefix; ++k) cache->push_back(enumerate_phi(family_, k));
        prefix_ = std::move(cache);
    }

    const DualFamily& family() const noexcept { return family_; }
    double tolerance() const noexcept { return tolerance_; }

    Functional phi(std::uint64_t k) const {
        if (k >= 1 && k <= prefix_->size()) return (*prefix_)[k - 1];
        return enumerate_phi(family_, k);
    }

    CertifiedValue evaluate(std::span<const double> u) const { return evaluate(u, tolerance_, {}); }

    // With `grad` nonempty, writes a subgradient of the partial sum (the lower
    // end of the enclosure) to it.
    CertifiedValue evaluate(std::span<const double> u, double tau, std::span<double> grad) const {
        const double R = norm(family_.space, u);
        const std::uint64_t M = terms_for(R, tau);
        std::fill(grad.begin(), grad.end(), 0.0);
        double lo = 0.0;
        for (std::uint64_t k = 1; k <= M; ++k) {
            const Functional* f = nullptr;
            Functional extra;
            if (k <= prefix_->size()) {
                f = &(*prefix_)[k - 1];
            } else {
                extra = enumerate_phi(family_, k);
                f = &extra;
            }
            const double pk = pair(f->coeffs, u);
            const double wk = std::ldexp(1.0, -static_cast<int>(k));
            lo += wk * std::abs(pk);
            if (!grad.empty() && pk != 0.0) {
                const double s = wk * detail::sign(pk);
                const std::size_t n = std::min(grad.size(), f->coeffs.size());
                for (std::size_t i = 0; i < n; ++i) grad[i] += s * f->coeffs[i];
            }
        }
        return {lo, lo + tail_bound(M, R), M};
    }

private:
    DualFamily family_;
    double tolerance_;
    std::shared_ptr<const std::vector<Functional>> prefix_;
};

inline CertifiedValue very_weak_norm(const DualFamily& fam, const Element& u, double tau) {
    if (!(tau > 0.0)) throw Error(Errc::invalid_argument, "veryweak", "tolerance must be positive");
    return VeryWeakNorm(fam, tau, 0).evaluate(u.coeffs(), tau, {});
}

inline CertifiedValue very_weak_distance(const DualFamily& fam, const Element& u, const Element& v, double tau) {
    return very_weak_norm(fam, u - v, tau);
}

} // namespace ehrlab
