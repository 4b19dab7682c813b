#pragma once

// Generalized Ehrling inequalities ||Tu||_Y <= eps ||u||_1 + C ||u||_2:
// the constructive (eps, delta_eps, C_eps = eps / delta_eps) certificate, the
// sharp constant, sampling verification, falsification, the reverse
// inequality |u|_Phi <= eps ||u||_X + C ||Tu||_Y, and the three-space chain.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ehrlab/operators.hpp"
#include "ehrlab/optimizer.hpp"
#include "ehrlab/random.hpp"
#include "ehrlab/spaces.hpp"
#include "ehrlab/veryweak.hpp"

namespace ehrlab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// u -> ||chain_n(...chain_1(u))||_outer
struct ComposedNorm {
    std::vector<LinearOperator> chain;
    NormSpec outer;
};

// Second norm of an Ehrling pair: a strong norm, a very weak norm, or a norm
// induced through operators.
using PairNorm = std::variant<NormSpec, VeryWeakNorm, ComposedNorm>;

inline std::string describe(const PairNorm& n) {
    return std::visit(
        [](const auto& v) -> std::string {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, NormSpec>) {
                return v.label;
            } else if constexpr (std::is_same_v<V, VeryWeakNorm>) {
                return std::string("very-weak(") + to_string(v.family().mode) + "," + v.family().space.label + ")";
            } else {
                std::string s = v.outer.label + "(";
                for (auto it = v.chain.rbegin(); it != v.chain.rend(); ++it) {
                    s += it->label();
                    s += it + 1 == v.chain.rend() ? "" : "*";
                }
                return s + ")";
            }
        },
        n);
}

// Enclosure of the second norm at u; with `grad` nonempty a subgradient of the
// lower end is written there.
inline Interval evaluate(const PairNorm& n, std::span<const double> u, std::span<double> grad = {}) {
    return std::visit(
        [&](const auto& v) -> Interval {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, NormSpec>) {
                const double x = grad.empty() ? norm(v, u) : norm_with_gradient(v, u, grad);
                return {x, x};
            } else if constexpr (std::is_same_v<V, VeryWeakNorm>) {
                const CertifiedValue c = v.evaluate(u, v.tolerance(), grad);
                return {c.lo, c.hi};
            } else {
                std::vector<std::vector<double>> stages;
                stages.emplace_back(u.begin(), u.end());
                for (const auto& T : v.chain) {
                    std::vector<double> out(T.out_dim());
                    T.apply(stages.back(), out);
                    stages.push_back(std::move(out));
                }
                if (grad.empty()) {
                    const double x = norm(v.outer, stages.back());
                    return {x, x};
                }
                std::vector<double> g(stages.back().size());
                const double x = norm_with_gradient(v.outer, stages.back(), g);
                for (std::size_t k = v.chain.size(); k-- > 0;) {
                    std::vector<double> back(v.chain[k].in_dim());
                    v.chain[k].apply_transpose(g, back);
                    back.resize(stages[k].size());
                    g = std::move(back);
                }
                std::copy(g.begin(), g.end(), grad.begin());
                return {x, x};
            }
        },
        n);
}

namespace detail {

// ||Tu||_Y and, when requested, its subgradient T^T grad||.||_Y(Tu).
inline double image_norm(const LinearOperator& T, std::span<const double> u, std::span<double> grad) {
    // scratch reused across the optimizer's many calls
    thread_local std::vector<double> y, gy, back;
    y.assign(T.out_dim(), 0.0);
    T.apply(u, y);
    if (grad.empty()) return norm(T.codomain(), y);
    gy.assign(y.size(), 0.0);
    const double v = norm_with_gradient(T.codomain(), y, gy);
    back.assign(T.in_dim(), 0.0);
    T.apply_transpose(gy, back);
    std::copy_n(back.begin(), grad.size(), grad.begin());
    return v;
}

inline std::vector<double> scaled_to_unit(const NormSpec& ns, std::vector<double> x) {
    const double n = norm(ns, x);
    if (n > 0.0) {
        for (double& v : x) v /= n;
    }
    return x;
}

inline void check_eps(double eps, const char* where) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw Error(Errc::invalid_argument, where, "eps must be positive");
}

// Quotient rule for N / D with subgradients gn, gd.
inline void quotient_gradient(double N, double D, std::span<const double> gn, std::span<const double> gd,
                              std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (gn[i] * D - N * gd[i]) / (D * D);
}

} // namespace detail

struct ModulusResult {
    double delta = 0.0;
    double g_value = 0.0;        // inner maximum at delta
    bool at_search_cap = false;  // g(delta_max) < eps already
    bool approximate = false;    // some inner maximization hit its budget
    std::vector<double> witness; // argmax of the inner problem at delta
};

// Largest lattice point delta = 2^{j/R} in [eps / max_constant, delta_max] with
// inner(delta) < eps - kAbsTol, by bisection over j. `inner(delta, warm, stop_at)`
// returns the inner maximum, or any value >= stop_at once one is found. Returning the accepted end of the bracket keeps
// delta on the conservative side.
template <class Inner>
ModulusResult supremal_delta(Inner inner, double eps, const OptimizerSettings& opt, const char* where) {
    detail::check_eps(eps, where);
    const double R = opt.delta_resolution;
    const auto j_max = static_cast<long>(std::floor(R * std::log2(opt.delta_max)));
    const auto j_min = static_cast<long>(std::ceil(R * std::log2(eps / opt.max_constant)));
    if (j_min > j_max) throw Error(Errc::invalid_argument, where, "empty delta search range");
    auto delta_at = [&](long j) { return std::exp2(static_cast<double>(j) / R); };

    std::vector<std::vector<double>> warm;
    ModulusResult out;
    auto probe = [&](long j) {
        Maximum m = inner(delta_at(j), std::span<const std::vector<double>>(warm), eps - kAbsTol);
        out.approximate = out.approximate || m.approximate;
        if (!m.argmax.empty()) {
            warm.push_back(m.argmax);
            if (warm.size() > 8) warm.erase(warm.begin());
        }
        return m;
    };
    auto accepted = [&](const Maximum& m) { return m.value < eps - kAbsTol; };

    Maximum top = probe(j_max);
    if (accepted(top)) {
        out.delta = delta_at(j_max);
        out.g_value = top.value;
        out.at_search_cap = true;
        out.witness = std::move(top.argmax);
        return out;
    }
    Maximum bottom = probe(j_min);
    if (!accepted(bottom)) {
        throw Error(Errc::no_modulus, where,
                    "no admissible delta down to eps/max_constant; the restricted map is not continuous at 0 "
                    "within the configured constant cap");
    }
    long lo = j_min, hi = j_max;
    Maximum at_lo = std::move(bottom);
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        Maximum m = probe(mid);
        if (accepted(m)) {
            lo = mid;
            at_lo = std::move(m);
        } else {
            hi = mid;
        }
    }
    out.delta = delta_at(lo);
    out.g_value = at_lo.value;
    out.witness = std::move(at_lo.argmax);
    return out;
}

// g(delta) = max { ||Tu||_Y : ||u||_1 <= 1, ||u||_2 <= delta }, evaluated as the
// maximum over directions v of ||Tv||_Y / max(||v||_1, ||v||_2 / delta).
inline Maximum restricted_image_max(const LinearOperator& T, const NormSpec& norm1, const PairNorm& norm2,
                                    double delta, const OptimizerSettings& opt,
                                    std::span<const std::vector<double>> warm = {},
                                    double stop_at = std::numeric_limits<double>::infinity()) {
    const std::size_t d = T.in_dim();
    std::vector<double> gn(d), g1(d), g2(d);
    Objective f = [&](std::span<const double> v, std::span<double> grad) {
        if (grad.empty()) {
            const double N = detail::image_norm(T, v, {});
            const double D = std::max(norm(norm1, v), evaluate(norm2, v).lo / delta);
            return N / D;
        }
        const double N = detail::image_norm(T, v, gn);
        const double n1 = norm_with_gradient(norm1, v, g1);
        const double n2 = evaluate(norm2, v, g2).lo / delta;
        if (n1 >= n2) {
            detail::quotient_gradient(N, n1, gn, g1, grad);
            return N / n1;
        }
        for (double& x : g2) x /= delta;
        detail::quotient_gradient(N, n2, gn, g2, grad);
        return N / n2;
    };
    return maximize_homogeneous(f, d, opt, warm, stop_at);
}

inline ModulusResult modulus_delta(const LinearOperator& T, const NormSpec& norm1, const PairNorm& norm2, double eps,
                                   const OptimizerSettings& opt = {}) {
    auto inner = [&](double delta, std::span<const std::vector<double>> warm, double stop_at) {
        return restricted_image_max(T, norm1, norm2, delta, opt, warm, stop_at);
    };
    return supremal_delta(inner, eps, opt, "ehrling.modulus_delta");
}

inline double certificate_from_modulus(double eps, double delta) {
    detail::check_eps(eps, "ehrling.certificate_from_modulus");
    if (!(delta > 0.0)) throw Error(Errc::invalid_argument, "ehrling.certificate_from_modulus", "delta must be positive");
    return eps / delta;
}

struct OptimalConstant {
    double value = 0.0;
    Element witness;  // ||witness||_1 = 1
    bool approximate = false;
};

// Estimate of sup_{u != 0} (||Tu||_Y - eps ||u||_1) / ||u||_2, clamped below at 0.
// The lower end of the second-norm enclosure is used, so the estimate is the
// smallest C that a verifier could accept at the witness.
inline OptimalConstant optimal_constant(const LinearOperator& T, const NormSpec& norm1, const PairNorm& norm2,
                                        double eps, const OptimizerSettings& opt = {},
                                        std::span<const std::vector<double>> warm = {}) {
    detail::check_eps(eps, "ehrling.optimal_constant");
    const std::size_t d = T.in_dim();
    std::vector<double> gbuf(3 * d);
    Objective f = [&, d](std::span<const double> v, std::span<double> grad) {
        const std::size_t m = grad.empty() ? 0 : d;
        std::span<double> gn(gbuf.data(), m), g1(gbuf.data() + d, m), g2(gbuf.data() + 2 * d, m);
        const double image = detail::image_norm(T, v, gn);
        const double n1 = grad.empty() ? norm(norm1, v) : norm_with_gradient(norm1, v, g1);
        const double D = evaluate(norm2, v, g2).lo;
        const double N = image - eps * n1;
        if (!(D > 0.0)) return N > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        if (!grad.empty()) {
            for (std::size_t i = 0; i < d; ++i) gn[i] -= eps * g1[i];
            detail::quotient_gradient(N, D, gn, g2, grad);
        }
        return N / D;
    };
    const Maximum m = maximize_homogeneous(f, d, opt, warm);
    OptimalConstant out;
    out.value = std::max(0.0, m.value);
    out.witness = Element(detail::scaled_to_unit(norm1, m.argmax));
    out.approximate = m.approximate;
    return out;
}

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "PASS";
        case Verdict::fail: return "FAIL";
        case Verdict::inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

// A point at which an inequality with constant <= the tested one fails.
struct Witness {
    Element u;
    double eps = 0.0;
    double lower_bound_on_C = 0.0;  // any valid C must be at least this
    double residual = 0.0;          // inequality residual at the tested C
    std::size_t basis_index = 0;    // n when u = e_n / ||e_n||_1, else 0
};

struct Sampler {
    std::size_t random_samples = 10000;
    std::uint64_t seed = 0;
    bool include_basis = true;
    std::vector<Element> extra;  // e.g. optimizer witnesses
};

// Sample points: uniform-radius random points of the ||.||_1 ball (Gaussian
// directions), signed basis vectors and the extra points, the latter two on
// the unit sphere.
inline std::vector<std::vector<double>> sample_points(const NormSpec& norm1, std::size_t dim, const Sampler& s) {
    std::vector<std::vector<double>> pts;
    pts.reserve(s.random_samples + 2 * dim + s.extra.size());
    Rng rng(s.seed);
    for (std::size_t i = 0; i < s.random_samples; ++i) {
        std::vector<double> v = rng.gaussian_vector(dim);
        const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
        const double n = norm(norm1, v);
        if (!(n > 0.0)) continue;
        for (double& x : v) x *= r / n;
        pts.push_back(std::move(v));
    }
    if (s.include_basis) {
        for (std::size_t i = 0; i < dim; ++i) {
            for (double sign : {1.0, -1.0}) {
                std::vector<double> e(dim, 0.0);
                e[i] = sign;
                pts.push_back(detail::scaled_to_unit(norm1, std::move(e)));
            }
        }
    }
    for (const auto& u : s.extra) {
        if (u.dim() > dim) continue;
        auto v = u.padded(dim).vec();
        if (norm(norm1, v) > 0.0) pts.push_back(detail::scaled_to_unit(norm1, std::move(v)));
    }
    return pts;
}

struct VerificationReport {
    Verdict verdict = Verdict::inconclusive;
    double residual = -std::numeric_limits<double>::infinity();       // max residual, acceptance side
    double fail_residual = -std::numeric_limits<double>::infinity();  // max residual, rejection side
    std::size_t points = 0;
    std::optional<Witness> witness;
};

// Residual tolerance for PASS / FAIL verdicts.
inline constexpr double kVerifyTol = 1e-8;

namespace detail {

// `accept_side(p)` and `reject_side(p)` give the residual at p using the
// enclosure end that makes PASS and FAIL respectively sound.
template <class AcceptFn, class RejectFn, class LowerBoundFn>
VerificationReport verify_points(const std::vector<std::vector<double>>& pts, double eps, AcceptFn accept_side,
                                 RejectFn reject_side, LowerBoundFn lower_bound, const NormSpec& norm1) {
    VerificationReport rep;
    rep.points = pts.size();
    std::size_t worst_reject = pts.size();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        rep.residual = std::max(rep.residual, accept_side(pts[i]));
        const double r = reject_side(pts[i]);
        if (r > rep.fail_residual) {
            rep.fail_residual = r;
            worst_reject = i;
        }
    }
    if (rep.residual <= kVerifyTol) {
        rep.verdict = Verdict::pass;
    } else if (rep.fail_residual > kVerifyTol) {
        rep.verdict = Verdict::fail;
        Witness w;
        w.u = Element(pts[worst_reject]);
        w.eps = eps;
        w.residual = rep.fail_residual;
        w.lower_bound_on_C = lower_bound(pts[worst_reject]);
        const auto& v = pts[worst_reject];
        if (std::count_if(v.begin(), v.end(), [](double x) { return x != 0.0; }) == 1) {
            const auto it = std::find_if(v.begin(), v.end(), [](double x) { return x != 0.0; });
            if (std::abs(norm(norm1, v) - 1.0) < kAbsTol) w.basis_index = static_cast<std::size_t>(it - v.begin()) + 1;
        }
        rep.witness = std::move(w);
    } else {
        rep.verdict = Verdict::inconclusive;
    }
    return rep;
}

} // namespace detail

// Checks ||Tu||_Y <= eps ||u||_1 + C ||u||_2 on the sampler's points. PASS uses
// the lower end of the ||u||_2 enclosure, FAIL the upper end.
inline VerificationReport verify_certificate(const LinearOperator& T, const NormSpec& norm1, const PairNorm& norm2,
                                             double eps, double C, const Sampler& sampler) {
    if (!(C >= 0.0)) throw Error(Errc::invalid_argument, "ehrling.verify_certificate", "C must be >= 0");
    const auto pts = sample_points(norm1, T.in_dim(), sampler);
    auto base = [&](const std::vector<double>& u) { return detail::image_norm(T, u, {}) - eps * norm(norm1, u); };
    return detail::verify_points(
        pts, eps, [&](const auto& u) { return base(u) - C * evaluate(norm2, u).lo; },
        [&](const auto& u) { return base(u) - C * evaluate(norm2, u).hi; },
        [&](const auto& u) { return base(u) / evaluate(norm2, u).hi; }, norm1);
}

// Searches for u with ||u||_1 = 1 and ||Tu||_Y - eps - C_max |u|^{hi} > 0, first
// along the basis tail e_d, e_{d-1}, ... (`basis_depth` vectors, 0 = all) and then
// by ascent on (||Tv|| - eps ||v||_1) / ||v||_2^{hi}. nullopt is inconclusive.
inline std::optional<Witness> falsify(const LinearOperator& T, const NormSpec& norm1, const PairNorm& norm2,
                                      double eps, double c_max, const OptimizerSettings& opt = {},
                                      std::size_t basis_depth = 0) {
    detail::check_eps(eps, "ehrling.falsify");
    if (!(c_max > 0.0)) throw Error(Errc::invalid_argument, "ehrling.falsify", "C_max must be positive");
    if (is_zero_operator(T)) return std::nullopt;
    const std::size_t d = T.in_dim();

    auto make_witness = [&](std::vector<double> u, std::size_t basis_index) {
        u = detail::scaled_to_unit(norm1, std::move(u));
        const double num = detail::image_norm(T, u, {}) - eps * norm(norm1, u);
        const double hi = evaluate(norm2, u).hi;
        Witness w;
        w.eps = eps;
        w.lower_bound_on_C = hi > 0.0 ? num / hi : std::numeric_limits<double>::infinity();
        w.residual = num - c_max * hi;
        w.basis_index = basis_index;
        w.u = Element(std::move(u));
        return w;
    };

    std::optional<Witness> best;
    const std::size_t depth = basis_depth == 0 ? d : std::min(basis_depth, d);
    for (std::size_t n = d; n > d - depth; --n) {
        std::vector<double> e(d, 0.0);
        e[n - 1] = 1.0;
        Witness w = make_witness(std::move(e), n);
        if (w.residual > 0.0 && (!best || w.residual > best->residual)) best = std::move(w);
    }
    if (best) return best;

    std::vector<double> gbuf(3 * d);
    Objective f = [&, d](std::span<const double> v, std::span<double> grad) {
        const std::size_t m = grad.empty() ? 0 : d;
        std::span<double> gn(gbuf.data(), m), g1(gbuf.data() + d, m), g2(gbuf.data() + 2 * d, m);
        const double image = detail::image_norm(T, v, gn);
        const double n1 = grad.empty() ? norm(norm1, v) : norm_with_gradient(norm1, v, g1);
        const double D = evaluate(norm2, v, g2).hi;
        const double N = image - eps * n1;
        if (!(D > 0.0)) return N > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        if (!grad.empty()) {
            for (std::size_t i = 0; i < d; ++i) gn[i] -= eps * g1[i];
            detail::quotient_gradient(N, D, gn, g2, grad);
        }
        return N / D;
    };
    const Maximum m = maximize_homogeneous(f, d, opt);
    if (m.value > c_max && !m.argmax.empty()) {
        Witness w = make_witness(m.argmax, 0);
        if (w.residual > 0.0) return w;
    }
    return std::nullopt;
}

struct ReverseResult {
    double delta = 0.0;
    double C = 0.0;
    bool at_search_cap = false;
    bool approximate = false;
};

inline void require_injective(const LinearOperator& T, const char* where) {
    if (smallest_singular_value(T) <= 1e-10) {
        throw Error(Errc::not_injective, where, "operator is not injective on the truncation (smallest singular value <= 1e-10)");
    }
}

// Domain norms modelling a reflexive X: l^p and weighted l^p with 1 < p < inf, and h^1.
inline void require_reflexive_model(const NormSpec& ns, const char* where) {
    const bool ok = ns.kind == NormSpec::Kind::sobolev_h1 || (ns.p > 1.0 && std::isfinite(ns.p));
    if (!ok) throw Error(Errc::unsupported, where, "reverse inequality needs a reflexive model norm (1 < p < inf)");
}

// (delta, C = eps/delta) for |u|_Phi <= eps ||u||_X + C ||Tu||_Y, with delta the
// supremal lattice point where max{|u|_Phi^{hi} : ||u||_X <= 1, ||Tu||_Y <= delta} < eps.
inline ReverseResult reverse_certificate(const LinearOperator& T, const VeryWeakNorm& fam, double eps,
                                         const OptimizerSettings& opt = {}) {
    const char* where = "ehrling.reverse_certificate";
    detail::check_eps(eps, where);
    require_reflexive_model(T.domain(), where);
    require_injective(T, where);
    const std::size_t d = T.in_dim();
    const NormSpec& X = T.domain();
    auto inner = [&](double delta, std::span<const std::vector<double>> warm, double stop_at) {
        std::vector<double> gbuf(3 * d);
        Objective f = [&, d, delta](std::span<const double> v, std::span<double> grad) {
            const std::size_t m = grad.empty() ? 0 : d;
            std::span<double> gp(gbuf.data(), m), gx(gbuf.data() + d, m), gt(gbuf.data() + 2 * d, m);
            const double N = fam.evaluate(v, fam.tolerance(), gp).hi;
            const double nx = grad.empty() ? norm(X, v) : norm_with_gradient(X, v, gx);
            const double nt = detail::image_norm(T, v, gt) / delta;
            if (grad.empty()) return N / std::max(nx, nt);
            if (nx >= nt) {
                detail::quotient_gradient(N, nx, gp, gx, grad);
                return N / nx;
            }
            for (double& x : gt) x /= delta;
            detail::quotient_gradient(N, nt, gp, gt, grad);
            return N / nt;
        };
        return maximize_homogeneous(f, d, opt, warm, stop_at);
    };
    const ModulusResult m = supremal_delta(inner, eps, opt, where);
    return {m.delta, eps / m.delta, m.at_search_cap, m.approximate};
}

// Checks |u|_Phi <= eps ||u||_X + C ||Tu||_Y; PASS uses the upper end of the
// |u|_Phi enclosure, FAIL the lower end.
inline VerificationReport verify_reverse(const LinearOperator& T, const VeryWeakNorm& fam, double eps, double C,
                                         const Sampler& sampler) {
    if (!(C >= 0.0) || !(eps >= 0.0)) throw Error(Errc::invalid_argument, "ehrling.verify_reverse", "eps, C must be >= 0");
    const NormSpec& X = T.domain();
    const auto pts = sample_points(X, T.in_dim(), sampler);
    auto rhs = [&](const std::vector<double>& u) { return eps * norm(X, u) + C * detail::image_norm(T, u, {}); };
    return detail::verify_points(
        pts, eps, [&](const auto& u) { return fam.evaluate(u).hi - rhs(u); },
        [&](const auto& u) { return fam.evaluate(u).lo - rhs(u); },
        [&](const auto& u) {
            const double t = detail::image_norm(T, u, {});
            return t > 0.0 ? (fam.evaluate(u).lo - eps * norm(X, u)) / t : std::numeric_limits<double>::infinity();
        },
        X);
}

enum class Method { modulus, optimal };

inline const char* to_string(Method m) { return m == Method::modulus ? "modulus" : "optimal"; }

struct CertificateRow {
    double eps = 0.0;
    double delta = 0.0;
    double C = std::numeric_limits<double>::infinity();
    Method method = Method::modulus;
    double residual = 0.0;
    Verdict verdict = Verdict::inconclusive;
    std::optional<double> optimal;  // sharp-constant estimate at this eps
    bool no_modulus = false;
    bool at_search_cap = false;
    bool tightened = false;  // C taken from a smaller-eps row
    bool approximate = false;
    std::optional<Witness> witness;
};

struct EhrlingCertificate {
    std::vector<CertificateRow> rows;  // eps descending
    std::string operator_label;
    std::string norm1;
    std::string norm2;

    bool all_pass() const {
        return !rows.empty() &&
               std::all_of(rows.begin(), rows.end(), [](const CertificateRow& r) { return r.verdict == Verdict::pass; });
    }
};

struct CertifyOptions {
    bool compute_optimal = true;  // fill CertificateRow::optimal and feed its witness to the verifier
    bool optimal_rows = false;    // also emit Method::optimal rows with C = C*(eps)
};

inline const std::vector<double>& default_eps_grid() {
    static const std::vector<double> grid{1.0, 0.5, 0.25, 0.125, 0.0625};
    return grid;
}

// Constructive certificate table over an eps grid. A row with eps' > eps may
// reuse the constant of the eps row (the inequality only weakens as eps grows),
// so C is made nonincreasing in eps; such rows are flagged `tightened`.
inline EhrlingCertificate certify(const LinearOperator& T, const NormSpec& norm1, const PairNorm& norm2,
                                  std::vector<double> eps_grid, const OptimizerSettings& opt = {},
                                  Sampler sampler = {}, CertifyOptions options = {}) {
    if (eps_grid.empty()) throw Error(Errc::invalid_argument, "ehrling.certify", "eps grid is empty");
    std::sort(eps_grid.begin(), eps_grid.end(), std::greater<>());
    eps_grid.erase(std::unique(eps_grid.begin(), eps_grid.end()), eps_grid.end());

    EhrlingCertificate cert;
    cert.operator_label = T.label();
    cert.norm1 = norm1.label;
    cert.norm2 = describe(norm2);

    std::vector<CertificateRow> optimal_rows;
    for (double eps : eps_grid) {
        CertificateRow row;
        row.eps = eps;
        try {
            const ModulusResult m = modulus_delta(T, norm1, norm2, eps, opt);
            row.delta = m.delta;
            row.C = certificate_from_modulus(eps, m.delta);
            row.at_search_cap = m.at_search_cap;
            row.approximate = m.approximate;
            if (!m.witness.empty()) sampler.extra.emplace_back(detail::scaled_to_unit(norm1, m.witness));
        } catch (const Error& e) {
            if (e.code() != Errc::no_modulus) throw;
            row.no_modulus = true;
        }
        if (options.compute_optimal) {
            const OptimalConstant oc = optimal_constant(T, norm1, norm2, eps, opt);
            row.optimal = oc.value;
            sampler.extra.push_back(oc.witness);
            if (options.optimal_rows && std::isfinite(oc.value) && oc.value > 0.0) {
                CertificateRow r;
                r.eps = eps;
                r.method = Method::optimal;
                r.C = oc.value;
                r.delta = eps / oc.value;
                r.optimal = oc.value;
                r.approximate = oc.approximate;
                optimal_rows.push_back(r);
            }
        }
        cert.rows.push_back(std::move(row));
    }

    double running = std::numeric_limits<double>::infinity();
    for (auto it = cert.rows.rbegin(); it != cert.rows.rend(); ++it) {
        if (it->C > running) {
            it->C = running;
            it->delta = it->eps / running;
            it->tightened = true;
            it->no_modulus = false;
        }
        running = std::min(running, it->C);
    }

    cert.rows.insert(cert.rows.end(), optimal_rows.begin(), optimal_rows.end());
    for (auto& row : cert.rows) {
        if (!std::isfinite(row.C)) {
            row.verdict = Verdict::inconclusive;
            continue;
        }
        const VerificationReport rep = verify_certificate(T, norm1, norm2, row.eps, row.C, sampler);
        row.residual = rep.residual;
        row.verdict = rep.verdict;
        row.witness = rep.witness;
    }
    return cert;
}

// Classical Ehrling inequality ||theta u||_Y <= eps ||u||_X + C ||tau theta u||_Z:
// the pair (||.||_X, ||tau theta .||_Z) certified for T = theta.
inline EhrlingCertificate three_space_certificate(const LinearOperator& theta, const LinearOperator& tau,
                                                  std::vector<double> eps_grid, const OptimizerSettings& opt = {},
                                                  Sampler sampler = {}, CertifyOptions options = {}) {
    if (theta.out_dim() != tau.in_dim()) {
        throw Error(Errc::dimension_mismatch, "ehrling.three_space_certificate",
                    "codomain of theta (dim " + std::to_string(theta.out_dim()) + ") != domain of tau (dim " +
                        std::to_string(tau.in_dim()) + ")");
    }
    const PairNorm norm2 = ComposedNorm{{theta, tau}, tau.codomain()};
    return certify(theta, theta.domain(), norm2, std::move(eps_grid), opt, std::move(sampler), options);
}

} // namespace ehrlab
