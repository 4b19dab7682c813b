#pragma once

// Canonical sequences, a desk-scale classifier for strong / weak / very weak
// convergence, and the sequence that converges very weakly but not weakly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ehrlab/random.hpp"
#include "ehrlab/spaces.hpp"
#include "ehrlab/veryweak.hpp"

namespace ehrlab {

// Ambient dimension d_n of the n-th counterexample term: `fixed` when nonzero,
// else N_n + n + offset.
struct DimSchedule {
    std::size_t fixed = 0;
    std::size_t offset = 4;

    std::size_t dim(std::uint64_t n, std::uint64_t N) const {
        return fixed != 0 ? fixed : static_cast<std::size_t>(N + n + offset);
    }
};

// Smallest N with 2^{-N} < 1/n^2; with ||u|| <= 1 the tail past N is then below 1/n^2.
inline std::uint64_t appendix_cutoff(std::uint64_t n) {
    if (n == 0) throw Error(Errc::out_of_range, "convergence", "n must be >= 1");
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    std::uint64_t N = 1;
    while (!(std::ldexp(n2, -static_cast<int>(N)) < 1.0)) ++N;
    return N;
}

struct AppendixTerm {
    Element u;                        // n xi_n / ||xi_n||
    std::uint64_t cutoff = 0;         // N_n
    std::size_t dim = 0;              // d_n
    std::size_t rank = 0;             // rank of the N_n x d_n pairing matrix
    double max_pairing = 0.0;         // max_{j <= N_n} |<phi_j, u>|
    CertifiedValue very_weak;         // |u|_Phi enclosure
};

// u_n = n xi_n / ||xi_n||_X with xi_n != 0 annihilated by phi_1..phi_{N_n}.
//
// xi_n is the orthogonal projection of the all-ones vector of X_{d_n} onto the
// nullspace of the pairing matrix [<phi_j, e_i>] (SVD), falling back to the
// first nullspace basis vector if the projection vanishes.
inline AppendixTerm appendix_counterexample(const DualFamily& fam, std::uint64_t n, const DimSchedule& schedule = {}) {
    const char* where = "convergence.appendix_counterexample";
    AppendixTerm t;
    t.cutoff = appendix_cutoff(n);
    t.dim = schedule.dim(n, t.cutoff);
    const std::size_t d = t.dim;
    if (d == 0) throw Error(Errc::invalid_argument, where, "dim_schedule produced dimension 0");

    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.cutoff), static_cast<Eigen::Index>(d));
    std::vector<Functional> phis;
    for (std::uint64_t j = 1; j <= t.cutoff; ++j) {
        phis.push_back(enumerate_phi(fam, j));
        const auto& c = phis.back().coeffs;
        for (std::size_t i = 0; i < std::min(c.size(), d); ++i) P(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(i)) = c[i];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > 1e-12 * std::max(1.0, smax)) ++rank;
    }
    t.rank = rank;
    if (rank >= d) {
        throw Error(Errc::empty_nullspace, where,
                    "pairing matrix of phi_1..phi_" + std::to_string(t.cutoff) + " has full rank in dimension " +
                        std::to_string(d) + "; use a larger dim_schedule");
    }
    const Eigen::MatrixXd null = svd.matrixV().rightCols(static_cast<Eigen::Index>(d - rank));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d));
    Eigen::VectorXd xi = null * (null.transpose() * ones);
    if (xi.norm() < 1e-8 * ones.norm()) xi = null.col(0);

    std::vector<double> v(xi.data(), xi.data() + xi.size());
    const double scale = static_cast<double>(n) / norm(fam.space, v);
    for (double& x : v) x *= scale;
    t.u = Element(std::move(v));

    for (const auto& phi : phis) t.max_pairing = std::max(t.max_pairing, std::abs(pair(phi, t.u)));
    t.very_weak = very_weak_norm(fam, t.u, 1e-12);

    const double nn = static_cast<double>(n);
    if (std::abs(norm(fam.space, t.u) - nn) > 1e-10 * std::max(1.0, nn) || t.max_pairing > 1e-9 ||
        !(t.very_weak.hi < 1.0 / nn)) {
        throw Error(Errc::internal, where, "postcondition failed for n = " + std::to_string(n));
    }
    return t;
}

enum class SequenceRule { basis, strongly_convergent, appendix, custom };

inline const char* to_string(SequenceRule r) {
    switch (r) {
        case SequenceRule::basis: return "basis";
        case SequenceRule::strongly_convergent: return "strongly-convergent";
        case SequenceRule::appendix: return "appendix-counterexample";
        case SequenceRule::custom: return "custom";
    }
    return "custom";
}

struct SequenceGen {
    SequenceRule rule = SequenceRule::basis;
    std::size_t horizon = 16;
    std::size_t dim = 16;           // basis: ambient dimension
    Element target;                 // strongly-convergent: limit
    double rate = 0.5;              // strongly-convergent: term(n) = target + rate^n e_1
    DualFamily family;              // appendix
    DimSchedule schedule;           // appendix
    std::vector<Element> terms;     // custom
    std::optional<Element> limit;   // custom: limit u (default 0)

    static SequenceGen basis(std::size_t dim, std::size_t horizon = 0) {
        SequenceGen g;
        g.rule = SequenceRule::basis;
        g.dim = dim;
        g.horizon = horizon == 0 ? dim : horizon;
        return g;
    }
    static SequenceGen strongly_convergent(Element target, double rate, std::size_t horizon) {
        SequenceGen g;
        g.rule = SequenceRule::strongly_convergent;
        g.target = std::move(target);
        g.rate = rate;
        g.horizon = horizon;
        return g;
    }
    static SequenceGen appendix(DualFamily fam, std::size_t horizon, DimSchedule schedule = {}) {
        SequenceGen g;
        g.rule = SequenceRule::appendix;
        g.family = std::move(fam);
        g.horizon = horizon;
        g.schedule = schedule;
        return g;
    }
    static SequenceGen custom(std::vector<Element> terms, std::optional<Element> limit = std::nullopt) {
        SequenceGen g;
        g.rule = SequenceRule::custom;
        g.horizon = terms.size();
        g.terms = std::move(terms);
        g.limit = std::move(limit);
        return g;
    }
};

inline Element term(const SequenceGen& g, std::size_t n) {
    if (n == 0 || n > g.horizon) throw Error(Errc::out_of_range, "convergence.term", "n must lie in 1..horizon");
    switch (g.rule) {
        case SequenceRule::basis:
            if (n > g.dim) throw Error(Errc::out_of_range, "convergence.term", "basis index exceeds dimension");
            return Element::basis(n, g.dim);
        case SequenceRule::strongly_convergent: {
            Element e1 = Element::basis(1, g.target.dim());
            return g.target + std::pow(g.rate, static_cast<double>(n)) * e1;
        }
        case SequenceRule::appendix:
            return appendix_counterexample(g.family, n, g.schedule).u;
        case SequenceRule::custom:
            return g.terms[n - 1];
    }
    throw Error(Errc::internal, "convergence.term", "unknown rule");
}

inline Element limit_of(const SequenceGen& g) {
    switch (g.rule) {
        case SequenceRule::strongly_convergent: return g.target;
        case SequenceRule::custom: return g.limit.value_or(Element::zero(1));
        default: return Element::zero(1);
    }
}

// Default probes: phi_1..phi_count of the family, plus `random_count` seeded
// random functionals with coefficients g_k 2^{-k/2} (g_k standard normal),
// normalized to dual norm 1. The geometric decay models fixed elements of X*
// seen through the truncation.
inline std::vector<Functional> default_probes(const DualFamily& fam, std::size_t count = 32,
                                              std::size_t random_count = 32, std::uint64_t seed = 0) {
    std::vector<Functional> probes;
    for (std::size_t k = 1; k <= count; ++k) probes.push_back(enumerate_phi(fam, k));
    const std::size_t d = fam.space.dim != 0 ? fam.space.dim : fam.dim;
    for (std::size_t r = 0; r < random_count; ++r) {
        Rng rng(stream_seed(seed ^ 0x70726f6265ULL, r));
        Functional f;
        f.coeffs = rng.gaussian_vector(d);
        for (std::size_t k = 0; k < d; ++k) f.coeffs[k] *= std::exp2(-0.5 * static_cast<double>(k + 1));
        const double dn = dual_norm(fam.space, f.coeffs);
        for (double& c : f.coeffs) c /= dn;
        f.dual_norm_bound = 1.0;
        probes.push_back(std::move(f));
    }
    return probes;
}

enum class ModeVerdict { strong, weak_not_strong, very_weak_only, bounded_divergent, unbounded };

inline const char* to_string(ModeVerdict v) {
    switch (v) {
        case ModeVerdict::strong: return "strong";
        case ModeVerdict::weak_not_strong: return "weak-not-strong";
        case ModeVerdict::very_weak_only: return "very-weak-only";
        case ModeVerdict::bounded_divergent: return "bounded-divergent";
        case ModeVerdict::unbounded: return "unbounded";
    }
    return "bounded-divergent";
}

struct ModeReport {
    std::vector<double> strong_residuals;      // ||u_n - u||
    std::vector<double> weak_residuals;        // max_p |<p, u_n - u>|
    std::vector<CertifiedValue> very_weak;     // |u_n - u|_Phi
    std::vector<double> norms;                 // ||u_n||
    ModeVerdict verdict = ModeVerdict::bounded_divergent;
    double tol = 0.0;
    std::size_t trailing_from = 1;             // first n of the trailing half
    bool strong_met = false;                   // strong residual < tol on the trailing half
    bool weak_met = false;                     // probe residuals < tol on the trailing half
    bool very_weak_met = false;                // |u_n - u|_Phi^{hi} < tol on the trailing half
    bool bounded = true;                       // sup ||u_n|| <= 1/tol
    std::vector<std::string> diagnostics;
};

// Verdict rules on the trailing half n > horizon/2:
//   strong            strong residuals < tol (and the weaker criteria, which it implies);
//   weak-not-strong   bounded, probe residuals < tol, strong residuals >= 10 tol;
//   very-weak-only    |u_n - u|_Phi^{hi} < tol and max ||u_n|| > 1/tol;
//   otherwise         unbounded when sup ||u_n|| > 1/tol, else bounded-divergent.
// Weak convergence is the finite-probe surrogate, not sigma(X, X*) itself.
inline ModeReport classify(const SequenceGen& g, const DualFamily& fam, const std::vector<Functional>& probes,
                           double tol) {
    const char* where = "convergence.classify";
    if (!(tol > 0.0)) throw Error(Errc::invalid_argument, where, "tol must be positive");
    if (g.horizon < 8) throw Error(Errc::invalid_argument, where, "horizon must be >= 8");
    if (probes.empty()) throw Error(Errc::invalid_argument, where, "probe list is empty");

    ModeReport rep;
    rep.tol = tol;
    const Element u = limit_of(g);
    for (std::size_t n = 1; n <= g.horizon; ++n) {
        const Element un = term(g, n);
        const Element diff = un - u;
        rep.strong_residuals.push_back(norm(fam.space, diff));
        double w = 0.0;
        for (const auto& p : probes) w = std::max(w, std::abs(pair(p, diff)));
        rep.weak_residuals.push_back(w);
        rep.very_weak.push_back(very_weak_norm(fam, diff, tol * 1e-3));
        rep.norms.push_back(norm(fam.space, un));
    }

    rep.trailing_from = g.horizon / 2 + 1;
    const std::size_t first = rep.trailing_from - 1;
    auto trailing_max = [&](const std::vector<double>& v) { return *std::max_element(v.begin() + first, v.end()); };
    auto trailing_min = [&](const std::vector<double>& v) { return *std::min_element(v.begin() + first, v.end()); };
    double vw_max = 0.0;
    for (std::size_t i = first; i < g.horizon; ++i) vw_max = std::max(vw_max, rep.very_weak[i].hi);

    const double sup_norm = *std::max_element(rep.norms.begin(), rep.norms.end());
    rep.bounded = sup_norm <= 1.0 / tol;
    rep.strong_met = trailing_max(rep.strong_residuals) < tol;
    rep.weak_met = trailing_max(rep.weak_residuals) < tol;
    rep.very_weak_met = vw_max < tol;
    const bool unbounded_trend = trailing_max(rep.norms) > 1.0 / tol;

    if (rep.strong_met) {
        if (!rep.weak_met || !rep.very_weak_met) {
            rep.diagnostics.push_back("implication-violated: strong residuals below tol but weaker residuals are not");
            rep.verdict = ModeVerdict::bounded_divergent;
        } else {
            rep.verdict = ModeVerdict::strong;
        }
    } else if (rep.bounded && rep.weak_met) {
        if (trailing_min(rep.strong_residuals) >= 10.0 * tol) {
            rep.verdict = ModeVerdict::weak_not_strong;
        } else {
            rep.diagnostics.push_back("ambiguous: strong residuals between tol and 10 tol");
            rep.verdict = ModeVerdict::bounded_divergent;
        }
    } else if (rep.very_weak_met && unbounded_trend) {
        rep.verdict = ModeVerdict::very_weak_only;
    } else {
        rep.verdict = rep.bounded ? ModeVerdict::bounded_divergent : ModeVerdict::unbounded;
    }
    return rep;
}

struct ImplicationReport {
    std::vector<std::size_t> violations;  // n where ||u_n - u|| < tol but a weaker residual is not small
    bool strong_vanishes = false;
    bool weak_vanishes = false;
    bool very_weak_vanishes = false;
    ModeReport modes;
};

// Per-n check of ||u_n - u|| < tol  =>  max_p |<p, u_n - u>| < tol (1 + max_p ||p||_*)
// and |u_n - u|_Phi^{hi} < tol. Any violation indicates a bug.
inline ImplicationReport implication_suite(const SequenceGen& g, const DualFamily& fam,
                                           const std::vector<Functional>& probes, double tol) {
    ImplicationReport rep;
    rep.modes = classify(g, fam, probes, tol);
    double probe_norm = 0.0;
    for (const auto& p : probes) probe_norm = std::max(probe_norm, dual_norm(fam.space, p));
    for (std::size_t i = 0; i < rep.modes.strong_residuals.size(); ++i) {
        if (rep.modes.strong_residuals[i] < tol) {
            if (!(rep.modes.weak_residuals[i] < tol * (1.0 + probe_norm)) || !(rep.modes.very_weak[i].hi < tol)) {
                rep.violations.push_back(i + 1);
            }
        }
    }
    rep.strong_vanishes = rep.modes.strong_met;
    rep.weak_vanishes = rep.modes.weak_met;
    rep.very_weak_vanishes = rep.modes.very_weak_met;
    return rep;
}

} // namespace ehrlab
