#pragma once

// Gallery of linear operators T : X -> Y on truncated spaces.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ehrlab/spaces.hpp"

namespace ehrlab {

// Advisory label only; certification never reads it.
enum class CcStatus { completely_continuous, not_completely_continuous, unknown };

inline const char* to_string(CcStatus s) {
    switch (s) {
        case CcStatus::completely_continuous: return "completely-continuous";
        case CcStatus::not_completely_continuous: return "not-completely-continuous";
        case CcStatus::unknown: return "unknown";
    }
    return "unknown";
}

struct Diagonal {
    std::vector<double> lambda;
};

struct Dense {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major
};

// (Tu)_i = h * sum_j K(x_i, y_j) u_j
struct Kernel {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> samples;  // row-major grid of K(x_i, y_j)
    double h = 1.0;
};

// (Tu)_{k+1} = u_k, (Tu)_1 = 0; maps X_dim into X_{dim+1} isometrically.
struct Shift {
    std::size_t dim = 0;
};

class LinearOperator {
public:
    using Repr = std::variant<Diagonal, Dense, Kernel, Shift>;

    LinearOperator(Repr repr, NormSpec domain, NormSpec codomain, CcStatus status, std::string label)
        : repr_(std::move(repr)),
          domain_(std::move(domain)),
          codomain_(std::move(codomain)),
          status_(status),
          label_(std::move(label)) {
        if (in_dim() == 0 || out_dim() == 0) {
            throw Error(Errc::invalid_argument, "operators", "operator dimensions must be positive");
        }
    }

    const Repr& repr() const noexcept { return repr_; }
    const NormSpec& domain() const noexcept { return domain_; }
    const NormSpec& codomain() const noexcept { return codomain_; }
    CcStatus cc_status() const noexcept { return status_; }
    const std::string& label() const noexcept { return label_; }

    std::size_t in_dim() const {
        return std::visit(
            [](const auto& r) -> std::size_t {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, Diagonal>) return r.lambda.size();
                else if constexpr (std::is_same_v<R, Shift>) return r.dim;
                else return r.cols;
            },
            repr_);
    }

    std::size_t out_dim() const {
        return std::visit(
            [](const auto& r) -> std::size_t {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, Diagonal>) return r.lambda.size();
                else if constexpr (std::is_same_v<R, Shift>) return r.dim + 1;
                else return r.rows;
            },
            repr_);
    }

    // out has out_dim() entries; u with fewer than in_dim() entries is zero-padded.
    void apply(std::span<const double> u, std::span<double> out) const {
        check_input(u.size());
        std::fill(out.begin(), out.end(), 0.0);
        std::visit(
            [&](const auto& r) {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, Diagonal>) {
                    for (std::size_t i = 0; i < u.size(); ++i) out[i] = r.lambda[i] * u[i];
                } else if constexpr (std::is_same_v<R, Shift>) {
                    for (std::size_t i = 0; i < u.size(); ++i) out[i + 1] = u[i];
                } else {
                    const double scale = scale_of(r);
                    for (std::size_t i = 0; i < r.rows; ++i) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < u.size(); ++j) s += entries_of(r)[i * r.cols + j] * u[j];
                        out[i] = scale * s;
                    }
                }
            },
            repr_);
    }

    // out = T^T y, out has in_dim() entries.
    void apply_transpose(std::span<const double> y, std::span<double> out) const {
        if (y.size() > out_dim()) throw Error(Errc::dimension_mismatch, "operators", "transpose input too long");
        std::fill(out.begin(), out.end(), 0.0);
        std::visit(
            [&](const auto& r) {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, Diagonal>) {
                    for (std::size_t i = 0; i < y.size(); ++i) out[i] = r.lambda[i] * y[i];
                } else if constexpr (std::is_same_v<R, Shift>) {
                    for (std::size_t i = 1; i < y.size(); ++i) out[i - 1] = y[i];
                } else {
                    const double scale = scale_of(r);
                    for (std::size_t i = 0; i < y.size(); ++i) {
                        for (std::size_t j = 0; j < r.cols; ++j) out[j] += scale * entries_of(r)[i * r.cols + j] * y[i];
                    }
                }
            },
            repr_);
    }

    Element apply(const Element& u) const {
        std::vector<double> out(out_dim());
        apply(u.coeffs(), out);
        return Element(std::move(out));
    }

    Eigen::MatrixXd matrix() const {
        Eigen::MatrixXd m(out_dim(), in_dim());
        std::vector<double> e(in_dim(), 0.0), col(out_dim());
        for (std::size_t j = 0; j < in_dim(); ++j) {
            e[j] = 1.0;
            apply(e, col);
            for (std::size_t i = 0; i < out_dim(); ++i) m(i, j) = col[i];
            e[j] = 0.0;
        }
        return m;
    }

private:
    void check_input(std::size_t n) const {
        if (n > in_dim()) {
            throw Error(Errc::dimension_mismatch, "operators",
                        "input dimension " + std::to_string(n) + " exceeds operator domain dimension " +
                            std::to_string(in_dim()));
        }
    }
    static double scale_of(const Dense&) { return 1.0; }
    static double scale_of(const Kernel& k) { return k.h; }
    static const std::vector<double>& entries_of(const Dense& d) { return d.data; }
    static const std::vector<double>& entries_of(const Kernel& k) { return k.samples; }

    Repr repr_;
    NormSpec domain_;
    NormSpec codomain_;
    CcStatus status_;
    std::string label_;
};

inline Element apply(const LinearOperator& T, const Element& u) { return T.apply(u); }

namespace detail {

inline void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw Error(Errc::invalid_entry, "operators", std::string(what) + " has a non-finite entry");
    }
}

// Constructor rule for the cc label of a truncated diagonal. A trailing zero
// reads as finite rank; a nonincreasing trailing half that has dropped below
// half the peak reads as lambda_k -> 0; a trailing half that stays above half
// the peak reads as not tending to zero.
inline CcStatus diagonal_status(const std::vector<double>& lambda) {
    if (lambda.empty()) return CcStatus::unknown;
    if (lambda.back() == 0.0) return CcStatus::completely_continuous;
    double peak = 0.0;
    for (double x : lambda) peak = std::max(peak, std::abs(x));
    const std::size_t start = lambda.size() / 2;
    bool nonincreasing = true;
    double trailing_min = std::abs(lambda[start]);
    for (std::size_t i = start; i < lambda.size(); ++i) {
        trailing_min = std::min(trailing_min, std::abs(lambda[i]));
        if (i > start && std::abs(lambda[i]) > std::abs(lambda[i - 1])) nonincreasing = false;
    }
    if (lambda.size() >= 2 && nonincreasing && std::abs(lambda.back()) <= 0.5 * peak) {
        return CcStatus::completely_continuous;
    }
    if (trailing_min > 0.5 * peak) return CcStatus::not_completely_continuous;
    return CcStatus::unknown;
}

} // namespace detail

inline LinearOperator make_diagonal(std::vector<double> lambda, NormSpec domain = NormSpec::lp(2.0),
                                    NormSpec codomain = NormSpec::lp(2.0)) {
    detail::check_finite(lambda, "diagonal");
    const CcStatus status = detail::diagonal_status(lambda);
    return LinearOperator(Diagonal{std::move(lambda)}, std::move(domain), std::move(codomain), status, "diagonal");
}

// lambda_k = first * ratio^{k-1}, k = 1..dim
inline LinearOperator make_geometric_diagonal(std::size_t dim, double first, double ratio,
                                              NormSpec domain = NormSpec::lp(2.0),
                                              NormSpec codomain = NormSpec::lp(2.0)) {
    std::vector<double> lambda(dim);
    double v = first;
    for (auto& x : lambda) {
        x = v;
        v *= ratio;
    }
    return make_diagonal(std::move(lambda), std::move(domain), std::move(codomain));
}

inline LinearOperator make_dense(const std::vector<std::vector<double>>& rows, NormSpec domain = NormSpec::lp(2.0),
                                 NormSpec codomain = NormSpec::lp(2.0), CcStatus status = CcStatus::unknown) {
    if (rows.empty() || rows.front().empty()) throw Error(Errc::invalid_argument, "operators", "dense matrix is empty");
    Dense d{rows.size(), rows.front().size(), {}};
    for (const auto& r : rows) {
        if (r.size() != d.cols) throw Error(Errc::dimension_mismatch, "operators", "dense matrix rows differ in length");
        d.data.insert(d.data.end(), r.begin(), r.end());
    }
    detail::check_finite(d.data, "dense matrix");
    return LinearOperator(std::move(d), std::move(domain), std::move(codomain), status, "dense");
}

inline LinearOperator make_kernel(std::size_t rows, std::size_t cols, std::vector<double> samples, double h,
                                  NormSpec domain = NormSpec::lp(2.0), NormSpec codomain = NormSpec::lp(2.0)) {
    if (!(h > 0.0)) throw Error(Errc::invalid_argument, "operators", "kernel spacing h must be positive");
    if (samples.size() != rows * cols) throw Error(Errc::dimension_mismatch, "operators", "kernel sample count != rows*cols");
    detail::check_finite(samples, "kernel");
    // A square-integrable kernel gives a Hilbert-Schmidt, hence compact, operator.
    return LinearOperator(Kernel{rows, cols, std::move(samples), h}, std::move(domain), std::move(codomain),
                          CcStatus::completely_continuous, "kernel");
}

// Green's function of -d^2/dx^2 on (0,1) with Dirichlet ends, K(x,y) = min(x,y) - xy,
// sampled at the interior nodes x_i = i h, h = 1/(n+1).
inline LinearOperator make_green_kernel(std::size_t n) {
    if (n == 0) throw Error(Errc::invalid_argument, "operators", "kernel grid size must be positive");
    const double h = 1.0 / static_cast<double>(n + 1);
    std::vector<double> s(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double x = (i + 1) * h, y = (j + 1) * h;
            s[i * n + j] = std::min(x, y) - x * y;
        }
    }
    return make_kernel(n, n, std::move(s), h);
}

// Row-major CSV grid of kernel samples; every row must have the same length.
inline LinearOperator load_kernel_csv(const std::string& path, double h, NormSpec domain = NormSpec::lp(2.0),
                                      NormSpec codomain = NormSpec::lp(2.0)) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::config, "operators", "cannot open kernel CSV '" + path + "'");
    std::vector<double> samples;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t count = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                samples.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw Error(Errc::config, "operators",
                            "kernel CSV row " + std::to_string(rows + 1) + ": not a number: '" + cell + "'");
            }
            ++count;
        }
        if (rows == 0) cols = count;
        if (count != cols) {
            throw Error(Errc::config, "operators", "kernel CSV row " + std::to_string(rows + 1) + " has a different length");
        }
        ++rows;
    }
    if (rows == 0) throw Error(Errc::config, "operators", "kernel CSV is empty");
    return make_kernel(rows, cols, std::move(samples), h, std::move(domain), std::move(codomain));
}

// Discrete L^2 norm on d interior nodes: (h sum u_i^2)^{1/2}.
inline NormSpec discrete_l2(std::size_t d, double h) {
    NormSpec ns = NormSpec::weighted_lp(2.0, std::vector<double>(d, h));
    ns.label = "l2_h";
    return ns;
}

// Inclusion h^1 -> l^2_h on d interior nodes of spacing h (Dirichlet ends);
// coefficient action is the identity.
inline LinearOperator make_sobolev_embedding(std::size_t d, double h) {
    if (d < 2) throw Error(Errc::invalid_argument, "operators", "sobolev embedding needs d >= 2");
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(Errc::invalid_argument, "operators", "sobolev embedding needs h > 0");
    return LinearOperator(Diagonal{std::vector<double>(d, 1.0)}, NormSpec::sobolev_h1(h, d), discrete_l2(d, h),
                          CcStatus::completely_continuous, "sobolev_embedding");
}

// Identity coefficient map between two norms on X_d (e.g. l^2_h -> weighted l^2).
inline LinearOperator make_inclusion(std::size_t d, NormSpec domain, NormSpec codomain) {
    return LinearOperator(Diagonal{std::vector<double>(d, 1.0)}, std::move(domain), std::move(codomain),
                          CcStatus::unknown, "inclusion");
}

inline LinearOperator make_shift(std::size_t dim, NormSpec domain = NormSpec::lp(2.0),
                                 NormSpec codomain = NormSpec::lp(2.0)) {
    if (domain.kind == NormSpec::Kind::sobolev_h1 || codomain.kind == NormSpec::Kind::sobolev_h1) {
        throw Error(Errc::unsupported, "operators", "shift needs l^p-type domain and codomain");
    }
    return LinearOperator(Shift{dim}, std::move(domain), std::move(codomain), CcStatus::not_completely_continuous,
                          "shift");
}

inline double smallest_singular_value(const LinearOperator& T) {
    const Eigen::MatrixXd m = T.matrix();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    // Fewer rows than columns means a nontrivial kernel.
    if (m.rows() < m.cols()) return 0.0;
    return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

inline bool is_zero_operator(const LinearOperator& T) {
    return T.matrix().cwiseAbs().maxCoeff() == 0.0;
}

} // namespace ehrlab
