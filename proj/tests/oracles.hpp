#pragma once

// Reference computations that share no code with the library: dense linear
// algebra, explicit enumeration and exhaustive grids.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// h^1 Gram matrix A = h I + K / h (K the Dirichlet second-difference matrix),
// assembled densely.
inline Eigen::MatrixXd h1_gram(std::size_t n, double h) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        A(i, i) = h + 2.0 / h;
        if (i + 1 < n) A(i, i + 1) = A(i + 1, i) = -1.0 / h;
    }
    return A;
}

inline double h1_norm(const std::vector<double>& u, double h) {
    const Eigen::Map<const Eigen::VectorXd> v(u.data(), static_cast<Eigen::Index>(u.size()));
    return std::sqrt(v.dot(h1_gram(u.size(), h) * v));
}

// sup <f, u> / ||u||_{h1} = sqrt(f^T A^{-1} f), by dense LU.
inline double h1_dual_norm(const std::vector<double>& f, double h) {
    const Eigen::Map<const Eigen::VectorXd> v(f.data(), static_cast<Eigen::Index>(f.size()));
    const Eigen::VectorXd x = h1_gram(f.size(), h).partialPivLu().solve(v);
    return std::sqrt(v.dot(x));
}

// Smallest eigenvalue of K / h^2 via the dense symmetric solver.
inline double dirichlet_lambda1(std::size_t n, double h) {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        K(i, i) = 2.0 / (h * h);
        if (i + 1 < n) K(i, i + 1) = K(i + 1, i) = -1.0 / (h * h);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    return es.eigenvalues()(0);
}

// The dyadic-rational family listed block by block with explicit nested
// loops: stage t, supports s = 1..min(t, dmax), level l = t - s, every nonzero
// tuple with entries a_i / 2^l, |a_i| <= 2^l, in mixed-radix order
// (coordinate 1 fastest, digit order 0, 1, -1, 2, -2, ...).
// Returns the first `count` raw (unscaled) coefficient vectors.
inline std::vector<std::vector<double>> dyadic_prefix(std::size_t count, std::size_t dmax) {
    std::vector<std::vector<double>> out;
    for (std::size_t t = 1; out.size() < count; ++t) {
        for (std::size_t s = 1; s <= std::min(t, dmax) && out.size() < count; ++s) {
            const int l = static_cast<int>(t - s);
            const std::int64_t R = std::int64_t{1} << l;
            std::vector<std::int64_t> order;  // 0, 1, -1, ..., R, -R
            order.push_back(0);
            for (std::int64_t a = 1; a <= R; ++a) {
                order.push_back(a);
                order.push_back(-a);
            }
            std::vector<std::size_t> idx(s, 0);
            while (out.size() < count) {
                // advance the odometer first, skipping the all-zero tuple
                std::size_t i = 0;
                while (i < s && ++idx[i] == order.size()) idx[i++] = 0;
                if (i == s) break;
                std::vector<double> v(s);
                for (std::size_t c = 0; c < s; ++c) v[c] = static_cast<double>(order[idx[c]]) / static_cast<double>(R);
                out.push_back(std::move(v));
            }
        }
    }
    return out;
}

// Fibonacci lattice of n nearly uniform points on S^2.
inline std::vector<std::array<double, 3>> fibonacci_sphere(std::size_t n) {
    std::vector<std::array<double, 3>> pts(n);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * static_cast<double>(i);
        pts[i] = {r * std::cos(phi), r * std::sin(phi), z};
    }
    return pts;
}

// max over the grid of f (f is 0-homogeneous, so the sphere suffices).
inline double sphere_max(std::size_t n, const std::function<double(const std::array<double, 3>&)>& f) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : fibonacci_sphere(n)) best = std::max(best, f(p));
    return best;
}

// Coordinate-family very weak norm in l^2, summed directly: sum_k 2^{-k} |u_k|.
inline double coordinate_very_weak(const std::vector<double>& u) {
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += std::ldexp(std::abs(u[k]), -static_cast<int>(k + 1));
    return s;
}

// Dense nullspace residual max_j |row_j . x| for the matrix [rows].
inline double max_pairing(const std::vector<std::vector<double>>& rows, const std::vector<double>& x) {
    double m = 0.0;
    for (const auto& r : rows) {
        double s = 0.0;
        for (std::size_t i = 0; i < std::min(r.size(), x.size()); ++i) s += r[i] * x[i];
        m = std::max(m, std::abs(s));
    }
    return m;
}

} // namespace oracle
