#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

/// Plain weight formula, written out independently of the library.
struct Weight {
    bool polynomial = true;
    bool increasing = true;
    double exponent = 0.0;

    double operator()(std::int64_t j) const {
        const double x = static_cast<double>(j);
        const double s = increasing ? 1.0 : -1.0;
        if (polynomial) return std::pow(x, s * 2.0 * exponent);
        return std::exp(s * (std::pow(x, 2.0 * exponent) - 1.0));
    }
};

struct Balance {
    std::int64_t k = 0;
    double a = 0.0;
};

/// Exhaustive scan of min(r, 1/n)/max(r, 1/n) over m = 1..m_max; first maximizer wins.
inline Balance brute_kstar(const Weight& gamma, const Weight& upsilon, std::int64_t n, std::int64_t m_max) {
    const double inv_n = 1.0 / static_cast<double>(n);
    Balance best{1, -1.0};
    double best_obj = -1.0;
    for (std::int64_t m = 1; m <= m_max; ++m) {
        const double r = upsilon(m) / gamma(m);
        const double obj = std::min(r, inv_n) / std::max(r, inv_n);
        if (obj > best_obj) {
            best_obj = obj;
            best.k = m;
        }
    }
    best.a = std::max(upsilon(best.k) / gamma(best.k), inv_n);
    return best;
}

/// Scan window large enough to contain the crossing of r_m and 1/n with room to spare.
inline std::int64_t scan_window(const Weight& gamma, const Weight& upsilon, std::int64_t n) {
    const double inv_n = 1.0 / static_cast<double>(n);
    std::int64_t m = 1;
    while (upsilon(m) / gamma(m) >= inv_n) ++m;
    return 2 * m + 16;
}

/// Double loop over (n, m) for the infimum defining kappa.
inline std::pair<double, std::int64_t> brute_kappa(const Weight& gamma, const Weight& upsilon, std::int64_t n_max) {
    double best = std::numeric_limits<double>::infinity();
    std::int64_t arg = 1;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        const Balance b = brute_kstar(gamma, upsilon, n, scan_window(gamma, upsilon, n));
        const double r = upsilon(b.k) / gamma(b.k);
        const double term = std::min(r, 1.0 / static_cast<double>(n)) / b.a;
        if (term < best) {
            best = term;
            arg = n;
        }
    }
    return {best, arg};
}

/// Cyclic Jacobi eigenvalue iteration for symmetric matrices, ascending order.
inline Eigen::VectorXd jacobi_eigenvalues(Eigen::MatrixXd A) {
    const Eigen::Index n = A.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-30 * std::max(1.0, A.squaredNorm())) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (A(p, q) == 0.0) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Eigen::VectorXd ev = A.diagonal();
    std::sort(ev.data(), ev.data() + n);
    return ev;
}

inline double basis(std::int64_t j, double t) {
    if (j == 1) return 1.0;
    const double k = static_cast<double>(j / 2);
    const double arg = 2.0 * std::numbers::pi * k * t;
    return std::numbers::sqrt2 * ((j % 2 == 0) ? std::cos(arg) : std::sin(arg));
}

/// Adaptive Gauss-Kronrod integral of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}

/// Least-squares minimizer of ||A x - y||, via column-pivoted QR.
inline Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
    return A.colPivHouseholderQr().solve(y);
}

/// Symmetric square root through an eigendecomposition.
inline Eigen::MatrixXd sqrtm(const Eigen::MatrixXd& T) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

/// Sample mean and standard error.
inline std::pair<double, double> mean_se(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double m = 0.0;
    for (double v : x) m += v;
    m /= n;
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return {m, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace oracle
