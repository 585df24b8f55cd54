#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "flr/error.hpp"
#include "flr/function_space.hpp"
#include "flr/rates.hpp"

namespace flr {

/// Population Galerkin solution [beta_m] = [T]_m^{-1} [g]_m.
struct GalerkinSolution {
    Index m = 0;
    Eigen::VectorXd coeffs;
    double residual_norm = 0.0;  // ||[T]_m [beta_m] - [g]_m||
};

/// Solves [T]_m b = [g]_m using the leading m x m block of T; rejects non-SPD blocks.
inline GalerkinSolution galerkin_solve(const Eigen::MatrixXd& T, const Eigen::VectorXd& g, Index m) {
    if (m < 1 || m > T.rows() || T.rows() != T.cols() || g.size() < m)
        throw DomainError("galerkin_solve: inconsistent dimensions");
    const Eigen::MatrixXd Tm = T.topLeftCorner(m, m);
    const Eigen::LLT<Eigen::MatrixXd> llt(Tm);
    if (llt.info() != Eigen::Success) throw DomainError("galerkin_solve: [T]_m is not positive definite");
    GalerkinSolution sol;
    sol.m = m;
    sol.coeffs = llt.solve(g.head(m));
    sol.residual_norm = (Tm * sol.coeffs - g.head(m)).norm();
    return sol;
}

/// Zero-padded copy of an element of Psi_m in the full coordinate space.
inline Eigen::VectorXd embed(const Eigen::VectorXd& coeffs_m, Index M) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(M);
    out.head(coeffs_m.size()) = coeffs_m;
    return out;
}

/// ||g - T b|| for b in Psi_m (zero padded).
inline double residual_norm(const Eigen::MatrixXd& T, const Eigen::VectorXd& g, const Eigen::VectorXd& b_m) {
    return (g - T * embed(b_m, T.rows())).norm();
}

/// ||g - T b||_{T^{-1}} = ||T^{1/2}(beta - b)||, the norm in which the Galerkin solution is optimal.
inline double energy_residual_norm(const Eigen::MatrixXd& T, const Eigen::VectorXd& g, const Eigen::VectorXd& b_m) {
    const Eigen::VectorXd r = g - T * embed(b_m, T.rows());
    const Eigen::LLT<Eigen::MatrixXd> llt(T);
    if (llt.info() != Eigen::Success) throw DomainError("energy_residual_norm: T is not positive definite");
    return std::sqrt(std::max(0.0, r.dot(llt.solve(r))));
}

/// Both sides of |<h, beta - beta_m>|^2 <= 2||beta||_gamma^2 {tail + 2(1+d^4)(ups_m/gam_m) head}.
struct BiasReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double tail = 0.0;  // sum_{j>m} [h]_j^2 / gamma_j
    double head = 0.0;  // sum_{j<=m} [h]_j^2 / upsilon_j
    double beta_norm_sq = 0.0;
    TailSum tail_diag;
};

inline BiasReport bias_report(const CoefficientSource& h, const CoeffVector& beta, const GalerkinSolution& beta_m,
                              const ModelRegularity& reg, const TailSumOptions& opt = {}) {
    const Index m = beta_m.m;
    if (beta_m.coeffs.size() != m) throw DomainError("bias_report: inconsistent Galerkin solution");
    const Index M = std::max(beta.size(), m);
    double diff = 0.0;
    for (Index j = 1; j <= M; ++j) {
        const double bm = j <= m ? beta_m.coeffs(j - 1) : 0.0;
        diff += h(j) * (beta.coeff(j) - bm);
    }
    BiasReport r;
    r.lhs = diff * diff;
    r.tail_diag = tail_sum_over_weights(h, reg.gamma, m, opt);
    r.tail = r.tail_diag.value;
    for (Index j = 1; j <= m; ++j) {
        const double c = h(j);
        if (c != 0.0) r.head += c * c * std::exp(-reg.upsilon.log_at(j));
    }
    r.beta_norm_sq = weighted_norm_sq(beta, reg.gamma);
    const double d4 = std::pow(reg.d, 4);
    r.rhs = 2.0 * r.beta_norm_sq * (r.tail + 2.0 * (1.0 + d4) * reg.ratio(m) * r.head);
    return r;
}

inline BiasReport bias_report(const CoeffVector& h, const CoeffVector& beta, const GalerkinSolution& beta_m,
                              const ModelRegularity& reg, const TailSumOptions& opt = {}) {
    return bias_report(CoefficientSource::from(h), beta, beta_m, reg, opt);
}

}  // namespace flr
