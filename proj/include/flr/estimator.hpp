#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Dense>

#include "flr/error.hpp"
#include "flr/function_space.hpp"
#include "flr/rates.hpp"
#include "flr/simulation.hpp"

namespace flr {

struct EstimatorConfig {
    Index m = 1;
    double alpha = 1.0;
    /// Smallest acceptable eigenvalue; default 1e-12 times the largest eigenvalue of [T_hat]_m.
    std::optional<double> pd_tolerance;

    void validate() const {
        if (m < 1) throw DomainError("estimator dimension m must be >= 1");
        if (!(alpha > 0.0)) throw DomainError("threshold coefficient alpha must be positive");
        if (pd_tolerance && !(*pd_tolerance >= 0.0)) throw DomainError("pd_tolerance must be >= 0");
    }
};

struct EstimateReport {
    double value = 0.0;
    bool thresholded = false;  // the zero branch fired
    bool singular = false;     // lambda_min <= pd_tolerance
    std::optional<double> spectral_norm_inv;
    Index m_used = 0;
    double alpha_used = 0.0;
};

/// [g_hat]_j = (1/n) sum_i Y_i [X_i]_j, j <= m.
inline Eigen::VectorXd empirical_g(const Dataset& data, Index m) {
    if (m < 1 || m > data.M())
        throw DomainError("m=" + std::to_string(m) + " outside 1..M=" + std::to_string(data.M()));
    return data.X.leftCols(m).transpose() * data.Y / static_cast<double>(data.n());
}

/// [T_hat]_{jk} = (1/n) sum_i [X_i]_j [X_i]_k, j,k <= m.
inline Eigen::MatrixXd empirical_cov(const Dataset& data, Index m) {
    if (m < 1 || m > data.M())
        throw DomainError("m=" + std::to_string(m) + " outside 1..M=" + std::to_string(data.M()));
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    T.selfadjointView<Eigen::Lower>().rankUpdate(data.X.leftCols(m).transpose(), 1.0 / static_cast<double>(data.n()));
    T.triangularView<Eigen::StrictlyUpper>() = T.transpose();
    return T;
}

/// ||mat^{-1}|| = 1/lambda_min for symmetric positive definite input; nullopt when lambda_min <= tol.
inline std::optional<double> inverse_spectral_norm(const Eigen::MatrixXd& mat, double pd_tolerance) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    if (!(lmin > pd_tolerance)) return std::nullopt;
    return 1.0 / lmin;
}

/**
 * Thresholded solve on given moment estimates:
 * h^t T^{-1} g if T is numerically non-singular and ||T^{-1}|| <= alpha n, else 0.
 */
inline EstimateReport thresholded_estimate(const Eigen::VectorXd& h_m, const Eigen::MatrixXd& T_m,
                                           const Eigen::VectorXd& g_m, Index n, const EstimatorConfig& cfg) {
    cfg.validate();
    EstimateReport rep;
    rep.m_used = cfg.m;
    rep.alpha_used = cfg.alpha;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T_m, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    const double lmax = es.eigenvalues()(cfg.m - 1);
    const double tol = cfg.pd_tolerance.value_or(1e-12 * std::abs(lmax));
    if (!(lmin > tol)) {
        rep.singular = true;
        rep.thresholded = true;
        return rep;
    }
    rep.spectral_norm_inv = 1.0 / lmin;
    if (*rep.spectral_norm_inv > cfg.alpha * static_cast<double>(n)) {
        rep.thresholded = true;
        return rep;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(T_m);
    if (llt.info() != Eigen::Success) {
        rep.singular = true;
        rep.thresholded = true;
        rep.spectral_norm_inv.reset();
        return rep;
    }
    rep.value = h_m.dot(llt.solve(g_m));
    return rep;
}

/// The thresholded plug-in estimate of <h, beta> from a sample.
inline EstimateReport plug_in_estimate(const CoeffVector& h, const Dataset& data, const EstimatorConfig& cfg) {
    cfg.validate();
    if (cfg.m > data.M())
        throw DomainError("estimator dimension m=" + std::to_string(cfg.m) + " exceeds data truncation M=" +
                          std::to_string(data.M()));
    return thresholded_estimate(h.head(cfg.m), empirical_cov(data, cfg.m), empirical_g(data, cfg.m), data.n(), cfg);
}

/// Threshold coefficient alpha = max(8 d^3 / (kappa gamma_{k*}), 1).
inline double optimal_threshold_alpha(double d, double kappa, double gamma_kstar) {
    if (!(d >= 1.0)) throw DomainError("d must be >= 1");
    if (!(kappa > 0.0 && kappa <= 1.0)) throw DomainError("kappa must lie in (0,1]");
    if (!(gamma_kstar >= 1.0)) throw DomainError("gamma_{k*} must be >= 1");
    return std::max(8.0 * d * d * d / (kappa * gamma_kstar), 1.0);
}

struct ConsistencyCeilings {
    double inv_n_upsilon_m = 0.1;
    double variance_proxy = 0.1;
};

/// Current values of the two sequences that must vanish for consistency. Advisory only.
struct ConsistencyReport {
    double inv_n_upsilon_m = 0.0;  // 1/(n upsilon_m)
    double variance_proxy = 0.0;   // n^{-1} sum_{j<=m} [h]_j^2 / upsilon_j
    bool pass = false;
};

inline ConsistencyReport consistency_diagnostics(const ModelRegularity& reg, const CoeffVector& h, Index n, Index m,
                                                 const ConsistencyCeilings& ceil = {}) {
    if (n < 1 || m < 1) throw DomainError("n and m must be >= 1");
    const double nd = static_cast<double>(n);
    ConsistencyReport r;
    r.inv_n_upsilon_m = std::exp(-reg.upsilon.log_at(m)) / nd;
    double acc = 0.0;
    for (Index j = 1; j <= m; ++j) {
        const double c = h.coeff(j);
        if (c != 0.0) acc += c * c * std::exp(-reg.upsilon.log_at(j));
    }
    r.variance_proxy = acc / nd;
    r.pass = r.inv_n_upsilon_m <= ceil.inv_n_upsilon_m && r.variance_proxy <= ceil.variance_proxy;
    return r;
}

}  // namespace flr
