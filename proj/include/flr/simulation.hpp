#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flr/error.hpp"
#include "flr/function_space.hpp"
#include "flr/random.hpp"
#include "flr/weights.hpp"

namespace flr {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Givens rotations on the coefficient pairs (2k, 2k+1), k = 1..angles.size().
struct Rotation {
    std::vector<double> angles;

    static Rotation random(Index pairs, double max_angle, std::uint64_t seed) {
        RngStream rng(seed, 0xFFFFFFFEu, 0);
        Rotation r;
        r.angles.resize(static_cast<std::size_t>(pairs));
        for (double& a : r.angles) a = max_angle * (2.0 * rng.uniform() - 1.0);
        return r;
    }

    /// x <- Q x
    void apply(std::span<double> x) const {
        for (std::size_t k = 1; k <= angles.size(); ++k) {
            const std::size_t i = 2 * k - 1;  // 0-based position of coefficient 2k
            if (i + 1 >= x.size()) break;
            const double c = std::cos(angles[k - 1]);
            const double s = std::sin(angles[k - 1]);
            const double xi = x[i];
            const double xj = x[i + 1];
            x[i] = c * xi - s * xj;
            x[i + 1] = s * xi + c * xj;
        }
    }
};

/**
 * Covariance operator of the regressor, truncated to M_sim coefficients:
 * eigenvalues lambda_j = spectrum_j on the trigonometric basis, optionally
 * mixed by a block rotation, [T] = Q diag(lambda) Q^t.
 */
struct CovarianceModel {
    WeightSpec spectrum = WeightSpec::polynomial_decreasing(1.0);
    std::optional<Rotation> rotation;
    Index M_sim = 64;

    void validate() const {
        spectrum.validate();
        if (spectrum.direction != Direction::decreasing || !spectrum.summable())
            throw DomainError("covariance spectrum must be decreasing and summable (nuclear operator)");
        if (M_sim < 1) throw DomainError("M_sim must be >= 1");
        if (rotation && static_cast<Index>(2 * rotation->angles.size() + 1) > M_sim)
            throw DomainError("rotation pairs exceed M_sim");
    }

    bool diagonal() const {
        if (!rotation) return true;
        for (double a : rotation->angles)
            if (a != 0.0) return false;
        return true;
    }

    Eigen::VectorXd eigenvalues() const {
        Eigen::VectorXd lam(M_sim);
        for (Index j = 1; j <= M_sim; ++j) lam(j - 1) = spectrum.at(j);
        return lam;
    }

    /// [T]_{M_sim}
    Eigen::MatrixXd matrix() const {
        const Eigen::VectorXd lam = eigenvalues();
        Eigen::MatrixXd T = lam.asDiagonal();
        if (diagonal()) return T;
        Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(M_sim, M_sim);
        for (Index c = 0; c < M_sim; ++c) {
            std::span<double> col(Q.col(c).data(), static_cast<std::size_t>(M_sim));
            rotation->apply(col);
        }
        T = Q * lam.asDiagonal() * Q.transpose();
        return 0.5 * (T + T.transpose());
    }

    /// tr(T) over the truncated coordinates.
    double trace() const { return eigenvalues().sum(); }

    std::string describe() const {
        std::string s = std::string(to_string(spectrum.family)) + "(a=" + std::to_string(spectrum.exponent) +
                        "),M=" + std::to_string(M_sim);
        if (!diagonal()) s += ",rotated";
        return s;
    }
};

/**
 * Link constant d >= 1 with ||f||_{ups^2}/d^2 <= ||T f||^2 <= d^2 ||f||_{ups^2}^2,
 * from the extreme singular values of [T] diag(upsilon)^{-1}.  Exactly 1 for
 * the diagonal model.
 */
inline double link_constant(const CovarianceModel& model, const WeightSpec& upsilon) {
    if (model.diagonal() && model.spectrum == upsilon) return 1.0;
    const Eigen::MatrixXd T = model.matrix();
    Eigen::VectorXd inv_ups(model.M_sim);
    for (Index j = 1; j <= model.M_sim; ++j) inv_ups(j - 1) = 1.0 / upsilon.at(j);
    const Eigen::MatrixXd A = T * inv_ups.asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    return std::max({1.0, smax, 1.0 / smin});
}

inline double link_constant(const CovarianceModel& model) { return link_constant(model, model.spectrum); }

/// Default truncation level max(4 k, 64).
inline Index default_truncation(Index k) { return std::max<Index>(4 * k, 64); }

struct DatasetMeta {
    std::uint64_t seed = 0;
    std::uint32_t experiment = 0;
    std::uint32_t replication = 0;
    double sigma = 1.0;
    std::string beta_id;
    std::string covariance_id;
};

/// n observations (Y_i, [X_i]_1..M); rows of X are observations.
struct Dataset {
    RowMatrix X;
    Eigen::VectorXd Y;
    DatasetMeta meta;

    Index n() const { return X.rows(); }
    Index M() const { return X.cols(); }

    void validate() const {
        if (Y.size() != X.rows()) throw DomainError("dataset: Y length differs from X rows");
        if (!Y.allFinite()) throw DomainError("dataset: non-finite response");
    }
};

namespace detail {

inline void draw_regressor(const CovarianceModel& model, const Eigen::VectorXd& sqrt_lam, RngStream& rng,
                           std::span<double> out) {
    for (Index j = 0; j < model.M_sim; ++j) out[static_cast<std::size_t>(j)] = sqrt_lam(j) * rng.normal();
    if (model.rotation) model.rotation->apply(out);
}

}  // namespace detail

/// [X]_j = sqrt(lambda_j) xi_j with xi_j iid N(0,1), then rotated.
inline CoeffVector sample_regressor(const CovarianceModel& model, RngStream& rng) {
    const Eigen::VectorXd sqrt_lam = model.eigenvalues().cwiseSqrt();
    std::vector<double> x(static_cast<std::size_t>(model.M_sim));
    detail::draw_regressor(model, sqrt_lam, rng, x);
    return CoeffVector(std::move(x));
}

/**
 * Y_i = <beta, X_i> + sigma eps_i, eps_i iid N(0,1) independent of X_i.
 * Each observation consumes M_sim normals for X_i followed by one for eps_i.
 */
inline Dataset sample_dataset(const CoeffVector& beta, double sigma, const CovarianceModel& model, Index n,
                              RngStream& rng, std::string beta_id = "custom") {
    model.validate();
    if (n < 1) throw DomainError("sample size n must be >= 1");
    if (beta.size() > model.M_sim) throw DomainError("beta is longer than M_sim");
    if (!(sigma >= 0.0)) throw DomainError("sigma must be >= 0");

    Dataset ds;
    ds.meta = {rng.seed(), rng.experiment(), rng.replication(), sigma, std::move(beta_id), model.describe()};
    ds.X.resize(n, model.M_sim);
    ds.Y.resize(n);
    const Eigen::VectorXd sqrt_lam = model.eigenvalues().cwiseSqrt();
    const Eigen::VectorXd b = beta.head(model.M_sim);
    for (Index i = 0; i < n; ++i) {
        std::span<double> row(ds.X.row(i).data(), static_cast<std::size_t>(model.M_sim));
        detail::draw_regressor(model, sqrt_lam, rng, row);
        const double eps = rng.normal();
        ds.Y(i) = ds.X.row(i).dot(b) + sigma * eps;
    }
    return ds;
}

}  // namespace flr
