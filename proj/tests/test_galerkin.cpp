#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "flr/galerkin.hpp"
#include "flr/representer.hpp"
#include "flr/simulation.hpp"
#include "oracles.hpp"

using namespace flr;

namespace {

ModelRegularity quad_reg() {
    ModelRegularity r;
    r.gamma = WeightSpec::polynomial_increasing(1.0);
    r.upsilon = WeightSpec::polynomial_decreasing(1.0);
    return r;
}

CovarianceModel model(Index M, std::optional<Rotation> rot = std::nullopt) {
    CovarianceModel m;
    m.spectrum = WeightSpec::polynomial_decreasing(1.0);
    m.M_sim = M;
    m.rotation = std::move(rot);
    return m;
}

}  // namespace

TEST(GalerkinSolve, DiagonalIsTruncation) {
    const CovarianceModel cm = model(32);
    const Eigen::MatrixXd T = cm.matrix();
    const CoeffVector beta = synth_slope({2.0, 4}, WeightSpec::polynomial_increasing(1.0), 1.0, 32);
    const Eigen::VectorXd g = T * beta.head(32);
    for (Index m : {1, 5, 17, 32}) {
        const GalerkinSolution s = galerkin_solve(T, g, m);
        for (Index j = 0; j < m; ++j) EXPECT_NEAR(s.coeffs(j), beta.coeff(j + 1), 1e-12);
    }
}

TEST(GalerkinSolve, FirstDimension) {
    Eigen::MatrixXd T(2, 2);
    T << 2.0, 0.3, 0.3, 1.0;
    Eigen::VectorXd g(2);
    g << 5.0, 1.0;
    EXPECT_DOUBLE_EQ(galerkin_solve(T, g, 1).coeffs(0), 2.5);
}

TEST(GalerkinSolve, RejectsIndefinite) {
    Eigen::MatrixXd T(2, 2);
    T << 1.0, 2.0, 2.0, 1.0;
    EXPECT_THROW(galerkin_solve(T, Eigen::VectorXd::Ones(2), 2), DomainError);
}

TEST(GalerkinSolve, ResidualAtMachineScale) {
    const CovarianceModel cm = model(24, Rotation::random(10, 0.8, 2));
    const Eigen::MatrixXd T = cm.matrix();
    const CoeffVector beta = synth_slope({2.0, 1}, WeightSpec::polynomial_increasing(1.0), 1.0, 24);
    const Eigen::VectorXd g = T * beta.head(24);
    for (Index m = 1; m <= 24; ++m) EXPECT_LE(galerkin_solve(T, g, m).residual_norm, 1e-10 * g.head(m).norm());
}

TEST(GalerkinSolve, RotatedMatchesEnergyLeastSquares) {
    std::mt19937_64 gen(31);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 50; ++rep) {
        const Index M = 12;
        const CovarianceModel cm = model(M, Rotation::random(5, 1.0, gen()));
        const Eigen::MatrixXd T = cm.matrix();
        Eigen::VectorXd beta(M);
        for (Index j = 0; j < M; ++j) beta(j) = nd(gen);
        const Eigen::VectorXd g = T * beta;
        const Eigen::MatrixXd S = oracle::sqrtm(T);
        for (Index m = 1; m <= 6; ++m) {
            const Eigen::VectorXd ls = oracle::least_squares(S.leftCols(m), S * beta);
            const GalerkinSolution s = galerkin_solve(T, g, m);
            EXPECT_LT((s.coeffs - ls).norm(), 1e-8 * std::max(1.0, ls.norm()));
        }
    }
}

TEST(GalerkinSolve, EnergyOptimalAgainstCompetitors) {
    std::mt19937_64 gen(37);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 30; ++rep) {
        const Index M = 16;
        const CovarianceModel cm = model(M, Rotation::random(7, 1.0, gen()));
        const Eigen::MatrixXd T = cm.matrix();
        const CoeffVector beta = synth_slope({2.0, gen()}, WeightSpec::polynomial_increasing(1.0), 1.0, M);
        const Eigen::VectorXd g = T * beta.head(M);
        const Index m = 1 + static_cast<Index>(gen() % 8);
        const GalerkinSolution s = galerkin_solve(T, g, m);
        const double best = energy_residual_norm(T, g, s.coeffs);
        for (int c = 0; c < 100; ++c) {
            Eigen::VectorXd comp = s.coeffs;
            for (Index j = 0; j < m; ++j) comp(j) += 0.1 * nd(gen);
            EXPECT_LE(best, energy_residual_norm(T, g, comp) * (1 + 1e-12));
        }
    }
}

TEST(GalerkinSolve, PlainResidualCanBeatGalerkinUnderRotation) {
    // The plain-norm minimizer over Psi_m is a different vector once m splits a rotated pair.
    const Index M = 8;
    const CovarianceModel cm = model(M, Rotation{{0.9, 0.7, 0.4}});
    const Eigen::MatrixXd T = cm.matrix();
    Eigen::VectorXd beta = Eigen::VectorXd::Ones(M);
    const Eigen::VectorXd g = T * beta;
    const Index m = 2;  // splits the pair (2, 3)
    const GalerkinSolution s = galerkin_solve(T, g, m);
    const Eigen::VectorXd plain = oracle::least_squares(T.leftCols(m), g);
    EXPECT_LT(residual_norm(T, g, plain), residual_norm(T, g, s.coeffs));
    EXPECT_LT(energy_residual_norm(T, g, s.coeffs), energy_residual_norm(T, g, plain));
}

TEST(BiasReport, SupportedRepresenterHasNoBias) {
    const CovarianceModel cm = model(20);
    const Eigen::MatrixXd T = cm.matrix();
    const CoeffVector beta = synth_slope({2.0, 8}, WeightSpec::polynomial_increasing(1.0), 1.0, 20);
    const Eigen::VectorXd g = T * beta.head(20);
    const GalerkinSolution s = galerkin_solve(T, g, 6);
    const BiasReport r = bias_report(CoeffVector({0.3, -1.0, 0.2, 0.0, 0.5, 0.1}), beta, s, quad_reg());
    EXPECT_NEAR(r.lhs, 0.0, 1e-28);
    EXPECT_GE(r.rhs, 0.0);
}

TEST(BiasReport, SupportedSlopeHasNoBias) {
    const CovarianceModel cm = model(20);
    const Eigen::MatrixXd T = cm.matrix();
    const CoeffVector beta({0.5, -0.2, 0.1});
    const Eigen::VectorXd g = T * beta.head(20);
    const GalerkinSolution s = galerkin_solve(T, g, 5);
    const BiasReport r = bias_report(representer_coeffs(IntervalAverage{0.3}, 20), beta, s, quad_reg());
    EXPECT_NEAR(r.lhs, 0.0, 1e-28);
}

TEST(BiasReport, InequalityHoldsOnRotatedDraws) {
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> ang(0.0, 1.5), sm(1.6, 4.0), bb(0.05, 0.95);
    for (int rep = 0; rep < 200; ++rep) {
        const Index M = 32;
        CovarianceModel cm = model(M, Rotation::random(15, ang(gen), gen()));
        ModelRegularity reg = quad_reg();
        reg.d = link_constant(cm);
        const Eigen::MatrixXd T = cm.matrix();
        const CoeffVector beta = synth_slope({sm(gen), gen()}, reg.gamma, 1.0, M);
        const Eigen::VectorXd g = T * beta.head(M);
        const Index m = 1 + static_cast<Index>(gen() % 12);
        const CoeffVector h = representer_coeffs(IntervalAverage{bb(gen)}, M);
        const BiasReport r = bias_report(h, beta, galerkin_solve(T, g, m), reg);
        EXPECT_LE(r.lhs, r.rhs) << "rep " << rep;
    }
}
