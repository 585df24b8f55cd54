#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "flr/rates.hpp"
#include "oracles.hpp"

using namespace flr;

namespace {

ModelRegularity poly(double p, double a) {
    ModelRegularity r;
    r.gamma = WeightSpec::polynomial_increasing(p);
    r.upsilon = WeightSpec::polynomial_decreasing(a);
    return r;
}

oracle::Weight as_oracle(const WeightSpec& w) {
    return {w.family == Family::polynomial, w.direction == Direction::increasing, w.exponent};
}

double log2_slope(const std::vector<double>& n, const std::vector<double>& v) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        mx += std::log2(n[i]);
        my += std::log2(v[i]);
    }
    mx /= n.size();
    my /= n.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        sxx += (std::log2(n[i]) - mx) * (std::log2(n[i]) - mx);
        sxy += (std::log2(n[i]) - mx) * (std::log2(v[i]) - my);
    }
    return sxy / sxx;
}

}  // namespace

TEST(WeightAt, PolynomialIncreasingIsOneAtFirstIndex) {
    EXPECT_EQ(weight_at(WeightSpec::polynomial_increasing(1.0), 1), 1.0);
}

TEST(WeightAt, PolynomialDecreasingAtThree) {
    EXPECT_DOUBLE_EQ(weight_at(WeightSpec::polynomial_decreasing(1.0), 3), 1.0 / 9.0);
}

TEST(WeightAt, ExponentialDecreasingAtFour) {
    const double v = weight_at(WeightSpec::exponential_decreasing(0.5), 4);
    EXPECT_NEAR(v, std::exp(-3.0), 1e-15);
    EXPECT_NEAR(v, 0.049787, 1e-6);
}

TEST(WeightAt, EveryFamilyIsNormalizedAtOne) {
    for (double e : {0.25, 0.5, 1.0, 2.5}) {
        EXPECT_EQ(WeightSpec::polynomial_increasing(e).at(1), 1.0);
        EXPECT_EQ(WeightSpec::polynomial_decreasing(e).at(1), 1.0);
        EXPECT_EQ(WeightSpec::exponential_increasing(e).at(1), 1.0);
        EXPECT_EQ(WeightSpec::exponential_decreasing(e).at(1), 1.0);
    }
}

TEST(WeightAt, LogMatchesValue) {
    const WeightSpec specs[] = {WeightSpec::polynomial_increasing(1.3), WeightSpec::polynomial_decreasing(0.8),
                                WeightSpec::exponential_increasing(0.4), WeightSpec::exponential_decreasing(0.7, 2.0)};
    for (const auto& w : specs)
        for (Index j = 1; j <= 12; ++j) EXPECT_NEAR(std::exp(w.log_at(j)), w.at(j), 1e-12 * w.at(j));
}

TEST(WeightAt, RejectsIndexZero) { EXPECT_THROW(weight_at(WeightSpec::polynomial_increasing(1.0), 0), DomainError); }

TEST(WeightSpec, SummabilityFromFamily) {
    EXPECT_TRUE(WeightSpec::polynomial_decreasing(0.6).summable());
    EXPECT_FALSE(WeightSpec::polynomial_decreasing(0.5).summable());
    EXPECT_TRUE(WeightSpec::exponential_decreasing(0.1).summable());
    EXPECT_FALSE(WeightSpec::polynomial_increasing(0.0).summable());
}

TEST(ModelRegularity, RejectsNonSummableUpsilon) {
    EXPECT_THROW(poly(1.0, 0.5).validate(), DomainError);
    EXPECT_NO_THROW(poly(1.0, 0.75).validate());
}

TEST(ModelRegularity, RejectsUnboundedOmegaRatio) {
    ModelRegularity r = poly(1.0, 1.0);
    r.omega = WeightSpec::polynomial_decreasing(2.0);  // 1/(omega gamma) = j^2 unbounded
    EXPECT_THROW(r.validate(), DomainError);
    r.omega = WeightSpec::polynomial_decreasing(1.0);
    EXPECT_NO_THROW(r.validate());
}

TEST(ComputeKStar, QuarticRatioAtSixteen) {
    const KStar ks = compute_kstar(poly(1.0, 1.0), 16, 100);
    EXPECT_EQ(ks.k, 2);
    EXPECT_DOUBLE_EQ(ks.a, 1.0 / 16.0);
    const auto b = oracle::brute_kstar({true, true, 1.0}, {true, false, 1.0}, 16, 100);
    EXPECT_EQ(b.k, 2);
}

TEST(ComputeKStar, UnitSampleGivesFirstIndex) {
    const KStar ks = compute_kstar(poly(0.0, 1.0), 1, 1000);
    EXPECT_EQ(ks.k, 1);
    EXPECT_EQ(ks.a, 1.0);
}

TEST(ComputeKStar, ExponentialSmoothnessMatchesBruteForceAndOrder) {
    ModelRegularity r;
    r.gamma = WeightSpec::exponential_increasing(1.0);
    r.upsilon = WeightSpec::polynomial_decreasing(1.0);
    const Index n = 10'000;
    const KStar ks = compute_kstar(r, n);
    const auto b = oracle::brute_kstar(as_oracle(r.gamma), as_oracle(r.upsilon), n, 200);
    EXPECT_EQ(ks.k, b.k);
    EXPECT_DOUBLE_EQ(ks.a, b.a);
    // k* of order log(n [log n]^{-a/p})^{1/(2p)} with p = a = 1
    const double order = std::sqrt(std::log(n / std::log(static_cast<double>(n))));
    EXPECT_GE(static_cast<double>(ks.k), 0.5 * order);
    EXPECT_LE(static_cast<double>(ks.k), 2.0 * order);
}

TEST(ComputeKStar, ReportsUnbracketedMaximizer) {
    EXPECT_THROW(compute_kstar(poly(0.0, 0.6), 1'000'000, 10), BracketError);
}

TEST(ComputeKStar, TiesGoToSmallestIndex) {
    // r_m = m^{-4}, n = 4: objective is 1/4 at both m = 1 and m = 2.
    const ModelRegularity r = poly(1.0, 1.0);
    EXPECT_EQ(kstar_objective(r.ratio(1), 0.25), kstar_objective(r.ratio(2), 0.25));
    EXPECT_EQ(compute_kstar(r, 4).k, 1);
    EXPECT_EQ(oracle::brute_kstar({true, true, 1.0}, {true, false, 1.0}, 4, 50).k, 1);
}

TEST(ComputeKStar, RateDriverInvariants) {
    const ModelRegularity r = poly(1.0, 1.0);
    for (Index n : {1, 3, 17, 100, 999, 4096, 100000}) {
        const KStar ks = compute_kstar(r, n);
        EXPECT_GE(ks.a * static_cast<double>(n), 1.0 - 1e-15);
        EXPECT_GE(ks.a, r.ratio(ks.k));
    }
}

TEST(ComputeKStar, AgreesWithExhaustiveScanOnRandomSpecs) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> pe(0.0, 2.5), ae(0.55, 2.5), ee(0.15, 1.0);
    for (int spec = 0; spec < 10; ++spec) {
        ModelRegularity r;
        r.gamma = (gen() & 1) ? WeightSpec::polynomial_increasing(pe(gen)) : WeightSpec::exponential_increasing(ee(gen));
        r.upsilon =
            (gen() & 1) ? WeightSpec::polynomial_decreasing(ae(gen)) : WeightSpec::exponential_decreasing(ee(gen));
        for (Index n = 1; n <= 300; ++n) {
            const auto b = oracle::brute_kstar(as_oracle(r.gamma), as_oracle(r.upsilon), n,
                                               oracle::scan_window(as_oracle(r.gamma), as_oracle(r.upsilon), n));
            const KStar ks = compute_kstar(r, n);
            ASSERT_EQ(ks.k, b.k) << "spec " << spec << " n " << n;
            ASSERT_EQ(ks.a, b.a);
        }
    }
}

TEST(ComputeKappa, SinglePointGridIsOne) {
    EXPECT_EQ(compute_kappa(poly(1.0, 1.0), 1).value, 1.0);
    EXPECT_EQ(compute_kappa(poly(3.0, 0.7), 1).value, 1.0);
}

TEST(ComputeKappa, QuadraticPairInUnitInterval) {
    const ModelRegularity r = poly(1.0, 1.0);
    const KappaResult k = compute_kappa(r, 1000);
    EXPECT_GT(k.value, 0.0);
    EXPECT_LE(k.value, 1.0);
    // n = 16 and n = 81 have r_{k*} = 1/n exactly, so the per-n term is 1.
    for (Index n : {16, 81, 256}) {
        const KStar ks = compute_kstar(r, n);
        EXPECT_EQ(r.ratio(ks.k), 1.0 / static_cast<double>(n));
        EXPECT_EQ(std::min(r.ratio(ks.k), 1.0 / static_cast<double>(n)) / ks.a, 1.0);
    }
}

TEST(ComputeKappa, QuarticGammaMatchesDoubleLoop) {
    const ModelRegularity r = poly(2.0, 1.0);
    const KappaResult k = compute_kappa(r, 500);
    const auto [v, arg] = oracle::brute_kappa({true, true, 2.0}, {true, false, 1.0}, 500);
    EXPECT_EQ(k.value, v);
    EXPECT_EQ(k.argmin_n, arg);
    EXPECT_DOUBLE_EQ(k.value, 0.125);
}

TEST(ComputeDeltaStar, FirstCoordinateRepresenterGivesAStar) {
    const CoeffVector h({1.0});
    for (Index n : {1, 10, 1000}) {
        const ModelRegularity r = poly(1.0, 1.0);
        const DeltaStar d = compute_delta_star(h, r, n);
        EXPECT_DOUBLE_EQ(d.value, compute_kstar(r, n).a);
        EXPECT_EQ(d.tail, 0.0);
    }
}

TEST(ComputeDeltaStar, PointEvaluationNeedsSmoothSlope) {
    const RepresenterSpec pe = PointEval{0.3};
    EXPECT_THROW(compute_delta_star(pe, poly(0.5, 1.0), 100), TailDivergenceError);
    EXPECT_THROW(compute_delta_star(pe, poly(0.25, 1.0), 100), TailDivergenceError);
    EXPECT_NO_THROW(compute_delta_star(pe, poly(1.0, 1.0), 100));
}

TEST(ComputeDeltaStar, TailAgreesWithLongSummation) {
    const RepresenterSpec h = IntervalAverage{0.5};
    const ModelRegularity r = poly(1.0, 1.0);
    for (Index n : {128, 2048, 16384}) {
        const DeltaStar d = compute_delta_star(h, r, n);
        long double tail = 0.0L;
        for (Index j = 10'000'000; j > d.kstar.k; --j) {
            const long double c = representer_coeff(h, j);
            tail += c * c / (static_cast<long double>(j) * j);
        }
        EXPECT_NEAR(d.tail, static_cast<double>(tail), 1e-6 * static_cast<double>(tail));
        EXPECT_FALSE(d.tail_diag.hit_cap);
    }
}

TEST(ComputeDeltaStar, StaircaseKeepsSingleRatiosOffBeforeTwoToThe16) {
    // k* moves in unit steps and every other coefficient of the b = 1/2 indicator vanishes,
    // so single doubling ratios on 2^7..2^15 swing well beyond 10% of 2^{-3/4}.
    const RepresenterSpec h = IntervalAverage{0.5};
    const ModelRegularity r = poly(1.0, 1.0);
    const Index n = 1 << 14;
    const double at_14 = compute_delta_star(h, r, n).value / compute_delta_star(h, r, n / 2).value;
    EXPECT_GT(std::abs(at_14 / std::pow(2.0, -0.75) - 1.0), 0.1);
}

TEST(ComputeDeltaStar, IntervalAverageDoublingRatioFromTwoToThe16) {
    const RepresenterSpec h = IntervalAverage{0.5};
    const ModelRegularity r = poly(1.0, 1.0);
    for (Index n = 1 << 16; n <= 1 << 19; n *= 2) {
        const double ratio = compute_delta_star(h, r, 2 * n).value / compute_delta_star(h, r, n).value;
        EXPECT_NEAR(ratio / std::pow(2.0, -0.75), 1.0, 0.1) << "n=" << n;
    }
}

TEST(ComputeDeltaStar, LogRatioConvergesToCatalogExponent) {
    const RepresenterSpec h = IntervalAverage{0.5};
    const ModelRegularity r = poly(1.0, 1.0);
    const double n = 65536.0;
    const double lr = std::log2(compute_delta_star(h, r, 2 * static_cast<Index>(n)).value /
                                compute_delta_star(h, r, static_cast<Index>(n)).value);
    const double expo = rate_exponent_catalog(CaseTag::ppp, 1.0, 1.0, 1.0).delta.n_power;
    EXPECT_NEAR(lr, expo, 0.05);
}

TEST(ComputeDeltaStar, NonIncreasingAlongGrid) {
    const ModelRegularity r = poly(1.0, 1.0);
    for (const RepresenterSpec& h : {RepresenterSpec{IntervalAverage{0.3}}, RepresenterSpec{PointEval{0.7}},
                                     RepresenterSpec{SyntheticRepresenter{WeightSpec::polynomial_decreasing(2.0)}}}) {
        double prev = std::numeric_limits<double>::infinity();
        for (Index n = 1; n <= 1 << 16; n *= 2) {
            const double d = compute_delta_star(h, r, n).value;
            EXPECT_GE(d, 0.0);
            EXPECT_LE(d, prev * (1 + 1e-12));
            prev = d;
        }
    }
}

TEST(ComputeDeltaStarUpper, InverseCovarianceOmegaGivesAStar) {
    ModelRegularity r = poly(1.0, 1.0);
    r.omega = WeightSpec::polynomial_increasing(1.0);
    for (Index n : {2, 50, 5000}) EXPECT_DOUBLE_EQ(compute_Delta_star(r, n), compute_kstar(r, n).a);
}

TEST(ComputeDeltaStarUpper, QuadraticCaseHalvesPerDoubling) {
    ModelRegularity r = poly(1.0, 1.0);
    r.omega = WeightSpec::polynomial_increasing(1.0);
    std::vector<double> ns, ds;
    for (int e = 8; e <= 24; ++e) {
        ns.push_back(std::ldexp(1.0, e));
        ds.push_back(compute_Delta_star(r, static_cast<Index>(ns.back())));
    }
    EXPECT_NEAR(log2_slope(ns, ds), -1.0, 0.1);
    EXPECT_EQ(rate_exponent_catalog(CaseTag::ppp, 1, 1, 1).Delta.n_power, -1.0);
}

TEST(ComputeDeltaStarUpper, ForcedFirstDimension) {
    ModelRegularity r = poly(1.0, 1.0);
    r.omega = WeightSpec::polynomial_increasing(1.0);
    EXPECT_EQ(compute_Delta_star(r, 1, 1), 1.0);
    const KStar forced{1, std::max(r.ratio(1), 1.0 / 50.0)};
    EXPECT_EQ(compute_Delta_star(r, forced), forced.a);
}

TEST(ComputeDeltaStarUpper, RequiresOmega) {
    try {
        compute_Delta_star(poly(1, 1), 10);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("omega"), std::string::npos);
    }
}

TEST(RateCatalog, QuadraticInterval) { EXPECT_EQ(rate_exponent_catalog(CaseTag::ppp, 1, 1, 1).delta.text(), "n^{-3/4}"); }

TEST(RateCatalog, BoundaryCarriesLogFactor) {
    EXPECT_EQ(rate_exponent_catalog(CaseTag::ppp, 1, 1, 1.5).delta.text(), "n^{-1}*log(n)");
}

TEST(RateCatalog, ParametricBranches) {
    EXPECT_EQ(rate_exponent_catalog(CaseTag::ppp, 1, 1, 2).delta.text(), "n^{-1}");
    for (double p : {0.0, 1.0, 3.0})
        for (double a : {0.6, 2.0})
            for (double s : {0.1, 1.0, 5.0}) EXPECT_EQ(rate_exponent_catalog(CaseTag::ppe, p, a, s).delta.text(), "n^{-1}");
}

TEST(RateCatalog, LogarithmicCases) {
    const auto pep = rate_exponent_catalog(CaseTag::pep, 1, 1, 1);
    EXPECT_EQ(pep.delta.n_power, 0.0);
    EXPECT_DOUBLE_EQ(pep.delta.log_power, -1.5);
    EXPECT_EQ(pep.delta.text(), "[log(n)]^{-3/2}");
    const auto epp_below = rate_exponent_catalog(CaseTag::epp, 1, 1, 0);
    EXPECT_EQ(epp_below.delta.text(), "n^{-1}*[log(n)]^{3/2}");
    EXPECT_EQ(rate_exponent_catalog(CaseTag::epp, 1, 1, 1.5).delta.text(), "n^{-1}*log(log(n))");
    EXPECT_EQ(rate_exponent_catalog(CaseTag::epp, 1, 1, 3).delta.text(), "n^{-1}");
}

TEST(RateCatalog, SideConditionNamesInequality) {
    try {
        rate_exponent_catalog(CaseTag::ppp, 1, 0.5, 1);
        FAIL();
    } catch (const SideConditionError& e) {
        EXPECT_NE(std::string(e.what()).find("a > 1/2"), std::string::npos);
    }
    EXPECT_THROW(rate_exponent_catalog(CaseTag::ppp, 0, 1, 0.5), SideConditionError);
    EXPECT_THROW(rate_exponent_catalog(CaseTag::epp, 0, 1, 1), SideConditionError);
    EXPECT_THROW(rate_exponent_catalog(CaseTag::ppe, 1, 1, 0), SideConditionError);
}

TEST(RateCatalog, InfersCaseFromFamilies) {
    const auto P = WeightSpec::polynomial_increasing(1), E = WeightSpec::exponential_increasing(1);
    const auto p = WeightSpec::polynomial_decreasing(1), e = WeightSpec::exponential_decreasing(1);
    EXPECT_EQ(infer_case(P, p, p), CaseTag::ppp);
    EXPECT_EQ(infer_case(P, e, p), CaseTag::pep);
    EXPECT_EQ(infer_case(E, p, p), CaseTag::epp);
    EXPECT_EQ(infer_case(P, p, e), CaseTag::ppe);
    EXPECT_FALSE(infer_case(E, e, p).has_value());
}

TEST(RatesProfile, CollectsEverything) {
    ModelRegularity r = poly(1.0, 1.0);
    r.omega = WeightSpec::polynomial_increasing(1.0);
    const KappaResult kappa = compute_kappa(r, 1000);
    RatesOptions opt;
    opt.with_Delta_star = true;
    const RatesProfile p = rates_profile(r, IntervalAverage{0.5}, 1024, kappa, opt);
    EXPECT_EQ(p.k_star, compute_kstar(r, 1024).k);
    ASSERT_TRUE(p.case_tag.has_value());
    EXPECT_EQ(*p.case_tag, CaseTag::ppp);
    ASSERT_TRUE(p.delta_order.has_value());
    EXPECT_EQ(p.delta_order->text(), "n^{-3/4}");
    ASSERT_TRUE(p.Delta_star.has_value());
    ASSERT_TRUE(p.Delta_order.has_value());
    EXPECT_EQ(p.Delta_order->text(), "n^{-1}");
    EXPECT_GT(p.kappa.value, 0.0);
}
