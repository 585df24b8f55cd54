#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "flr/error.hpp"
#include "flr/estimator.hpp"
#include "flr/galerkin.hpp"
#include "flr/rate_catalog.hpp"
#include "flr/rates.hpp"
#include "flr/representer.hpp"
#include "flr/simulation.hpp"

namespace flr {

/// Minimax lower bound (kappa/4) min(sigma^2/(2d), rho) delta*.
inline double lower_bound_value(double sigma, double d, double rho, double kappa, double delta_star) {
    if (!(kappa > 0.0 && kappa <= 1.0)) throw DomainError("kappa must lie in (0,1]");
    if (!(d >= 1.0) || !(rho >= 0.0) || !(delta_star >= 0.0)) throw DomainError("lower_bound_value: invalid input");
    return kappa / 4.0 * std::min(sigma * sigma / (2.0 * d), rho) * delta_star;
}

/// Bound over the representer class F_omega^tau: (kappa tau/4) min(sigma^2/(2d), rho) Delta*.
inline double representer_class_bound(double kappa, double tau, double sigma, double d, double rho,
                                      double Delta_star) {
    if (!(tau > 0.0)) throw DomainError("tau must be positive");
    return tau * lower_bound_value(sigma, d, rho, kappa, Delta_star);
}

/// Hardest representer in F_omega^tau: (tau/omega_{j*})^{1/2} psi_{j*}, j* = argmax_{j<=k*} 1/(omega_j upsilon_j).
inline CoeffVector worst_case_representer(const ModelRegularity& reg, const KStar& ks) {
    if (!reg.omega || !reg.tau) throw DomainError("worst_case_representer needs omega and tau");
    Index jstar = 1;
    double best = -std::numeric_limits<double>::infinity();
    for (Index j = 1; j <= ks.k; ++j) {
        const double v = -(reg.upsilon.log_at(j) + reg.omega->log_at(j));
        if (v > best) {
            best = v;
            jstar = j;
        }
    }
    std::vector<double> c(static_cast<std::size_t>(jstar), 0.0);
    c.back() = std::sqrt(*reg.tau / reg.omega->at(jstar));
    return CoeffVector(std::move(c));
}

enum class AlphaPolicyKind { optimal, fixed, unit };

struct AlphaPolicy {
    AlphaPolicyKind kind = AlphaPolicyKind::optimal;
    double value = 1.0;  // used by `fixed`
};

struct StudyConfig {
    ModelRegularity reg;
    RepresenterSpec representer = IntervalAverage{0.5};
    SlopeSpec beta_spec;
    double sigma = 1.0;
    std::vector<Index> n_grid;
    Index replications = 500;
    std::uint64_t master_seed = 1;
    std::uint32_t experiment_id = 1;
    AlphaPolicy alpha_policy;
    std::optional<Rotation> rotation;
    std::optional<Index> M_sim;  // default max(4 k*(max n), 64)
    Index m_max = 1'000'000;
    Index kappa_n_max = 10'000;
    double max_threshold_rate = 0.10;  // grid points above this are left out of the slope fit

    void validate() const {
        reg.validate();
        flr::validate(representer);
        if (!(sigma >= 0.0)) throw DomainError("sigma must be >= 0");
        if (n_grid.empty()) throw DomainError("n_grid must not be empty");
        for (std::size_t i = 0; i < n_grid.size(); ++i) {
            if (n_grid[i] < 1) throw DomainError("n_grid entries must be >= 1");
            if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw DomainError("n_grid must be strictly increasing");
        }
        if (n_grid.size() > 256) throw DomainError("n_grid has more than 256 points");
        if (replications < 2) throw DomainError("replications must be >= 2");
        if (alpha_policy.kind == AlphaPolicyKind::fixed && !(alpha_policy.value > 0.0))
            throw DomainError("fixed alpha must be positive");
    }
};

/// Everything a Monte Carlo run needs, resolved once from a StudyConfig.
struct StudyInstance {
    ModelRegularity reg;  // reg.d is the link constant of `model`
    CovarianceModel model;
    CoeffVector beta;
    CoeffVector h;
    CoefficientSource h_source{[](Index) { return 0.0; }, std::nullopt, Index{0}};
    double truth = 0.0;            // <h, beta> over the M_sim coordinates
    double truth_tail_bound = 0.0; // worst-case |<h, beta>| contribution beyond M_sim on the ellipsoid
    double sigma = 1.0;
    KappaResult kappa;
    AlphaPolicy alpha_policy;
    std::optional<Index> fixed_m;
    Index m_max = 1'000'000;
    Index replications = 500;
    std::uint64_t master_seed = 1;
};

inline StudyInstance prepare_study(const StudyConfig& cfg) {
    cfg.validate();
    StudyInstance inst;
    inst.reg = cfg.reg;
    const KStar top = compute_kstar(cfg.reg, cfg.n_grid.back(), cfg.m_max);
    inst.model.spectrum = cfg.reg.upsilon;
    inst.model.rotation = cfg.rotation;
    inst.model.M_sim = cfg.M_sim.value_or(default_truncation(top.k));
    inst.model.validate();
    if (inst.model.M_sim < top.k) throw DomainError("M_sim is smaller than k* at the largest n");
    inst.reg.d = link_constant(inst.model, cfg.reg.upsilon);

    inst.beta = synth_slope(cfg.beta_spec, cfg.reg.gamma, cfg.reg.rho, inst.model.M_sim);
    inst.h = representer_coeffs(cfg.representer, inst.model.M_sim);
    inst.h_source = representer_source(cfg.representer);
    inst.truth = linear_functional(inst.h, inst.beta);
    inst.truth_tail_bound =
        std::sqrt(tail_sum_over_weights(inst.h_source, cfg.reg.gamma, inst.model.M_sim).value * cfg.reg.rho);
    inst.sigma = cfg.sigma;
    inst.kappa = compute_kappa(cfg.reg, cfg.kappa_n_max, cfg.m_max);
    inst.alpha_policy = cfg.alpha_policy;
    inst.m_max = cfg.m_max;
    inst.replications = cfg.replications;
    inst.master_seed = cfg.master_seed;
    return inst;
}

/// Runs body(i) for i in [0, count) on `workers` threads; each index runs exactly once.
template <class Body>
void parallel_for(Index count, unsigned workers, Body&& body) {
    workers = std::max(1u, workers);
    if (workers == 1 || count <= 1) {
        for (Index i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<Index> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (Index i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

struct MseEstimate {
    Index n = 0;
    Index m = 0;
    double alpha = 1.0;
    double mse = 0.0;
    double se = 0.0;
    double threshold_rate = 0.0;
    double singular_rate = 0.0;
};

inline double resolve_alpha(const StudyInstance& inst, const KStar& ks) {
    switch (inst.alpha_policy.kind) {
        case AlphaPolicyKind::optimal:
            return optimal_threshold_alpha(inst.reg.d, inst.kappa.value, inst.reg.gamma.at(ks.k));
        case AlphaPolicyKind::fixed: return inst.alpha_policy.value;
        case AlphaPolicyKind::unit: return 1.0;
    }
    return 1.0;
}

/**
 * Monte Carlo risk at sample size n: replication r draws a fresh dataset
 * from stream (master_seed, stream_id, r), estimates with m = k*(n) (or the
 * fixed m) and records the squared error against the exact functional.
 * Aggregation runs in replication order, so the result does not depend on
 * the number of workers.
 */
inline MseEstimate mc_mse(const StudyInstance& inst, Index n, std::uint32_t stream_id, unsigned workers = 1) {
    const KStar ks = compute_kstar(inst.reg, n, inst.m_max);
    EstimatorConfig ecfg;
    ecfg.m = inst.fixed_m.value_or(ks.k);
    ecfg.alpha = resolve_alpha(inst, ks);
    if (ecfg.m > inst.model.M_sim) throw DomainError("estimator dimension exceeds M_sim");

    struct Rep {
        double sq_err;
        bool thresholded;
        bool singular;
    };
    std::vector<Rep> reps(static_cast<std::size_t>(inst.replications));
    parallel_for(inst.replications, workers, [&](Index r) {
        RngStream rng(inst.master_seed, stream_id, static_cast<std::uint32_t>(r));
        const Dataset ds = sample_dataset(inst.beta, inst.sigma, inst.model, n, rng);
        const EstimateReport rep = plug_in_estimate(inst.h, ds, ecfg);
        const double err = rep.value - inst.truth;
        reps[static_cast<std::size_t>(r)] = {err * err, rep.thresholded, rep.singular};
    });

    MseEstimate out;
    out.n = n;
    out.m = ecfg.m;
    out.alpha = ecfg.alpha;
    const double R = static_cast<double>(inst.replications);
    double sum = 0.0;
    Index thr = 0, sing = 0;
    for (const Rep& r : reps) {
        sum += r.sq_err;
        thr += r.thresholded;
        sing += r.singular;
    }
    out.mse = sum / R;
    double ss = 0.0;
    for (const Rep& r : reps) ss += (r.sq_err - out.mse) * (r.sq_err - out.mse);
    out.se = std::sqrt(ss / (R - 1.0) / R);
    out.threshold_rate = static_cast<double>(thr) / R;
    out.singular_rate = static_cast<double>(sing) / R;
    return out;
}

struct StudyPoint {
    Index n = 0;
    Index m_used = 0;
    double alpha = 1.0;
    double mse = 0.0;
    double mse_se = 0.0;
    double threshold_rate = 0.0;
    double singular_rate = 0.0;
    double delta_star = 0.0;
    double lower_bound_value = 0.0;
    double bias_sq = 0.0;  // |<h, beta - beta_m>|^2 from the population Galerkin solution
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    Index points = 0;
};

/// Ordinary least squares y = intercept + slope x.
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    f.points = static_cast<Index>(x.size());
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line needs at least two points");
    const double k = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - f.intercept - f.slope * x[i];
            ssr += e * e;
        }
        f.slope_se = std::sqrt(ssr / (k - 2.0) / sxx);
    }
    return f;
}

struct StudyResult {
    std::vector<StudyPoint> per_n;
    double fitted_slope = 0.0;
    double slope_se = 0.0;
    Index points_in_fit = 0;
    double delta_tracking_slope = 0.0;  // slope of log(mse / delta*) on log n
    std::optional<CaseTag> case_tag;
    std::optional<RateOrder> catalog_order;
    double kappa = 1.0;
    double d = 1.0;
    double truth = 0.0;
    double truth_tail_bound = 0.0;
    Index M_sim = 0;
    std::vector<std::string> warnings;

    /// Reference slope for certification: the n-power of the catalog order.
    std::optional<double> catalog_exponent() const {
        if (!catalog_order) return std::nullopt;
        return catalog_order->n_power;
    }
};

inline std::uint32_t study_stream_id(std::uint32_t experiment_id, std::size_t grid_index) {
    return experiment_id * 256u + static_cast<std::uint32_t>(grid_index);
}

/**
 * Risk on every grid point, the log-log slope of mse against n, and the
 * catalogued order for comparison.
 */
inline StudyResult rate_study(const StudyConfig& cfg, unsigned workers = 1) {
    const StudyInstance inst = prepare_study(cfg);
    if (cfg.n_grid.back() < 8 * cfg.n_grid.front())
        throw DomainError("n_grid must span at least three octaves");

    StudyResult res;
    res.kappa = inst.kappa.value;
    res.d = inst.reg.d;
    res.truth = inst.truth;
    res.truth_tail_bound = inst.truth_tail_bound;
    res.M_sim = inst.model.M_sim;
    const Eigen::MatrixXd T = inst.model.matrix();
    const Eigen::VectorXd g = T * inst.beta.head(inst.model.M_sim);

    std::vector<double> lx, ly, ltrack;
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
        const Index n = cfg.n_grid[i];
        const MseEstimate est = mc_mse(inst, n, study_stream_id(cfg.experiment_id, i), workers);
        const KStar ks = compute_kstar(inst.reg, n, inst.m_max);
        const DeltaStar ds = compute_delta_star(inst.h_source, inst.reg, ks);

        StudyPoint pt;
        pt.n = n;
        pt.m_used = est.m;
        pt.alpha = est.alpha;
        pt.mse = est.mse;
        pt.mse_se = est.se;
        pt.threshold_rate = est.threshold_rate;
        pt.singular_rate = est.singular_rate;
        pt.delta_star = ds.value;
        pt.lower_bound_value = lower_bound_value(inst.sigma, inst.reg.d, inst.reg.rho, inst.kappa.value, ds.value);
        const GalerkinSolution sol = galerkin_solve(T, g, est.m);
        const Eigen::VectorXd diff = inst.beta.head(inst.model.M_sim) - embed(sol.coeffs, inst.model.M_sim);
        const double bias = inst.h.head(inst.model.M_sim).dot(diff);
        pt.bias_sq = bias * bias;
        res.per_n.push_back(pt);

        if (est.threshold_rate > cfg.max_threshold_rate) {
            res.warnings.push_back("threshold rate " + std::to_string(est.threshold_rate) + " at n=" +
                                   std::to_string(n) + " exceeds the limit; point left out of the slope fit");
            continue;
        }
        if (!(est.mse > 0.0)) {
            res.warnings.push_back("zero mse at n=" + std::to_string(n) + "; point left out of the slope fit");
            continue;
        }
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(est.mse));
        ltrack.push_back(std::log(est.mse) - std::log(ds.value));
    }
    res.points_in_fit = static_cast<Index>(lx.size());
    if (lx.size() >= 2) {
        const LineFit fit = fit_line(lx, ly);
        res.fitted_slope = fit.slope;
        res.slope_se = fit.slope_se;
        res.delta_tracking_slope = fit_line(lx, ltrack).slope;
    } else {
        res.warnings.push_back("fewer than two usable grid points; no slope fitted");
    }

    const WeightSpec decay = representer_envelope(cfg.representer);
    res.case_tag = infer_case(cfg.reg.gamma, cfg.reg.upsilon, decay);
    if (res.case_tag)
        res.catalog_order =
            rate_exponent_catalog(*res.case_tag, cfg.reg.gamma.exponent, cfg.reg.upsilon.exponent, decay.exponent)
                .delta;
    return res;
}

}  // namespace flr
