#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "flr/error.hpp"
#include "flr/function_space.hpp"
#include "flr/rate_catalog.hpp"
#include "flr/representer.hpp"
#include "flr/weights.hpp"

namespace flr {

/**
 * Regularity of the model: slope smoothness gamma, covariance decay upsilon,
 * optional representer class omega, radii rho / tau and link constant d.
 */
struct ModelRegularity {
    WeightSpec gamma = WeightSpec::polynomial_increasing(1.0);
    WeightSpec upsilon = WeightSpec::polynomial_decreasing(1.0);
    std::optional<WeightSpec> omega;
    double rho = 1.0;
    std::optional<double> tau;
    double d = 1.0;

    void validate() const {
        gamma.validate();
        upsilon.validate();
        if (gamma.direction != Direction::increasing && gamma.exponent != 0.0)
            throw DomainError("gamma must be non-decreasing");
        if (upsilon.direction != Direction::decreasing)
            throw DomainError("upsilon must be decreasing");
        if (!upsilon.summable())
            throw DomainError("upsilon must be summable (polynomial decay needs a > 1/2)");
        if (omega) {
            omega->validate();
            if (!(omega->growth() + gamma.growth()).bounded_below())
                throw DomainError("sup_j 1/(omega_j gamma_j) is infinite");
        }
        if (!(rho > 0.0)) throw DomainError("rho must be positive");
        if (tau && !(*tau > 0.0)) throw DomainError("tau must be positive");
        if (!(d >= 1.0)) throw DomainError("link constant d must be >= 1");
    }

    /// upsilon_m / gamma_m, non-increasing in m.
    double ratio(Index m) const { return upsilon.at(m) / gamma.at(m); }
};

/// Balance objective min(r_m, 1/n) / max(r_m, 1/n) with r_m = upsilon_m / gamma_m.
inline double kstar_objective(double ratio, double inv_n) {
    return std::min(ratio, inv_n) / std::max(ratio, inv_n);
}

struct KStar {
    Index k = 1;
    double a = 1.0;  // a* = max(r_{k*}, 1/n)
};

/**
 * k*_n = argmax_m min(r_m, 1/n)/max(r_m, 1/n), ties to the smallest m.
 *
 * Since r_m is non-increasing the objective rises while r_m >= 1/n and falls
 * afterwards, so the maximizer is located by bisection.  Throws BracketError
 * when r_{m_max} > 1/n, i.e. the peak may lie beyond the window.
 */
inline KStar compute_kstar(const ModelRegularity& reg, Index n, Index m_max = 1'000'000) {
    if (n < 1) throw DomainError("n must be >= 1");
    if (m_max < 1) throw DomainError("m_max must be >= 1");
    const double inv_n = 1.0 / static_cast<double>(n);
    auto obj = [&](Index m) { return kstar_objective(reg.ratio(m), inv_n); };

    if (reg.ratio(m_max) > inv_n)
        throw BracketError("k* not bracketed: upsilon/gamma at m_max=" + std::to_string(m_max) +
                           " still exceeds 1/n for n=" + std::to_string(n));

    // Largest m0 in [0, m_max] with r_m0 >= 1/n (m0 = 0 if none).
    Index lo = 0, hi = m_max;
    while (lo < hi) {
        const Index mid = lo + (hi - lo + 1) / 2;
        if (reg.ratio(mid) >= inv_n) lo = mid;
        else hi = mid - 1;
    }
    const Index m0 = lo;
    Index k = 0;
    if (m0 == 0) {
        k = 1;
    } else if (m0 < m_max && obj(m0 + 1) > obj(m0)) {
        k = m0 + 1;
    } else {
        // Objective is non-decreasing on [1, m0]; take the first m attaining its value.
        const double best = obj(m0);
        Index a = 1, b = m0;
        while (a < b) {
            const Index mid = a + (b - a) / 2;
            if (obj(mid) >= best) b = mid;
            else a = mid + 1;
        }
        k = a;
    }
    return {k, std::max(reg.ratio(k), inv_n)};
}

struct KappaResult {
    double value = 1.0;
    Index argmin_n = 1;
    Index n_max = 1;  // grid {1..n_max} over which the infimum was taken
};

/**
 * kappa = inf_n (a*_n)^{-1} min(r_{k*}, 1/n), approximated on n in {1..n_max}.
 */
inline KappaResult compute_kappa(const ModelRegularity& reg, Index n_max = 10'000, Index m_max = 1'000'000) {
    if (n_max < 1) throw DomainError("n_max must be >= 1");
    KappaResult out{1.0, 1, n_max};
    for (Index n = 1; n <= n_max; ++n) {
        const KStar ks = compute_kstar(reg, n, m_max);
        const double term = std::min(reg.ratio(ks.k), 1.0 / static_cast<double>(n)) / ks.a;
        if (!(term > 0.0))
            throw DomainError("kappa term vanishes at n=" + std::to_string(n) + " (balance assumption violated)");
        if (term < out.value) {
            out.value = term;
            out.argmin_n = n;
        }
    }
    return out;
}

struct DeltaStar {
    double value = 0.0;
    double head = 0.0;  // a* sum_{j<=k*} [h]_j^2 / upsilon_j
    double tail = 0.0;  // sum_{j>k*} [h]_j^2 / gamma_j
    KStar kstar;
    TailSum tail_diag;
};

/// delta* = max(a* sum_{j<=k*} [h]_j^2/upsilon_j, sum_{j>k*} [h]_j^2/gamma_j) for a given k*.
inline DeltaStar compute_delta_star(const CoefficientSource& h, const ModelRegularity& reg, const KStar& ks,
                                    const TailSumOptions& opt = {}) {
    DeltaStar out;
    out.kstar = ks;
    double head = 0.0;
    for (Index j = 1; j <= ks.k; ++j) {
        const double c = h(j);
        if (c != 0.0) head += c * c * std::exp(-reg.upsilon.log_at(j));
    }
    out.head = ks.a * head;
    out.tail_diag = tail_sum_over_weights(h, reg.gamma, ks.k, opt);
    out.tail = out.tail_diag.value;
    out.value = std::max(out.head, out.tail);
    return out;
}

inline DeltaStar compute_delta_star(const CoefficientSource& h, const ModelRegularity& reg, Index n,
                                    Index m_max = 1'000'000, const TailSumOptions& opt = {}) {
    return compute_delta_star(h, reg, compute_kstar(reg, n, m_max), opt);
}
inline DeltaStar compute_delta_star(const RepresenterSpec& h, const ModelRegularity& reg, Index n,
                                    Index m_max = 1'000'000, const TailSumOptions& opt = {}) {
    return compute_delta_star(representer_source(h), reg, n, m_max, opt);
}
inline DeltaStar compute_delta_star(const CoeffVector& h, const ModelRegularity& reg, Index n,
                                    Index m_max = 1'000'000, const TailSumOptions& opt = {}) {
    return compute_delta_star(CoefficientSource::from(h), reg, n, m_max, opt);
}

/// Delta* = a* max_{j<=k*} 1/(upsilon_j omega_j). Requires omega.
inline double compute_Delta_star(const ModelRegularity& reg, const KStar& ks) {
    if (!reg.omega) throw DomainError("omega is required for Delta*");
    double best = -std::numeric_limits<double>::infinity();
    for (Index j = 1; j <= ks.k; ++j)
        best = std::max(best, -(reg.upsilon.log_at(j) + reg.omega->log_at(j)));
    return ks.a * std::exp(best);
}

inline double compute_Delta_star(const ModelRegularity& reg, Index n, Index m_max = 1'000'000) {
    if (!reg.omega) throw DomainError("omega is required for Delta*");
    return compute_Delta_star(reg, compute_kstar(reg, n, m_max));
}

struct RatesOptions {
    Index m_max = 1'000'000;
    Index kappa_n_max = 10'000;
    bool with_Delta_star = false;
    TailSumOptions tail;
};

/// k*, a*, kappa, delta*, Delta* at one n together with the asymptotic orders, where catalogued.
struct RatesProfile {
    Index n = 1;
    Index k_star = 1;
    double a_star = 1.0;
    KappaResult kappa;
    double delta_star = 0.0;
    std::optional<double> Delta_star;
    TailSum tail_diag;
    std::optional<CaseTag> case_tag;
    std::optional<RateOrder> delta_order;
    std::optional<RateOrder> Delta_order;
};

inline RatesProfile rates_profile(const ModelRegularity& reg, const RepresenterSpec& h, Index n,
                                  const KappaResult& kappa, const RatesOptions& opt = {}) {
    RatesProfile out;
    out.n = n;
    const KStar ks = compute_kstar(reg, n, opt.m_max);
    out.k_star = ks.k;
    out.a_star = ks.a;
    out.kappa = kappa;
    // Catalog first: a side-condition failure names the inequality instead of a bare divergence.
    const WeightSpec decay = representer_envelope(h);
    out.case_tag = infer_case(reg.gamma, reg.upsilon, decay);
    if (out.case_tag) {
        out.delta_order = rate_exponent_catalog(*out.case_tag, reg.gamma.exponent, reg.upsilon.exponent,
                                                decay.exponent)
                              .delta;
        if (reg.omega)
            out.Delta_order = rate_exponent_catalog(*out.case_tag, reg.gamma.exponent, reg.upsilon.exponent,
                                                    reg.omega->sign() * reg.omega->exponent)
                                  .Delta;
    }
    const DeltaStar ds = compute_delta_star(representer_source(h), reg, ks, opt.tail);
    out.delta_star = ds.value;
    out.tail_diag = ds.tail_diag;
    if (opt.with_Delta_star) out.Delta_star = compute_Delta_star(reg, ks);

    return out;
}

}  // namespace flr
