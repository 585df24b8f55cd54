#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "flr/error.hpp"
#include "flr/weights.hpp"

namespace flr {

/// Trigonometric basis on [0,1]: psi_1 = 1, psi_{2k} = sqrt2 cos(2 pi k t), psi_{2k+1} = sqrt2 sin(2 pi k t).
inline double eval_basis(Index j, double t) {
    if (j < 1) throw DomainError("basis index must be >= 1");
    if (j == 1) return 1.0;
    const double k = static_cast<double>(j / 2);
    const double arg = 2.0 * std::numbers::pi * k * t;
    return std::numbers::sqrt2 * ((j % 2 == 0) ? std::cos(arg) : std::sin(arg));
}

/**
 * Finite vector of Fourier coefficients [f]_1..[f]_M.
 *
 * The optional tail rule is an envelope for the squared coefficients,
 * [f]_j^2 <~ tail_rule(j), used wherever a quantity needs the infinite tail.
 */
struct CoeffVector {
    std::vector<double> coeffs;
    std::optional<WeightSpec> tail_rule;

    CoeffVector() = default;
    explicit CoeffVector(std::vector<double> c, std::optional<WeightSpec> tail = std::nullopt)
        : coeffs(std::move(c)), tail_rule(std::move(tail)) {}

    Index size() const { return static_cast<Index>(coeffs.size()); }

    /// [f]_j with 1-based j; zero beyond the stored length.
    double coeff(Index j) const {
        if (j < 1) throw DomainError("coefficient index must be >= 1");
        return j <= size() ? coeffs[static_cast<std::size_t>(j - 1)] : 0.0;
    }

    /// First m coefficients, zero padded.
    Eigen::VectorXd head(Index m) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
        for (Index j = 1; j <= std::min(m, size()); ++j) out(j - 1) = coeffs[static_cast<std::size_t>(j - 1)];
        return out;
    }

    /// |[f]_j| as predicted by the tail rule.
    std::optional<double> predicted_magnitude(Index j) const {
        if (!tail_rule) return std::nullopt;
        return std::sqrt(tail_rule->at(j));
    }

    /// Entries finite; last entry not above 10x the tail-rule prediction.
    void validate() const {
        for (double c : coeffs)
            if (!std::isfinite(c)) throw DomainError("coefficient vector has a non-finite entry");
        if (tail_rule && !coeffs.empty()) {
            tail_rule->validate();
            const double pred = *predicted_magnitude(size());
            if (std::abs(coeffs.back()) > 10.0 * pred)
                throw DomainError("last coefficient exceeds 10x the tail-rule prediction");
        }
    }
};

/// sum_{j<=M} w_j [f]_j^2 over the stored coefficients.
inline double weighted_norm_sq(const CoeffVector& f, const WeightSpec& w) {
    double acc = 0.0;
    for (Index j = 1; j <= f.size(); ++j) {
        const double c = f.coeff(j);
        if (c != 0.0) acc += w.at(j) * c * c;
    }
    return acc;
}

/// <h, beta> = sum_j [h]_j [beta]_j with the shorter vector zero padded.
inline double linear_functional(const CoeffVector& h, const CoeffVector& beta) {
    const Index m = std::min(h.size(), beta.size());
    double acc = 0.0;
    for (Index j = 1; j <= m; ++j) acc += h.coeff(j) * beta.coeff(j);
    return acc;
}

/**
 * Coefficients [h]_j available for every j >= 1, as needed by infinite sums.
 * Either the support is finite or an envelope for [h]_j^2 is known.
 */
class CoefficientSource {
public:
    CoefficientSource(std::function<double(Index)> coeff, std::optional<WeightSpec> envelope,
                      std::optional<Index> support)
        : coeff_(std::move(coeff)), envelope_(std::move(envelope)), support_(support) {}

    /// Finite coefficient vectors: the tail rule (if any) continues the
    /// sequence beyond M; otherwise the support ends at M.
    static CoefficientSource from(const CoeffVector& v) {
        const auto tail = v.tail_rule;
        auto fn = [v](Index j) {
            if (j <= v.size()) return v.coeff(j);
            return std::sqrt(v.tail_rule->at(j));
        };
        if (tail) return {std::move(fn), tail, std::nullopt};
        return {[v](Index j) { return v.coeff(j); }, std::nullopt, v.size()};
    }

    double operator()(Index j) const {
        if (support_ && j > *support_) return 0.0;
        return coeff_(j);
    }
    const std::optional<WeightSpec>& envelope() const { return envelope_; }
    const std::optional<Index>& support() const { return support_; }

private:
    std::function<double(Index)> coeff_;
    std::optional<WeightSpec> envelope_;
    std::optional<Index> support_;
};

struct TailSumOptions {
    double rel_tol = 1e-14;
    Index max_terms = 10'000'000;
};

/// Value of a truncated infinite sum and how the truncation went.
struct TailSum {
    double value = 0.0;
    Index terms = 0;
    double last_increment = 0.0;
    bool hit_cap = false;
};

/**
 * sum_{j > after} [h]_j^2 / gamma_j.
 *
 * Accumulation stops at the first j where the envelope increment falls below
 * rel_tol times the envelope sum over 1..j (the envelope is used because
 * individual coefficients may vanish), or after max_terms terms. The cutoff
 * does not depend on `after`, so the result is non-increasing in `after`.
 */
inline TailSum tail_sum_over_weights(const CoefficientSource& h, const WeightSpec& gamma, Index after,
                                     const TailSumOptions& opt = {}) {
    TailSum out;
    if (h.support()) {
        for (Index j = after + 1; j <= *h.support(); ++j) {
            const double c = h(j);
            out.last_increment = c * c * std::exp(-gamma.log_at(j));
            out.value += out.last_increment;
            ++out.terms;
        }
        return out;
    }
    if (!h.envelope())
        throw DomainError("tail sum needs a coefficient envelope or a finite support");
    const WeightSpec& env = *h.envelope();
    if (!(env.growth() - gamma.growth()).summable())
        throw TailDivergenceError("sum_j [h]_j^2 / gamma_j diverges for the given decay (h is not in F_{1/gamma})");

    double env_sum = 0.0;
    for (Index j = 1; j <= after; ++j) env_sum += env.at(j) * std::exp(-gamma.log_at(j));
    for (Index j = after + 1;; ++j) {
        const double inv_w = std::exp(-gamma.log_at(j));
        const double c = h(j);
        out.last_increment = c * c * inv_w;
        out.value += out.last_increment;
        ++out.terms;
        const double env_inc = env.at(j) * inv_w;
        env_sum += env_inc;
        if (env_inc <= opt.rel_tol * env_sum) break;
        if (out.terms >= opt.max_terms) {
            out.hit_cap = true;
            break;
        }
    }
    return out;
}

}  // namespace flr
