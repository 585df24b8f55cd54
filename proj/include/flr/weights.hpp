#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "flr/error.hpp"

namespace flr {

using Index = std::int64_t;

enum class Family { polynomial, exponential };
enum class Direction { increasing, decreasing };

inline std::string_view to_string(Family f) {
    return f == Family::polynomial ? "polynomial" : "exponential";
}
inline std::string_view to_string(Direction d) {
    return d == Direction::increasing ? "increasing" : "decreasing";
}
inline std::optional<Family> parse_family(std::string_view s) {
    if (s == "polynomial") return Family::polynomial;
    if (s == "exponential") return Family::exponential;
    return std::nullopt;
}
inline std::optional<Direction> parse_direction(std::string_view s) {
    if (s == "increasing") return Direction::increasing;
    if (s == "decreasing") return Direction::decreasing;
    return std::nullopt;
}

/**
 * Leading-order description of log(w_j) as j -> infinity:
 *
 *     log w_j = sum_k coef_k * j^power_k + log_coef * log(j) + O(1)
 *
 * Used to decide summability and boundedness of weight products and
 * quotients analytically instead of by partial sums.
 */
class LogGrowth {
public:
    LogGrowth() = default;

    static LogGrowth power_law(double log_coef) {
        LogGrowth g;
        g.log_coef_ = log_coef;
        return g;
    }
    static LogGrowth stretched_exp(double power, double coef) {
        LogGrowth g;
        g.add_exp(power, coef);
        return g;
    }

    LogGrowth operator+(const LogGrowth& o) const {
        LogGrowth r = *this;
        r.log_coef_ += o.log_coef_;
        for (auto [p, c] : o.exp_terms_) r.add_exp(p, c);
        return r;
    }
    LogGrowth operator*(double k) const {
        LogGrowth r;
        r.log_coef_ = log_coef_ * k;
        for (auto [p, c] : exp_terms_) r.add_exp(p, c * k);
        return r;
    }
    LogGrowth operator-() const { return *this * -1.0; }
    LogGrowth operator-(const LogGrowth& o) const { return *this + (-o); }

    /// Sign of the dominant stretched-exponential term, 0 when none survives.
    int exp_sign() const {
        if (exp_terms_.empty()) return 0;
        auto it = std::max_element(exp_terms_.begin(), exp_terms_.end(),
                                   [](auto a, auto b) { return a.first < b.first; });
        return it->second > 0 ? 1 : -1;
    }

    /// sum_j w_j < infinity
    bool summable() const {
        const int s = exp_sign();
        if (s != 0) return s < 0;
        return log_coef_ < -1.0;
    }
    /// inf_j w_j > 0
    bool bounded_below() const {
        const int s = exp_sign();
        if (s != 0) return s > 0;
        return log_coef_ >= 0.0;
    }
    /// sup_j w_j < infinity
    bool bounded_above() const { return (-*this).bounded_below(); }

    double log_coef() const { return log_coef_; }
    const std::vector<std::pair<double, double>>& exp_terms() const { return exp_terms_; }

private:
    void add_exp(double power, double coef) {
        if (power <= 0.0 || coef == 0.0) return;  // j^0 terms are constants
        for (auto it = exp_terms_.begin(); it != exp_terms_.end(); ++it) {
            if (std::abs(it->first - power) <= 1e-12 * std::max(1.0, power)) {
                it->second += coef;
                if (std::abs(it->second) <= 1e-12) exp_terms_.erase(it);
                return;
            }
        }
        exp_terms_.emplace_back(power, coef);
    }

    std::vector<std::pair<double, double>> exp_terms_;
    double log_coef_ = 0.0;
};

/**
 * Positive weight sequence indexed from j = 1.
 *
 * `exponent` is the half-exponent (p, a or s): the polynomial family is
 * j^{+-2*exponent}, the exponential family exp(+-(j^{2*exponent} - 1)).
 * The -1 offset gives w_1 = scale exactly.
 */
struct WeightSpec {
    Family family = Family::polynomial;
    double exponent = 0.0;
    double scale = 1.0;
    Direction direction = Direction::increasing;

    static WeightSpec polynomial_increasing(double p, double scale = 1.0) {
        return {Family::polynomial, p, scale, Direction::increasing};
    }
    static WeightSpec polynomial_decreasing(double a, double scale = 1.0) {
        return {Family::polynomial, a, scale, Direction::decreasing};
    }
    static WeightSpec exponential_increasing(double p, double scale = 1.0) {
        return {Family::exponential, p, scale, Direction::increasing};
    }
    static WeightSpec exponential_decreasing(double a, double scale = 1.0) {
        return {Family::exponential, a, scale, Direction::decreasing};
    }

    void validate() const {
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw DomainError("weight scale must be positive and finite");
        if (!std::isfinite(exponent) || exponent < 0.0)
            throw DomainError("weight exponent must be finite and >= 0");
        if (family == Family::exponential && !(exponent > 0.0))
            throw DomainError("exponential weight family requires exponent > 0");
    }

    double sign() const { return direction == Direction::increasing ? 1.0 : -1.0; }

    /// log(w_j); finite even where w_j itself over- or underflows.
    double log_at(Index j) const {
        const double jd = static_cast<double>(j);
        double core = 0.0;
        if (family == Family::polynomial) {
            core = 2.0 * exponent * std::log(jd);
        } else {
            core = std::pow(jd, 2.0 * exponent) - 1.0;
        }
        return std::log(scale) + sign() * core;
    }

    double at(Index j) const {
        const double jd = static_cast<double>(j);
        if (family == Family::polynomial) {
            return scale * std::pow(jd, sign() * 2.0 * exponent);
        }
        return scale * std::exp(sign() * (std::pow(jd, 2.0 * exponent) - 1.0));
    }

    LogGrowth growth() const {
        if (family == Family::polynomial) return LogGrowth::power_law(sign() * 2.0 * exponent);
        return LogGrowth::stretched_exp(2.0 * exponent, sign());
    }

    bool summable() const { return growth().summable(); }

    friend bool operator==(const WeightSpec&, const WeightSpec&) = default;
};

/// The j-th weight. Total on validated specs.
inline double weight_at(const WeightSpec& spec, Index j) {
    if (j < 1) throw DomainError("weight index must be >= 1");
    return spec.at(j);
}

}  // namespace flr
