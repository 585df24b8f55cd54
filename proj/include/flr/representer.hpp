#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>

#include "flr/function_space.hpp"
#include "flr/random.hpp"

namespace flr {

/// Point evaluation beta(t0).
struct PointEval {
    double t0 = 0.0;
};
/// Integral of beta over [0, b].
struct IntervalAverage {
    double b = 0.5;
};
/// Representer with [h]_j^2 = decay_j exactly and positive coefficients.
struct SyntheticRepresenter {
    WeightSpec decay;
};

using RepresenterSpec = std::variant<PointEval, IntervalAverage, SyntheticRepresenter>;

inline void validate(const RepresenterSpec& spec) {
    std::visit(
        [](const auto& r) {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, PointEval>) {
                if (!(r.t0 >= 0.0 && r.t0 <= 1.0)) throw DomainError("point evaluation requires t0 in [0,1]");
            } else if constexpr (std::is_same_v<T, IntervalAverage>) {
                if (!(r.b > 0.0 && r.b < 1.0)) throw DomainError("interval average requires b in (0,1)");
            } else {
                r.decay.validate();
                if (r.decay.direction != Direction::decreasing && r.decay.exponent != 0.0)
                    throw DomainError("synthetic representer decay must be decreasing");
            }
        },
        spec);
}

inline std::string describe(const RepresenterSpec& spec) {
    return std::visit(
        [](const auto& r) -> std::string {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, PointEval>) return "point_eval(t0=" + std::to_string(r.t0) + ")";
            else if constexpr (std::is_same_v<T, IntervalAverage>) return "interval_average(b=" + std::to_string(r.b) + ")";
            else return std::string("synthetic(") + std::string(to_string(r.decay.family)) +
                        ", s=" + std::to_string(r.decay.exponent) + ")";
        },
        spec);
}

/**
 * Fourier coefficient [h]_j of the representer.
 *
 * Interval average: [h]_1 = b, [h]_{2k} = sin(2 pi k b) / (sqrt2 pi k),
 * [h]_{2k+1} = (1 - cos(2 pi k b)) / (sqrt2 pi k).  These are the integrals
 * of psi_j over [0, b]; the odd-index form carries the constant term.
 */
inline double representer_coeff(const RepresenterSpec& spec, Index j) {
    if (j < 1) throw DomainError("coefficient index must be >= 1");
    return std::visit(
        [j](const auto& r) -> double {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, PointEval>) {
                return eval_basis(j, r.t0);
            } else if constexpr (std::is_same_v<T, IntervalAverage>) {
                if (j == 1) return r.b;
                const double k = static_cast<double>(j / 2);
                const double arg = 2.0 * std::numbers::pi * k * r.b;
                const double denom = std::numbers::sqrt2 * std::numbers::pi * k;
                return (j % 2 == 0) ? std::sin(arg) / denom : (1.0 - std::cos(arg)) / denom;
            } else {
                return std::sqrt(r.decay.at(j));
            }
        },
        spec);
}

/// Envelope for [h]_j^2, i.e. the decay rule with [h]_j^2 <= envelope_j for all j.
inline WeightSpec representer_envelope(const RepresenterSpec& spec) {
    return std::visit(
        [](const auto& r) -> WeightSpec {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, PointEval>) {
                return WeightSpec::polynomial_decreasing(0.0, 2.0);
            } else if constexpr (std::is_same_v<T, IntervalAverage>) {
                // [h]_j^2 <= 2 / (pi^2 floor(j/2)^2) <= 18 / (pi^2 j^2)
                return WeightSpec::polynomial_decreasing(1.0, 18.0 / (std::numbers::pi * std::numbers::pi));
            } else {
                return r.decay;
            }
        },
        spec);
}

inline CoeffVector representer_coeffs(const RepresenterSpec& spec, Index M) {
    if (M < 1) throw DomainError("truncation M must be >= 1");
    validate(spec);
    std::vector<double> c(static_cast<std::size_t>(M));
    for (Index j = 1; j <= M; ++j) c[static_cast<std::size_t>(j - 1)] = representer_coeff(spec, j);
    return CoeffVector(std::move(c), representer_envelope(spec));
}

inline CoefficientSource representer_source(const RepresenterSpec& spec) {
    validate(spec);
    return {[spec](Index j) { return representer_coeff(spec, j); }, representer_envelope(spec), std::nullopt};
}

/// Parameters of a synthetic slope: |[beta]_j| proportional to j^{-smoothness}.
struct SlopeSpec {
    double smoothness = 2.0;
    std::uint64_t sign_seed = 1;
};

/**
 * Slope on the boundary of the ellipsoid F_gamma^rho:
 * [beta]_j = c * zeta_j * j^{-smoothness}, zeta_j random signs from the seed,
 * c fixed so that ||beta||_gamma^2 = rho over j <= M.
 */
inline CoeffVector synth_slope(const SlopeSpec& spec, const WeightSpec& gamma, double rho, Index M) {
    if (M < 1) throw DomainError("truncation M must be >= 1");
    if (!(rho > 0.0)) throw DomainError("ellipsoid radius rho must be positive");
    gamma.validate();
    const auto decay = LogGrowth::power_law(-2.0 * spec.smoothness);
    if (!(gamma.growth() + decay).summable())
        throw TailDivergenceError("sum_j gamma_j j^{-2s} diverges: slope smoothness too low for the ellipsoid");

    RngStream signs(spec.sign_seed, 0xFFFFFFFFu, 0);
    std::vector<double> c(static_cast<std::size_t>(M));
    double norm = 0.0;
    for (Index j = 1; j <= M; ++j) {
        const double mag = std::pow(static_cast<double>(j), -spec.smoothness);
        c[static_cast<std::size_t>(j - 1)] = signs.sign() * mag;
        norm += std::exp(gamma.log_at(j) + 2.0 * std::log(mag));
    }
    const double scale = std::sqrt(rho / norm);
    for (double& v : c) v *= scale;
    return CoeffVector(std::move(c), WeightSpec::polynomial_decreasing(spec.smoothness, scale * scale));
}

}  // namespace flr
