#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "flr/error.hpp"
#include "flr/weights.hpp"

namespace flr {

/// Smoothness/decay combinations: (gamma, upsilon, h) each polynomial (p) or exponential (e).
enum class CaseTag { ppp, pep, epp, ppe };

inline std::string_view to_string(CaseTag c) {
    switch (c) {
        case CaseTag::ppp: return "ppp";
        case CaseTag::pep: return "pep";
        case CaseTag::epp: return "epp";
        case CaseTag::ppe: return "ppe";
    }
    return "?";
}

inline std::optional<CaseTag> parse_case(std::string_view s) {
    if (s == "ppp") return CaseTag::ppp;
    if (s == "pep") return CaseTag::pep;
    if (s == "epp") return CaseTag::epp;
    if (s == "ppe") return CaseTag::ppe;
    return std::nullopt;
}

namespace detail {

/// Small-denominator fraction if one matches, else a short decimal.
inline std::string format_exponent(double x) {
    for (int q = 1; q <= 64; ++q) {
        const double pq = x * q;
        const double r = std::round(pq);
        if (std::abs(pq - r) < 1e-9 * q) {
            const long num = static_cast<long>(r);
            if (q == 1) return std::to_string(num);
            return std::to_string(num) + "/" + std::to_string(q);
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

}  // namespace detail

/// Asymptotic order n^{n_power} [log n]^{log_power} [log log n]^{loglog_power}; constants are never tracked.
struct RateOrder {
    double n_power = 0.0;
    double log_power = 0.0;
    double loglog_power = 0.0;

    std::string text() const {
        std::string out;
        auto append = [&out](const std::string& s) {
            if (!out.empty()) out += "*";
            out += s;
        };
        if (n_power != 0.0) append(n_power == 1.0 ? "n" : "n^{" + detail::format_exponent(n_power) + "}");
        if (log_power != 0.0)
            append(log_power == 1.0 ? "log(n)" : "[log(n)]^{" + detail::format_exponent(log_power) + "}");
        if (loglog_power != 0.0)
            append(loglog_power == 1.0 ? "log(log(n))"
                                       : "[log(log(n))]^{" + detail::format_exponent(loglog_power) + "}");
        return out.empty() ? "1" : out;
    }

    /// log of the order at n (constant dropped).
    double log_value(double n) const {
        const double ln = std::log(n);
        double v = n_power * ln;
        if (log_power != 0.0) v += log_power * std::log(ln);
        if (loglog_power != 0.0) v += loglog_power * std::log(std::log(ln));
        return v;
    }
};

struct RateCatalogEntry {
    CaseTag tag;
    RateOrder kstar;
    RateOrder delta;  // order of delta*_n for [h]_j^2 ~ j^{-2s} (resp. exp(-j^{2s}) in ppe)
    RateOrder Delta;  // order of Delta*_n for omega_j ~ j^{2s} (resp. exp(j^{2s}) in ppe)
};

/// Orders of k*, delta* and Delta* for each smoothness/decay combination.
inline RateCatalogEntry rate_exponent_catalog(CaseTag tag, double p, double a, double s) {
    auto require = [tag](bool ok, const std::string& inequality, double p_, double a_, double s_) {
        if (!ok) {
            char buf[160];
            std::snprintf(buf, sizeof buf, " (got p=%g, a=%g, s=%g)", p_, a_, s_);
            throw SideConditionError("(" + std::string(to_string(tag)) + ") requires " + inequality + buf);
        }
    };
    constexpr double eps = 1e-9;
    RateCatalogEntry e{tag, {}, {}, {}};
    switch (tag) {
        case CaseTag::ppp: {
            require(p >= 0.0, "p >= 0", p, a, s);
            require(a > 0.5, "a > 1/2", p, a, s);
            require(s > 0.5 - p, "s > 1/2 - p", p, a, s);
            e.kstar.n_power = 1.0 / (2.0 * p + 2.0 * a);
            const double gap = s - a - 0.5;
            if (gap < -eps) {
                e.delta.n_power = -(2.0 * p + 2.0 * s - 1.0) / (2.0 * p + 2.0 * a);
            } else if (gap <= eps) {
                e.delta.n_power = -1.0;
                e.delta.log_power = 1.0;
            } else {
                e.delta.n_power = -1.0;
            }
            e.Delta.n_power = (s < a - eps) ? -(p + s) / (p + a) : -1.0;
            break;
        }
        case CaseTag::pep: {
            require(p >= 0.0, "p >= 0", p, a, s);
            require(a > 0.0, "a > 0", p, a, s);
            require(s > 0.5 - p, "s > 1/2 - p", p, a, s);
            e.kstar.log_power = 1.0 / (2.0 * a);
            e.delta.log_power = -(2.0 * p + 2.0 * s - 1.0) / (2.0 * a);
            e.Delta.log_power = -(p + s) / a;
            break;
        }
        case CaseTag::epp: {
            require(p > 0.0, "p > 0", p, a, s);
            require(a > 0.0, "a > 0", p, a, s);
            e.kstar.log_power = 1.0 / (2.0 * p);
            const double gap = s - a - 0.5;
            e.delta.n_power = -1.0;
            if (gap < -eps) {
                e.delta.log_power = (2.0 * a - 2.0 * s + 1.0) / (2.0 * p);
            } else if (gap <= eps) {
                e.delta.loglog_power = 1.0;
            }
            e.Delta.n_power = -1.0;
            if (a > s + eps) e.Delta.log_power = (a - s) / p;
            break;
        }
        case CaseTag::ppe: {
            require(p >= 0.0, "p >= 0", p, a, s);
            require(a > 0.5, "a > 1/2", p, a, s);
            require(s > 0.0, "s > 0", p, a, s);
            e.kstar.n_power = 1.0 / (2.0 * p + 2.0 * a);
            e.delta.n_power = -1.0;
            e.Delta.n_power = -1.0;
            break;
        }
    }
    return e;
}

/// Case from the families of gamma, upsilon and the representer decay; none if uncatalogued.
inline std::optional<CaseTag> infer_case(const WeightSpec& gamma, const WeightSpec& upsilon,
                                         const WeightSpec& h_decay) {
    const bool gp = gamma.family == Family::polynomial;
    const bool up = upsilon.family == Family::polynomial;
    const bool hp = h_decay.family == Family::polynomial;
    if (gp && up && hp) return CaseTag::ppp;
    if (gp && !up && hp) return CaseTag::pep;
    if (!gp && up && hp) return CaseTag::epp;
    if (gp && up && !hp) return CaseTag::ppe;
    return std::nullopt;
}

}  // namespace flr
