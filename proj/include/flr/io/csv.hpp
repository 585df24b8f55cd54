#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "flr/error.hpp"
#include "flr/estimator.hpp"
#include "flr/experiments.hpp"
#include "flr/rates.hpp"
#include "flr/simulation.hpp"

namespace flr::io {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DomainError("malformed number in CSV: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

/// '#' lines at the top of every artifact: config echo and index convention.
inline void write_comment_header(std::ostream& os, const std::string& config_echo, std::optional<std::uint64_t> seed) {
    if (!config_echo.empty()) os << "# config: " << config_echo << '\n';
    if (seed) os << "# seed: " << *seed << '\n';
    os << "# index origin 1: column X_j holds the coefficient on basis function j\n";
}

inline void write_dataset_csv(std::ostream& os, const Dataset& ds, const std::string& config_echo = {}) {
    write_comment_header(os, config_echo, ds.meta.seed);
    os << 'Y';
    for (Index j = 1; j <= ds.M(); ++j) os << ",X_" << j;
    os << '\n';
    for (Index i = 0; i < ds.n(); ++i) {
        os << format_double(ds.Y(i));
        for (Index j = 0; j < ds.M(); ++j) os << ',' << format_double(ds.X(i, j));
        os << '\n';
    }
}

/// Reads a dataset written by write_dataset_csv; metadata lives in the sidecar and is not restored here.
inline Dataset read_dataset_csv(std::istream& is) {
    std::string line;
    std::optional<Index> M;
    std::vector<double> values;
    Index rows = 0;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_fields(line);
        if (!M) {
            if (fields.empty() || fields[0] != "Y") throw DomainError("dataset CSV: header must start with Y");
            for (std::size_t j = 1; j < fields.size(); ++j)
                if (fields[j] != "X_" + std::to_string(j))
                    throw DomainError("dataset CSV: expected column X_" + std::to_string(j));
            M = static_cast<Index>(fields.size()) - 1;
            if (*M < 1) throw DomainError("dataset CSV: no regressor columns");
            continue;
        }
        if (static_cast<Index>(fields.size()) != *M + 1)
            throw DomainError("dataset CSV: row " + std::to_string(rows + 1) + " has the wrong number of fields");
        for (auto f : fields) values.push_back(parse_double(f));
        ++rows;
    }
    if (!M) throw DomainError("dataset CSV: missing header");
    if (rows < 1) throw DomainError("dataset CSV: no observations");
    Dataset ds;
    ds.X.resize(rows, *M);
    ds.Y.resize(rows);
    for (Index i = 0; i < rows; ++i) {
        const std::size_t base = static_cast<std::size_t>(i * (*M + 1));
        ds.Y(i) = values[base];
        for (Index j = 0; j < *M; ++j) ds.X(i, j) = values[base + 1 + static_cast<std::size_t>(j)];
    }
    ds.validate();
    return ds;
}

inline std::string estimate_csv_header() { return "value,thresholded,singular,spectral_norm_inv,m,alpha,n,seed"; }

inline std::string estimate_csv_row(const EstimateReport& r, Index n, std::uint64_t seed) {
    std::string s = format_double(r.value);
    s += r.thresholded ? ",1" : ",0";
    s += r.singular ? ",1," : ",0,";
    if (r.spectral_norm_inv) s += format_double(*r.spectral_norm_inv);
    s += "," + std::to_string(r.m_used) + "," + format_double(r.alpha_used) + "," + std::to_string(n) + "," +
         std::to_string(seed);
    return s;
}

inline void write_rates_csv(std::ostream& os, const std::vector<RatesProfile>& rows, const std::string& config_echo) {
    write_comment_header(os, config_echo, std::nullopt);
    os << "n,k_star,a_star,kappa,kappa_n_max,delta_star,Delta_star,tail_terms,case,delta_order,delta_n_exponent,"
          "Delta_order\n";
    for (const auto& r : rows) {
        os << r.n << ',' << r.k_star << ',' << format_double(r.a_star) << ',' << format_double(r.kappa.value) << ','
           << r.kappa.n_max << ',' << format_double(r.delta_star) << ',';
        if (r.Delta_star) os << format_double(*r.Delta_star);
        os << ',' << r.tail_diag.terms << ',';
        if (r.case_tag) os << to_string(*r.case_tag);
        os << ',';
        if (r.delta_order) os << r.delta_order->text() << ',' << format_double(r.delta_order->n_power);
        else os << ',';
        os << ',';
        if (r.Delta_order) os << r.Delta_order->text();
        os << '\n';
    }
}

inline void write_study_csv(std::ostream& os, const StudyResult& res, const std::string& config_echo,
                            std::uint64_t seed) {
    write_comment_header(os, config_echo, seed);
    os << "n,m_used,alpha,mse,mse_se,threshold_rate,singular_rate,delta_star,lower_bound_value,bias_sq\n";
    for (const auto& p : res.per_n) {
        os << p.n << ',' << p.m_used << ',' << format_double(p.alpha) << ',' << format_double(p.mse) << ','
           << format_double(p.mse_se) << ',' << format_double(p.threshold_rate) << ','
           << format_double(p.singular_rate) << ',' << format_double(p.delta_star) << ','
           << format_double(p.lower_bound_value) << ',' << format_double(p.bias_sq) << '\n';
    }
}

}  // namespace flr::io
