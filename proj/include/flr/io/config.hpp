#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "flr/error.hpp"
#include "flr/experiments.hpp"
#include "flr/rates.hpp"
#include "flr/representer.hpp"
#include "flr/simulation.hpp"
#include "flr/weights.hpp"

namespace flr::io {

using json = nlohmann::json;

namespace detail {

inline std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline const json& object_at(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    return j;
}

inline void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    object_at(obj, path);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (auto a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError(join(path, it.key()), "unknown key");
    }
}

inline const json& require(const json& obj, std::string_view key, const std::string& path) {
    auto it = obj.find(std::string(key));
    if (it == obj.end()) throw ConfigError(join(path, key), "required key is missing");
    return *it;
}

inline double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

inline std::int64_t as_int(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) {
        const auto u = v.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
            throw ConfigError(path, "integer out of range");
        return static_cast<std::int64_t>(u);
    }
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    return v.get<std::int64_t>();
}

inline std::uint64_t as_u64(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(path, "expected a non-negative integer");
}

inline std::uint32_t as_u32(const json& v, const std::string& path) {
    const std::uint64_t u = as_u64(v, path);
    if (u > 0xFFFFFFFFull) throw ConfigError(path, "value exceeds 32 bits");
    return static_cast<std::uint32_t>(u);
}

inline std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    return v.get<std::string>();
}

inline bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
    return v.get<bool>();
}

template <class F>
auto optional_key(const json& obj, std::string_view key, const std::string& path, F&& conv)
    -> std::optional<decltype(conv(obj, path))> {
    auto it = obj.find(std::string(key));
    if (it == obj.end()) return std::nullopt;
    return conv(*it, join(path, key));
}

inline std::vector<Index> as_index_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of integers");
    std::vector<Index> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_int(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

/// Re-raises library validation failures under a config path.
template <class F>
void validated(const std::string& path, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
}

}  // namespace detail

// ---- WeightSpec -------------------------------------------------------------

inline WeightSpec parse_weight(const json& j, const std::string& path) {
    using namespace detail;
    check_keys(j, path, {"family", "exponent", "direction", "scale"});
    WeightSpec w;
    const std::string fam = as_string(require(j, "family", path), join(path, "family"));
    const auto f = parse_family(fam);
    if (!f) throw ConfigError(join(path, "family"), "expected 'polynomial' or 'exponential', got '" + fam + "'");
    w.family = *f;
    w.exponent = as_number(require(j, "exponent", path), join(path, "exponent"));
    const std::string dir = as_string(require(j, "direction", path), join(path, "direction"));
    const auto d = parse_direction(dir);
    if (!d) throw ConfigError(join(path, "direction"), "expected 'increasing' or 'decreasing', got '" + dir + "'");
    w.direction = *d;
    w.scale = optional_key(j, "scale", path, as_number).value_or(1.0);
    validated(path, [&] { w.validate(); });
    return w;
}

inline json to_json(const WeightSpec& w) {
    return {{"family", std::string(to_string(w.family))},
            {"exponent", w.exponent},
            {"direction", std::string(to_string(w.direction))},
            {"scale", w.scale}};
}

// ---- sections ---------------------------------------------------------------

inline ModelRegularity parse_regularity(const json& j, const std::string& path) {
    using namespace detail;
    check_keys(j, path, {"gamma", "upsilon", "omega", "rho", "tau", "d"});
    ModelRegularity r;
    r.gamma = parse_weight(require(j, "gamma", path), join(path, "gamma"));
    r.upsilon = parse_weight(require(j, "upsilon", path), join(path, "upsilon"));
    if (j.contains("omega")) r.omega = parse_weight(j["omega"], join(path, "omega"));
    r.rho = optional_key(j, "rho", path, as_number).value_or(1.0);
    r.tau = optional_key(j, "tau", path, as_number);
    r.d = optional_key(j, "d", path, as_number).value_or(1.0);
    validated(path, [&] { r.validate(); });
    return r;
}

inline json to_json(const ModelRegularity& r) {
    json j = {{"gamma", to_json(r.gamma)}, {"upsilon", to_json(r.upsilon)}, {"rho", r.rho}, {"d", r.d}};
    if (r.omega) j["omega"] = to_json(*r.omega);
    if (r.tau) j["tau"] = *r.tau;
    return j;
}

inline RepresenterSpec parse_representer(const json& j, const std::string& path) {
    using namespace detail;
    object_at(j, path);
    const std::string kind = as_string(require(j, "kind", path), join(path, "kind"));
    RepresenterSpec spec;
    if (kind == "point_eval") {
        check_keys(j, path, {"kind", "t0"});
        spec = PointEval{as_number(require(j, "t0", path), join(path, "t0"))};
    } else if (kind == "interval_average") {
        check_keys(j, path, {"kind", "b"});
        spec = IntervalAverage{as_number(require(j, "b", path), join(path, "b"))};
    } else if (kind == "synthetic") {
        check_keys(j, path, {"kind", "decay"});
        spec = SyntheticRepresenter{parse_weight(require(j, "decay", path), join(path, "decay"))};
    } else {
        throw ConfigError(join(path, "kind"),
                          "expected 'point_eval', 'interval_average' or 'synthetic', got '" + kind + "'");
    }
    validated(path, [&] { validate(spec); });
    return spec;
}

inline json to_json(const RepresenterSpec& spec) {
    return std::visit(
        [](const auto& r) -> json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, PointEval>) return {{"kind", "point_eval"}, {"t0", r.t0}};
            else if constexpr (std::is_same_v<T, IntervalAverage>) return {{"kind", "interval_average"}, {"b", r.b}};
            else return {{"kind", "synthetic"}, {"decay", to_json(r.decay)}};
        },
        spec);
}

inline SlopeSpec parse_slope(const json& j, const std::string& path) {
    using namespace detail;
    check_keys(j, path, {"smoothness", "sign_seed"});
    SlopeSpec s;
    s.smoothness = optional_key(j, "smoothness", path, as_number).value_or(s.smoothness);
    s.sign_seed = optional_key(j, "sign_seed", path, as_u64).value_or(s.sign_seed);
    return s;
}

inline json to_json(const SlopeSpec& s) { return {{"smoothness", s.smoothness}, {"sign_seed", s.sign_seed}}; }

/// Either explicit angles or a seeded random draw.
struct RotationSpec {
    std::optional<std::vector<double>> angles;
    Index pairs = 0;
    double max_angle = 0.0;
    std::uint64_t seed = 0;

    Rotation resolve() const {
        if (angles) return Rotation{*angles};
        return Rotation::random(pairs, max_angle, seed);
    }
};

struct CovarianceSection {
    std::optional<RotationSpec> rotation;
    std::optional<Index> M_sim;
};

inline CovarianceSection parse_covariance(const json& j, const std::string& path) {
    using namespace detail;
    check_keys(j, path, {"rotation", "M_sim"});
    CovarianceSection c;
    c.M_sim = optional_key(j, "M_sim", path, as_int);
    if (c.M_sim && *c.M_sim < 1) throw ConfigError(join(path, "M_sim"), "must be >= 1");
    if (j.contains("rotation")) {
        const std::string rp = join(path, "rotation");
        const json& r = j["rotation"];
        check_keys(r, rp, {"angles", "pairs", "max_angle", "seed"});
        RotationSpec rs;
        if (r.contains("angles")) {
            if (r.contains("pairs") || r.contains("max_angle") || r.contains("seed"))
                throw ConfigError(rp, "give either angles or pairs/max_angle/seed");
            const json& a = r["angles"];
            if (!a.is_array()) throw ConfigError(join(rp, "angles"), "expected an array of numbers");
            std::vector<double> v;
            for (std::size_t i = 0; i < a.size(); ++i)
                v.push_back(as_number(a[i], join(rp, "angles") + "[" + std::to_string(i) + "]"));
            rs.angles = std::move(v);
        } else {
            rs.pairs = as_int(require(r, "pairs", rp), join(rp, "pairs"));
            rs.max_angle = as_number(require(r, "max_angle", rp), join(rp, "max_angle"));
            rs.seed = optional_key(r, "seed", rp, as_u64).value_or(0);
            if (rs.pairs < 0) throw ConfigError(join(rp, "pairs"), "must be >= 0");
        }
        c.rotation = std::move(rs);
    }
    return c;
}

inline json to_json(const CovarianceSection& c) {
    json j = json::object();
    if (c.M_sim) j["M_sim"] = *c.M_sim;
    if (c.rotation) {
        if (c.rotation->angles) j["rotation"] = {{"angles", *c.rotation->angles}};
        else
            j["rotation"] = {
                {"pairs", c.rotation->pairs}, {"max_angle", c.rotation->max_angle}, {"seed", c.rotation->seed}};
    }
    return j;
}

struct SimulationSection {
    Index n = 0;
    double sigma = 1.0;
    std::uint64_t seed = 1;
    std::uint32_t experiment = 0;
    std::uint32_t replication = 0;
};

inline SimulationSection parse_simulation(const json& j, const std::string& path) {
    using namespace detail;
    check_keys(j, path, {"n", "sigma", "seed", "experiment", "replication"});
    SimulationSection s;
    s.n = as_int(require(j, "n", path), join(path, "n"));
    if (s.n < 1) throw ConfigError(join(path, "n"), "must be >= 1");
    s.sigma = optional_key(j, "sigma", path, as_number).value_or(1.0);
    if (!(s.sigma >= 0.0)) throw ConfigError(join(path, "sigma"), "must be >= 0");
    s.seed = optional_key(j, "seed", path, as_u64).value_or(1);
    s.experiment = optional_key(j, "experiment", path, as_u32).value_or(0);
    s.replication = optional_key(j, "replication", path, as_u32).value_or(0);
    return s;
}

inline json to_json(const SimulationSection& s) {
    return {{"n", s.n}, {"sigma", s.sigma}, {"seed", s.seed}, {"experiment", s.experiment},
            {"replication", s.replication}};
}

struct EstimateSection {
    std::string data;  // dataset CSV, relative paths resolve against the config file
    Index m = 1;
    double alpha = 1.0;
    std::optional<double> pd_tolerance;
};

inline EstimateSection parse_estimate(const json& j, const std::string& path) {
    using namespace detail;
    check_keys(j, path, {"data", "m", "alpha", "pd_tolerance"});
    EstimateSection e;
    e.data = as_string(require(j, "data", path), join(path, "data"));
    e.m = as_int(require(j, "m", path), join(path, "m"));
    e.alpha = optional_key(j, "alpha", path, as_number).value_or(1.0);
    e.pd_tolerance = optional_key(j, "pd_tolerance", path, as_number);
    EstimatorConfig ec{e.m, e.alpha, e.pd_tolerance};
    validated(path, [&] { ec.validate(); });
    return e;
}

inline json to_json(const EstimateSection& e) {
    json j = {{"data", e.data}, {"m", e.m}, {"alpha", e.alpha}};
    if (e.pd_tolerance) j["pd_tolerance"] = *e.pd_tolerance;
    return j;
}

struct RatesSection {
    std::vector<Index> n;
    bool with_Delta_star = false;
    Index m_max = 1'000'000;
    Index kappa_n_max = 10'000;
};

inline RatesSection parse_rates(const json& j, const std::string& path) {
    using namespace detail;
    check_keys(j, path, {"n", "with_Delta_star", "m_max", "kappa_n_max"});
    RatesSection r;
    r.n = as_index_list(require(j, "n", path), join(path, "n"));
    if (r.n.empty()) throw ConfigError(join(path, "n"), "must not be empty");
    for (std::size_t i = 0; i < r.n.size(); ++i)
        if (r.n[i] < 1) throw ConfigError(join(path, "n") + "[" + std::to_string(i) + "]", "must be >= 1");
    r.with_Delta_star = optional_key(j, "with_Delta_star", path, as_bool).value_or(false);
    r.m_max = optional_key(j, "m_max", path, as_int).value_or(r.m_max);
    r.kappa_n_max = optional_key(j, "kappa_n_max", path, as_int).value_or(r.kappa_n_max);
    if (r.m_max < 1) throw ConfigError(join(path, "m_max"), "must be >= 1");
    if (r.kappa_n_max < 1) throw ConfigError(join(path, "kappa_n_max"), "must be >= 1");
    return r;
}

inline json to_json(const RatesSection& r) {
    return {{"n", r.n}, {"with_Delta_star", r.with_Delta_star}, {"m_max", r.m_max}, {"kappa_n_max", r.kappa_n_max}};
}

struct StudySection {
    std::vector<Index> n_grid;
    Index replications = 500;
    std::uint64_t master_seed = 1;
    std::uint32_t experiment_id = 1;
    AlphaPolicy alpha_policy;
    double sigma = 1.0;
    double tolerance = 0.15;
    std::optional<double> reference_exponent;  // default: n-exponent of the catalogued order
    double max_threshold_rate = 0.10;
    Index m_max = 1'000'000;
    Index kappa_n_max = 10'000;
};

inline StudySection parse_study(const json& j, const std::string& path) {
    using namespace detail;
    check_keys(j, path,
               {"n_grid", "replications", "master_seed", "experiment_id", "alpha_policy", "alpha", "sigma",
                "tolerance", "reference_exponent", "max_threshold_rate", "m_max", "kappa_n_max"});
    StudySection s;
    s.n_grid = as_index_list(require(j, "n_grid", path), join(path, "n_grid"));
    s.replications = optional_key(j, "replications", path, as_int).value_or(s.replications);
    s.master_seed = optional_key(j, "master_seed", path, as_u64).value_or(s.master_seed);
    s.experiment_id = optional_key(j, "experiment_id", path, as_u32).value_or(s.experiment_id);
    const std::string pol = optional_key(j, "alpha_policy", path, as_string).value_or("optimal");
    if (pol == "optimal") s.alpha_policy.kind = AlphaPolicyKind::optimal;
    else if (pol == "unit") s.alpha_policy.kind = AlphaPolicyKind::unit;
    else if (pol == "fixed") {
        s.alpha_policy.kind = AlphaPolicyKind::fixed;
        s.alpha_policy.value = as_number(require(j, "alpha", path), join(path, "alpha"));
    } else {
        throw ConfigError(join(path, "alpha_policy"), "expected 'optimal', 'fixed' or 'unit', got '" + pol + "'");
    }
    if (s.alpha_policy.kind != AlphaPolicyKind::fixed && j.contains("alpha"))
        throw ConfigError(join(path, "alpha"), "only allowed with alpha_policy 'fixed'");
    s.sigma = optional_key(j, "sigma", path, as_number).value_or(s.sigma);
    s.tolerance = optional_key(j, "tolerance", path, as_number).value_or(s.tolerance);
    if (!(s.tolerance >= 0.0)) throw ConfigError(join(path, "tolerance"), "must be >= 0");
    s.reference_exponent = optional_key(j, "reference_exponent", path, as_number);
    s.max_threshold_rate = optional_key(j, "max_threshold_rate", path, as_number).value_or(s.max_threshold_rate);
    s.m_max = optional_key(j, "m_max", path, as_int).value_or(s.m_max);
    s.kappa_n_max = optional_key(j, "kappa_n_max", path, as_int).value_or(s.kappa_n_max);
    return s;
}

inline json to_json(const StudySection& s) {
    json j = {{"n_grid", s.n_grid},
              {"replications", s.replications},
              {"master_seed", s.master_seed},
              {"experiment_id", s.experiment_id},
              {"sigma", s.sigma},
              {"tolerance", s.tolerance},
              {"max_threshold_rate", s.max_threshold_rate},
              {"m_max", s.m_max},
              {"kappa_n_max", s.kappa_n_max}};
    switch (s.alpha_policy.kind) {
        case AlphaPolicyKind::optimal: j["alpha_policy"] = "optimal"; break;
        case AlphaPolicyKind::unit: j["alpha_policy"] = "unit"; break;
        case AlphaPolicyKind::fixed:
            j["alpha_policy"] = "fixed";
            j["alpha"] = s.alpha_policy.value;
            break;
    }
    if (s.reference_exponent) j["reference_exponent"] = *s.reference_exponent;
    return j;
}

// ---- whole document ---------------------------------------------------------

struct Config {
    std::optional<ModelRegularity> regularity;
    std::optional<RepresenterSpec> representer;
    std::optional<SlopeSpec> slope;
    std::optional<CovarianceSection> covariance;
    std::optional<SimulationSection> simulation;
    std::optional<EstimateSection> estimate;
    std::optional<RatesSection> rates;
    std::optional<StudySection> study;
    std::filesystem::path base_dir = ".";

    template <class T>
    static const T& need(const std::optional<T>& v, std::string_view section) {
        if (!v) throw ConfigError(std::string(section), "required section is missing");
        return *v;
    }
};

inline Config parse_config(const json& j) {
    using namespace detail;
    check_keys(j, "", {"regularity", "representer", "slope", "covariance", "simulation", "estimate", "rates", "study"});
    Config c;
    if (j.contains("regularity")) c.regularity = parse_regularity(j["regularity"], "regularity");
    if (j.contains("representer")) c.representer = parse_representer(j["representer"], "representer");
    if (j.contains("slope")) c.slope = parse_slope(j["slope"], "slope");
    if (j.contains("covariance")) c.covariance = parse_covariance(j["covariance"], "covariance");
    if (j.contains("simulation")) c.simulation = parse_simulation(j["simulation"], "simulation");
    if (j.contains("estimate")) c.estimate = parse_estimate(j["estimate"], "estimate");
    if (j.contains("rates")) c.rates = parse_rates(j["rates"], "rates");
    if (j.contains("study")) c.study = parse_study(j["study"], "study");
    return c;
}

inline Config parse_config_text(std::string_view text) {
    json j;
    try {
        j = json::parse(text.begin(), text.end(), nullptr, true, false);
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed config: ") + e.what());
    }
    return parse_config(j);
}

inline Config load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("", "cannot open config file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    Config c = parse_config_text(ss.str());
    c.base_dir = file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");
    return c;
}

/// Resolved configuration, defaults filled in.
inline json to_json(const Config& c) {
    json j = json::object();
    if (c.regularity) j["regularity"] = to_json(*c.regularity);
    if (c.representer) j["representer"] = to_json(*c.representer);
    if (c.slope) j["slope"] = to_json(*c.slope);
    if (c.covariance) j["covariance"] = to_json(*c.covariance);
    if (c.simulation) j["simulation"] = to_json(*c.simulation);
    if (c.estimate) j["estimate"] = to_json(*c.estimate);
    if (c.rates) j["rates"] = to_json(*c.rates);
    if (c.study) j["study"] = to_json(*c.study);
    return j;
}

/// Study inputs from the regularity, representer, slope, covariance and study sections.
inline StudyConfig make_study_config(const Config& c) {
    const auto& reg = Config::need(c.regularity, "regularity");
    const auto& rep = Config::need(c.representer, "representer");
    const auto& st = Config::need(c.study, "study");
    StudyConfig s;
    s.reg = reg;
    s.representer = rep;
    s.beta_spec = c.slope.value_or(SlopeSpec{});
    s.sigma = st.sigma;
    s.n_grid = st.n_grid;
    s.replications = st.replications;
    s.master_seed = st.master_seed;
    s.experiment_id = st.experiment_id;
    s.alpha_policy = st.alpha_policy;
    s.m_max = st.m_max;
    s.kappa_n_max = st.kappa_n_max;
    s.max_threshold_rate = st.max_threshold_rate;
    if (c.covariance) {
        if (c.covariance->rotation) s.rotation = c.covariance->rotation->resolve();
        s.M_sim = c.covariance->M_sim;
    }
    detail::validated("study", [&] { s.validate(); });
    return s;
}

inline CovarianceModel make_covariance(const Config& c, Index default_M) {
    CovarianceModel m;
    m.spectrum = Config::need(c.regularity, "regularity").upsilon;
    m.M_sim = default_M;
    if (c.covariance) {
        if (c.covariance->rotation) m.rotation = c.covariance->rotation->resolve();
        if (c.covariance->M_sim) m.M_sim = *c.covariance->M_sim;
    }
    detail::validated("covariance", [&] { m.validate(); });
    return m;
}

/// Sidecar record for an exported dataset.
inline json dataset_meta_json(const DatasetMeta& meta, const Config& c) {
    json j = {{"seed", meta.seed},
              {"experiment", meta.experiment},
              {"replication", meta.replication},
              {"sigma", meta.sigma},
              {"beta_id", meta.beta_id},
              {"covariance_id", meta.covariance_id},
              {"config", to_json(c)}};
    if (c.regularity) j["spectrum"] = to_json(c.regularity->upsilon);
    return j;
}

inline DatasetMeta parse_dataset_meta(const json& j, const std::string& path) {
    using namespace detail;
    object_at(j, path);
    DatasetMeta m;
    m.seed = as_u64(require(j, "seed", path), join(path, "seed"));
    m.experiment = optional_key(j, "experiment", path, as_u32).value_or(0);
    m.replication = optional_key(j, "replication", path, as_u32).value_or(0);
    m.sigma = optional_key(j, "sigma", path, as_number).value_or(1.0);
    m.beta_id = optional_key(j, "beta_id", path, as_string).value_or("");
    m.covariance_id = optional_key(j, "covariance_id", path, as_string).value_or("");
    return m;
}

}  // namespace flr::io
