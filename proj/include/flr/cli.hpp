#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "flr/error.hpp"
#include "flr/estimator.hpp"
#include "flr/experiments.hpp"
#include "flr/io/config.hpp"
#include "flr/io/csv.hpp"
#include "flr/rates.hpp"
#include "flr/representer.hpp"
#include "flr/simulation.hpp"

namespace flr::cli {

namespace fs = std::filesystem;

enum class Command { rates, simulate, estimate, study, certify };

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_certification = 2 };

struct RunManifest {
    Command command = Command::rates;
    fs::path config_path;
    fs::path output_dir = ".";
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::optional<double> tolerance;
};

namespace detail {

inline std::ofstream open_output(const fs::path& dir, const std::string& name) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw ConfigError("--out", "cannot write " + (dir / name).string());
    return out;
}

inline void apply_overrides(io::Config& cfg, const RunManifest& run) {
    if (run.seed) {
        if (cfg.simulation) cfg.simulation->seed = *run.seed;
        if (cfg.study) cfg.study->master_seed = *run.seed;
    }
    if (run.tolerance && cfg.study) cfg.study->tolerance = *run.tolerance;
}

inline std::string echo(const io::Config& cfg) { return io::to_json(cfg).dump(); }

}  // namespace detail

/// k*, a*, kappa, delta*, Delta* and catalogued orders for every n in rates.n.
inline int cmd_rates(const io::Config& cfg, const RunManifest& run, std::ostream& log) {
    const auto& reg = io::Config::need(cfg.regularity, "regularity");
    const auto& rep = io::Config::need(cfg.representer, "representer");
    const auto& rs = io::Config::need(cfg.rates, "rates");
    if (rs.with_Delta_star && !reg.omega)
        throw ConfigError("regularity.omega", "omega is required when rates.with_Delta_star is set");
    if (rs.with_Delta_star && !reg.tau)
        throw ConfigError("regularity.tau", "tau is required when rates.with_Delta_star is set");

    RatesOptions opt;
    opt.m_max = rs.m_max;
    opt.kappa_n_max = rs.kappa_n_max;
    opt.with_Delta_star = rs.with_Delta_star;
    const KappaResult kappa = compute_kappa(reg, rs.kappa_n_max, rs.m_max);
    std::vector<RatesProfile> rows;
    for (Index n : rs.n) rows.push_back(rates_profile(reg, rep, n, kappa, opt));

    auto out = detail::open_output(run.output_dir, "rates.csv");
    io::write_rates_csv(out, rows, detail::echo(cfg));
    log << "rates: wrote " << rows.size() << " row(s) to " << (run.output_dir / "rates.csv").string() << '\n';
    return exit_ok;
}

/// One dataset from the simulation section, plus its metadata sidecar.
inline int cmd_simulate(const io::Config& cfg, const RunManifest& run, std::ostream& log) {
    const auto& reg = io::Config::need(cfg.regularity, "regularity");
    const auto& sim = io::Config::need(cfg.simulation, "simulation");
    const SlopeSpec slope = cfg.slope.value_or(SlopeSpec{});

    const Index default_M = default_truncation(compute_kstar(reg, sim.n).k);
    const CovarianceModel model = io::make_covariance(cfg, default_M);
    const CoeffVector beta = synth_slope(slope, reg.gamma, reg.rho, model.M_sim);
    RngStream rng(sim.seed, sim.experiment, sim.replication);
    const Dataset ds = sample_dataset(beta, sim.sigma, model, sim.n, rng, "synth(s=" + io::format_double(slope.smoothness) + ")");

    {
        auto out = detail::open_output(run.output_dir, "dataset.csv");
        io::write_dataset_csv(out, ds, detail::echo(cfg));
    }
    {
        auto out = detail::open_output(run.output_dir, "dataset.meta.json");
        out << io::dataset_meta_json(ds.meta, cfg).dump(2) << '\n';
    }
    log << "simulate: n=" << ds.n() << " M=" << ds.M() << " -> " << (run.output_dir / "dataset.csv").string()
        << '\n';
    return exit_ok;
}

inline fs::path sidecar_path(const fs::path& data) {
    fs::path p = data;
    p.replace_extension(".meta.json");
    return p;
}

/// Thresholded plug-in estimate on a dataset CSV.
inline int cmd_estimate(const io::Config& cfg, const RunManifest& run, std::ostream& log) {
    const auto& est = io::Config::need(cfg.estimate, "estimate");
    const auto& rep = io::Config::need(cfg.representer, "representer");
    fs::path data = est.data;
    if (data.is_relative()) data = cfg.base_dir / data;
    std::ifstream in(data);
    if (!in) throw ConfigError("estimate.data", "cannot open " + data.string());
    const Dataset ds = io::read_dataset_csv(in);
    if (est.m > ds.M())
        throw ConfigError("estimate.m", "m=" + std::to_string(est.m) + " exceeds the data truncation M=" +
                                            std::to_string(ds.M()));

    std::uint64_t seed = 0;
    if (std::ifstream side(sidecar_path(data)); side) {
        try {
            seed = io::parse_dataset_meta(io::json::parse(side), "sidecar").seed;
        } catch (const io::json::parse_error& e) {
            throw ConfigError("sidecar", std::string("malformed dataset metadata: ") + e.what());
        }
    }
    const CoeffVector h = representer_coeffs(rep, ds.M());
    const EstimateReport r = plug_in_estimate(h, ds, EstimatorConfig{est.m, est.alpha, est.pd_tolerance});

    auto out = detail::open_output(run.output_dir, "estimate.csv");
    io::write_comment_header(out, detail::echo(cfg), seed);
    out << io::estimate_csv_header() << '\n' << io::estimate_csv_row(r, ds.n(), seed) << '\n';
    log << io::estimate_csv_header() << '\n' << io::estimate_csv_row(r, ds.n(), seed) << '\n';
    return exit_ok;
}

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Reference slope and the checks a study is judged by.
inline std::vector<CheckOutcome> study_checks(const StudyResult& res, const io::StudySection& st, bool full) {
    std::vector<CheckOutcome> out;
    const std::optional<double> ref = st.reference_exponent ? st.reference_exponent : res.catalog_exponent();
    {
        CheckOutcome c{"slope", false, ""};
        if (!ref) {
            c.detail = "no reference exponent (uncatalogued case and none configured)";
        } else if (res.points_in_fit < 2) {
            c.detail = "fewer than two usable grid points";
        } else {
            const double gap = std::abs(res.fitted_slope - *ref);
            c.pass = gap <= st.tolerance;
            c.detail = "fitted " + io::format_double(res.fitted_slope) + " vs reference " + io::format_double(*ref) +
                       ", |gap| " + io::format_double(gap) + " tolerance " + io::format_double(st.tolerance);
        }
        out.push_back(c);
    }
    if (!full) return out;
    {
        CheckOutcome c{"delta_tracking", std::abs(res.delta_tracking_slope) <= st.tolerance,
                       "slope of log(mse/delta*) " + io::format_double(res.delta_tracking_slope)};
        out.push_back(c);
    }
    {
        CheckOutcome c{"threshold_rate", true, ""};
        for (const auto& p : res.per_n)
            if (p.threshold_rate > st.max_threshold_rate) {
                c.pass = false;
                c.detail += "n=" + std::to_string(p.n) + " rate " + io::format_double(p.threshold_rate) + "; ";
            }
        out.push_back(c);
    }
    {
        CheckOutcome c{"lower_bound", true, ""};
        for (const auto& p : res.per_n)
            if (p.lower_bound_value > p.mse) {
                c.pass = false;
                c.detail += "n=" + std::to_string(p.n) + " bound " + io::format_double(p.lower_bound_value) +
                            " > mse " + io::format_double(p.mse) + "; ";
            }
        out.push_back(c);
    }
    return out;
}

inline io::json study_summary(const StudyResult& res, const io::StudySection& st,
                              const std::vector<CheckOutcome>& checks, const io::Config& cfg) {
    const std::optional<double> ref = st.reference_exponent ? st.reference_exponent : res.catalog_exponent();
    io::json j;
    j["fitted_slope"] = res.fitted_slope;
    j["slope_se"] = res.slope_se;
    j["points_in_fit"] = res.points_in_fit;
    j["delta_tracking_slope"] = res.delta_tracking_slope;
    j["reference_exponent"] = ref ? io::json(*ref) : io::json(nullptr);
    j["catalog_order"] = res.catalog_order ? io::json(res.catalog_order->text()) : io::json(nullptr);
    j["case"] = res.case_tag ? io::json(std::string(to_string(*res.case_tag))) : io::json(nullptr);
    j["tolerance"] = st.tolerance;
    j["kappa"] = res.kappa;
    j["d"] = res.d;
    j["truth"] = res.truth;
    j["truth_tail_bound"] = res.truth_tail_bound;
    j["M_sim"] = res.M_sim;
    j["warnings"] = res.warnings;
    bool pass = true;
    io::json cj = io::json::array();
    for (const auto& c : checks) {
        cj.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        pass = pass && c.pass;
    }
    j["checks"] = cj;
    j["pass"] = pass;
    j["seed"] = st.master_seed;
    j["config"] = io::to_json(cfg);
    return j;
}

/// rate_study with CSV + summary output; exit 2 when a check fails.
inline int cmd_study(const io::Config& cfg, const RunManifest& run, std::ostream& log, bool full) {
    const StudyConfig sc = io::make_study_config(cfg);
    const auto& st = *cfg.study;
    const StudyResult res = rate_study(sc, run.workers);
    const auto checks = study_checks(res, st, full);
    {
        auto out = detail::open_output(run.output_dir, "study.csv");
        io::write_study_csv(out, res, detail::echo(cfg), st.master_seed);
    }
    const io::json summary = study_summary(res, st, checks, cfg);
    {
        auto out = detail::open_output(run.output_dir, "study_summary.json");
        out << summary.dump(2) << '\n';
    }
    for (const auto& w : res.warnings) log << "warning: " << w << '\n';
    for (const auto& c : checks) log << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    return summary["pass"].get<bool>() ? exit_ok : exit_certification;
}

inline int run(const RunManifest& run, std::ostream& log) {
    io::Config cfg = io::load_config(run.config_path);
    detail::apply_overrides(cfg, run);
    switch (run.command) {
        case Command::rates: return cmd_rates(cfg, run, log);
        case Command::simulate: return cmd_simulate(cfg, run, log);
        case Command::estimate: return cmd_estimate(cfg, run, log);
        case Command::study: return cmd_study(cfg, run, log, false);
        case Command::certify: return cmd_study(cfg, run, log, true);
    }
    return exit_config;
}

/// Parses argv, runs the command and maps library errors to exit codes.
inline int main(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
    CLI::App app{"Thresholded plug-in estimation of linear functionals in functional linear regression"};
    app.require_subcommand(1);
    RunManifest m;
    std::string config, out = ".";
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::optional<double> tolerance;

    const std::pair<const char*, const char*> cmds[] = {
        {"rates", "k*, a*, kappa, delta*, Delta* per n"},
        {"simulate", "simulate one dataset"},
        {"estimate", "plug-in estimate from a dataset CSV"},
        {"study", "Monte Carlo rate study with slope check"},
        {"certify", "rate study with all certification checks"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, desc] : cmds) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->add_option("--config", config, "config file (JSON)")->required()->check(CLI::ExistingFile);
        s->add_option("--out", out, "output directory");
        s->add_option("--seed", seed, "override the master seed");
        s->add_option("--workers", workers, "worker threads for replications")->check(CLI::PositiveNumber);
        s->add_option("--tolerance", tolerance, "slope tolerance")->check(CLI::NonNegativeNumber);
        subs.push_back(s);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        log << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return exit_config;
    }
    const Command order[] = {Command::rates, Command::simulate, Command::estimate, Command::study, Command::certify};
    for (std::size_t i = 0; i < subs.size(); ++i)
        if (subs[i]->parsed()) m.command = order[i];
    m.config_path = config;
    m.output_dir = out;
    m.seed = seed;
    m.workers = workers;
    m.tolerance = tolerance;

    try {
        return run(m, log);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
    } catch (const SideConditionError& e) {
        err << "side condition violated: " << e.what() << '\n';
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return exit_config;
}

}  // namespace flr::cli
