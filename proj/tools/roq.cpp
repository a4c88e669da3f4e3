// Command-line front end: closed-form bounds, simulation validation
// campaigns, the adversarial envelope maximizer, and bound-vs-load curves.
//
// Exit codes: 0 ok, 1 runtime error, 2 precondition violation,
// 3 dominance violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "roq/campaign.hpp"
#include "roq/csv.hpp"
#include "roq/envelope_math.hpp"
#include "roq/errors.hpp"
#include "roq/lil.hpp"
#include "roq/multiclass.hpp"
#include "roq/simkit.hpp"
#include "roq/tandem.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string model;
    std::string instance_path;
    std::string config_path;
    std::string out_dir = ".";
    std::string path_csv;
    std::string rho_grid;
    std::string policy = "fifo";
    int replications = 0;
    long jobs = 0;
    double horizon = 0.0;
    std::uint64_t seed = 1;
    bool seed_set = false;
    int threads = 0;
    bool tamper = false;
    bool arrival_checks = false;
};

json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw roq::RuntimeError("FileError", "cannot open " + path);
    json j;
    f >> j;
    return j;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw roq::RuntimeError("FileError", "cannot write " + path);
    f << j.dump(2) << "\n";
}

struct LoadedConfig {
    json config;  // may be empty
    json instance;
    std::string model;
};

LoadedConfig load_config(const Options& opt) {
    LoadedConfig out;
    out.config = json::object();
    if (!opt.config_path.empty()) out.config = load_json(opt.config_path);
    out.model = !opt.model.empty() ? opt.model : out.config.value("model", std::string{});
    if (out.model != "tsc" && out.model != "mcss") {
        roq::fail_precondition("InvalidConfig", "--model must be tsc or mcss");
    }
    if (!opt.instance_path.empty()) {
        out.instance = load_json(opt.instance_path);
    } else if (out.config.contains("instance")) {
        if (out.config["instance"].is_string()) {
            out.instance = load_json(out.config["instance"].get<std::string>());
        } else {
            out.instance = out.config["instance"];
        }
    } else {
        roq::fail_precondition("InvalidConfig", "no instance given (--instance or config)");
    }
    return out;
}

int resolve_replications(const Options& opt, const json& config, int fallback) {
    if (opt.replications > 0) return opt.replications;
    return config.value("replications", fallback);
}

std::uint64_t resolve_seed(const Options& opt, const json& config) {
    if (opt.seed_set) return opt.seed;
    return config.value("seed", std::uint64_t{1});
}

roq::sim::DistSpec spec_or_exponential(const json& config, const char* key, std::size_t index,
                                       double rate) {
    if (config.contains("distributions") && config["distributions"].contains(key)) {
        const json& node = config["distributions"][key];
        if (node.is_array()) return roq::sim::DistSpec::from_json(node.at(index));
        return roq::sim::DistSpec::from_json(node);
    }
    return roq::sim::DistSpec::exponential(rate);
}

// ---------------------------------------------------------------- bound

int run_bound(const Options& opt) {
    const auto loaded = load_config(opt);
    fs::create_directories(opt.out_dir);
    json report;
    if (loaded.model == "tsc") {
        auto inst = roq::tandem::TscInstance::from_json(loaded.instance);
        report = roq::tandem::sojourn_bound(inst).to_json();
        std::cout << "tsc sojourn bound: " << report["value"].get<double>() << "\n";
    } else {
        auto inst = roq::mcss::McssInstance::from_json(loaded.instance);
        auto bounds = roq::mcss::busy_workload_bounds(inst);
        report = {{"busy", bounds.busy_report.to_json()},
                  {"workload", bounds.workload_report.to_json()}};
        std::cout << "mcss busy-period bound: " << bounds.busy_bound
                  << "\nmcss peak-workload bound: " << bounds.workload_bound << "\n";
    }
    write_json((fs::path(opt.out_dir) / "bound_report.json").string(), report);
    return 0;
}

// ------------------------------------------------------------- validate

int run_validate(const Options& opt) {
    const auto loaded = load_config(opt);
    fs::create_directories(opt.out_dir);
    const auto& config = loaded.config;

    if (loaded.model == "tsc") {
        roq::campaign::TscValidateConfig cfg;
        cfg.inst = roq::tandem::TscInstance::from_json(loaded.instance);
        if (opt.jobs > 0) cfg.inst.jobs = static_cast<std::size_t>(opt.jobs);
        cfg.arrival = spec_or_exponential(config, "arrival", 0, cfg.inst.lambda);
        for (std::size_t j = 0; j < cfg.inst.servers; ++j) {
            cfg.services.push_back(spec_or_exponential(config, "services", j, cfg.inst.mu[j]));
        }
        cfg.replications = resolve_replications(opt, config, 100);
        cfg.seed = resolve_seed(opt, config);
        cfg.threads = opt.threads;
        cfg.tamper = opt.tamper;
        auto res = roq::campaign::validate_tsc(cfg);
        json report = res.to_json();
        report["model"] = "tsc";
        report["seed"] = cfg.seed;
        write_json((fs::path(opt.out_dir) / "validate_report.json").string(), report);
        std::cout << "replications: " << res.replications << ", violations: " << res.violations
                  << ", mean sojourn: " << res.mean_sojourn << ", min bound: " << res.min_bound
                  << "\n";
        if (res.violations > 0) {
            if (res.offending_path) {
                roq::csv::write_tsc_path((fs::path(opt.out_dir) / "offending_path.csv").string(),
                                         res.offending_path->u, res.offending_path->v);
            }
            throw roq::DominanceViolation("observed sojourn exceeded the certified bound; "
                                          "offending path dumped");
        }
        return 0;
    }

    roq::campaign::McssValidateConfig cfg;
    cfg.inst = roq::mcss::McssInstance::from_json(loaded.instance);
    for (std::size_t j = 0; j < cfg.inst.classes; ++j) {
        cfg.arrivals.push_back(
            spec_or_exponential(config, "arrivals", j,
                                cfg.inst.lambda[j] > 0.0 ? cfg.inst.lambda[j] : 1.0));
        cfg.services.push_back(spec_or_exponential(config, "services", j, cfg.inst.mu[j]));
    }
    cfg.replications = resolve_replications(opt, config, 100);
    cfg.horizon = opt.horizon > 0.0 ? opt.horizon : config.value("horizon", 1e4);
    cfg.seed = resolve_seed(opt, config);
    cfg.threads = opt.threads;
    cfg.arrival_checks = opt.arrival_checks || config.value("arrival_checks", false);
    auto res = roq::campaign::validate_mcss(cfg);
    json report = res.to_json();
    report["model"] = "mcss";
    report["seed"] = cfg.seed;
    write_json((fs::path(opt.out_dir) / "validate_report.json").string(), report);
    {
        // busy-period log of the first replication, for inspection
        auto path = roq::sim::draw_path_mcss(cfg.inst, cfg.arrivals, cfg.services, cfg.horizon,
                                             cfg.seed, 0);
        auto tr = roq::mcss::workload_trace(cfg.inst, path, roq::mcss::PolicySpec::fifo());
        std::vector<roq::csv::BusyRow> rows;
        for (const auto& p : tr.log.periods) rows.push_back({p.start, p.busy, p.idle, p.peak});
        roq::csv::write_busy_log((fs::path(opt.out_dir) / "busy_log_rep0.csv").string(), rows);
    }
    std::cout << "replications: " << res.replications << ", busy periods: " << res.periods
              << ", busy violations: " << res.busy_violations
              << ", peak violations: " << res.peak_violations << "\n";
    if (res.busy_violations + res.peak_violations + res.arrival_check_violations > 0) {
        if (!res.violating.empty()) {
            // Re-simulate the first offending replication (streams are
            // deterministic) and dump its busy-period log.
            const int r = res.violating.front();
            auto path = roq::sim::draw_path_mcss(cfg.inst, cfg.arrivals, cfg.services, cfg.horizon,
                                                 cfg.seed, static_cast<std::uint32_t>(r));
            auto tr = roq::mcss::workload_trace(cfg.inst, path, roq::mcss::PolicySpec::fifo());
            std::vector<roq::csv::BusyRow> rows;
            for (const auto& p : tr.log.periods) rows.push_back({p.start, p.busy, p.idle, p.peak});
            roq::csv::write_busy_log((fs::path(opt.out_dir) / "offending_busy_log.csv").string(),
                                     rows);
        }
        throw roq::DominanceViolation("busy-period or workload bound violated; log dumped");
    }
    return 0;
}

// ------------------------------------------------------------ adversary

double chain_objective(const roq::tandem::Envelope& env, const std::vector<std::size_t>& chain) {
    const std::size_t J = chain.size();
    double value = env.s_max(J, chain[J - 1]) - env.a_min(chain[0] + 1);
    for (std::size_t j = 1; j < J; ++j) {
        value += env.s_max(j, chain[j - 1]) - env.s_min(j, chain[j] + 1);
    }
    return value;
}

void enumerate_chains(const roq::tandem::Envelope& env, std::vector<std::size_t>& chain,
                      std::size_t j, double& best) {
    const std::size_t J = env.servers(), n = env.jobs();
    if (j == J) {
        best = std::max(best, chain_objective(env, chain));
        return;
    }
    const std::size_t lo = j == 0 ? 1 : chain[j - 1];
    for (std::size_t k = lo; k <= n; ++k) {
        chain[j] = k;
        enumerate_chains(env, chain, j + 1, best);
    }
}

int run_adversary(const Options& opt) {
    const auto loaded = load_config(opt);
    if (loaded.model != "tsc") {
        roq::fail_precondition("InvalidConfig", "adversary runs on the tsc model");
    }
    fs::create_directories(opt.out_dir);
    auto inst = roq::tandem::TscInstance::from_json(loaded.instance);
    if (opt.jobs > 0) inst.jobs = static_cast<std::size_t>(opt.jobs);

    json report;
    roq::tandem::Envelope env;
    std::optional<double> lindley_value;
    if (!opt.path_csv.empty()) {
        auto file = roq::csv::read_tsc_path(opt.path_csv);
        roq::tandem::TscPath path{file.u, file.v};
        if (path.servers() != inst.servers) {
            roq::fail_precondition("DimensionMismatch", "path servers do not match instance");
        }
        inst.jobs = path.jobs();
        if (inst.jobs > 2000) {
            roq::fail_precondition("AdversaryTooLarge", "dynamic program capped at n <= 2000");
        }
        env = roq::tandem::envelope_from_path(path);
        lindley_value = roq::tandem::lindley_sojourn(inst, path).sojourn.back();
        report["envelope"] = "degenerate(path)";
    } else {
        if (inst.jobs > 2000) {
            roq::fail_precondition("AdversaryTooLarge", "dynamic program capped at n <= 2000");
        }
        env = roq::tandem::lil_envelope(inst);
        report["envelope"] = "lil";
    }

    auto dp = roq::tandem::envelope_bound_chain(inst, env);
    report["value"] = dp.value;
    report["argmax_chain"] = dp.chain;
    if (lindley_value) {
        report["lindley_sojourn"] = *lindley_value;
        report["matches_lindley"] =
            std::abs(*lindley_value - dp.value) <= 1e-9 * (1.0 + std::abs(dp.value));
    }
    if (inst.jobs <= 12 && inst.servers <= 3) {
        double brute = -std::numeric_limits<double>::infinity();
        std::vector<std::size_t> chain(inst.servers, 1);
        enumerate_chains(env, chain, 0, brute);
        report["brute_force"] = brute;
        report["agreement"] = brute == dp.value;
    }
    if (inst.gamma_large() && inst.rho_star() < 1.0) {
        const double closed = roq::tandem::sojourn_bound_value(inst);
        report["closed_form_bound"] = closed;
        report["below_closed_form"] = dp.value <= closed;
    }
    write_json((fs::path(opt.out_dir) / "adversary_report.json").string(), report);
    std::cout << "adversarial sojourn value: " << dp.value << "\n";
    return 0;
}

// ---------------------------------------------------------------- curve

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        grid.push_back(std::stod(tok));
    }
    if (grid.empty()) {
        roq::fail_precondition("InvalidConfig", "--rho-grid must list at least one value");
    }
    for (double r : grid) {
        if (!(r > 0.0 && r < 1.0)) {
            roq::fail_precondition("InvalidConfig", "rho grid values must lie in (0,1)");
        }
    }
    return grid;
}

int run_curve(const Options& opt) {
    const auto loaded = load_config(opt);
    fs::create_directories(opt.out_dir);
    const auto grid = parse_grid(!opt.rho_grid.empty()
                                     ? opt.rho_grid
                                     : loaded.config.value("rho_grid", std::string{}));
    const auto& config = loaded.config;
    const int reps = resolve_replications(opt, config, 50);
    const std::uint64_t seed = resolve_seed(opt, config);

    struct Row {
        double rho, bound, estimate, ratio;
    };
    std::vector<Row> rows;
    double gamma_global = 0.0;

    if (loaded.model == "tsc") {
        auto base = roq::tandem::TscInstance::from_json(loaded.instance);
        if (opt.jobs > 0) base.jobs = static_cast<std::size_t>(opt.jobs);
        std::vector<double> estimates;
        for (double rho : grid) {
            auto inst = base;
            inst.mu.assign(inst.servers, inst.lambda / rho);
            roq::campaign::TscValidateConfig cfg;
            cfg.inst = inst;
            cfg.arrival = roq::sim::DistSpec::exponential(inst.lambda);
            for (std::size_t j = 0; j < inst.servers; ++j) {
                cfg.services.push_back(roq::sim::DistSpec::exponential(inst.mu[j]));
            }
            cfg.replications = reps;
            cfg.seed = seed;
            cfg.threads = opt.threads;
            auto res = roq::campaign::validate_tsc(cfg);
            estimates.push_back(res.mean_sojourn);
            gamma_global = std::max(gamma_global, res.max_gamma);
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
            auto inst = base;
            inst.mu.assign(inst.servers, inst.lambda / grid[i]);
            inst.gamma_a = gamma_global;
            inst.gamma_s.assign(inst.servers, gamma_global);
            const double bound = roq::tandem::sojourn_bound_value(inst);
            rows.push_back({grid[i], bound, estimates[i], bound / estimates[i]});
        }
    } else {
        auto base = roq::mcss::McssInstance::from_json(loaded.instance);
        const double rho_base = roq::mcss::traffic_solve(base).rho;
        const double horizon = opt.horizon > 0.0 ? opt.horizon : config.value("horizon", 1e4);
        std::vector<double> estimates;
        for (double rho : grid) {
            auto inst = base;
            for (auto& m : inst.mu) m *= rho_base / rho;
            roq::campaign::McssValidateConfig cfg;
            cfg.inst = inst;
            for (std::size_t j = 0; j < inst.classes; ++j) {
                cfg.arrivals.push_back(roq::sim::DistSpec::exponential(
                    inst.lambda[j] > 0.0 ? inst.lambda[j] : 1.0));
                cfg.services.push_back(roq::sim::DistSpec::exponential(inst.mu[j]));
            }
            cfg.replications = reps;
            cfg.horizon = horizon;
            cfg.seed = seed;
            cfg.threads = opt.threads;
            auto res = roq::campaign::validate_mcss(cfg);
            estimates.push_back(res.mean_workload_time_avg);
            gamma_global = std::max(gamma_global, res.max_gamma);
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
            auto inst = base;
            for (auto& m : inst.mu) m *= rho_base / grid[i];
            const double bound =
                roq::mcss::busy_workload_bounds_with_gamma(inst, gamma_global).workload_bound;
            rows.push_back({grid[i], bound, estimates[i], bound / estimates[i]});
        }
    }

    std::ostringstream csv;
    csv << "rho,bound,estimate,ratio\n";
    for (const auto& r : rows) {
        csv << roq::csv::format_double(r.rho) << "," << roq::csv::format_double(r.bound) << ","
            << roq::csv::format_double(r.estimate) << "," << roq::csv::format_double(r.ratio)
            << "\n";
    }
    roq::csv::write_text((fs::path(opt.out_dir) / "curve.csv").string(), csv.str());

    roq::svg::Series bound_series{"bound", "#c0392b", {}, {}};
    roq::svg::Series est_series{"simulated mean", "#2471a3", {}, {}};
    for (const auto& r : rows) {
        bound_series.x.push_back(r.rho);
        bound_series.y.push_back(r.bound);
        est_series.x.push_back(r.rho);
        est_series.y.push_back(r.estimate);
    }
    roq::csv::write_text((fs::path(opt.out_dir) / "curve.svg").string(),
                         roq::svg::line_chart(loaded.model == "tsc"
                                                  ? "sojourn bound vs simulated mean"
                                                  : "workload bound vs simulated mean",
                                              "traffic intensity", {bound_series, est_series}));
    std::cout << "curve written: " << rows.size() << " rows\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust-optimization queueing bounds toolkit"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--model", opt.model, "tsc or mcss");
        cmd->add_option("--instance", opt.instance_path, "instance JSON file");
        cmd->add_option("--config", opt.config_path, "run-config JSON file");
        cmd->add_option("--out", opt.out_dir, "output directory");
        cmd->add_option("--replications", opt.replications, "Monte Carlo replications");
        cmd->add_option("--horizon", opt.horizon, "simulated time horizon (mcss)");
        cmd->add_option("--jobs", opt.jobs, "job count n (tsc)");
        cmd->add_option("--seed", opt.seed, "base RNG seed")
            ->each([&opt](const std::string&) { opt.seed_set = true; });
        cmd->add_option("--threads", opt.threads, "worker threads (default: ROQ_THREADS or all)");
    };

    auto* bound = app.add_subcommand("bound", "closed-form bounds for an instance");
    add_common(bound);
    auto* validate = app.add_subcommand("validate", "simulate and check pathwise dominance");
    add_common(validate);
    validate->add_flag("--tamper", opt.tamper,
                       "inflate one service time after certification (harness self-test)");
    validate->add_flag("--arrival-checks", opt.arrival_checks,
                       "also sample the arrival-process inequalities (mcss)");
    auto* adversary = app.add_subcommand("adversary", "envelope dynamic program");
    add_common(adversary);
    adversary->add_option("--path", opt.path_csv, "tandem path CSV for a degenerate envelope");
    auto* curve = app.add_subcommand("curve", "bound and simulated mean vs traffic intensity");
    add_common(curve);
    curve->add_option("--rho-grid", opt.rho_grid, "comma-separated rho values in (0,1)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bound->parsed()) return run_bound(opt);
        if (validate->parsed()) return run_validate(opt);
        if (adversary->parsed()) return run_adversary(opt);
        if (curve->parsed()) return run_curve(opt);
        return 1;
    } catch (const roq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case roq::ErrorKind::Precondition: return 2;
            case roq::ErrorKind::Dominance: return 3;
            case roq::ErrorKind::Runtime: return 1;
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
