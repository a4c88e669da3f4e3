#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "roq/multiclass.hpp"
#include "roq/simkit.hpp"
#include "roq/tandem.hpp"

namespace roq::campaign {

/// Per-replication dominance check for the tandem model: draw a path,
/// certify its tail-sum budgets, lift them by the e^{2e}/lambda floor,
/// and compare the realized sojourn of job n against the closed-form
/// bound evaluated at the certified budgets.
struct TscValidateConfig {
    tandem::TscInstance inst;
    sim::DistSpec arrival;
    std::vector<sim::DistSpec> services;
    int replications = 100;
    std::uint64_t seed = 1;
    int threads = 0;
    bool tamper = false; // inflate one service after certification (harness self-test)
};

struct TscValidateResult {
    int replications = 0;
    int violations = 0;
    double mean_sojourn = 0.0;
    double max_sojourn = 0.0;
    double min_bound = 0.0;
    double mean_bound = 0.0;
    double max_gamma = 0.0;
    std::vector<int> violating;
    std::optional<tandem::TscPath> offending_path;

    nlohmann::json to_json() const;
};

TscValidateResult validate_tsc(const TscValidateConfig& cfg);

/// Multiclass counterpart: per replication every completed busy period
/// must sit under the busy bound and every per-period workload peak
/// under the workload bound, both evaluated at that path's certified
/// budget. Optionally also samples the arrival-process inequalities at
/// times above the validity threshold (arrival clocks are drawn past the
/// trace horizon for that, and certified over the full drawn range).
struct McssValidateConfig {
    mcss::McssInstance inst;
    std::vector<sim::DistSpec> arrivals;
    std::vector<sim::DistSpec> services;
    int replications = 100;
    double horizon = 1e4;
    std::uint64_t seed = 1;
    int threads = 0;
    bool arrival_checks = false;
    int arrival_check_samples = 20;
};

struct McssValidateResult {
    int replications = 0;
    long periods = 0;
    int busy_violations = 0;
    int peak_violations = 0;
    int arrival_check_violations = 0;
    double max_busy = 0.0;
    double max_peak = 0.0;
    double min_busy_bound = 0.0;
    double min_peak_bound = 0.0;
    double max_gamma = 0.0;
    double mean_workload_time_avg = 0.0;
    double eb = 0.0, ei = 0.0, eb2 = 0.0;
    std::vector<int> violating;

    nlohmann::json to_json() const;
};

McssValidateResult validate_mcss(const McssValidateConfig& cfg);

} // namespace roq::campaign
