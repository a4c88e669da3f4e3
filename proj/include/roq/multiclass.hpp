#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "roq/errors.hpp"
#include "roq/report.hpp"
#include "roq/sim_random.hpp"

namespace roq::mcss {

/// Single server shared by J job classes with deterministic 0/1 routing.
/// P[i][j] = 1 routes class i completions into buffer j; the matrix is
/// nilpotent, so every job leaves after at most J services.
struct McssInstance {
    std::size_t classes = 1;          // J
    std::vector<double> lambda;       // external arrival rates (0 = none)
    std::vector<double> mu;           // service rates
    std::vector<std::vector<int>> routing; // P, 0/1 entries
    std::vector<double> gamma_a;
    std::vector<double> gamma_s;

    void validate() const; // sizes, 0/1 entries, row sums <= 1, nilpotency

    /// Integer closure [I - P^T]^{-1} = sum_k (P^T)^k (finite: P nilpotent).
    std::vector<std::vector<long>> arrival_closure() const;

    /// Buffers visited by a class-j job, in order (starts with j).
    std::vector<std::size_t> route_of(std::size_t j) const;

    double gamma() const;            // max of all budgets
    double lambda_max() const;       // over external rates
    double lambda_min_positive() const;
    bool gamma_large() const;        // min_{j: lambda_j>0} lambda_j * gamma >= e^{2e}

    static McssInstance from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct TrafficSolution {
    std::vector<double> lambda_bar; // effective per-class rates
    std::vector<double> rho_bar;    // lambda_bar / mu
    double rho = 0.0;               // total load
    double residual = 0.0;          // ||lambda_bar - lambda - P^T lambda_bar||_inf
    bool stable = true;             // rho < 1

    double lambda_bar_max() const;
};

/// Solves lambda_bar = lambda + P^T lambda_bar by the finite Neumann
/// series. rho >= 1 is flagged, not thrown.
TrafficSolution traffic_solve(const McssInstance& inst);

/// One realized input: per-class interarrival sequences (empty where
/// lambda_j = 0) and per-class service sequences, plus the time horizon
/// the trace must cover. Interarrival sequences may extend beyond the
/// horizon; extra services are spare.
struct McssPath {
    std::vector<std::vector<double>> interarrival;
    std::vector<std::vector<double>> service;
    double horizon = 0.0;
};

/// Piecewise-linear workload. Breakpoints carry the right-continuous
/// value; between breakpoints the workload decreases at unit rate while
/// positive and stays at zero otherwise.
struct WorkloadTrace {
    std::vector<double> t;
    std::vector<double> w;
    double horizon = 0.0;

    double value_at(double s) const;
    double integral(double a, double b) const; // exact, segmentwise closed form
};

struct BusyPeriod {
    double start = 0.0;
    double busy = 0.0;   // B_i
    double idle = 0.0;   // I_i (truncated when the horizon cuts it)
    double peak = 0.0;   // sup workload over the period
    double area = 0.0;   // integral of workload over the busy part
    double work = 0.0;   // total service time completed in the period
    bool idle_complete = true;
};

struct BusyPeriodLog {
    std::vector<BusyPeriod> periods;            // busy part completed in horizon
    std::optional<double> open_busy_start;      // horizon fell inside this one
    double horizon = 0.0;

    /// Number of busy periods initiated up to time s.
    std::size_t n_of(double s) const;
};

enum class Policy { FifoAcrossClasses, StaticPriority };

struct PolicySpec {
    Policy kind = Policy::FifoAcrossClasses;
    std::vector<std::size_t> priority; // class order, highest first; default 0..J-1

    static PolicySpec fifo() { return {Policy::FifoAcrossClasses, {}}; }
    static PolicySpec static_priority(std::vector<std::size_t> order = {}) {
        return {Policy::StaticPriority, std::move(order)};
    }
};

/// Parses "fifo", "priority" or "priority:2,1" (1-based class order).
PolicySpec parse_policy(const std::string& text, std::size_t classes);

enum class InitMode { OnePerClass, Empty };

struct TraceResult {
    WorkloadTrace trace;
    BusyPeriodLog log;
    std::vector<std::size_t> arrivals_used; // external arrivals processed, per class
    std::vector<std::size_t> services_used; // service entries consumed, per class
    // (t, device workload, job-state workload) at each event; only filled
    // when requested, for consistency checks.
    std::vector<std::array<double, 3>> state_checks;
};

/// Event-driven job-level simulation under a work-conserving policy.
/// The workload jumps at arrival instants by the arriving job's full
/// route service (values consumed from the per-buffer tables in
/// arrival-closure order) and drains at unit rate while the server works,
/// which reproduces the busy-period workload identity exactly and makes
/// the trace policy-invariant even though job dynamics are not.
TraceResult workload_trace(const McssInstance& inst, const McssPath& path,
                           const PolicySpec& policy, InitMode init = InitMode::OnePerClass,
                           bool record_state_checks = false);

/// Smallest time from which the arrival-count bound below is valid:
///   max over {j: lambda_j > 0} of (e^e/lambda_j,
///                                  (1 + 3 lambda_max^2 gamma^2)/lambda_j).
double lower_time_threshold(const McssInstance& inst, double gamma);

/// Worst-case external arrival count by time t:
///   t lambda_j + 3 lambda_j^2 gamma^2 phi(t lambda_j).
/// Zero for classes without external arrivals.
double arrival_count_bound(const McssInstance& inst, std::size_t j, double t, double gamma);

struct McssBounds {
    double busy_bound = 0.0;     // on every busy-period duration
    double workload_bound = 0.0; // on the peak workload within a period
    BoundReport busy_report;
    BoundReport workload_report;
};

/// Closed-form busy-period and peak-workload bounds:
///   B <= 5 (4J+3)^2 lbar^3 G^4 / (1-rho)^2 * lnln(2 (4J+3) lbar^2 G^2 / (1-rho)),
///   supW <= 2 (4J+3)^2 lbar^3 G^4 / (1-rho) * lnln((4J+3) lbar^2 G^2 / (1-rho))
///           + G + 3 lbar^2 G^3,
/// with lbar the largest effective arrival rate and G the budget.
McssBounds busy_workload_bounds(const McssInstance& inst);

/// Same formulas evaluated with an explicit budget (for per-path
/// certified budgets).
McssBounds busy_workload_bounds_with_gamma(const McssInstance& inst, double gamma);

struct SteadyStateEstimates {
    long replications = 0;
    long completed_periods = 0;
    double eb = 0.0;   // mean busy length
    double ei = 0.0;   // mean idle length
    double eb2 = 0.0;  // mean squared busy length
    double mean_workload_time_avg = 0.0; // mean over replications
    double mean_workload_se = 0.0;
    double ratio_bound = 0.0;            // eb2 / (eb + ei)
    double busy_bound_mean = 0.0;        // mean pathwise busy bound
    double second_moment_bound_mean = 0.0; // mean pathwise bound shaped for E[B^2] * mu_max
    double gamma_max = 0.0;              // largest certified effective budget
    bool busy_mean_below_bound = false;
    bool workload_below_ratio = false;   // within 3 standard errors

    nlohmann::json to_json() const;
};

/// Monte Carlo estimators of the steady-state busy/idle/workload
/// quantities plus the averaged pathwise closed-form bounds. Budgets are
/// certified per replication and lifted to the e^{2e}/lambda_min floor.
SteadyStateEstimates steady_state_estimators(const McssInstance& inst,
                                             const std::vector<sim::DistSpec>& arrival_specs,
                                             const std::vector<sim::DistSpec>& service_specs,
                                             int replications, double horizon,
                                             std::uint64_t seed, int threads = 0);

} // namespace roq::mcss
