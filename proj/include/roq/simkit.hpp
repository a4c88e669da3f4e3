#pragma once

#include <cstdint>
#include <vector>

#include "roq/multiclass.hpp"
#include "roq/sim_random.hpp"
#include "roq/tandem.hpp"

namespace roq::sim {

/// n i.i.d. interarrivals plus J x n i.i.d. services; every sequence has
/// its own stream, so the path is reproducible per (seed, replication).
tandem::TscPath draw_path_tsc(const DistSpec& arrival_spec,
                              const std::vector<DistSpec>& service_specs, std::size_t n,
                              std::uint64_t seed, std::uint32_t replication = 0);

/// Per-class renewal inputs covering the horizon (arrival clocks run to
/// cover_time when the caller needs the counting processes further out).
/// Service sequences are sized from the realized arrival counts and the
/// routing closure. Distribution means must match the instance rates.
mcss::McssPath draw_path_mcss(const mcss::McssInstance& inst,
                              const std::vector<DistSpec>& arrival_specs,
                              const std::vector<DistSpec>& service_specs, double horizon,
                              std::uint64_t seed, std::uint32_t replication = 0,
                              double cover_time = 0.0);

struct ErgodicEstimates {
    double mean_w_time_avg = 0.0; // integral of W over [0, t_end] / t_end
    double eb = 0.0;
    double ei = 0.0;
    double eb2 = 0.0;
    std::size_t n_periods = 0;
    double ratio_bound = 0.0;   // EB2 / (EB + EI), sample version
    double pathwise_lhs = 0.0;  // integral W / t at the last period end
    double pathwise_rhs = 0.0;  // sum B_i^2 / sum_{i<=n-1} (B_i + I_i)
};

/// Ergodic device over one trace: time-average workload, busy/idle
/// moments, and both sides of the pathwise inequality
///   int_0^t W / t  <=  sum_{i<=n(t)} B_i^2 / sum_{i<=n(t)-1} (B_i + I_i).
ErgodicEstimates ergodic_estimates(const mcss::BusyPeriodLog& log,
                                   const mcss::WorkloadTrace& trace, double t_end);

} // namespace roq::sim
