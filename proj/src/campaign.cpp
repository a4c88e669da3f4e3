#include "roq/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <span>

#include "roq/envelope_math.hpp"
#include "roq/lil.hpp"

namespace roq::campaign {

using envmath::kExp2E;
using envmath::phi;

namespace {

bool dominates(double bound, double observed) {
    return observed <= bound * (1.0 + 1e-12) + 1e-9;
}

} // namespace

nlohmann::json TscValidateResult::to_json() const {
    return {
        {"replications", replications}, {"violations", violations},
        {"mean_sojourn", mean_sojourn}, {"max_sojourn", max_sojourn},
        {"min_bound", min_bound},       {"mean_bound", mean_bound},
        {"max_gamma", max_gamma},       {"violating_replications", violating},
    };
}

TscValidateResult validate_tsc(const TscValidateConfig& cfg) {
    cfg.inst.validate();
    if (cfg.replications <= 0) fail_precondition("InvalidConfig", "replications must be positive");
    if (cfg.services.size() != cfg.inst.servers) {
        fail_precondition("DimensionMismatch", "need one service distribution per server");
    }
    const std::size_t n = cfg.inst.jobs;
    const double floor = kExp2E / cfg.inst.lambda;

    struct Rep {
        double sojourn = 0.0;
        double bound = 0.0;
        double gamma_eff = 0.0;
        bool violation = false;
    };
    std::vector<Rep> reps(static_cast<std::size_t>(cfg.replications));

    auto run_replication = [&](int r, tandem::TscPath* keep_path) {
        auto path = sim::draw_path_tsc(cfg.arrival, cfg.services, n, cfg.seed,
                                       static_cast<std::uint32_t>(r));

        tandem::TscInstance certified = cfg.inst;
        certified.gamma_a =
            std::max(lil::certify_tail(path.u, cfg.inst.lambda, n).gamma, floor);
        for (std::size_t j = 0; j < cfg.inst.servers; ++j) {
            certified.gamma_s[j] =
                std::max(lil::certify_tail(path.v[j], cfg.inst.mu[j], n).gamma, floor);
        }
        Rep& o = reps[static_cast<std::size_t>(r)];
        o.gamma_eff = certified.gamma();
        o.bound = tandem::sojourn_bound_value(certified);
        if (cfg.tamper && r == 0) {
            path.v[cfg.inst.servers - 1][n - 1] += 2.0 * o.bound + 1.0;
        }
        o.sojourn = tandem::lindley_sojourn(cfg.inst, path).sojourn[n - 1];
        o.violation = !dominates(o.bound, o.sojourn);
        if (keep_path) *keep_path = std::move(path);
    };
    sim::parallel_replications(cfg.replications, cfg.threads,
                               [&](int r) { run_replication(r, nullptr); });

    TscValidateResult out;
    out.replications = cfg.replications;
    out.min_bound = reps[0].bound;
    for (int r = 0; r < cfg.replications; ++r) {
        const Rep& o = reps[static_cast<std::size_t>(r)];
        out.mean_sojourn += o.sojourn / cfg.replications;
        out.mean_bound += o.bound / cfg.replications;
        out.max_sojourn = std::max(out.max_sojourn, o.sojourn);
        out.min_bound = std::min(out.min_bound, o.bound);
        out.max_gamma = std::max(out.max_gamma, o.gamma_eff);
        if (o.violation) {
            out.violations += 1;
            out.violating.push_back(r);
        }
    }
    if (!out.violating.empty()) {
        // Streams are counter-based, so replaying the first offender
        // reproduces its path exactly.
        tandem::TscPath path;
        run_replication(out.violating.front(), &path);
        out.offending_path = std::move(path);
    }
    return out;
}

nlohmann::json McssValidateResult::to_json() const {
    return {
        {"replications", replications},
        {"completed_periods", periods},
        {"busy_violations", busy_violations},
        {"peak_violations", peak_violations},
        {"arrival_check_violations", arrival_check_violations},
        {"max_busy", max_busy},
        {"max_peak", max_peak},
        {"min_busy_bound", min_busy_bound},
        {"min_peak_bound", min_peak_bound},
        {"max_gamma", max_gamma},
        {"mean_workload_time_avg", mean_workload_time_avg},
        {"EB", eb},
        {"EI", ei},
        {"EB2", eb2},
        {"violating_replications", violating},
    };
}

McssValidateResult validate_mcss(const McssValidateConfig& cfg) {
    cfg.inst.validate();
    if (cfg.replications <= 0) fail_precondition("InvalidConfig", "replications must be positive");
    const auto traffic = mcss::traffic_solve(cfg.inst);
    if (!traffic.stable) fail_precondition("Unstable", "total traffic intensity must be < 1");

    const std::size_t J = cfg.inst.classes;
    const double floor = kExp2E / cfg.inst.lambda_min_positive();
    const double lambda_max = cfg.inst.lambda_max();
    const auto closure = cfg.inst.arrival_closure();

    struct Rep {
        int busy_viol = 0, peak_viol = 0, arrival_viol = 0;
        long periods = 0;
        double max_busy = 0.0, max_peak = 0.0;
        double busy_bound = 0.0, peak_bound = 0.0;
        double gamma_eff = 0.0;
        double time_avg = 0.0;
        double sum_b = 0.0, sum_b2 = 0.0, sum_i = 0.0;
        long n_i = 0;
    };
    std::vector<Rep> reps(static_cast<std::size_t>(cfg.replications));

    sim::parallel_replications(cfg.replications, cfg.threads, [&](int r) {
        Rep& o = reps[static_cast<std::size_t>(r)];

        // The validity threshold scales with the certified budget; start
        // from the floor and re-draw wider if certification lands above.
        double cover = cfg.horizon;
        if (cfg.arrival_checks) {
            cover = std::max(cover, 2.2 * mcss::lower_time_threshold(cfg.inst, floor));
        }
        mcss::McssPath path;
        mcss::TraceResult res;
        double gamma_eff = floor;
        for (int attempt = 0; attempt < 4; ++attempt) {
            path = sim::draw_path_mcss(cfg.inst, cfg.arrivals, cfg.services, cfg.horizon, cfg.seed,
                                       static_cast<std::uint32_t>(r), cover);
            res = mcss::workload_trace(cfg.inst, path, mcss::PolicySpec::fifo(),
                                       mcss::InitMode::OnePerClass);
            std::vector<lil::BudgetSet> budgets;
            for (std::size_t j = 0; j < J; ++j) {
                if (cfg.inst.lambda[j] > 0.0 && !path.interarrival[j].empty()) {
                    budgets.push_back(lil::certify_forward(path.interarrival[j], cfg.inst.lambda[j]));
                }
                if (res.services_used[j] > 0) {
                    budgets.push_back(lil::certify_forward(
                        std::span(path.service[j]).first(res.services_used[j]), cfg.inst.mu[j]));
                }
            }
            gamma_eff = lil::effective_gamma(budgets, floor);
            if (!cfg.arrival_checks ||
                2.1 * mcss::lower_time_threshold(cfg.inst, gamma_eff) <= cover) {
                break;
            }
            cover = 2.2 * mcss::lower_time_threshold(cfg.inst, gamma_eff);
        }
        o.gamma_eff = gamma_eff;

        const auto bounds = mcss::busy_workload_bounds_with_gamma(cfg.inst, gamma_eff);
        o.busy_bound = bounds.busy_bound;
        o.peak_bound = bounds.workload_bound;
        for (const auto& p : res.log.periods) {
            o.periods += 1;
            o.max_busy = std::max(o.max_busy, p.busy);
            o.max_peak = std::max(o.max_peak, p.peak);
            if (!dominates(bounds.busy_bound, p.busy)) o.busy_viol += 1;
            if (!dominates(bounds.workload_bound, p.peak)) o.peak_viol += 1;
            o.sum_b += p.busy;
            o.sum_b2 += p.busy * p.busy;
            if (p.idle_complete) {
                o.sum_i += p.idle;
                o.n_i += 1;
            }
        }
        o.time_avg = res.trace.integral(0.0, cfg.horizon) / cfg.horizon;

        if (cfg.arrival_checks) {
            // Arrival clocks; the counting processes are exact up to `cover`.
            std::vector<std::vector<double>> arr_time(J);
            for (std::size_t j = 0; j < J; ++j) {
                lil::KahanSum clock;
                arr_time[j].reserve(path.interarrival[j].size());
                for (double gap : path.interarrival[j]) {
                    clock.add(gap);
                    arr_time[j].push_back(clock.value());
                }
            }
            auto count_at = [&](std::size_t j, double t) {
                const auto& v = arr_time[j];
                return static_cast<double>(std::upper_bound(v.begin(), v.end(), t) - v.begin());
            };

            const double t_low = mcss::lower_time_threshold(cfg.inst, gamma_eff);
            const double t_hi = cover / 1.05;
            const int samples = std::max(cfg.arrival_check_samples, 1);
            const double g2 = gamma_eff * gamma_eff;
            for (int k = 0; k < samples; ++k) {
                const double t = samples == 1
                                     ? t_low
                                     : t_low + (t_hi - t_low) * k / (samples - 1);
                std::vector<double> a(J, 0.0);
                for (std::size_t j = 0; j < J; ++j) {
                    if (cfg.inst.lambda[j] > 0.0) a[j] = count_at(j, t);
                }
                // External arrival counts against the envelope rate.
                for (std::size_t j = 0; j < J; ++j) {
                    if (cfg.inst.lambda[j] == 0.0) continue;
                    const double rhs = mcss::arrival_count_bound(cfg.inst, j, t, gamma_eff);
                    if (a[j] > rhs + 1e-9 * (1.0 + rhs)) o.arrival_viol += 1;
                }
                // Closure counts against the scaled envelope.
                const double factor = std::sqrt(2.0 + 6.0 * lambda_max * lambda_max * g2);
                for (std::size_t j = 0; j < J; ++j) {
                    double abar = 0.0;
                    for (std::size_t i = 0; i < J; ++i) abar += static_cast<double>(closure[j][i]) * a[i];
                    const double rhs = factor * phi(traffic.lambda_bar[j] * t);
                    if (phi(abar) > rhs + 1e-9 * (1.0 + rhs)) o.arrival_viol += 1;
                }
                // Aggregate offered work drift.
                double lhs = -t;
                for (std::size_t j = 0; j < J; ++j) {
                    double abar = 0.0;
                    for (std::size_t i = 0; i < J; ++i) abar += static_cast<double>(closure[j][i]) * a[i];
                    lhs += abar / cfg.inst.mu[j];
                }
                const double rhs = (traffic.rho - 1.0) * t +
                                   3.0 * lambda_max * g2 * phi(lambda_max * t);
                if (lhs > rhs + 1e-9 * (1.0 + std::abs(rhs))) o.arrival_viol += 1;
            }
        }
    });

    McssValidateResult out;
    out.replications = cfg.replications;
    out.min_busy_bound = reps[0].busy_bound;
    out.min_peak_bound = reps[0].peak_bound;
    double sb = 0.0, sb2 = 0.0, si = 0.0;
    long nb = 0, ni = 0;
    for (int r = 0; r < cfg.replications; ++r) {
        const Rep& o = reps[static_cast<std::size_t>(r)];
        out.periods += o.periods;
        out.busy_violations += o.busy_viol;
        out.peak_violations += o.peak_viol;
        out.arrival_check_violations += o.arrival_viol;
        out.max_busy = std::max(out.max_busy, o.max_busy);
        out.max_peak = std::max(out.max_peak, o.max_peak);
        out.min_busy_bound = std::min(out.min_busy_bound, o.busy_bound);
        out.min_peak_bound = std::min(out.min_peak_bound, o.peak_bound);
        out.max_gamma = std::max(out.max_gamma, o.gamma_eff);
        out.mean_workload_time_avg += o.time_avg / cfg.replications;
        sb += o.sum_b;
        sb2 += o.sum_b2;
        si += o.sum_i;
        nb += o.periods;
        ni += o.n_i;
        if (o.busy_viol + o.peak_viol + o.arrival_viol > 0) out.violating.push_back(r);
    }
    if (nb > 0) {
        out.eb = sb / static_cast<double>(nb);
        out.eb2 = sb2 / static_cast<double>(nb);
    }
    if (ni > 0) out.ei = si / static_cast<double>(ni);
    return out;
}

} // namespace roq::campaign
