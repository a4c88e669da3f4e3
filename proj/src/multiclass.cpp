#include "roq/multiclass.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "roq/envelope_math.hpp"
#include "roq/lil.hpp"
#include "roq/simkit.hpp"

namespace roq::mcss {

using envmath::kExp2E;
using envmath::kExpE;
using envmath::lnln;
using envmath::phi;

void McssInstance::validate() const {
    const std::size_t J = classes;
    if (J == 0) fail_precondition("InvalidInstance", "need at least one class");
    if (lambda.size() != J || mu.size() != J || gamma_a.size() != J || gamma_s.size() != J ||
        routing.size() != J) {
        fail_precondition("InvalidInstance", "per-class vectors must have J entries");
    }
    for (double l : lambda) {
        if (l < 0.0) fail_precondition("InvalidInstance", "arrival rates must be >= 0");
    }
    for (double m : mu) {
        if (!(m > 0.0)) fail_precondition("InvalidInstance", "service rates must be positive");
    }
    for (double g : gamma_a) {
        if (g < 0.0) fail_precondition("InvalidInstance", "budgets must be nonnegative");
    }
    for (double g : gamma_s) {
        if (g < 0.0) fail_precondition("InvalidInstance", "budgets must be nonnegative");
    }
    for (const auto& row : routing) {
        if (row.size() != J) fail_precondition("InvalidInstance", "routing matrix must be JxJ");
        int sum = 0;
        for (int e : row) {
            if (e != 0 && e != 1) fail_precondition("InvalidInstance", "routing entries must be 0/1");
            sum += e;
        }
        if (sum > 1) fail_precondition("InvalidInstance", "routing row sums must be 0 or 1");
    }
    // Nilpotency: P^J must vanish.
    std::vector<std::vector<int>> pw = routing;
    for (std::size_t step = 1; step < J; ++step) {
        std::vector<std::vector<int>> nx(J, std::vector<int>(J, 0));
        for (std::size_t i = 0; i < J; ++i)
            for (std::size_t k = 0; k < J; ++k)
                if (pw[i][k])
                    for (std::size_t j = 0; j < J; ++j) nx[i][j] |= routing[k][j];
        pw = std::move(nx);
    }
    for (const auto& row : pw)
        for (int e : row)
            if (e) fail_precondition("NotNilpotent", "routing matrix has a cycle");
}

std::vector<std::vector<long>> McssInstance::arrival_closure() const {
    const std::size_t J = classes;
    std::vector<std::vector<long>> closure(J, std::vector<long>(J, 0));
    std::vector<std::vector<long>> power(J, std::vector<long>(J, 0));
    for (std::size_t i = 0; i < J; ++i) {
        closure[i][i] = 1;
        power[i][i] = 1;
    }
    for (std::size_t step = 1; step < J; ++step) {
        std::vector<std::vector<long>> nx(J, std::vector<long>(J, 0));
        for (std::size_t i = 0; i < J; ++i)
            for (std::size_t k = 0; k < J; ++k)
                if (power[i][k])
                    for (std::size_t j = 0; j < J; ++j)
                        nx[i][j] += power[i][k] * (routing[j][k] ? 1 : 0); // (P^T)[k][j]
        power = std::move(nx);
        bool any = false;
        for (std::size_t i = 0; i < J; ++i)
            for (std::size_t j = 0; j < J; ++j) {
                closure[i][j] += power[i][j];
                any = any || power[i][j] != 0;
            }
        if (!any) break;
    }
    return closure;
}

std::vector<std::size_t> McssInstance::route_of(std::size_t j) const {
    std::vector<std::size_t> route{j};
    std::size_t cur = j;
    while (route.size() <= classes) {
        std::size_t nxt = classes;
        for (std::size_t k = 0; k < classes; ++k) {
            if (routing[cur][k]) {
                nxt = k;
                break;
            }
        }
        if (nxt == classes) break;
        route.push_back(nxt);
        cur = nxt;
    }
    if (route.size() > classes) fail_precondition("NotNilpotent", "routing matrix has a cycle");
    return route;
}

double McssInstance::gamma() const {
    double g = 0.0;
    for (double x : gamma_a) g = std::max(g, x);
    for (double x : gamma_s) g = std::max(g, x);
    return g;
}

double McssInstance::lambda_max() const {
    double m = 0.0;
    for (double l : lambda) m = std::max(m, l);
    return m;
}

double McssInstance::lambda_min_positive() const {
    double m = std::numeric_limits<double>::infinity();
    for (double l : lambda)
        if (l > 0.0) m = std::min(m, l);
    if (!std::isfinite(m)) {
        fail_precondition("InvalidInstance", "no class has external arrivals");
    }
    return m;
}

bool McssInstance::gamma_large() const {
    return lambda_min_positive() * gamma() >= kExp2E;
}

McssInstance McssInstance::from_json(const nlohmann::json& j) {
    McssInstance inst;
    inst.classes = j.at("J").get<std::size_t>();
    inst.lambda = j.at("lambda").get<std::vector<double>>();
    inst.mu = j.at("mu").get<std::vector<double>>();
    inst.routing = j.at("P").get<std::vector<std::vector<int>>>();
    auto budget = [&](const char* key) {
        std::vector<double> out;
        if (j.at(key).is_array()) {
            out = j.at(key).get<std::vector<double>>();
        } else {
            out.assign(inst.classes, j.at(key).get<double>());
        }
        return out;
    };
    inst.gamma_a = budget("gamma_a");
    inst.gamma_s = budget("gamma_s");
    inst.validate();
    return inst;
}

nlohmann::json McssInstance::to_json() const {
    return {{"J", classes}, {"lambda", lambda},  {"mu", mu},
            {"P", routing}, {"gamma_a", gamma_a}, {"gamma_s", gamma_s}};
}

double TrafficSolution::lambda_bar_max() const {
    double m = 0.0;
    for (double l : lambda_bar) m = std::max(m, l);
    return m;
}

TrafficSolution traffic_solve(const McssInstance& inst) {
    inst.validate();
    const std::size_t J = inst.classes;
    const auto closure = inst.arrival_closure();
    TrafficSolution out;
    out.lambda_bar.assign(J, 0.0);
    for (std::size_t i = 0; i < J; ++i)
        for (std::size_t j = 0; j < J; ++j) out.lambda_bar[i] += static_cast<double>(closure[i][j]) * inst.lambda[j];
    out.rho_bar.assign(J, 0.0);
    out.rho = 0.0;
    for (std::size_t i = 0; i < J; ++i) {
        out.rho_bar[i] = out.lambda_bar[i] / inst.mu[i];
        out.rho += out.rho_bar[i];
    }
    out.residual = 0.0;
    for (std::size_t i = 0; i < J; ++i) {
        double feedback = 0.0;
        for (std::size_t j = 0; j < J; ++j) feedback += inst.routing[j][i] ? out.lambda_bar[j] : 0.0;
        out.residual = std::max(out.residual, std::abs(out.lambda_bar[i] - inst.lambda[i] - feedback));
    }
    out.stable = out.rho < 1.0;
    return out;
}

double WorkloadTrace::value_at(double s) const {
    if (t.empty() || s < t.front()) return 0.0;
    auto it = std::upper_bound(t.begin(), t.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
    if (w[i] <= 0.0) return 0.0;
    return std::max(w[i] - (s - t[i]), 0.0);
}

double WorkloadTrace::integral(double a, double b) const {
    if (t.empty() || b <= a) return 0.0;
    lil::KahanSum acc;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double seg_lo = t[i];
        const double seg_hi = i + 1 < t.size() ? t[i + 1] : horizon;
        const double x0 = std::max(a, seg_lo);
        const double x1 = std::min(b, seg_hi);
        if (x1 <= x0 || w[i] <= 0.0) continue;
        const double d0 = x0 - seg_lo;
        const double d1 = x1 - seg_lo;
        acc.add(w[i] * (d1 - d0) - 0.5 * (d1 * d1 - d0 * d0));
    }
    return acc.value();
}

std::size_t BusyPeriodLog::n_of(double s) const {
    std::size_t count = 0;
    for (const auto& p : periods)
        if (p.start <= s) ++count;
    if (open_busy_start && *open_busy_start <= s) ++count;
    return count;
}

PolicySpec parse_policy(const std::string& text, std::size_t classes) {
    if (text == "fifo" || text == "fifo-across-classes") return PolicySpec::fifo();
    if (text == "priority" || text.rfind("priority:", 0) == 0) {
        std::vector<std::size_t> order;
        if (text.size() > 9 && text[8] == ':') {
            std::size_t pos = 9;
            while (pos < text.size()) {
                std::size_t comma = text.find(',', pos);
                if (comma == std::string::npos) comma = text.size();
                const std::string tok = text.substr(pos, comma - pos);
                try {
                    const long v = std::stol(tok);
                    if (v < 1 || static_cast<std::size_t>(v) > classes) throw std::out_of_range("class");
                    order.push_back(static_cast<std::size_t>(v - 1));
                } catch (...) {
                    fail_precondition("PolicyUnknown", "bad priority order: " + text);
                }
                pos = comma + 1;
            }
            std::vector<bool> seen(classes, false);
            if (order.size() != classes) fail_precondition("PolicyUnknown", "priority order must list every class");
            for (std::size_t c : order) {
                if (seen[c]) fail_precondition("PolicyUnknown", "duplicate class in priority order");
                seen[c] = true;
            }
        }
        return PolicySpec::static_priority(std::move(order));
    }
    fail_precondition("PolicyUnknown", "unknown policy: " + text);
}

namespace {

struct Job {
    std::vector<std::pair<std::size_t, double>> route; // (buffer, service time)
    std::size_t pos = 0;
    std::uint64_t entry_seq = 0;

    double remaining_from(std::size_t from) const {
        double s = 0.0;
        for (std::size_t i = from; i < route.size(); ++i) s += route[i].second;
        return s;
    }
};

} // namespace

TraceResult workload_trace(const McssInstance& inst, const McssPath& path,
                           const PolicySpec& policy, InitMode init, bool record_state_checks) {
    inst.validate();
    const std::size_t J = inst.classes;
    if (path.interarrival.size() != J || path.service.size() != J) {
        fail_precondition("DimensionMismatch", "path must carry one sequence per class");
    }
    if (!(path.horizon > 0.0)) fail_precondition("InvalidPath", "horizon must be positive");
    if (policy.kind == Policy::StaticPriority && !policy.priority.empty() &&
        policy.priority.size() != J) {
        fail_precondition("PolicyUnknown", "priority order must list every class");
    }
    for (std::size_t j = 0; j < J; ++j) {
        if (inst.lambda[j] == 0.0 && !path.interarrival[j].empty()) {
            fail_precondition("InvalidPath", "class without external arrivals carries interarrivals");
        }
        for (double x : path.interarrival[j])
            if (x < 0.0) fail_precondition("InvalidPath", "negative interarrival time");
        for (double x : path.service[j])
            if (x < 0.0) fail_precondition("InvalidPath", "negative service time");
    }

    const double horizon = path.horizon;
    std::vector<std::vector<std::size_t>> routes(J);
    for (std::size_t j = 0; j < J; ++j) routes[j] = inst.route_of(j);

    // Arrival clocks per class.
    std::vector<std::vector<double>> arr_time(J);
    for (std::size_t j = 0; j < J; ++j) {
        if (inst.lambda[j] == 0.0) continue;
        lil::KahanSum clock;
        arr_time[j].reserve(path.interarrival[j].size());
        for (double gap : path.interarrival[j]) {
            clock.add(gap);
            arr_time[j].push_back(clock.value());
        }
        if (arr_time[j].empty() || arr_time[j].back() <= horizon) {
            fail_precondition("HorizonExceeded",
                              "arrival sequence of class " + std::to_string(j + 1) +
                                  " does not cover the horizon");
        }
    }

    std::vector<std::size_t> svc_next(J, 0);
    auto take_service = [&](std::size_t buffer) {
        if (svc_next[buffer] >= path.service[buffer].size()) {
            fail_precondition("HorizonExceeded", "service sequence of class " +
                                                     std::to_string(buffer + 1) + " exhausted");
        }
        return path.service[buffer][svc_next[buffer]++];
    };

    std::vector<Job> jobs;
    std::vector<std::size_t> free_slots; // recycled after departure
    std::vector<std::deque<std::size_t>> queue(J);
    std::uint64_t entry_counter = 0;
    auto alloc_job = [&]() {
        if (!free_slots.empty()) {
            const std::size_t i = free_slots.back();
            free_slots.pop_back();
            jobs[i].route.clear();
            jobs[i].pos = 0;
            return i;
        }
        jobs.emplace_back();
        return jobs.size() - 1;
    };

    TraceResult out;
    out.arrivals_used.assign(J, 0);
    out.trace.horizon = horizon;
    auto add_breakpoint = [&](double time, double value) {
        if (!out.trace.t.empty() && out.trace.t.back() == time) {
            out.trace.w.back() = value;
        } else {
            out.trace.t.push_back(time);
            out.trace.w.push_back(value);
        }
    };

    double now = 0.0;
    double workload = 0.0;
    bool in_period = false;
    BusyPeriod current{};
    bool pending_idle = false; // last logged period still waits for its idle end
    auto close_idle = [&](double at, bool complete) {
        if (!pending_idle) return;
        out.log.periods.back().idle = at - (out.log.periods.back().start + out.log.periods.back().busy);
        out.log.periods.back().idle_complete = complete;
        pending_idle = false;
    };

    // Server state.
    bool serving = false;
    std::size_t serving_job = 0;
    double completion = 0.0;

    auto queues_empty = [&]() {
        for (const auto& q : queue)
            if (!q.empty()) return false;
        return true;
    };

    auto pick_next = [&]() -> std::size_t {
        if (policy.kind == Policy::FifoAcrossClasses) {
            std::size_t best = J;
            std::uint64_t best_seq = 0;
            for (std::size_t j = 0; j < J; ++j) {
                if (queue[j].empty()) continue;
                const std::uint64_t seq = jobs[queue[j].front()].entry_seq;
                if (best == J || seq < best_seq) {
                    best = j;
                    best_seq = seq;
                }
            }
            return best;
        }
        if (policy.priority.empty()) {
            for (std::size_t j = 0; j < J; ++j)
                if (!queue[j].empty()) return j;
            return J;
        }
        for (std::size_t j : policy.priority)
            if (!queue[j].empty()) return j;
        return J;
    };

    auto start_service = [&](double at) {
        const std::size_t cls = pick_next();
        if (cls == J) return false;
        serving_job = queue[cls].front();
        queue[cls].pop_front();
        serving = true;
        completion = at + jobs[serving_job].route[jobs[serving_job].pos].second;
        return true;
    };

    auto state_workload = [&]() {
        double s = 0.0;
        for (const auto& q : queue)
            for (std::size_t idx : q) s += jobs[idx].remaining_from(jobs[idx].pos);
        if (serving) {
            s += (completion - now) + jobs[serving_job].remaining_from(jobs[serving_job].pos + 1);
        }
        return s;
    };

    auto record_check = [&]() {
        if (record_state_checks) {
            out.state_checks.push_back({now, workload, state_workload()});
        }
    };

    auto open_period = [&](double at) {
        close_idle(at, true);
        in_period = true;
        current = BusyPeriod{};
        current.start = at;
    };

    auto arrival_jump = [&](std::size_t cls, double at) {
        const std::size_t idx = alloc_job();
        for (std::size_t buffer : routes[cls]) {
            jobs[idx].route.emplace_back(buffer, take_service(buffer));
        }
        jobs[idx].entry_seq = entry_counter++;
        if (!in_period) open_period(at);
        workload += jobs[idx].remaining_from(0);
        current.peak = std::max(current.peak, workload);
        queue[cls].push_back(idx);
        add_breakpoint(at, workload);
    };

    // Initial batch: one job per class; each class takes its own first
    // service value before any downstream values are consumed.
    if (init == InitMode::OnePerClass) {
        std::vector<std::size_t> initial(J);
        for (std::size_t j = 0; j < J; ++j) {
            initial[j] = alloc_job();
            jobs[initial[j]].route.emplace_back(j, take_service(j));
        }
        for (std::size_t j = 0; j < J; ++j) {
            for (std::size_t r = 1; r < routes[j].size(); ++r) {
                const std::size_t buffer = routes[j][r];
                jobs[initial[j]].route.emplace_back(buffer, take_service(buffer));
            }
        }
        open_period(0.0);
        for (std::size_t j = 0; j < J; ++j) {
            jobs[initial[j]].entry_seq = entry_counter++;
            workload += jobs[initial[j]].remaining_from(0);
            queue[j].push_back(initial[j]);
        }
        current.peak = workload;
        add_breakpoint(0.0, workload);
        start_service(0.0);
    } else {
        add_breakpoint(0.0, 0.0);
    }
    record_check();

    std::vector<std::size_t> arr_idx(J, 0);
    const double inf = std::numeric_limits<double>::infinity();

    auto next_arrival = [&](std::size_t& cls_out) {
        double best = inf;
        cls_out = J;
        for (std::size_t j = 0; j < J; ++j) {
            if (arr_idx[j] >= arr_time[j].size()) continue;
            const double t_ar = arr_time[j][arr_idx[j]];
            if (t_ar > horizon) continue;
            if (t_ar < best) {
                best = t_ar;
                cls_out = j;
            }
        }
        return best;
    };

    auto advance_to = [&](double t_new) {
        if (in_period) {
            const double dt = t_new - now;
            current.area += workload * dt - 0.5 * dt * dt;
            workload -= dt;
        }
        now = t_new;
    };

    while (true) {
        std::size_t arr_cls = J;
        const double t_arr = next_arrival(arr_cls);
        const double t_comp = serving ? completion : inf;
        const double t_next = std::min(t_comp, t_arr);
        if (t_next > horizon) {
            advance_to(horizon);
            add_breakpoint(horizon, in_period ? std::max(workload, 0.0) : 0.0);
            break;
        }

        if (t_comp <= t_arr) {
            // Completion first on ties: keeps the trace right-continuous.
            advance_to(t_comp);
            Job& job = jobs[serving_job];
            current.work += job.route[job.pos].second;
            job.pos += 1;
            serving = false;
            if (job.pos < job.route.size()) {
                job.entry_seq = entry_counter++;
                queue[job.route[job.pos].first].push_back(serving_job);
            } else {
                free_slots.push_back(serving_job);
            }
            if (!start_service(now) && queues_empty()) {
                // System drained: the device value is zero up to rounding.
                workload = 0.0;
                current.busy = now - current.start;
                current.idle_complete = false;
                out.log.periods.push_back(current);
                pending_idle = true;
                in_period = false;
                add_breakpoint(now, 0.0);
            }
            record_check();
        } else {
            advance_to(t_arr);
            out.arrivals_used[arr_cls] += 1;
            arr_idx[arr_cls] += 1;
            arrival_jump(arr_cls, t_arr);
            if (!serving) start_service(t_arr);
            record_check();
        }
    }

    if (in_period) {
        out.log.open_busy_start = current.start;
    }
    close_idle(horizon, false);
    out.log.horizon = horizon;
    out.services_used = svc_next;
    return out;
}

double lower_time_threshold(const McssInstance& inst, double gamma) {
    const double lmax = inst.lambda_max();
    double t = 0.0;
    bool any = false;
    for (double l : inst.lambda) {
        if (l <= 0.0) continue;
        any = true;
        t = std::max(t, kExpE / l);
        t = std::max(t, (1.0 + 3.0 * lmax * lmax * gamma * gamma) / l);
    }
    if (!any) fail_precondition("InvalidInstance", "no class has external arrivals");
    return t;
}

double arrival_count_bound(const McssInstance& inst, std::size_t j, double t, double gamma) {
    if (j >= inst.classes) fail_precondition("DimensionMismatch", "class index out of range");
    if (t < lower_time_threshold(inst, gamma)) {
        fail_precondition("TimeTooSmall", "t is below the validity threshold");
    }
    const double lj = inst.lambda[j];
    if (lj == 0.0) return 0.0;
    return t * lj + 3.0 * lj * lj * gamma * gamma * phi(t * lj);
}

McssBounds busy_workload_bounds_with_gamma(const McssInstance& inst, double gamma) {
    inst.validate();
    const auto traffic = traffic_solve(inst);
    if (!traffic.stable) {
        fail_precondition("Unstable", "total traffic intensity must be < 1");
    }
    if (inst.lambda_min_positive() * gamma < kExp2E) {
        fail_precondition("GammaTooSmall",
                          "budget condition min_j lambda_j*Gamma >= e^{2e} fails");
    }
    const double J = static_cast<double>(inst.classes);
    const double lbar = traffic.lambda_bar_max();
    const double slack = 1.0 - traffic.rho;
    const double term = 4.0 * J + 3.0;
    const double g2 = gamma * gamma;
    const double g4 = g2 * g2;

    McssBounds out;
    out.busy_bound = 5.0 * term * term * lbar * lbar * lbar * g4 / (slack * slack) *
                     lnln(2.0 * term * lbar * lbar * g2 / slack);
    out.workload_bound = 2.0 * term * term * lbar * lbar * lbar * g4 / slack *
                             lnln(term * lbar * lbar * g2 / slack) +
                         gamma + 3.0 * lbar * lbar * g2 * gamma;

    nlohmann::json inputs = inst.to_json();
    inputs["gamma"] = gamma;
    inputs["lambda_bar"] = traffic.lambda_bar;
    inputs["rho"] = traffic.rho;
    nlohmann::json pre = {{"gamma_large", true}, {"stable", true}, {"nilpotent", true}};

    out.busy_report = {"mcss.busy_period.lnln", out.busy_bound, inputs, pre,
                       {"bounds every busy-period duration"}};
    out.workload_report = {"mcss.peak_workload.lnln", out.workload_bound, inputs, pre,
                           {"bounds the peak workload within any busy period"}};
    return out;
}

McssBounds busy_workload_bounds(const McssInstance& inst) {
    return busy_workload_bounds_with_gamma(inst, inst.gamma());
}

nlohmann::json SteadyStateEstimates::to_json() const {
    return {
        {"replications", replications},
        {"completed_periods", completed_periods},
        {"EB", eb},
        {"EI", ei},
        {"EB2", eb2},
        {"mean_workload_time_avg", mean_workload_time_avg},
        {"mean_workload_se", mean_workload_se},
        {"ratio_bound_EB2_over_EB_plus_EI", ratio_bound},
        {"busy_bound_mean", busy_bound_mean},
        {"second_moment_bound_mean", second_moment_bound_mean},
        {"gamma_max", gamma_max},
        {"busy_mean_below_bound", busy_mean_below_bound},
        {"workload_below_ratio", workload_below_ratio},
    };
}

SteadyStateEstimates steady_state_estimators(const McssInstance& inst,
                                             const std::vector<sim::DistSpec>& arrival_specs,
                                             const std::vector<sim::DistSpec>& service_specs,
                                             int replications, double horizon, std::uint64_t seed,
                                             int threads) {
    inst.validate();
    const auto traffic = traffic_solve(inst);
    if (!traffic.stable) fail_precondition("Unstable", "total traffic intensity must be < 1");
    if (replications <= 0) {
        fail_precondition("InsufficientData", "need at least one replication");
    }

    struct RepOut {
        std::vector<double> busy, idle, busy2;
        double time_avg = 0.0;
        double gamma_eff = 0.0;
        double busy_bound = 0.0;
        double second_moment_bound = 0.0;
    };
    std::vector<RepOut> reps(static_cast<std::size_t>(replications));

    const double floor = kExp2E / inst.lambda_min_positive();
    const double J = static_cast<double>(inst.classes);
    const double term = 4.0 * J + 3.0;
    const double lbar = traffic.lambda_bar_max();
    const double slack = 1.0 - traffic.rho;
    const double mu_max = *std::max_element(inst.mu.begin(), inst.mu.end());

    sim::parallel_replications(replications, threads, [&](int r) {
        auto path = sim::draw_path_mcss(inst, arrival_specs, service_specs, horizon, seed,
                                        static_cast<std::uint32_t>(r));
        auto res = workload_trace(inst, path, PolicySpec::fifo(), InitMode::OnePerClass);

        std::vector<lil::BudgetSet> budgets;
        for (std::size_t j = 0; j < inst.classes; ++j) {
            if (inst.lambda[j] > 0.0 && res.arrivals_used[j] > 0) {
                budgets.push_back(lil::certify_forward(
                    std::span(path.interarrival[j]).first(res.arrivals_used[j]), inst.lambda[j]));
            }
            if (res.services_used[j] > 0) {
                budgets.push_back(lil::certify_forward(
                    std::span(path.service[j]).first(res.services_used[j]), inst.mu[j]));
            }
        }
        RepOut& o = reps[static_cast<std::size_t>(r)];
        o.gamma_eff = lil::effective_gamma(budgets, floor);
        const double g2 = o.gamma_eff * o.gamma_eff;
        const double g4 = g2 * g2;
        o.busy_bound = 5.0 * term * term * lbar * lbar * lbar * g4 / (slack * slack) *
                       lnln(2.0 * term * lbar * lbar * g2 / slack);
        const double ll = lnln(2.0 * term * lbar * lbar * g2 / slack);
        o.second_moment_bound = 25.0 * term * term * term * term * std::pow(lbar, 6.0) * mu_max *
                                g4 * g4 / (slack * slack * slack * slack) * ll * ll;
        for (const auto& p : res.log.periods) {
            o.busy.push_back(p.busy);
            o.busy2.push_back(p.busy * p.busy);
            if (p.idle_complete) o.idle.push_back(p.idle);
        }
        o.time_avg = res.trace.integral(0.0, horizon) / horizon;
    });

    SteadyStateEstimates out;
    out.replications = replications;
    lil::KahanSum sb, sb2, si, sw;
    long nb = 0, ni = 0;
    for (const auto& o : reps) {
        for (double b : o.busy) sb.add(b);
        for (double b : o.busy2) sb2.add(b);
        for (double i : o.idle) si.add(i);
        nb += static_cast<long>(o.busy.size());
        ni += static_cast<long>(o.idle.size());
        sw.add(o.time_avg);
        out.busy_bound_mean += o.busy_bound / static_cast<double>(replications);
        out.second_moment_bound_mean += o.second_moment_bound / static_cast<double>(replications);
        out.gamma_max = std::max(out.gamma_max, o.gamma_eff);
    }
    out.completed_periods = nb;
    if (nb < 30) {
        fail_precondition("InsufficientData", "fewer than 30 completed busy periods");
    }
    out.eb = sb.value() / static_cast<double>(nb);
    out.eb2 = sb2.value() / static_cast<double>(nb);
    out.ei = ni > 0 ? si.value() / static_cast<double>(ni) : 0.0;
    out.mean_workload_time_avg = sw.value() / static_cast<double>(replications);
    double var = 0.0;
    for (const auto& o : reps) {
        const double d = o.time_avg - out.mean_workload_time_avg;
        var += d * d;
    }
    if (replications > 1) {
        var /= static_cast<double>(replications - 1);
        out.mean_workload_se = std::sqrt(var / static_cast<double>(replications));
    }
    out.ratio_bound = out.eb2 / (out.eb + out.ei);
    out.busy_mean_below_bound = out.eb <= out.busy_bound_mean;
    out.workload_below_ratio =
        out.mean_workload_time_avg <= out.ratio_bound + 3.0 * out.mean_workload_se + 1e-12;
    return out;
}

} // namespace roq::mcss
