#include "roq/simkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <thread>

#include "roq/lil.hpp"

namespace roq::sim {

double DistSpec::mean() const {
    switch (kind) {
        case Kind::Exponential: return 1.0 / p1;
        case Kind::Deterministic: return p1;
        case Kind::Uniform: return 0.5 * (p1 + p2);
        case Kind::Lognormal: return std::exp(p1 + 0.5 * p2 * p2);
    }
    return 0.0;
}

double DistSpec::variance() const {
    switch (kind) {
        case Kind::Exponential: return 1.0 / (p1 * p1);
        case Kind::Deterministic: return 0.0;
        case Kind::Uniform: {
            const double w = p2 - p1;
            return w * w / 12.0;
        }
        case Kind::Lognormal: {
            const double s2 = p2 * p2;
            return (std::exp(s2) - 1.0) * std::exp(2.0 * p1 + s2);
        }
    }
    return 0.0;
}

double DistSpec::sample(Stream& s) const {
    switch (kind) {
        case Kind::Exponential: {
            const double u = s.next_unit();
            return -std::log1p(-u) / p1; // -ln(1-u), u in [0,1)
        }
        case Kind::Deterministic: return p1;
        case Kind::Uniform: return p1 + (p2 - p1) * s.next_unit();
        case Kind::Lognormal: {
            // Box-Muller; always consumes two uniforms.
            const double u1 = 1.0 - s.next_unit();
            const double u2 = s.next_unit();
            const double z = std::sqrt(-2.0 * std::log(u1)) *
                             std::cos(2.0 * 3.14159265358979323846 * u2);
            return std::exp(p1 + p2 * z);
        }
    }
    return 0.0;
}

void DistSpec::validate() const {
    switch (kind) {
        case Kind::Exponential:
            if (!(p1 > 0.0)) fail_precondition("InvalidDist", "exponential rate must be positive");
            return;
        case Kind::Deterministic:
            if (!(p1 > 0.0)) fail_precondition("InvalidDist", "deterministic value must be positive");
            return;
        case Kind::Uniform:
            if (!(p1 >= 0.0) || !(p2 >= p1) || !(mean() > 0.0)) {
                fail_precondition("InvalidDist", "uniform needs 0 <= lo <= hi, positive mean");
            }
            return;
        case Kind::Lognormal:
            if (!(p2 >= 0.0)) fail_precondition("InvalidDist", "lognormal sigma must be >= 0");
            return;
    }
}

DistSpec DistSpec::from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    DistSpec out;
    if (kind == "exponential") {
        out = exponential(j.at("rate").get<double>());
    } else if (kind == "deterministic") {
        out = deterministic(j.at("value").get<double>());
    } else if (kind == "uniform") {
        out = uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
    } else if (kind == "lognormal") {
        out = lognormal(j.at("mu_log").get<double>(), j.at("sigma_log").get<double>());
    } else {
        fail_precondition("InvalidDist", "unknown distribution kind: " + kind);
    }
    out.validate();
    return out;
}

nlohmann::json DistSpec::to_json() const {
    switch (kind) {
        case Kind::Exponential: return {{"kind", "exponential"}, {"rate", p1}};
        case Kind::Deterministic: return {{"kind", "deterministic"}, {"value", p1}};
        case Kind::Uniform: return {{"kind", "uniform"}, {"lo", p1}, {"hi", p2}};
        case Kind::Lognormal: return {{"kind", "lognormal"}, {"mu_log", p1}, {"sigma_log", p2}};
    }
    return {};
}

int resolve_threads(int requested) {
    const unsigned hw = std::thread::hardware_concurrency();
    int threads = requested > 0 ? requested : (hw > 0 ? static_cast<int>(hw) : 1);
    if (const char* env = std::getenv("ROQ_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) threads = std::min(threads, cap);
    }
    return threads;
}

void parallel_replications(int count, int threads, const std::function<void(int)>& body) {
    const int workers = std::min(resolve_threads(threads), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto run = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

tandem::TscPath draw_path_tsc(const DistSpec& arrival_spec,
                              const std::vector<DistSpec>& service_specs, std::size_t n,
                              std::uint64_t seed, std::uint32_t replication) {
    if (n == 0) fail_precondition("InvalidPath", "need at least one job");
    arrival_spec.validate();
    for (const auto& s : service_specs) s.validate();
    tandem::TscPath path;
    Stream a(seed, replication, 0);
    path.u.reserve(n);
    for (std::size_t i = 0; i < n; ++i) path.u.push_back(arrival_spec.sample(a));
    for (std::size_t j = 0; j < service_specs.size(); ++j) {
        Stream s(seed, replication, static_cast<std::uint32_t>(1 + j));
        std::vector<double> row;
        row.reserve(n);
        for (std::size_t i = 0; i < n; ++i) row.push_back(service_specs[j].sample(s));
        path.v.push_back(std::move(row));
    }
    return path;
}

mcss::McssPath draw_path_mcss(const mcss::McssInstance& inst,
                              const std::vector<DistSpec>& arrival_specs,
                              const std::vector<DistSpec>& service_specs, double horizon,
                              std::uint64_t seed, std::uint32_t replication, double cover_time) {
    inst.validate();
    const std::size_t J = inst.classes;
    if (arrival_specs.size() != J || service_specs.size() != J) {
        fail_precondition("DimensionMismatch", "need one distribution per class");
    }
    if (!(horizon > 0.0)) fail_precondition("InvalidPath", "horizon must be positive");
    const double cover = std::max(horizon, cover_time);

    mcss::McssPath path;
    path.horizon = horizon;
    path.interarrival.resize(J);
    path.service.resize(J);

    std::vector<std::size_t> arrivals_in_horizon(J, 0);
    for (std::size_t j = 0; j < J; ++j) {
        if (inst.lambda[j] == 0.0) continue;
        arrival_specs[j].validate();
        if (std::abs(arrival_specs[j].mean() - 1.0 / inst.lambda[j]) >
            1e-9 * (1.0 + arrival_specs[j].mean())) {
            fail_precondition("InvalidDist", "arrival distribution mean must equal 1/lambda_j");
        }
        Stream s(seed, replication, static_cast<std::uint32_t>(j));
        double clock = 0.0;
        while (clock <= cover) {
            const double gap = arrival_specs[j].sample(s);
            path.interarrival[j].push_back(gap);
            clock += gap;
            if (clock <= horizon) arrivals_in_horizon[j] += 1;
        }
    }

    // Service demand per buffer: every arrival (and the initial batch)
    // consumes one value at each buffer on its route.
    const auto closure = inst.arrival_closure();
    for (std::size_t b = 0; b < J; ++b) {
        service_specs[b].validate();
        if (std::abs(service_specs[b].mean() - 1.0 / inst.mu[b]) >
            1e-9 * (1.0 + service_specs[b].mean())) {
            fail_precondition("InvalidDist", "service distribution mean must equal 1/mu_j");
        }
        std::size_t need = 2; // slack
        for (std::size_t i = 0; i < J; ++i) {
            if (closure[b][i] > 0) need += (arrivals_in_horizon[i] + 1) * static_cast<std::size_t>(closure[b][i]);
        }
        Stream s(seed, replication, static_cast<std::uint32_t>(J + b));
        path.service[b].reserve(need);
        for (std::size_t i = 0; i < need; ++i) path.service[b].push_back(service_specs[b].sample(s));
    }
    return path;
}

ErgodicEstimates ergodic_estimates(const mcss::BusyPeriodLog& log,
                                   const mcss::WorkloadTrace& trace, double t_end) {
    if (log.periods.empty()) {
        fail_precondition("InsufficientData", "no completed busy period");
    }
    ErgodicEstimates out;
    out.mean_w_time_avg = trace.integral(0.0, t_end) / t_end;

    lil::KahanSum sb, sb2, si;
    std::size_t nb = 0, ni = 0;
    for (const auto& p : log.periods) {
        if (p.start + p.busy > t_end) break;
        sb.add(p.busy);
        sb2.add(p.busy * p.busy);
        ++nb;
        if (p.idle_complete && p.start + p.busy + p.idle <= t_end) {
            si.add(p.idle);
            ++ni;
        }
    }
    if (nb == 0) fail_precondition("InsufficientData", "no busy period completed before t_end");
    out.n_periods = nb;
    out.eb = sb.value() / static_cast<double>(nb);
    out.eb2 = sb2.value() / static_cast<double>(nb);
    out.ei = ni > 0 ? si.value() / static_cast<double>(ni) : 0.0;
    out.ratio_bound = out.eb2 / (out.eb + out.ei);

    // Pathwise inequality evaluated where every term is observed: the end
    // of the last completed busy period. n(t) there equals the number of
    // completed periods and idles 1..n-1 are all closed.
    const auto& last = log.periods[nb - 1];
    const double t_star = last.start + last.busy;
    out.pathwise_lhs = trace.integral(0.0, t_star) / t_star;
    lil::KahanSum cyc;
    for (std::size_t i = 0; i + 1 < nb; ++i) {
        cyc.add(log.periods[i].busy);
        cyc.add(log.periods[i].idle);
    }
    lil::KahanSum b2;
    for (std::size_t i = 0; i < nb; ++i) b2.add(log.periods[i].busy * log.periods[i].busy);
    out.pathwise_rhs = cyc.value() > 0.0 ? b2.value() / cyc.value()
                                         : std::numeric_limits<double>::infinity();
    return out;
}

} // namespace roq::sim
