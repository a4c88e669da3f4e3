#include "roq/tandem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "roq/envelope_math.hpp"
#include "roq/lil.hpp"

namespace roq::tandem {

using envmath::kExp2E;
using envmath::lnln;
using envmath::phi;

double TscInstance::mu_min() const {
    double m = mu.empty() ? 0.0 : mu[0];
    for (double x : mu) m = std::min(m, x);
    return m;
}

double TscInstance::gamma() const {
    double g = gamma_a;
    for (double x : gamma_s) g = std::max(g, x);
    return g;
}

bool TscInstance::gamma_large() const { return lambda * gamma() >= kExp2E; }

void TscInstance::validate() const {
    if (servers == 0 || jobs == 0) fail_precondition("InvalidInstance", "J and n must be positive");
    if (mu.size() != servers || gamma_s.size() != servers) {
        fail_precondition("InvalidInstance", "mu and gamma_s must have one entry per server");
    }
    if (!(lambda > 0.0)) fail_precondition("InvalidInstance", "lambda must be positive");
    for (double m : mu) {
        if (!(m > 0.0)) fail_precondition("InvalidInstance", "service rates must be positive");
    }
    if (gamma_a < 0.0) fail_precondition("InvalidInstance", "budgets must be nonnegative");
    for (double g : gamma_s) {
        if (g < 0.0) fail_precondition("InvalidInstance", "budgets must be nonnegative");
    }
}

TscInstance TscInstance::from_json(const nlohmann::json& j) {
    TscInstance inst;
    inst.servers = j.at("J").get<std::size_t>();
    inst.jobs = j.value("n", std::size_t{1});
    inst.lambda = j.at("lambda").get<double>();
    inst.mu = j.at("mu").get<std::vector<double>>();
    if (j.at("gamma_s").is_array()) {
        inst.gamma_s = j.at("gamma_s").get<std::vector<double>>();
    } else {
        inst.gamma_s.assign(inst.servers, j.at("gamma_s").get<double>());
    }
    inst.gamma_a = j.at("gamma_a").get<double>();
    inst.validate();
    return inst;
}

nlohmann::json TscInstance::to_json() const {
    return {{"J", servers}, {"n", jobs},       {"lambda", lambda},
            {"mu", mu},     {"gamma_a", gamma_a}, {"gamma_s", gamma_s}};
}

namespace {

void check_dims(const TscInstance& inst, const TscPath& path) {
    if (path.jobs() != inst.jobs || path.servers() != inst.servers) {
        fail_precondition("DimensionMismatch", "path dimensions do not match instance");
    }
    for (const auto& row : path.v) {
        if (row.size() != inst.jobs) {
            fail_precondition("DimensionMismatch", "ragged service matrix");
        }
    }
}

} // namespace

LindleyResult lindley_sojourn(const TscInstance& inst, const TscPath& path) {
    check_dims(inst, path);
    const std::size_t J = inst.servers, n = inst.jobs;
    LindleyResult out;
    out.waits.assign(J, std::vector<double>(n, 0.0));
    out.sojourn.assign(n, 0.0);

    // u_cur[i] holds the interarrival gaps seen by the current server;
    // for server 1 these are the external ones, downstream the gap
    // between consecutive departures is the job's own service plus any
    // idle stretch in front of it.
    std::vector<double> u_cur = path.u;
    std::vector<double> u_next(n, 0.0);
    for (std::size_t j = 0; j < J; ++j) {
        const auto& v = path.v[j];
        auto& w = out.waits[j];
        w[0] = 0.0; // queues start empty, first job never waits
        for (std::size_t i = 1; i < n; ++i) {
            const double slack = w[i - 1] + v[i - 1] - u_cur[i];
            w[i] = std::max(slack, 0.0);
            const double idle = std::max(-slack, 0.0);
            u_next[i] = v[i] + idle;
        }
        for (std::size_t i = 0; i < n; ++i) out.sojourn[i] += w[i] + v[i];
        std::swap(u_cur, u_next);
    }
    return out;
}

Envelope envelope_from_path(const TscPath& path) {
    const std::size_t n = path.jobs();
    Envelope env;
    auto tails = [n](const std::vector<double>& seq) {
        std::vector<double> t(n);
        lil::KahanSum acc;
        for (std::size_t k = n; k >= 1; --k) {
            acc.add(seq[k - 1]);
            t[k - 1] = acc.value();
        }
        return t;
    };
    env.arrival_min = tails(path.u);
    env.arrival_max = env.arrival_min;
    for (const auto& row : path.v) {
        env.service_min.push_back(tails(row));
    }
    env.service_max = env.service_min;
    return env;
}

void Envelope::validate() const {
    const std::size_t n = jobs();
    if (arrival_max.size() != n) fail_precondition("DimensionMismatch", "arrival tables differ in length");
    if (service_max.size() != service_min.size()) {
        fail_precondition("DimensionMismatch", "service tables differ in count");
    }
    for (std::size_t k = 1; k <= n; ++k) {
        if (a_min(k) > a_max(k)) fail_precondition("InvalidEnvelope", "arrival min above max");
    }
    for (std::size_t j = 1; j <= servers(); ++j) {
        if (service_min[j - 1].size() != n || service_max[j - 1].size() != n) {
            fail_precondition("DimensionMismatch", "service table length mismatch");
        }
        for (std::size_t k = 1; k <= n; ++k) {
            if (s_min(j, k) > s_max(j, k)) fail_precondition("InvalidEnvelope", "service min above max");
        }
    }
}

ChainResult envelope_bound_chain(const TscInstance& inst, const Envelope& env) {
    env.validate();
    if (env.jobs() != inst.jobs || env.servers() != inst.servers) {
        fail_precondition("DimensionMismatch", "envelope dimensions do not match instance");
    }
    const std::size_t J = inst.servers, n = inst.jobs;

    // Stage score of placing k_j = k; adjacent chain indices couple only
    // through the tail-sum tables, so a sweep over k with a running best
    // solves each stage.
    auto score = [&](std::size_t j, std::size_t k) {
        if (j == 1) return env.s_max(1, k) - env.a_min(k + 1);
        return env.s_max(j, k) - env.s_min(j - 1, k + 1);
    };

    std::vector<double> best_prev(n + 1, 0.0); // best_prev[k]: best over chains with k_{j-1} <= k
    std::vector<std::vector<std::size_t>> choice(J + 1, std::vector<std::size_t>(n + 1, 1));

    for (std::size_t j = 1; j <= J; ++j) {
        std::vector<double> best(n + 1, 0.0);
        double run = -std::numeric_limits<double>::infinity();
        std::size_t run_k = 1;
        for (std::size_t k = 1; k <= n; ++k) {
            const double cand = score(j, k) + (j == 1 ? 0.0 : best_prev[k]);
            if (cand > run) { // strict: ties keep the smaller k
                run = cand;
                run_k = k;
            }
            best[k] = run;
            choice[j][k] = run_k;
        }
        best_prev = std::move(best);
    }

    ChainResult out;
    out.value = best_prev[n];
    out.chain.assign(J, 1);
    std::size_t upper = n;
    for (std::size_t j = J; j >= 1; --j) {
        out.chain[j - 1] = choice[j][upper];
        upper = out.chain[j - 1];
    }
    return out;
}

double envelope_bound(const TscInstance& inst, const Envelope& env) {
    return envelope_bound_chain(inst, env).value;
}

double maxformula_sojourn(const TscInstance& inst, const TscPath& path) {
    check_dims(inst, path);
    return envelope_bound(inst, envelope_from_path(path));
}

Envelope lil_envelope(const TscInstance& inst) {
    inst.validate();
    if (!inst.gamma_large()) {
        fail_precondition("GammaTooSmall", "budget condition lambda*Gamma >= e^{2e} fails");
    }
    const std::size_t n = inst.jobs;
    Envelope env;
    env.arrival_min.resize(n);
    env.arrival_max.resize(n);
    for (std::size_t k = 1; k <= n; ++k) {
        const double len = static_cast<double>(n + 1 - k);
        const double center = len / inst.lambda;
        const double width = inst.gamma_a * phi(len);
        env.arrival_min[k - 1] = center - width;
        env.arrival_max[k - 1] = center + width;
    }
    for (std::size_t j = 0; j < inst.servers; ++j) {
        std::vector<double> lo(n), hi(n);
        for (std::size_t k = 1; k <= n; ++k) {
            const double len = static_cast<double>(n + 1 - k);
            const double center = len / inst.mu[j];
            const double width = inst.gamma_s[j] * phi(len);
            lo[k - 1] = center - width;
            hi[k - 1] = center + width;
        }
        env.service_min.push_back(std::move(lo));
        env.service_max.push_back(std::move(hi));
    }
    return env;
}

double sojourn_bound_value(const TscInstance& inst) {
    inst.validate();
    if (inst.rho_star() >= 1.0) {
        fail_precondition("UnstableInstance", "bottleneck traffic intensity must be < 1");
    }
    if (!inst.gamma_large()) {
        fail_precondition("GammaTooSmall", "budget condition lambda*Gamma >= e^{2e} fails");
    }
    const double J = static_cast<double>(inst.servers);
    const double g = inst.gamma();
    const double slack = 1.0 - inst.rho_star();
    return 7.0 * J * J * g * g * inst.lambda / slack * lnln(J * inst.lambda * g / slack) +
           J / inst.lambda;
}

BoundReport sojourn_bound(const TscInstance& inst) {
    BoundReport rep;
    rep.formula_id = "tsc.sojourn.lnln";
    rep.value = sojourn_bound_value(inst);
    rep.inputs = inst.to_json();
    rep.inputs["gamma"] = inst.gamma();
    rep.inputs["rho_star"] = inst.rho_star();
    rep.preconditions = {{"gamma_large", inst.gamma_large()}, {"stable", inst.rho_star() < 1.0}};
    rep.notes = {"bound is independent of the job count n"};
    return rep;
}

} // namespace roq::tandem
