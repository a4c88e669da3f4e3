// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Every tolerance and runtime budget is pinned here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "roq/campaign.hpp"
#include "roq/envelope_math.hpp"
#include "roq/lil.hpp"
#include "roq/multiclass.hpp"
#include "roq/simkit.hpp"
#include "roq/tandem.hpp"
#include "oracles.hpp"

using namespace roq;
using envmath::kExp2E;
using envmath::kExpE;
using envmath::lnln;
using envmath::phi;
using sim::DistSpec;

namespace {

int failures = 0;

void gate(const std::string& name, double limit_s,
          const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
        ok = false;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = limit_s <= 0.0 || secs <= limit_s;
    const bool pass = ok && in_time;
    if (!pass) ++failures;
    std::string line = pass ? "PASS: " : "FAIL: ";
    line += name;
    char buf[64];
    std::snprintf(buf, sizeof(buf), " [%.2fs", secs);
    line += buf;
    if (limit_s > 0.0) {
        std::snprintf(buf, sizeof(buf), " / limit %.0fs", limit_s);
        line += buf;
    }
    line += "]";
    if (!in_time) line += " (over time budget)";
    if (!detail.empty()) line += " -- " + detail;
    std::puts(line.c_str());
}

tandem::TscInstance tsc_inst(std::size_t J, std::size_t n, double lambda, double rho_star,
                             double gamma) {
    tandem::TscInstance inst;
    inst.servers = J;
    inst.jobs = n;
    inst.lambda = lambda;
    inst.mu.assign(J, lambda / rho_star);
    inst.gamma_a = gamma;
    inst.gamma_s.assign(J, gamma);
    return inst;
}

tandem::TscPath random_tsc_path(std::size_t J, std::size_t n, sim::Stream& gen, double scale) {
    tandem::TscPath p;
    p.u.resize(n);
    for (auto& x : p.u) x = scale * gen.next_unit();
    p.v.assign(J, std::vector<double>(n, 0.0));
    for (auto& row : p.v)
        for (auto& x : row) x = scale * gen.next_unit();
    return p;
}

mcss::McssInstance chain_mcss() {
    mcss::McssInstance inst;
    inst.classes = 2;
    inst.lambda = {1.0, 0.0};
    inst.mu = {10.0 / 3.0, 10.0 / 3.0}; // rho = 0.6
    inst.routing = {{0, 1}, {0, 0}};
    inst.gamma_a = {0.0, 0.0};
    inst.gamma_s = {0.0, 0.0};
    return inst;
}

} // namespace

int main() {
    std::printf("acceptance suite\n");

    gate("1. max-formula identity on 1000 random tandem paths", 5.0, [](std::string& detail) {
        sim::Stream gen(101, 0, 0);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t J = 1 + gen.next_u64() % 5;
            const std::size_t n = 1 + gen.next_u64() % 50;
            const auto inst = tsc_inst(J, n, 1.0, 0.5, 0.0);
            const auto path = random_tsc_path(J, n, gen, 10.0);
            const double lind = tandem::lindley_sojourn(inst, path).sojourn.back();
            const double maxf = tandem::maxformula_sojourn(inst, path);
            worst = std::max(worst, std::abs(lind - maxf));
        }
        char buf[48];
        std::snprintf(buf, sizeof(buf), "max |lindley - maxformula| = %.2e", worst);
        detail = buf;
        return worst <= 1e-9;
    });

    gate("2. dynamic program exact vs chain enumeration (500 envelopes)", 10.0,
         [](std::string& detail) {
             sim::Stream gen(202, 0, 0);
             auto dyadic = [&](double range) {
                 return std::floor(gen.next_unit() * range * 8.0) / 8.0 - range / 2.0;
             };
             int mismatches = 0;
             for (int trial = 0; trial < 500; ++trial) {
                 const std::size_t J = 1 + gen.next_u64() % 3;
                 const std::size_t n = 1 + gen.next_u64() % 12;
                 tandem::Envelope env;
                 env.arrival_min.resize(n);
                 env.arrival_max.resize(n);
                 for (std::size_t k = 0; k < n; ++k) {
                     env.arrival_min[k] = dyadic(64.0);
                     env.arrival_max[k] = env.arrival_min[k] + std::abs(dyadic(16.0));
                 }
                 for (std::size_t j = 0; j < J; ++j) {
                     std::vector<double> lo(n), hi(n);
                     for (std::size_t k = 0; k < n; ++k) {
                         lo[k] = dyadic(64.0);
                         hi[k] = lo[k] + std::abs(dyadic(16.0));
                     }
                     env.service_min.push_back(lo);
                     env.service_max.push_back(hi);
                 }
                 const auto inst = tsc_inst(J, n, 1.0, 0.5, 0.0);
                 if (tandem::envelope_bound(inst, env) != oracles::brute_force_envelope(env)) {
                     ++mismatches;
                 }
             }
             detail = std::to_string(mismatches) + " mismatches";
             return mismatches == 0;
         });

    gate("3. envelope bound dominates 10000 feasible paths", 30.0, [](std::string& detail) {
        sim::Stream gen(303, 0, 0);
        int violations = 0;
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t J = 1 + gen.next_u64() % 3;
            const std::size_t n = 2 + gen.next_u64() % 29;
            const auto inst = tsc_inst(J, n, 1.0, 0.5, 0.0);
            const auto base = random_tsc_path(J, n, gen, 5.0);
            auto env = tandem::envelope_from_path(base);
            const double s0 = gen.next_unit(), s1 = gen.next_unit();
            for (std::size_t k = 0; k < n; ++k) {
                const double slack = s0 + s1 * static_cast<double>(n - k);
                env.arrival_min[k] -= slack;
                env.arrival_max[k] += slack;
                for (std::size_t j = 0; j < J; ++j) {
                    env.service_min[j][k] -= slack;
                    env.service_max[j][k] += slack;
                }
            }
            const double bound = tandem::envelope_bound(inst, env);
            for (int rep = 0; rep < 50; ++rep) {
                tandem::TscPath p;
                p.u.assign(n, 0.0);
                p.v.assign(J, std::vector<double>(n, 0.0));
                auto sample_tail = [&](const std::vector<double>& lo,
                                       const std::vector<double>& hi, std::vector<double>& out) {
                    double tail = 0.0;
                    for (std::size_t k = n; k >= 1; --k) {
                        const double x_lo = std::max(0.0, lo[k - 1] - tail);
                        const double x_hi = hi[k - 1] - tail;
                        out[k - 1] = x_lo + std::max(0.0, x_hi - x_lo) * gen.next_unit();
                        tail += out[k - 1];
                    }
                };
                sample_tail(env.arrival_min, env.arrival_max, p.u);
                for (std::size_t j = 0; j < J; ++j) {
                    sample_tail(env.service_min[j], env.service_max[j], p.v[j]);
                }
                if (tandem::maxformula_sojourn(inst, p) > bound + 1e-9) ++violations;
            }
        }
        detail = std::to_string(violations) + " violations";
        return violations == 0;
    });

    gate("4. analytic envelope stays strictly under the closed form (grid)", 60.0,
         [](std::string& detail) {
             int checked = 0, holds = 0;
             for (std::size_t J : {1u, 2u, 4u}) {
                 for (double rho : {0.5, 0.8, 0.9, 0.95}) {
                     for (double gamma : {kExp2E, 500.0}) {
                         for (std::size_t n : {1000u, 10000u}) {
                             const auto inst = tsc_inst(J, n, 1.0, rho, gamma);
                             const double dp =
                                 tandem::envelope_bound(inst, tandem::lil_envelope(inst));
                             const double closed = tandem::sojourn_bound_value(inst);
                             ++checked;
                             if (dp < closed) ++holds;
                         }
                     }
                 }
             }
             detail = std::to_string(holds) + "/" + std::to_string(checked) + " strict";
             return holds == checked;
         });

    gate("5. certified tandem replications never break the bound (200 x n=5000)", 120.0,
         [](std::string& detail) {
             campaign::TscValidateConfig cfg;
             cfg.inst = tsc_inst(2, 5000, 1.0, 0.8, 0.0);
             cfg.arrival = DistSpec::exponential(1.0);
             cfg.services = {DistSpec::exponential(1.25), DistSpec::exponential(1.25)};
             cfg.replications = 200;
             cfg.seed = 20240505;
             const auto res = campaign::validate_tsc(cfg);
             detail = "violations " + std::to_string(res.violations) + ", max sojourn " +
                      std::to_string(res.max_sojourn) + ", min bound " +
                      std::to_string(res.min_bound);
             return res.violations == 0;
         });

    // Criteria 6 and 7 share one campaign over the same replications.
    campaign::McssValidateResult mcss_res;
    bool mcss_ran = false;
    gate("6. busy periods and peaks under certified multiclass bounds (200 reps)", 180.0,
         [&](std::string& detail) {
             campaign::McssValidateConfig cfg;
             cfg.inst = chain_mcss();
             cfg.arrivals = {DistSpec::exponential(1.0), DistSpec::exponential(1.0)};
             cfg.services = {DistSpec::exponential(10.0 / 3.0), DistSpec::exponential(10.0 / 3.0)};
             cfg.replications = 200;
             cfg.horizon = 1e4;
             cfg.seed = 20240506;
             cfg.arrival_checks = true;
             cfg.arrival_check_samples = 20;
             mcss_res = campaign::validate_mcss(cfg);
             mcss_ran = true;
             detail = "busy viol " + std::to_string(mcss_res.busy_violations) + ", peak viol " +
                      std::to_string(mcss_res.peak_violations) + ", periods " +
                      std::to_string(mcss_res.periods) + ", max busy " +
                      std::to_string(mcss_res.max_busy);
             return mcss_res.busy_violations == 0 && mcss_res.peak_violations == 0 &&
                    mcss_res.periods > 0;
         });

    gate("7. arrival-process inequalities at sampled valid times", 0.0, [&](std::string& detail) {
        if (!mcss_ran) {
            detail = "campaign did not run";
            return false;
        }
        detail = std::to_string(mcss_res.arrival_check_violations) + " violations over " +
                 std::to_string(mcss_res.replications) + " paths x 20 times";
        return mcss_res.arrival_check_violations == 0;
    });

    gate("8. drift-curve suite on 1000 random shapes", 30.0, [](std::string& detail) {
        sim::Stream gen(808, 0, 0);
        int bad = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const double a = 0.1 + 5.0 * gen.next_unit();
            const double ratio = kExp2E + (1e4 - kExp2E) * gen.next_unit();
            const double b = a * ratio;
            const double c = 3.5 * b * gen.next_unit(); // keeps e^e > (c/b)^2
            const envmath::UShape shape{a, b, c};

            const double thr = envmath::negativity_threshold(shape);
            const auto numeric = envmath::u_numeric_max(shape, 2.0 * thr);
            const double ceiling = envmath::umax_bound(shape);
            if (!(numeric.value <= ceiling + 1e-9 * std::abs(ceiling))) ++bad;

            for (int i = 0; i < 1000; ++i) {
                const double x = thr * std::pow(100.0, (i + 1) / 1000.0);
                if (!(envmath::u_value(shape, x) < 0.0)) {
                    ++bad;
                    break;
                }
            }

            double xs[3];
            for (double& x : xs) x = kExpE * std::pow(10.0, 5.0 * gen.next_unit());
            std::sort(std::begin(xs), std::end(xs));
            if (xs[0] < xs[1] && xs[1] < xs[2]) {
                const double t = (xs[1] - xs[0]) / (xs[2] - xs[0]);
                const double interp = (1 - t) * envmath::u_value(shape, xs[0]) +
                                      t * envmath::u_value(shape, xs[2]);
                if (!(envmath::u_value(shape, xs[1]) > interp)) ++bad;
            }

            const auto [blo, bhi] = envmath::bracket_xstar(shape);
            double xl = kExpE, xh = 10.0 * 4.0 * ratio * ratio * lnln(ratio);
            if (envmath::u_derivative(shape, xl) > 0.0 && envmath::u_derivative(shape, xh) < 0.0) {
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (xl + xh);
                    (envmath::u_derivative(shape, mid) > 0.0 ? xl : xh) = mid;
                }
                const double root = 0.5 * (xl + xh);
                if (!(root >= blo * (1 - 1e-9) && root <= bhi * (1 + 1e-9))) ++bad;
            } else {
                ++bad; // ratio_ok guarantees an interior stationary point
            }
        }
        detail = std::to_string(bad) + " failures";
        return bad == 0;
    });

    gate("9. workload trace identical under FIFO and static priority (100 paths)", 0.0,
         [](std::string& detail) {
             sim::Stream meta(909, 0, 0);
             int bad = 0;
             for (int trial = 0; trial < 100; ++trial) {
                 const std::size_t J = 1 + meta.next_u64() % 3;
                 mcss::McssInstance inst;
                 inst.classes = J;
                 inst.lambda.assign(J, 0.0);
                 inst.mu.assign(J, 0.0);
                 inst.routing.assign(J, std::vector<int>(J, 0));
                 inst.gamma_a.assign(J, 230.0);
                 inst.gamma_s.assign(J, 230.0);
                 for (std::size_t j = 0; j < J; ++j) {
                     inst.lambda[j] = meta.next_unit() < 0.3 && j > 0
                                          ? 0.0
                                          : 0.3 + 0.7 * meta.next_unit();
                     inst.mu[j] = 1.5 + 2.5 * meta.next_unit();
                     if (j + 1 < J && meta.next_unit() < 0.6) {
                         inst.routing[j][j + 1 + meta.next_u64() % (J - j - 1)] = 1;
                     }
                 }
                 std::vector<DistSpec> arr, svc;
                 for (std::size_t j = 0; j < J; ++j) {
                     arr.push_back(DistSpec::exponential(inst.lambda[j] > 0 ? inst.lambda[j] : 1.0));
                     svc.push_back(DistSpec::exponential(inst.mu[j]));
                 }
                 const auto path = sim::draw_path_mcss(inst, arr, svc, 200.0, 910,
                                                       static_cast<std::uint32_t>(trial));
                 const auto fifo = mcss::workload_trace(inst, path, mcss::PolicySpec::fifo());
                 std::vector<std::size_t> order(J);
                 for (std::size_t j = 0; j < J; ++j) order[j] = J - 1 - j;
                 const auto prio = mcss::workload_trace(
                     inst, path, mcss::PolicySpec::static_priority(order));
                 std::vector<double> times = fifo.trace.t;
                 times.insert(times.end(), prio.trace.t.begin(), prio.trace.t.end());
                 for (double t : times) {
                     if (std::abs(fifo.trace.value_at(t) - prio.trace.value_at(t)) > 1e-9) {
                         ++bad;
                         break;
                     }
                 }
             }
             detail = std::to_string(bad) + " diverging paths";
             return bad == 0;
         });

    gate("10. ergodic device: deterministic cycle exact, M/M/1 within 3 SE", 0.0,
         [](std::string& detail) {
             mcss::McssInstance dd;
             dd.classes = 1;
             dd.lambda = {0.5};
             dd.mu = {1.0};
             dd.routing = {{0}};
             dd.gamma_a = {230.0};
             dd.gamma_s = {230.0};
             const auto dpath = sim::draw_path_mcss(dd, {DistSpec::deterministic(2.0)},
                                                    {DistSpec::deterministic(1.0)}, 1000.0, 1, 0);
             const auto dres = mcss::workload_trace(dd, dpath, mcss::PolicySpec::fifo());
             const auto dest = sim::ergodic_estimates(dres.log, dres.trace, 1000.0);
             const bool exact = dest.mean_w_time_avg == 0.25 && dest.eb == 1.0 &&
                                dest.ei == 1.0 && dest.eb2 == 1.0 &&
                                dest.pathwise_lhs <= dest.pathwise_rhs;

             const auto mpath = sim::draw_path_mcss(dd, {DistSpec::exponential(0.5)},
                                                    {DistSpec::exponential(1.0)}, 1e6, 2024, 0);
             const auto mres = mcss::workload_trace(dd, mpath, mcss::PolicySpec::fifo());
             double sum_a = 0.0, sum_l = 0.0;
             std::size_t cycles = 0;
             for (const auto& p : mres.log.periods) {
                 if (!p.idle_complete) continue;
                 sum_a += p.area;
                 sum_l += p.busy + p.idle;
                 ++cycles;
             }
             const double r_hat = sum_a / sum_l;
             double s2 = 0.0;
             for (const auto& p : mres.log.periods) {
                 if (!p.idle_complete) continue;
                 const double d = p.area - r_hat * (p.busy + p.idle);
                 s2 += d * d;
             }
             s2 /= static_cast<double>(cycles - 1);
             const double se =
                 std::sqrt(s2 / static_cast<double>(cycles)) / (sum_l / static_cast<double>(cycles));
             const bool mm1_ok = std::abs(r_hat - 1.0) <= 3.0 * se;
             const auto mest = sim::ergodic_estimates(mres.log, mres.trace, 1e6);
             detail = "cycle exact=" + std::string(exact ? "yes" : "no") + ", M/M/1 time-avg " +
                      std::to_string(r_hat) + " (se " + std::to_string(se) + ", ergodic " +
                      std::to_string(mest.mean_w_time_avg) + ")";
             return exact && mm1_ok && mest.pathwise_lhs <= mest.pathwise_rhs;
         });

    gate("11. traffic equations on 100 random acyclic routings", 0.0, [](std::string& detail) {
        sim::Stream gen(1111, 0, 0);
        int bad = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t J = 1 + gen.next_u64() % 8;
            // random topological order, at most one successor per class
            std::vector<std::size_t> order(J);
            for (std::size_t j = 0; j < J; ++j) order[j] = j;
            for (std::size_t j = J; j > 1; --j) {
                std::swap(order[j - 1], order[gen.next_u64() % j]);
            }
            std::vector<std::size_t> rank(J);
            for (std::size_t pos = 0; pos < J; ++pos) rank[order[pos]] = pos;
            mcss::McssInstance inst;
            inst.classes = J;
            inst.lambda.assign(J, 0.0);
            inst.mu.assign(J, 1.0);
            inst.routing.assign(J, std::vector<int>(J, 0));
            inst.gamma_a.assign(J, 230.0);
            inst.gamma_s.assign(J, 230.0);
            bool any = false;
            for (std::size_t j = 0; j < J; ++j) {
                inst.lambda[j] = gen.next_unit() < 0.35 ? 0.0 : 2.0 * gen.next_unit();
                any = any || inst.lambda[j] > 0.0;
                inst.mu[j] = 0.5 + 4.0 * gen.next_unit();
                if (rank[j] + 1 < J && gen.next_unit() < 0.7) {
                    // successor strictly later in the order
                    const std::size_t offset = 1 + gen.next_u64() % (J - rank[j] - 1);
                    inst.routing[j][order[rank[j] + offset]] = 1;
                }
            }
            if (!any) inst.lambda[0] = 1.0;
            const auto t = mcss::traffic_solve(inst);
            if (t.residual >= 1e-12) ++bad;
            for (std::size_t j = 0; j < J; ++j) {
                if (t.lambda_bar[j] < inst.lambda[j]) ++bad;
            }
        }
        detail = std::to_string(bad) + " failures";
        return bad == 0;
    });

    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ALL PASS" : "RESULT", failures);
    return failures;
}
