#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "roq/envelope_math.hpp"
#include "roq/multiclass.hpp"
#include "roq/simkit.hpp"
#include "oracles.hpp"

using namespace roq::mcss;
using roq::envmath::kExp2E;
using roq::envmath::phi;
using roq::PreconditionError;
using roq::sim::DistSpec;

namespace {

McssInstance make_inst(std::vector<double> lambda, std::vector<double> mu,
                       std::vector<std::vector<int>> P, double gamma = 230.0) {
    McssInstance inst;
    inst.classes = lambda.size();
    inst.lambda = std::move(lambda);
    inst.mu = std::move(mu);
    inst.routing = std::move(P);
    inst.gamma_a.assign(inst.classes, gamma);
    inst.gamma_s.assign(inst.classes, gamma);
    return inst;
}

McssPath direct_path(std::vector<std::vector<double>> gaps,
                     std::vector<std::vector<double>> services, double horizon) {
    return McssPath{std::move(gaps), std::move(services), horizon};
}

} // namespace

TEST_CASE("traffic equations") {
    {
        auto inst = make_inst({1.0, 2.0}, {4.0, 8.0}, {{0, 0}, {0, 0}});
        const auto t = traffic_solve(inst);
        CHECK(t.lambda_bar == std::vector<double>{1.0, 2.0});
        CHECK(t.rho == doctest::Approx(0.5));
        CHECK(t.residual < 1e-12);
    }
    {
        auto inst = make_inst({1.0, 0.0}, {4.0, 4.0}, {{0, 1}, {0, 0}});
        const auto t = traffic_solve(inst);
        CHECK(t.lambda_bar == std::vector<double>{1.0, 1.0});
    }
    {
        auto inst = make_inst({0.5, 0.0, 0.0}, {2.0, 2.0, 2.0},
                              {{0, 1, 0}, {0, 0, 1}, {0, 0, 0}});
        const auto t = traffic_solve(inst);
        CHECK(t.lambda_bar == std::vector<double>{0.5, 0.5, 0.5});
        CHECK(t.rho == doctest::Approx(0.75));
        CHECK(t.stable);
    }
    {
        // rho >= 1 is reported, not thrown
        auto inst = make_inst({1.0}, {0.5}, {{0}});
        const auto t = traffic_solve(inst);
        CHECK(t.rho == doctest::Approx(2.0));
        CHECK(!t.stable);
    }
    auto cyc = make_inst({1.0, 0.0}, {4.0, 4.0}, {{0, 1}, {1, 0}});
    CHECK_THROWS_AS(traffic_solve(cyc), PreconditionError);
}

TEST_CASE("routes follow the routing matrix") {
    auto inst = make_inst({1.0, 0.0, 0.0}, {2, 2, 2}, {{0, 1, 0}, {0, 0, 1}, {0, 0, 0}});
    CHECK(inst.route_of(0) == std::vector<std::size_t>{0, 1, 2});
    CHECK(inst.route_of(2) == std::vector<std::size_t>{2});
}

TEST_CASE("instance validation rejects malformed routing") {
    auto bad_rows = make_inst({1.0}, {2.0}, {{2}});
    CHECK_THROWS_AS(bad_rows.validate(), PreconditionError);
    auto two_out = make_inst({1.0, 1.0}, {4.0, 4.0}, {{1, 1}, {0, 0}});
    CHECK_THROWS_AS(two_out.validate(), PreconditionError);
}

TEST_CASE("single initial job, no arrivals in horizon") {
    auto inst = make_inst({0.5}, {1.0}, {{0}});
    auto path = direct_path({{100.0, 100.0}}, {{3.0, 1.0}}, 50.0);
    const auto res = workload_trace(inst, path, PolicySpec::fifo());
    REQUIRE(res.log.periods.size() == 1);
    CHECK(res.log.periods[0].start == 0.0);
    CHECK(res.log.periods[0].busy == 3.0);
    CHECK(res.log.periods[0].peak == 3.0);
    CHECK(!res.log.periods[0].idle_complete);
    CHECK(res.trace.value_at(1.0) == doctest::Approx(2.0));
    CHECK(res.trace.integral(0.0, 50.0) == doctest::Approx(4.5)); // 3^2/2
}

TEST_CASE("work conservation merges simultaneous initial jobs") {
    auto inst = make_inst({0.1, 0.1}, {1.0, 1.0}, {{0, 0}, {0, 0}});
    auto path = direct_path({{1000.0}, {1000.0}}, {{2.5}, {1.5}}, 100.0);
    const auto res = workload_trace(inst, path, PolicySpec::fifo());
    REQUIRE(res.log.periods.size() == 1);
    CHECK(res.log.periods[0].busy == doctest::Approx(4.0));
    CHECK(res.log.periods[0].peak == doctest::Approx(4.0));
}

TEST_CASE("deterministic cycle: busy 1 idle 1") {
    auto inst = make_inst({0.5}, {1.0}, {{0}});
    std::vector<double> gaps(30, 2.0), svc(40, 1.0);
    auto path = direct_path({gaps}, {svc}, 20.0);
    const auto res = workload_trace(inst, path, PolicySpec::fifo());
    REQUIRE(res.log.periods.size() == 10);
    for (const auto& p : res.log.periods) {
        CHECK(p.busy == 1.0);
        CHECK(p.idle == 1.0);
        CHECK(p.peak == 1.0);
        CHECK(p.area == 0.5);
        CHECK(p.idle_complete);
    }
    CHECK(res.log.n_of(4.5) == 3);
    CHECK(res.log.n_of(0.0) == 1);
}

TEST_CASE("chain routing consumes downstream services in closure order") {
    // classes 1 -> 2; initial jobs take v1[0] and v2[0]; the class-1 initial
    // job then takes v2[1] for its downstream visit.
    auto inst = make_inst({0.25, 0.0}, {1.0, 1.0}, {{0, 1}, {0, 0}});
    auto path = direct_path({{100.0}, {}}, {{2.0}, {5.0, 7.0}}, 50.0);
    const auto res = workload_trace(inst, path, PolicySpec::fifo());
    REQUIRE(res.log.periods.size() == 1);
    // total work: 2 + 5 + 7 = 14
    CHECK(res.log.periods[0].busy == doctest::Approx(14.0));
    CHECK(res.log.periods[0].peak == doctest::Approx(14.0));
    CHECK(res.log.periods[0].work == doctest::Approx(14.0));
    CHECK(res.services_used == std::vector<std::size_t>{1, 2});
}

TEST_CASE("completion beats a simultaneous arrival") {
    auto inst = make_inst({1.0}, {1.0}, {{0}});
    // initial service 1.0; first arrival exactly at t = 1.0
    auto path = direct_path({{1.0, 99.0}}, {{1.0, 0.5}}, 10.0);
    const auto res = workload_trace(inst, path, PolicySpec::fifo());
    REQUIRE(res.log.periods.size() == 2);
    CHECK(res.log.periods[0].busy == 1.0);
    CHECK(res.log.periods[0].idle == 0.0);
    CHECK(res.log.periods[0].idle_complete);
    CHECK(res.log.periods[1].start == 1.0);
    CHECK(res.log.periods[1].busy == 0.5);
}

TEST_CASE("empty start waits for the first arrival") {
    auto inst = make_inst({0.5}, {1.0}, {{0}});
    auto path = direct_path({{4.0, 100.0}}, {{1.0, 1.0}}, 20.0);
    const auto res = workload_trace(inst, path, PolicySpec::fifo(), InitMode::Empty);
    REQUIRE(res.log.periods.size() == 1);
    CHECK(res.log.periods[0].start == 4.0);
    CHECK(res.trace.value_at(2.0) == 0.0);
}

TEST_CASE("exhausted sequences are reported") {
    auto inst = make_inst({0.5}, {1.0}, {{0}});
    auto short_arrivals = direct_path({{2.0, 2.0}}, {{1.0, 1.0, 1.0}}, 20.0);
    CHECK_THROWS_AS(workload_trace(inst, short_arrivals, PolicySpec::fifo()), PreconditionError);
    auto short_services = direct_path({{2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0}},
                                      {{1.0, 1.0}}, 20.0);
    CHECK_THROWS_AS(workload_trace(inst, short_services, PolicySpec::fifo()), PreconditionError);
}

TEST_CASE("policy parsing") {
    CHECK(parse_policy("fifo", 3).kind == Policy::FifoAcrossClasses);
    CHECK(parse_policy("priority", 3).kind == Policy::StaticPriority);
    const auto p = parse_policy("priority:3,1,2", 3);
    CHECK(p.priority == std::vector<std::size_t>{2, 0, 1});
    CHECK_THROWS_AS(parse_policy("lifo", 3), PreconditionError);
    CHECK_THROWS_AS(parse_policy("priority:1,1,2", 3), PreconditionError);
    CHECK_THROWS_AS(parse_policy("priority:1,2", 3), PreconditionError);
}

TEST_CASE("workload trace is policy-invariant; job dynamics are not") {
    auto inst = make_inst({0.6, 0.4, 0.0}, {2.0, 3.0, 2.5},
                          {{0, 0, 1}, {0, 0, 0}, {0, 0, 0}}, 230.0);
    const std::vector<DistSpec> arr{DistSpec::exponential(0.6), DistSpec::exponential(0.4),
                                    DistSpec::exponential(1.0)};
    const std::vector<DistSpec> svc{DistSpec::exponential(2.0), DistSpec::exponential(3.0),
                                    DistSpec::exponential(2.5)};
    for (std::uint32_t rep = 0; rep < 20; ++rep) {
        const auto path = roq::sim::draw_path_mcss(inst, arr, svc, 150.0, 555, rep);
        const auto fifo = workload_trace(inst, path, PolicySpec::fifo());
        const auto prio = workload_trace(inst, path, parse_policy("priority:3,2,1", 3));
        std::vector<double> times = fifo.trace.t;
        times.insert(times.end(), prio.trace.t.begin(), prio.trace.t.end());
        for (double t : times) {
            CHECK(std::abs(fifo.trace.value_at(t) - prio.trace.value_at(t)) <= 1e-9);
        }
        // busy period boundaries agree as well
        REQUIRE(fifo.log.periods.size() == prio.log.periods.size());
        for (std::size_t i = 0; i < fifo.log.periods.size(); ++i) {
            CHECK(std::abs(fifo.log.periods[i].busy - prio.log.periods[i].busy) <= 1e-9);
            CHECK(std::abs(fifo.log.periods[i].peak - prio.log.periods[i].peak) <= 1e-9);
        }
    }
}

TEST_CASE("device workload equals job-state workload at every event") {
    auto inst = make_inst({0.7, 0.0}, {2.0, 2.0}, {{0, 1}, {0, 0}}, 230.0);
    const std::vector<DistSpec> arr{DistSpec::exponential(0.7), DistSpec::exponential(1.0)};
    const std::vector<DistSpec> svc{DistSpec::exponential(2.0), DistSpec::exponential(2.0)};
    for (std::uint32_t rep = 0; rep < 10; ++rep) {
        const auto path = roq::sim::draw_path_mcss(inst, arr, svc, 200.0, 708, rep);
        const auto res =
            workload_trace(inst, path, PolicySpec::fifo(), InitMode::OnePerClass, true);
        REQUIRE(!res.state_checks.empty());
        for (const auto& [t, device, state] : res.state_checks) {
            CHECK(std::abs(device - state) <= 1e-9 * (1.0 + state));
        }
    }
}

TEST_CASE("service completed in a period accounts for its full length") {
    auto inst = make_inst({0.5, 0.0}, {1.5, 1.5}, {{0, 1}, {0, 0}}, 230.0);
    const std::vector<DistSpec> arr{DistSpec::exponential(0.5), DistSpec::exponential(1.0)};
    const std::vector<DistSpec> svc{DistSpec::exponential(1.5), DistSpec::exponential(1.5)};
    for (std::uint32_t rep = 0; rep < 10; ++rep) {
        const auto path = roq::sim::draw_path_mcss(inst, arr, svc, 300.0, 99, rep);
        const auto res = workload_trace(inst, path, PolicySpec::fifo());
        for (const auto& p : res.log.periods) {
            CHECK(std::abs(p.work - p.busy) <= 1e-9 * (1.0 + p.busy));
        }
    }
}

TEST_CASE("arrival count bound and its validity threshold") {
    auto inst = make_inst({1.0, 0.0}, {4.0, 4.0}, {{0, 1}, {0, 0}}, 230.0);
    const double gamma = inst.gamma();
    const double t_low = lower_time_threshold(inst, gamma);
    CHECK(t_low == doctest::Approx(1.0 + 3.0 * gamma * gamma));
    CHECK(arrival_count_bound(inst, 1, t_low, gamma) == 0.0); // no external arrivals
    const double b = arrival_count_bound(inst, 0, t_low, gamma);
    CHECK(b == doctest::Approx(t_low + 3.0 * gamma * gamma * phi(t_low)).epsilon(1e-12));
    CHECK_THROWS_AS(arrival_count_bound(inst, 0, t_low / 2.0, gamma), PreconditionError);
}

TEST_CASE("closed-form busy and peak-workload bounds") {
    auto inst = make_inst({1.0}, {2.0}, {{0}}, 230.0);
    const auto b = busy_workload_bounds(inst);
    const long double g2 = 230.0L * 230.0L;
    const long double busy_expect =
        5.0L * 49.0L * g2 * g2 * 4.0L * std::log(std::log(2.0L * 7.0L * g2 * 2.0L));
    CHECK(b.busy_bound == doctest::Approx(static_cast<double>(busy_expect)).epsilon(1e-12));
    const long double work_expect =
        2.0L * 49.0L * g2 * g2 * 2.0L * std::log(std::log(7.0L * g2 * 2.0L)) + 230.0L +
        3.0L * g2 * 230.0L;
    CHECK(b.workload_bound == doctest::Approx(static_cast<double>(work_expect)).epsilon(1e-12));
    CHECK(b.busy_report.formula_id == "mcss.busy_period.lnln");

    // tighter load, larger bound
    auto inst9 = make_inst({1.0}, {1.0 / 0.9}, {{0}}, 230.0);
    CHECK(busy_workload_bounds(inst9).busy_bound > b.busy_bound);

    auto small = make_inst({1.0}, {2.0}, {{0}}, 1.0);
    CHECK_THROWS_AS(busy_workload_bounds(small), PreconditionError);
    auto unstable = make_inst({3.0}, {2.0}, {{0}}, 230.0);
    CHECK_THROWS_AS(busy_workload_bounds(unstable), PreconditionError);
}

TEST_CASE("instance json accepts the documented schema") {
    const nlohmann::json j = {{"J", 2},
                              {"lambda", {1.0, 0.0}},
                              {"mu", {4.0, 4.0}},
                              {"P", {{0, 1}, {0, 0}}},
                              {"gamma_a", {230.0, 230.0}},
                              {"gamma_s", {230.0, 230.0}}};
    const auto inst = McssInstance::from_json(j);
    CHECK(inst.classes == 2);
    CHECK(inst.routing[0][1] == 1);
    CHECK(inst.gamma() == 230.0);
    CHECK(inst.gamma_large());
}

TEST_CASE("steady-state estimators on a deterministic cycle") {
    auto inst = make_inst({0.5}, {1.0}, {{0}});
    const std::vector<DistSpec> arr{DistSpec::deterministic(2.0)};
    const std::vector<DistSpec> svc{DistSpec::deterministic(1.0)};
    const auto est = steady_state_estimators(inst, arr, svc, 2, 200.0, 1, 1);
    CHECK(est.eb == 1.0);
    CHECK(est.ei == 1.0);
    CHECK(est.eb2 == 1.0);
    CHECK(est.mean_workload_time_avg == 0.25);
    CHECK(est.ratio_bound == 0.5);
    CHECK(est.workload_below_ratio);
    CHECK(est.busy_mean_below_bound);
}

TEST_CASE("steady-state estimators on a short M/M/1 run") {
    auto inst = make_inst({0.5}, {1.0}, {{0}});
    const std::vector<DistSpec> arr{DistSpec::exponential(0.5)};
    const std::vector<DistSpec> svc{DistSpec::exponential(1.0)};
    const auto est = steady_state_estimators(inst, arr, svc, 8, 2000.0, 31337, 1);
    CHECK(est.completed_periods >= 30);
    CHECK(est.busy_mean_below_bound);
    CHECK(est.workload_below_ratio);
    CHECK(est.gamma_max >= kExp2E / 0.5 * (1 - 1e-12));
    // M/M/1 workload time-average at rho = 0.5 is 1.0; allow wide slack here
    CHECK(est.mean_workload_time_avg > 0.3);
    CHECK(est.mean_workload_time_avg < 3.0);

    CHECK_THROWS_AS(steady_state_estimators(inst, arr, svc, 0, 2000.0, 1, 1), PreconditionError);
    auto unstable = make_inst({2.0}, {1.0}, {{0}});
    CHECK_THROWS_AS(steady_state_estimators(unstable, {DistSpec::exponential(2.0)}, svc, 4, 100.0, 1, 1),
                    PreconditionError);
}
