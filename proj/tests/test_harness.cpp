#include <set>

#include "doctest.h"
#include "vcube/enumerate.hpp"
#include "vcube/scenario.hpp"
#include "vcube/suite.hpp"

using namespace vcube;

TEST_CASE("the generator is deterministic and uniform-bounded") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    Rng c(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = c.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const auto k = c.next_below(13);
        CHECK(k >= 0);
        CHECK(k < 13);
    }
}

TEST_CASE("crash generation draws distinct targets inside the window") {
    Rng rng(5);
    const auto crashes = generate_crashes(rng, 16, 6, 120.0, ProcessId{0});
    CHECK(crashes.size() == 6);
    std::set<ProcessId> targets;
    for (const auto& e : crashes) {
        CHECK(e.process != 0);
        CHECK(e.process < 16);
        CHECK(targets.insert(e.process).second);
        CHECK(e.time >= 0.0);
        CHECK(e.time < 120.0);
    }
    Rng again(5);
    const auto repeat = generate_crashes(again, 16, 6, 120.0, ProcessId{0});
    CHECK(repeat == crashes);
}

TEST_CASE("scenario files parse with defaults and overrides") {
    const Scenario sc = parse_scenario(R"({
        "n": 16,
        "protocol": "atree-r",
        "seed": 99,
        "workload": {"source": 3, "messages": 4, "start": 1.5},
        "crashes": {"count": 2, "allow_source": true},
        "timing": {"t_t": 0.4},
        "detector": {"timeout": 2.0}
    })");
    CHECK(sc.n == 16);
    CHECK(sc.protocol == "atree-r");
    CHECK(sc.seed == 99);
    CHECK(sc.source == 3);
    CHECK(sc.messages == 4);
    CHECK(sc.start == doctest::Approx(1.5));
    CHECK(sc.crash_count == 2);
    CHECK(sc.allow_source_crash);
    CHECK(sc.timing.t_t == doctest::Approx(0.4));
    CHECK(sc.timing.t_s == doctest::Approx(0.1));
    CHECK(sc.detector.timeout == doctest::Approx(2.0));

    const Scenario explicit_sc = parse_scenario(R"({
        "n": 8,
        "protocol": "all-b",
        "workload": [{"source": 0, "time": 0.0}, {"source": 2, "time": 1.0}],
        "crashes": [{"process": 5, "time": 0.25}]
    })");
    CHECK(explicit_sc.explicit_workload.size() == 2);
    CHECK(explicit_sc.explicit_crashes.size() == 1);

    CHECK_THROWS_AS(parse_scenario("{"), std::invalid_argument);
    CHECK_THROWS_AS(parse_scenario(R"({"n": 6, "protocol": "atree-b"})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_scenario(R"({"n": 8, "protocol": "atree-b",
                                      "crashes": {"count": 8}})"),
                    std::invalid_argument);
}

TEST_CASE("realized scenarios exclude the source and respect the window") {
    Scenario sc;
    sc.n = 8;
    sc.protocol = "atree-b";
    sc.seed = 11;
    sc.messages = 2;
    sc.crash_count = 3;
    const RunSpec spec = realize_scenario(sc);
    CHECK(spec.crashes.entries().size() == 3);
    const SimTime window = run_duration(base_run_spec(sc));
    for (const auto& e : spec.crashes.entries()) {
        CHECK(e.process != 0);
        CHECK(e.time < window);
    }
    const RunSpec again = realize_scenario(sc);
    CHECK(again.crashes.entries() == spec.crashes.entries());
}

TEST_CASE("crash-timing enumeration covers all boundaries of the fault-free run") {
    EnumerationSpec spec;
    spec.base.n = 2;
    spec.base.protocol = "atree-b";
    spec.base.workload = {{1.0, 0, 0}};
    spec.crash_set = {0};
    const auto candidates = crash_candidates(spec.base);
    CHECK(candidates.size() >= 3);  // before the send, mid-flight, after completion
    CHECK(candidates.front() == doctest::Approx(0.0));
    std::size_t seen = 0;
    for_each_crash_timing(spec, [&](const CrashSchedule& sched, const Trace&) {
        REQUIRE(sched.entries().size() == 1);
        ++seen;
    });
    CHECK(seen == candidates.size());
    SUBCASE("the cap is enforced with the required count") {
        spec.cap = 2;
        try {
            for_each_crash_timing(spec, [](const CrashSchedule&, const Trace&) {});
            FAIL("expected EnumerationCapError");
        } catch (const EnumerationCapError& err) {
            CHECK(err.required() == candidates.size());
        }
    }
}

TEST_CASE("the delivery checker passes a clean protocol at n=4") {
    EnumerationSpec spec;
    spec.base.n = 4;
    spec.base.protocol = "atree-b";
    spec.base.workload = {{1.0, 0, 0}};
    spec.crash_set = {2};
    spec.threads = 2;
    const auto outcome = enumerate_crash_timings(spec, [](const CrashSchedule& sched,
                                                          const Trace& trace) {
        const SimTime end = trace.records.empty() ? 0.0 : trace.records.back().time + 1.0;
        std::map<ProcessId, int> count;
        for (const auto& r : trace.records) {
            if (r.action == TraceActionKind::Deliver && r.msg == MessageId{0, 1}) {
                ++count[r.process];
            }
        }
        for (ProcessId p = 0; p < 4; ++p) {
            if (sched.is_correct_at(p, end) && count[p] != 1) {
                return std::string("bad delivery count at p" + std::to_string(p));
            }
        }
        return std::string();
    });
    CHECK(outcome.runs > 0);
    CHECK(outcome.violations.empty());
}

TEST_CASE("the fault-free sweep rows carry reciprocal throughput and grow with n") {
    FaultFreeSweepSpec spec;
    spec.protocols = {"atree-b"};
    spec.sizes = {8, 16, 32};
    spec.threads = 2;
    const auto results = run_fault_free_sweep(spec);
    const auto& rows = results.at("atree-b");
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].throughput == doctest::Approx(1.0 / rows[i].latency));
        if (i > 0) {
            CHECK(rows[i].latency > rows[i - 1].latency);
        }
    }
}

TEST_CASE("the fault sweep's crash-free row has zero deviation") {
    FaultSweepSpec spec;
    spec.protocols = {"atree-b"};
    spec.n = 8;
    spec.max_faults = 1;
    spec.seeds_per_point = 5;
    spec.messages = 2;
    spec.threads = 2;
    const auto results = run_fault_sweep(spec);
    const auto& rows = results.at("atree-b");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].faults == 0);
    CHECK(rows[0].latency_sd == doctest::Approx(0.0));
    CHECK(rows[0].total_sd == doctest::Approx(0.0));
    CHECK(rows[0].tree_mean == doctest::Approx(14.0));  // 2 messages x (n-1)
    CHECK(rows[0].failed_runs == 0);
    CHECK(rows[1].failed_runs == 0);
}

TEST_CASE("table renderings are stable") {
    const std::vector<FaultFreeRow> ff{{8, 3.0, 1.0 / 3.0}};
    CHECK(fault_free_tsv(ff) == "p\tlatency\tthroughput\n8\t3.000000\t0.333333\n");
    std::vector<FaultRow> f(1);
    f[0].faults = 2;
    f[0].latency_mean = 10.5;
    f[0].latency_sd = 0.25;
    f[0].tree_mean = 100.0;
    f[0].ack_mean = 90.0;
    f[0].nack_mean = 5.0;
    f[0].total_sd = 12.0;
    CHECK(fault_tsv(f) ==
          "f\tlatency\tdesvpad2\tTREE\tACK\tNACK\tdesvpad1\n"
          "2\t10.500000\t0.250000\t100.000000\t90.000000\t5.000000\t12.000000\n");
}
