#include <set>

#include "doctest.h"
#include "vcube/metrics.hpp"
#include "vcube/sim.hpp"

using namespace vcube;

namespace {

Trace run_simple(std::int32_t n, const std::string& protocol) {
    RunSpec spec;
    spec.n = n;
    spec.protocol = protocol;
    spec.workload = {{0.0, 0, 0}};
    return run(spec);
}

}  // namespace

TEST_CASE("message counts by kind") {
    CHECK(message_counts(run_simple(8, "atree-b")) == MessageCounts{7, 7, 0});
    CHECK(message_counts(run_simple(64, "atree-b")) == MessageCounts{63, 63, 0});
    const auto natree = message_counts(run_simple(4, "natree-b"));
    CHECK(natree.tree == 9);
    CHECK(natree.nack > 0);
}

TEST_CASE("latency is measured from the source's dispatch to the last delivery") {
    const Trace two = run_simple(2, "atree-b");
    TimingParams timing;
    CHECK(latency_of(two, MessageId{0, 1}) == doctest::Approx(timing.t_t + timing.t_r));
    const Trace all8 = run_simple(8, "all-b");
    CHECK(latency_of(all8, MessageId{0, 1}) ==
          doctest::Approx(6 * timing.t_s + timing.t_t + timing.t_r));
}

TEST_CASE("latency is zero when only the source can deliver") {
    RunSpec spec;
    spec.n = 2;
    spec.protocol = "atree-b";
    spec.crashes = CrashSchedule({{1, 0.0}});
    spec.workload = {{5.0, 0, 0}};  // after the crash has been detected
    const Trace trace = run(spec);
    CHECK(latency_of(trace, MessageId{0, 1}) == doctest::Approx(0.0));
}

TEST_CASE("missing deliveries raise an error naming the processes") {
    RunSpec spec;
    spec.n = 4;
    spec.protocol = "atree-b";
    spec.workload = {{0.0, 0, 0}};
    spec.crashes = CrashSchedule({{0, 0.05}});  // source dies between its two dispatches
    const Trace trace = run(spec);
    try {
        (void)latency_of(trace, MessageId{0, 1});
        FAIL("expected DeliveryError");
    } catch (const DeliveryError& err) {
        CHECK(err.missing() == std::vector<ProcessId>{2, 3});
    }
    CHECK_THROWS_AS((void)latency_of(trace, MessageId{0, 9}), std::invalid_argument);
}

TEST_CASE("tree edges and shape of the fault-free n=8 run") {
    const Trace trace = run_simple(8, "atree-b");
    const auto edges = tree_edges(trace);
    const std::vector<TreeEdge> want{{0, 1}, {0, 2}, {0, 4}, {2, 3}, {4, 5}, {4, 6}, {6, 7}};
    CHECK(edges == want);
    const auto shape = tree_shape(trace, 0, 8);
    CHECK(shape.is_tree);
    CHECK(shape.depth == 3);
    CHECK(shape.root_out_degree == 3);
    CHECK(shape.max_child_count <= 3);
}
