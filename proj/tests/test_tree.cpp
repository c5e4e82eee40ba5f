#include <deque>
#include <map>
#include <set>

#include "doctest.h"
#include "vcube/enumerate.hpp"
#include "vcube/tree.hpp"

using namespace vcube;

namespace {

std::vector<ProcessId> targets(const Actions& acts) {
    std::vector<ProcessId> out;
    for (const auto& s : acts.sends) {
        out.push_back(s.to);
    }
    return out;
}

// Synchronous propagation over the bare handlers: apply every send in FIFO
// order with no timing. Returns the traversed edges.
std::vector<std::pair<ProcessId, ProcessId>> propagate(const Topology& topo,
                                                       std::vector<TreeProcess>& procs,
                                                       ProcessId root) {
    std::vector<std::pair<ProcessId, ProcessId>> edges;
    std::deque<std::pair<ProcessId, SendAction>> wire;
    const Actions start = procs[static_cast<std::size_t>(root)].on_app_broadcast(0);
    for (const auto& s : start.sends) {
        wire.push_back({root, s});
    }
    while (!wire.empty()) {
        const auto [from, send] = wire.front();
        wire.pop_front();
        edges.push_back({from, send.to});
        const Actions next = procs[static_cast<std::size_t>(send.to)].on_message(from, send.msg);
        for (const auto& s : next.sends) {
            wire.push_back({send.to, s});
        }
    }
    return edges;
}

std::vector<TreeProcess> make_procs(const Topology& topo,
                                    std::initializer_list<ProcessId> crashed = {}) {
    std::vector<TreeProcess> procs;
    procs.reserve(static_cast<std::size_t>(topo.size()));
    for (ProcessId p = 0; p < topo.size(); ++p) {
        procs.emplace_back(p, topo);
    }
    // pre-seed views without going through the crash handler, which would
    // also retransmit
    for (ProcessId dead : crashed) {
        for (ProcessId p = 0; p < topo.size(); ++p) {
            if (p != dead) {
                (void)procs[static_cast<std::size_t>(p)].on_crash_notice(dead);
            }
        }
    }
    return procs;
}

}  // namespace

TEST_CASE("the source sends one copy per cluster") {
    Topology t8(8);
    SUBCASE("all correct") {
        TreeProcess p0(0, t8);
        CHECK(targets(p0.on_app_broadcast(0)) == std::vector<ProcessId>{1, 2, 4});
    }
    SUBCASE("4 crashed in the view") {
        TreeProcess p0(0, t8);
        (void)p0.on_crash_notice(4);  // crash handler also retransmits; ignore here
        CHECK(targets(p0.on_app_broadcast(0)) == std::vector<ProcessId>{1, 2, 5});
    }
    SUBCASE("no correct neighbor at n=2") {
        Topology t2(2);
        TreeProcess p0(0, t2);
        (void)p0.on_crash_notice(1);
        CHECK(p0.on_app_broadcast(0).sends.empty());
    }
}

TEST_CASE("receivers forward only into clusters below the sender's") {
    Topology t8(8);
    WireMsg msg;
    msg.id = {0, 1};
    SUBCASE("2 forwards to 3") {
        TreeProcess p2(2, t8);
        CHECK(targets(p2.on_message(0, msg)) == std::vector<ProcessId>{3});
    }
    SUBCASE("4 forwards to 5 and 6") {
        TreeProcess p4(4, t8);
        CHECK(targets(p4.on_message(0, msg)) == std::vector<ProcessId>{5, 6});
    }
    SUBCASE("1 is a leaf") {
        TreeProcess p1(1, t8);
        CHECK(p1.on_message(0, msg).sends.empty());
    }
    SUBCASE("copies from senders believed crashed are ignored") {
        TreeProcess p2(2, t8);
        (void)p2.on_crash_notice(0);
        CHECK(p2.on_message(0, msg).empty());
    }
}

TEST_CASE("a crash regenerates the subtree toward the replacement neighbor") {
    Topology t8(8);
    SUBCASE("0 reroutes around 4") {
        TreeProcess p0(0, t8);
        CHECK(targets(p0.on_crash_notice(4)) == std::vector<ProcessId>{5});
    }
    SUBCASE("emptied cluster at n=2") {
        Topology t2(2);
        TreeProcess p0(0, t2);
        CHECK(p0.on_crash_notice(1).sends.empty());
    }
    SUBCASE("emptied singleton cluster") {
        TreeProcess p6(6, t8);
        CHECK(p6.on_crash_notice(7).sends.empty());
    }
    SUBCASE("duplicate notifications do nothing") {
        TreeProcess p0(0, t8);
        (void)p0.on_crash_notice(4);
        CHECK(p0.on_crash_notice(4).empty());
    }
}

TEST_CASE("fault-free propagation from 0 at n=8 uses the documented edges") {
    Topology t8(8);
    auto procs = make_procs(t8);
    const auto edges = propagate(t8, procs, 0);
    const std::set<std::pair<ProcessId, ProcessId>> got(edges.begin(), edges.end());
    const std::set<std::pair<ProcessId, ProcessId>> want{{0, 1}, {0, 2}, {0, 4}, {2, 3},
                                                         {4, 5}, {4, 6}, {6, 7}};
    CHECK(got == want);
    CHECK(edges.size() == 7);  // each process receives exactly once
}

TEST_CASE("propagation from 0 with 4 already detected everywhere") {
    Topology t8(8);
    auto procs = make_procs(t8, {4});
    const auto edges = propagate(t8, procs, 0);
    const std::set<std::pair<ProcessId, ProcessId>> got(edges.begin(), edges.end());
    const std::set<std::pair<ProcessId, ProcessId>> want{{0, 1}, {0, 2}, {0, 5},
                                                         {2, 3}, {5, 7}, {7, 6}};
    CHECK(got == want);
}

TEST_CASE("every correct process receives the propagation under exhaustive crash timings") {
    // all single- and double-crash schedules over the fault-free run's event
    // boundaries, source kept correct
    EnumerationSpec spec;
    spec.base.n = 8;
    spec.base.protocol = "tree";
    spec.base.workload = {{1.0, 0, 0}};
    spec.threads = 2;
    const TraceChecker all_reached = [](const CrashSchedule& sched, const Trace& trace) {
        const SimTime end = trace.records.empty() ? 0.0 : trace.records.back().time + 1.0;
        std::set<ProcessId> reached{0};
        for (const auto& r : trace.records) {
            if (r.action == TraceActionKind::Receive && r.kind == MsgKind::Tree) {
                reached.insert(r.process);
            }
        }
        for (ProcessId p = 0; p < 8; ++p) {
            if (sched.is_correct_at(p, end) && !reached.contains(p)) {
                return std::string("p" + std::to_string(p) + " never received the message");
            }
        }
        return std::string();
    };
    std::size_t runs = 0;
    for (ProcessId a = 1; a < 8; ++a) {
        spec.crash_set = {a};
        auto outcome = enumerate_crash_timings(spec, all_reached);
        runs += outcome.runs;
        REQUIRE(outcome.violations.empty());
        for (ProcessId b = static_cast<ProcessId>(a + 1); b < 8; ++b) {
            spec.crash_set = {a, b};
            outcome = enumerate_crash_timings(spec, all_reached);
            runs += outcome.runs;
            if (!outcome.violations.empty()) {
                CAPTURE(outcome.violations.front());
            }
            REQUIRE(outcome.violations.empty());
        }
    }
    CHECK(runs > 1000);
}

TEST_CASE("fault-free trees stay within the logarithmic bounds") {
    for (std::int32_t n : {2, 4, 8, 16, 32, 64}) {
        Topology topo(n);
        auto procs = make_procs(topo);
        const auto edges = propagate(topo, procs, 0);
        REQUIRE(static_cast<std::int32_t>(edges.size()) == n - 1);
        std::map<ProcessId, int> depth{{0, 0}};
        std::map<ProcessId, int> out_degree;
        for (const auto& [from, to] : edges) {  // edges appear in BFS order
            REQUIRE(depth.contains(from));
            REQUIRE(!depth.contains(to));
            depth[to] = depth[from] + 1;
            ++out_degree[from];
        }
        const int d = topo.dimension();
        CHECK(out_degree[0] == d);
        for (const auto& [p, deg] : out_degree) {
            CHECK(deg <= d);
        }
        for (const auto& [p, dep] : depth) {
            CHECK(dep <= d);
        }
    }
}
