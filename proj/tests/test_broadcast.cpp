#include <set>

#include "doctest.h"
#include "vcube/broadcast.hpp"
#include "vcube/metrics.hpp"
#include "vcube/sim.hpp"

using namespace vcube;

namespace {

std::vector<ProcessId> tree_targets(const Actions& acts) {
    std::vector<ProcessId> out;
    for (const auto& s : acts.sends) {
        if (s.msg.kind == MsgKind::Tree) {
            out.push_back(s.to);
        }
    }
    return out;
}

std::vector<ProcessId> ack_targets(const Actions& acts) {
    std::vector<ProcessId> out;
    for (const auto& s : acts.sends) {
        if (s.msg.kind == MsgKind::Ack) {
            out.push_back(s.to);
        }
    }
    return out;
}

WireMsg tree(MessageId m) {
    WireMsg msg;
    msg.kind = MsgKind::Tree;
    msg.id = m;
    msg.payload = 0;
    return msg;
}

WireMsg ack(MessageId m) {
    WireMsg msg;
    msg.kind = MsgKind::Ack;
    msg.id = m;
    return msg;
}

}  // namespace

TEST_CASE("a first broadcast delivers locally and seeds the ack set") {
    Topology t8(8);
    BroadcastProcess p0(0, t8, Reliability::BestEffort);
    const Actions acts = p0.on_app_broadcast(0);
    CHECK(tree_targets(acts) == std::vector<ProcessId>{1, 2, 4});
    REQUIRE(acts.delivers.size() == 1);
    CHECK(acts.delivers[0].id == MessageId{0, 1});
    CHECK(acts.completions.empty());
    CHECK(p0.acks().size() == 3);
    CHECK(p0.acks().contains(kNoProcess, 1, MessageId{0, 1}, 0));
    CHECK(p0.acks().contains(kNoProcess, 2, MessageId{0, 1}, 0));
    CHECK(p0.acks().contains(kNoProcess, 4, MessageId{0, 1}, 0));
}

TEST_CASE("a broadcast with no correct neighbor completes immediately") {
    Topology t2(2);
    BroadcastProcess p0(0, t2, Reliability::BestEffort);
    (void)p0.on_crash_notice(1);
    const Actions acts = p0.on_app_broadcast(0);
    CHECK(acts.sends.empty());
    REQUIRE(acts.delivers.size() == 1);
    REQUIRE(acts.completions.size() == 1);
    CHECK(acts.completions[0] == MessageId{0, 1});
}

TEST_CASE("a second broadcast queues until the first clears") {
    Topology t2(2);
    BroadcastProcess p0(0, t2, Reliability::BestEffort);
    (void)p0.on_app_broadcast(0);
    const Actions queued = p0.on_app_broadcast(0);
    CHECK(queued.empty());
    CHECK(p0.queued() == 1);
    const Actions released = p0.on_message(1, ack(MessageId{0, 1}));
    REQUIRE(released.completions.size() == 1);
    CHECK(released.completions[0] == MessageId{0, 1});
    CHECK(tree_targets(released) == std::vector<ProcessId>{1});
    REQUIRE(released.delivers.size() == 1);
    CHECK(released.delivers[0].id == MessageId{0, 2});
    CHECK(p0.queued() == 0);
}

TEST_CASE("a leaf acknowledges at once, a forwarder only after its subtree") {
    Topology t8(8);
    SUBCASE("leaf") {
        BroadcastProcess p1(1, t8, Reliability::BestEffort);
        const Actions acts = p1.on_message(0, tree(MessageId{0, 1}));
        CHECK(acts.delivers.size() == 1);
        CHECK(tree_targets(acts).empty());
        CHECK(ack_targets(acts) == std::vector<ProcessId>{0});
    }
    SUBCASE("forwarder") {
        BroadcastProcess p4(4, t8, Reliability::BestEffort);
        const Actions acts = p4.on_message(0, tree(MessageId{0, 1}));
        CHECK(acts.delivers.size() == 1);
        CHECK(tree_targets(acts) == std::vector<ProcessId>{5, 6});
        CHECK(ack_targets(acts).empty());
        CHECK(p4.acks().contains(0, 5, MessageId{0, 1}, 0));
        CHECK(p4.acks().contains(0, 6, MessageId{0, 1}, 0));
    }
}

TEST_CASE("duplicates are not redelivered but are still acknowledged") {
    Topology t8(8);
    BroadcastProcess p3(3, t8, Reliability::BestEffort);
    const Actions first = p3.on_message(2, tree(MessageId{0, 1}));
    CHECK(first.delivers.size() == 1);
    CHECK(ack_targets(first) == std::vector<ProcessId>{2});
    const Actions again = p3.on_message(2, tree(MessageId{0, 1}));
    CHECK(again.delivers.empty());
    CHECK(ack_targets(again) == std::vector<ProcessId>{2});
}

TEST_CASE("acks aggregate up the tree through the wildcard match") {
    Topology t8(8);
    BroadcastProcess p4(4, t8, Reliability::BestEffort);
    (void)p4.on_message(0, tree(MessageId{0, 1}));  // pending {<0,5>, <0,6>}
    const Actions after5 = p4.on_message(5, ack(MessageId{0, 1}));
    CHECK(after5.sends.empty());
    CHECK(p4.acks().size() == 1);
    const Actions after6 = p4.on_message(6, ack(MessageId{0, 1}));
    CHECK(ack_targets(after6) == std::vector<ProcessId>{0});
    CHECK(p4.acks().empty());
}

TEST_CASE("the origin's final ack completes the broadcast") {
    Topology t2(2);
    BroadcastProcess p0(0, t2, Reliability::BestEffort);
    (void)p0.on_app_broadcast(0);
    const Actions done = p0.on_message(1, ack(MessageId{0, 1}));
    REQUIRE(done.completions.size() == 1);
    CHECK(done.completions[0] == MessageId{0, 1});
    CHECK(p0.acks().empty());
}

TEST_CASE("every accepted copy is acknowledged, even duplicates that arrive mid-subtree") {
    // two copies of m arrive from the same upstream while the forwards of the
    // first are still pending; once the subtree clears, both owe an ack, or
    // the upstream would keep one pending entry forever
    Topology t8(8);
    BroadcastProcess p4(4, t8, Reliability::BestEffort);
    (void)p4.on_message(0, tree(MessageId{0, 1}));            // forwards to 5 and 6
    const Actions dup = p4.on_message(0, tree(MessageId{0, 1}));
    CHECK(dup.sends.empty());                                  // subtree still pending
    (void)p4.on_message(5, ack(MessageId{0, 1}));
    const Actions done = p4.on_message(6, ack(MessageId{0, 1}));
    CHECK(ack_targets(done) == std::vector<ProcessId>{0, 0});  // one ack per copy
    CHECK(p4.acks().empty());
}

TEST_CASE("an unmatched ack is ignored") {
    Topology t8(8);
    BroadcastProcess p4(4, t8, Reliability::BestEffort);
    const Actions acts = p4.on_message(5, ack(MessageId{0, 9}));
    CHECK(acts.empty());
}

TEST_CASE("crash cleanup in the best-effort machine") {
    Topology t8(8);
    SUBCASE("pending copy is rerouted to the replacement neighbor") {
        BroadcastProcess p0(0, t8, Reliability::BestEffort);
        (void)p0.on_app_broadcast(0);  // pending toward 1, 2, 4
        const Actions acts = p0.on_crash_notice(4);
        CHECK(tree_targets(acts) == std::vector<ProcessId>{5});
        CHECK(p0.acks().contains(kNoProcess, 5, MessageId{0, 1}, 0));
        CHECK(!p0.acks().contains(kNoProcess, 4, MessageId{0, 1}, 0));
    }
    SUBCASE("entries of a crashed source are dropped without retransmission") {
        BroadcastProcess p2(2, t8, Reliability::BestEffort);
        (void)p2.on_message(0, tree(MessageId{0, 1}));  // pending <0,3,m>
        REQUIRE(p2.acks().size() == 1);
        const Actions acts = p2.on_crash_notice(0);
        CHECK(acts.sends.empty());
        CHECK(p2.acks().empty());
    }
    SUBCASE("an emptied cluster drops the entry and acknowledges upstream") {
        BroadcastProcess p6(6, t8, Reliability::BestEffort);
        (void)p6.on_message(4, tree(MessageId{0, 1}));  // pending <4,7,m>
        const Actions acts = p6.on_crash_notice(7);
        CHECK(tree_targets(acts).empty());
        CHECK(ack_targets(acts) == std::vector<ProcessId>{4});
        CHECK(p6.acks().empty());
    }
}

TEST_CASE("reliable relays skip the gate and local delivery") {
    Topology t8(8);
    BroadcastProcess p2(2, t8, Reliability::Reliable);
    (void)p2.on_crash_notice(5);
    const Actions acts = p2.on_message(1, tree(MessageId{5, 1}));
    REQUIRE(acts.delivers.size() == 1);  // the relayed message is still delivered once
    CHECK(acts.delivers[0].id == MessageId{5, 1});
    CHECK(tree_targets(acts) == std::vector<ProcessId>{3, 0, 6});
    CHECK(ack_targets(acts) == std::vector<ProcessId>{1});
    CHECK(p2.acks().contains(kNoProcess, 3, MessageId{5, 1}, 0));
    CHECK(p2.acks().contains(kNoProcess, 0, MessageId{5, 1}, 0));
    CHECK(p2.acks().contains(kNoProcess, 6, MessageId{5, 1}, 0));
    SUBCASE("a duplicate of the relayed message does not re-relay") {
        const Actions dup = p2.on_message(1, tree(MessageId{5, 1}));
        CHECK(dup.delivers.empty());
        // ordinary sub-cluster forwarding may still happen, but nothing is
        // pushed over the whole tree again
        CHECK(tree_targets(dup) == std::vector<ProcessId>{3});
        CHECK(p2.acks().contains(1, 3, MessageId{5, 1}, 0));
    }
    SUBCASE("relaying does not touch the process's own gate") {
        const Actions own = p2.on_app_broadcast(0);
        REQUIRE(own.delivers.size() == 1);
        CHECK(own.delivers[0].id == MessageId{2, 1});
        CHECK(!tree_targets(own).empty());
    }
}

TEST_CASE("a crash notification re-broadcasts the last message of the crashed source") {
    Topology t8(8);
    BroadcastProcess p2(2, t8, Reliability::Reliable);
    (void)p2.on_message(5, tree(MessageId{5, 1}));  // normal receive, source correct
    const Actions acts = p2.on_crash_notice(5);
    CHECK(tree_targets(acts) == std::vector<ProcessId>{3, 0, 6});
    SUBCASE("nothing is re-broadcast when nothing was received") {
        BroadcastProcess p3(3, t8, Reliability::Reliable);
        const Actions none = p3.on_crash_notice(5);
        CHECK(none.sends.empty());
    }
}

TEST_CASE("best-effort receive guard discards crashed-source traffic") {
    Topology t8(8);
    BroadcastProcess p2(2, t8, Reliability::BestEffort);
    (void)p2.on_crash_notice(5);
    CHECK(p2.on_message(1, tree(MessageId{5, 1})).empty());
}

TEST_CASE("a timestamp gap is a model violation") {
    Topology t8(8);
    BroadcastProcess p1(1, t8, Reliability::BestEffort);
    (void)p1.on_message(0, tree(MessageId{0, 1}));
    CHECK_THROWS_AS(p1.on_message(0, tree(MessageId{0, 3})), std::logic_error);
}

TEST_CASE("fault-free runs deliver everywhere exactly once with 2(n-1) messages") {
    for (std::int32_t n : {2, 4, 8, 16, 32}) {
        RunSpec spec;
        spec.n = n;
        spec.protocol = "atree-b";
        spec.workload = {{0.0, 0, 0}};
        const Trace trace = run(spec);
        const auto counts = message_counts(trace);
        CHECK(counts.tree == n - 1);
        CHECK(counts.ack == n - 1);
        CHECK(counts.nack == 0);
        const auto deliveries = deliveries_of(trace, MessageId{0, 1});
        CHECK(static_cast<std::int32_t>(deliveries.size()) == n);
        std::set<ProcessId> who;
        for (const auto& [p, t] : deliveries) {
            CHECK(who.insert(p).second);
        }
    }
}

TEST_CASE("reliable broadcast keeps delivery all-or-nothing when the source dies mid-send") {
    RunSpec spec;
    spec.n = 8;
    spec.protocol = "atree-r";
    spec.workload = {{0.0, 0, 0}};
    spec.crashes = CrashSchedule({{0, 0.15}});  // after the first copy leaves, before the rest
    const Trace trace = run(spec);
    CHECK(!trace.truncated);
    const auto deliveries = deliveries_of(trace, MessageId{0, 1});
    std::set<ProcessId> delivered;
    for (const auto& [p, t] : deliveries) {
        CHECK(delivered.insert(p).second);  // no duplicates anywhere
    }
    for (ProcessId p = 1; p < 8; ++p) {
        CHECK(delivered.contains(p));  // one correct process got it, so all must
    }
}
