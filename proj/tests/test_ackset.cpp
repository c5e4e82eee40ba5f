#include "doctest.h"
#include "vcube/ackset.hpp"

using namespace vcube;

TEST_CASE("insert is idempotent and contains sees exact keys") {
    AckSet acks(8);
    const MessageId m{0, 1};
    CHECK(acks.insert(kNoProcess, 3, m, 0, 0));
    CHECK(!acks.insert(kNoProcess, 3, m, 0, 0));
    CHECK(acks.insert(2, 3, m, 0, 0));       // different upstream, same destination
    CHECK(acks.insert(kNoProcess, 3, m, 1, 0));  // different epoch
    CHECK(acks.size() == 3);
    CHECK(acks.contains(2, 3, m, 0));
    CHECK(!acks.contains(2, 3, MessageId{0, 2}, 0));
}

TEST_CASE("take_match removes the oldest entry for a destination") {
    AckSet acks(8);
    const MessageId m{0, 1};
    acks.insert(4, 6, m, 0, 0);
    acks.insert(2, 6, m, 0, 0);
    const auto first = acks.take_match(6, m, 0);
    REQUIRE(first.has_value());
    CHECK(first->from == 4);
    const auto second = acks.take_match(6, m, 0);
    REQUIRE(second.has_value());
    CHECK(second->from == 2);
    CHECK(!acks.take_match(6, m, 0).has_value());
}

TEST_CASE("pending queries track upstream groups across epochs") {
    AckSet acks(8);
    const MessageId m{5, 2};
    acks.insert(kNoProcess, 1, m, 1, 0);
    acks.insert(kNoProcess, 2, m, 2, 0);
    CHECK(acks.has_pending(kNoProcess, m, 1));
    CHECK(acks.has_pending(kNoProcess, m, 2));
    CHECK(!acks.has_pending(kNoProcess, m, 3));
    CHECK(acks.has_pending_any_epoch(kNoProcess, m));
    acks.erase(kNoProcess, 1, m, 1);
    CHECK(!acks.has_pending(kNoProcess, m, 1));
    CHECK(acks.has_pending_any_epoch(kNoProcess, m));
    acks.erase(kNoProcess, 2, m, 2);
    CHECK(!acks.has_pending_any_epoch(kNoProcess, m));
    CHECK(acks.empty());
}

TEST_CASE("snapshot lists entries in insertion order") {
    AckSet acks(4);
    acks.insert(1, 2, MessageId{0, 1}, 0, 0);
    acks.insert(kNoProcess, 0, MessageId{3, 7}, 0, 0);
    acks.insert(1, 3, MessageId{0, 1}, 0, 0);
    const auto snap = acks.snapshot();
    REQUIRE(snap.size() == 3);
    CHECK(snap[0].to == 2);
    CHECK(snap[1].to == 0);
    CHECK(snap[2].to == 3);
    CHECK(snap[1].from == kNoProcess);
    CHECK(snap[1].msg == MessageId{3, 7});
}
