#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcube/sim.hpp"

namespace vcube {

struct MessageCounts {
    std::int64_t tree = 0;
    std::int64_t ack = 0;
    std::int64_t nack = 0;  // includes REBUILD control messages

    std::int64_t total() const { return tree + ack + nack; }
    friend bool operator==(const MessageCounts&, const MessageCounts&) = default;
};

// Counts SEND records by kind. Failure-detector notifications are not
// messages and never appear as SENDs, so they are excluded by construction.
MessageCounts message_counts(const Trace& trace);

// Raised when some process that stayed correct to the end of the run never
// delivered m: a violation of the delivery guarantee the caller assumed.
class DeliveryError : public std::runtime_error {
  public:
    DeliveryError(MessageId m, std::vector<ProcessId> missing);
    const std::vector<ProcessId>& missing() const { return missing_; }

  private:
    std::vector<ProcessId> missing_;
};

// Time from the broadcast of m (the source's own DELIVER, which the kernel
// stamps at dispatch) to the last DELIVER of m. Requires every process that
// is correct at end of run to have delivered m; throws DeliveryError
// otherwise and std::invalid_argument when m never appears at all.
SimTime latency_of(const Trace& trace, MessageId m);

// Crashed processes at end of trace (from CRASH records).
std::set<ProcessId> crashed_processes(const Trace& trace);

// All DELIVER events of m as (process, time).
std::vector<std::pair<ProcessId, SimTime>> deliveries_of(const Trace& trace, MessageId m);

struct TreeEdge {
    ProcessId from = kNoProcess;
    ProcessId to = kNoProcess;
    friend bool operator==(const TreeEdge&, const TreeEdge&) = default;
    friend auto operator<=>(const TreeEdge&, const TreeEdge&) = default;
};

// The (sender -> target) pairs of all TREE sends, deduplicated and sorted.
std::vector<TreeEdge> tree_edges(const Trace& trace);

struct TreeShape {
    int depth = 0;
    int root_out_degree = 0;
    int max_child_count = 0;
    bool is_tree = false;  // n-1 edges, all reachable from the root, no duplicate parent
};

// Interprets the TREE sends of a fault-free single-broadcast trace as a
// parent graph rooted at `root` and measures it.
TreeShape tree_shape(const Trace& trace, ProcessId root, std::int32_t n);

}  // namespace vcube
