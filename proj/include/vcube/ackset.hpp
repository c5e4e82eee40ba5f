#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "vcube/types.hpp"

namespace vcube {

// One pending acknowledgment: message msg was forwarded to `to` on behalf of
// `from` (kNoProcess when this process originated the subtree itself). The
// epoch tags which tree generation a flood-built baseline sent the copy
// under; the hierarchical protocols always use epoch 0. `payload` rides along
// so crash-time retransmissions can reconstruct the full message.
struct AckEntry {
    ProcessId from = kNoProcess;
    ProcessId to = kNoProcess;
    MessageId msg;
    std::uint32_t epoch = 0;
    PayloadRef payload = kNoPayload;
    std::uint64_t seq = 0;  // insertion order, for deterministic wildcard matches
};

// Set of pending acknowledgments with every lookup kept proportional to the
// handful of entries sharing one destination (or one upstream group), never
// to the whole set: flood-building baselines hold hundreds of entries per
// process and resolve one per arriving response. Entries live in a dense
// per-destination index; per-upstream pending counts answer the aggregation
// queries. Steady-state operation does not allocate once the vectors have
// grown.
class AckSet {
  public:
    explicit AckSet(std::int32_t n);

    // False (and no change) when the exact entry is already present.
    bool insert(ProcessId from, ProcessId to, MessageId msg, std::uint32_t epoch,
                PayloadRef payload);
    bool contains(ProcessId from, ProcessId to, MessageId msg, std::uint32_t epoch) const;
    bool erase(ProcessId from, ProcessId to, MessageId msg, std::uint32_t epoch);

    // Removes and returns the oldest entry matching (*, to, msg, epoch); this
    // is the wildcard match used when an ACK for msg arrives from `to`.
    std::optional<AckEntry> take_match(ProcessId to, MessageId msg, std::uint32_t epoch);

    // Any entry (from, *, msg, epoch) still pending?
    bool has_pending(ProcessId from, MessageId msg, std::uint32_t epoch) const;
    // Same, ignoring the epoch tag (the origin's wait-until gate).
    bool has_pending_any_epoch(ProcessId from, MessageId msg) const;

    std::size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }

    // All entries in insertion order; the crash handler iterates a snapshot
    // while mutating the live set.
    std::vector<AckEntry> snapshot() const;

  private:
    struct Cell {
        ProcessId from;
        MessageId msg;
        std::uint32_t epoch;
        PayloadRef payload;
        std::uint64_t seq;
    };
    struct PendingCount {
        MessageId msg;
        std::uint32_t epoch;
        int count;
    };

    void bump(ProcessId from, MessageId msg, std::uint32_t epoch, int delta);

    std::vector<std::vector<Cell>> by_to_;             // index: destination
    std::vector<std::vector<PendingCount>> pending_;   // index: from + 1
    std::size_t size_ = 0;
    std::uint64_t next_seq_ = 0;
};

}  // namespace vcube
