#pragma once

#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "vcube/ackset.hpp"
#include "vcube/process.hpp"
#include "vcube/topology.hpp"

namespace vcube {

enum class Reliability : std::uint8_t {
    BestEffort,  // delivery guaranteed while the source stays correct
    Reliable,    // all-or-nothing delivery even if the source crashes
};

// Shared per-process broadcast bookkeeping: the view, the last message seen
// per source (with payload, so crashed sources' messages can be relayed), the
// pending-ack set, and the FIFO of application payloads waiting for the
// previous local broadcast to complete.
struct BroadcastState {
    BroadcastState(ProcessId me, std::int32_t n);

    ProcessId me;
    View view;
    struct Stored {
        MessageId id;
        PayloadRef payload = kNoPayload;
    };
    std::vector<std::optional<Stored>> last;
    AckSet acks;
    std::deque<PayloadRef> pending_app;
    std::int32_t next_ts = 1;
    std::int32_t completed_ts = 0;  // highest own timestamp already reported complete

    // True when the message is the next expected from its source: the slot is
    // empty or the timestamp is exactly one past the stored one. A timestamp
    // gap cannot arise under sequential sources and reliable channels, so it
    // is reported as a model violation rather than tolerated.
    bool is_new_message(const MessageId& m) const;
    void store(const MessageId& m, PayloadRef payload);

    const std::optional<Stored>& own_last() const {
        return last[static_cast<std::size_t>(me)];
    }

    // Acknowledgment obligations: every accepted copy of m from `from` must
    // be answered exactly once, but only after the forwards it triggered (or
    // found pending) have resolved. Without this, a duplicate copy arriving
    // while the first one's subtree is still pending would never be
    // acknowledged and the upstream entry would leak.
    void add_debt(ProcessId from, MessageId m, std::uint32_t epoch);
    int take_debts(ProcessId from, MessageId m, std::uint32_t epoch);
    void drop_debts_toward(ProcessId from);

    struct DebtKey {
        ProcessId from;
        MessageId msg;
        std::uint32_t epoch;
        friend auto operator<=>(const DebtKey&, const DebtKey&) = default;
    };
    std::map<DebtKey, int> ack_debts;

    // The wait-until gate, event-driven: whenever the current local broadcast
    // has no pending origin entries left, mark it complete and start the next
    // queued payload via `start(id, payload, acts)`. Loops so a broadcast
    // with no correct neighbor completes and hands over immediately.
    template <typename StartFn>
    void settle_own(Actions& acts, StartFn&& start) {
        while (true) {
            const auto& mine = own_last();
            if (mine && acks.has_pending_any_epoch(kNoProcess, mine->id)) {
                return;  // gate closed
            }
            if (mine && mine->id.ts > completed_ts) {
                completed_ts = mine->id.ts;
                acts.completions.push_back(mine->id);
            }
            if (pending_app.empty()) {
                return;
            }
            const PayloadRef payload = pending_app.front();
            pending_app.pop_front();
            start(MessageId{me, next_ts++}, payload, acts);
        }
    }
};

// Hierarchical broadcast over the autonomic spanning tree. One class covers
// both reliability levels; they share the tree propagation and ack
// aggregation and differ only in the receive guard, the crash cleanup rule,
// and the re-broadcast hooks that keep a crashed source's last message alive.
class BroadcastProcess final : public Process {
  public:
    BroadcastProcess(ProcessId me, const Topology& topo, Reliability mode);

    Actions on_app_broadcast(PayloadRef payload) override;
    Actions on_message(ProcessId from, const WireMsg& msg) override;
    Actions on_crash_notice(ProcessId crashed) override;

    const View& view() const { return st_.view; }
    const AckSet& acks() const { return st_.acks; }
    std::size_t queued() const { return st_.pending_app.size(); }
    Reliability mode() const { return mode_; }

  private:
    void handle_tree(ProcessId from, const WireMsg& msg, Actions& acts);
    void handle_ack(ProcessId from, const WireMsg& msg, Actions& acts);

    // Broadcast(m): for the local origin this delivers locally and opens the
    // wait-until gate bookkeeping; for a relay of a crashed source's message
    // it skips both and only floods the message over this process's own tree.
    void start_broadcast(MessageId m, PayloadRef payload, bool relay, Actions& acts);

    // CheckAcks(from, m): when no pending ack under `from` remains, either
    // acknowledge upstream or, for the origin marker, complete the local
    // broadcast and dispatch the next queued payload.
    void check_acks(ProcessId from, MessageId m, Actions& acts);

    WireMsg tree_msg(MessageId m, PayloadRef payload) const;

    Reliability mode_;
    const Topology* topo_;
    BroadcastState st_;
};

}  // namespace vcube
