#pragma once

#include <vector>

#include "vcube/broadcast.hpp"

namespace vcube {

// One-to-all comparison strategy: the source sends sequentially to every
// process it believes correct, in ascending id order, and collects one ACK
// per copy. Receivers never forward. The reliable variant re-broadcasts a
// crashed process's last message the same way Algorithm 3 does.
class AllProcess final : public Process {
  public:
    AllProcess(ProcessId me, const Topology& topo, Reliability mode);

    Actions on_app_broadcast(PayloadRef payload) override;
    Actions on_message(ProcessId from, const WireMsg& msg) override;
    Actions on_crash_notice(ProcessId crashed) override;

    const View& view() const { return st_.view; }
    const AckSet& acks() const { return st_.acks; }

  private:
    void start_broadcast(MessageId m, PayloadRef payload, bool relay, Actions& acts);
    void check_acks(ProcessId from, MessageId m, Actions& acts);

    Reliability mode_;
    BroadcastState st_;
};

// Non-autonomic tree baseline: the first broadcast floods the network and the
// flood's first-receipt relation becomes a spanning tree; later broadcasts
// run along the tree with Algorithm-2-style ack aggregation. Any crash forces
// a full rebuild: the source re-floods under a higher epoch (immediately when
// it holds undelivered traffic, otherwise on its next broadcast), and a
// non-source node that holds pending acks escalates with a REBUILD control
// message. Stale-epoch and duplicate copies are answered with NACK.
class NatreeProcess final : public Process {
  public:
    NatreeProcess(ProcessId me, const Topology& topo, Reliability mode);

    Actions on_app_broadcast(PayloadRef payload) override;
    Actions on_message(ProcessId from, const WireMsg& msg) override;
    Actions on_crash_notice(ProcessId crashed) override;

    const View& view() const { return st_.view; }
    const AckSet& acks() const { return st_.acks; }
    std::uint32_t epoch() const { return epoch_; }
    ProcessId parent() const { return parent_; }
    ProcessId tree_source() const { return tree_source_; }
    const std::vector<ProcessId>& children() const { return children_; }

  private:
    void start_broadcast(MessageId m, PayloadRef payload, Actions& acts);
    void flood(MessageId m, PayloadRef payload, Actions& acts);
    void relay(MessageId m, PayloadRef payload, Actions& acts);
    void handle_tree(ProcessId from, const WireMsg& msg, Actions& acts);
    void handle_response(ProcessId from, const WireMsg& msg, Actions& acts);
    void handle_rebuild(const WireMsg& msg, Actions& acts);
    void check_acks(ProcessId from, MessageId m, std::uint32_t epoch, Actions& acts);
    void reply(ProcessId to, MsgKind kind, MessageId m, std::uint32_t epoch, Actions& acts);
    void add_child(ProcessId child);

    Reliability mode_;
    BroadcastState st_;
    std::uint32_t epoch_ = 0;          // 0 = no tree yet
    ProcessId tree_source_ = kNoProcess;
    ProcessId parent_ = kNoProcess;
    std::vector<ProcessId> children_;  // sorted
    bool dirty_ = false;               // a crash happened since the last flood
};

}  // namespace vcube
