#include "vcube/broadcast.hpp"

#include <stdexcept>

namespace vcube {

BroadcastState::BroadcastState(ProcessId me, std::int32_t n)
    : me(me), view(me, n), last(static_cast<std::size_t>(n)), acks(n) {}

bool BroadcastState::is_new_message(const MessageId& m) const {
    const auto& slot = last[static_cast<std::size_t>(m.source)];
    if (!slot) {
        return true;
    }
    if (m.ts > slot->id.ts + 1) {
        throw std::logic_error("broadcast: timestamp gap observed; sources must send sequentially");
    }
    return m.ts == slot->id.ts + 1;
}

void BroadcastState::store(const MessageId& m, PayloadRef payload) {
    last[static_cast<std::size_t>(m.source)] = BroadcastState::Stored{m, payload};
}

void BroadcastState::add_debt(ProcessId from, MessageId m, std::uint32_t epoch) {
    ++ack_debts[DebtKey{from, m, epoch}];
}

int BroadcastState::take_debts(ProcessId from, MessageId m, std::uint32_t epoch) {
    const auto it = ack_debts.find(DebtKey{from, m, epoch});
    if (it == ack_debts.end()) {
        return 0;
    }
    const int count = it->second;
    ack_debts.erase(it);
    return count;
}

void BroadcastState::drop_debts_toward(ProcessId from) {
    for (auto it = ack_debts.begin(); it != ack_debts.end();) {
        it = it->first.from == from ? ack_debts.erase(it) : std::next(it);
    }
}

BroadcastProcess::BroadcastProcess(ProcessId me, const Topology& topo, Reliability mode)
    : mode_(mode), topo_(&topo), st_(me, topo.size()) {}

WireMsg BroadcastProcess::tree_msg(MessageId m, PayloadRef payload) const {
    WireMsg msg;
    msg.kind = MsgKind::Tree;
    msg.id = m;
    msg.payload = payload;
    return msg;
}

Actions BroadcastProcess::on_app_broadcast(PayloadRef payload) {
    Actions acts;
    st_.pending_app.push_back(payload);
    check_acks(kNoProcess, MessageId{}, acts);
    return acts;
}

void BroadcastProcess::start_broadcast(MessageId m, PayloadRef payload, bool relay, Actions& acts) {
    if (!relay) {
        st_.store(m, payload);
        acts.delivers.push_back({m, payload});
    }
    for (ProcessId k : topo_->neighborhood(st_.view, topo_->dimension())) {
        if (st_.acks.insert(kNoProcess, k, m, 0, payload)) {
            acts.sends.push_back({k, tree_msg(m, payload)});
        }
    }
}

Actions BroadcastProcess::on_message(ProcessId from, const WireMsg& msg) {
    Actions acts;
    switch (msg.kind) {
        case MsgKind::Tree: handle_tree(from, msg, acts); break;
        case MsgKind::Ack: handle_ack(from, msg, acts); break;
        default: break;  // NACK/REBUILD never reach this protocol
    }
    return acts;
}

void BroadcastProcess::handle_tree(ProcessId from, const WireMsg& msg, Actions& acts) {
    if (mode_ == Reliability::BestEffort) {
        // A crashed sender means the copy will be re-sent along the rebuilt
        // subtree; a crashed source means the broadcast is abandoned.
        if (!st_.view.contains(msg.id.source) || !st_.view.contains(from)) {
            return;
        }
    } else {
        if (!st_.view.contains(from)) {
            return;
        }
    }
    st_.add_debt(from, msg.id, 0);

    if (st_.is_new_message(msg.id)) {
        st_.store(msg.id, msg.payload);
        acts.delivers.push_back({msg.id, msg.payload});
        if (mode_ == Reliability::Reliable && !st_.view.contains(msg.id.source)) {
            // The source died mid-broadcast: push the message over this
            // process's own tree instead of the normal forwarding, then
            // acknowledge the sender so its bookkeeping can drain.
            start_broadcast(msg.id, msg.payload, /*relay=*/true, acts);
            check_acks(from, msg.id, acts);
            return;
        }
    }

    const int below = topo_->cluster_index(st_.me, from) - 1;
    for (ProcessId k : topo_->neighborhood(st_.view, below)) {
        if (st_.acks.insert(from, k, msg.id, 0, msg.payload)) {
            acts.sends.push_back({k, tree_msg(msg.id, msg.payload)});
        }
    }
    check_acks(from, msg.id, acts);
}

void BroadcastProcess::handle_ack(ProcessId from, const WireMsg& msg, Actions& acts) {
    const auto entry = st_.acks.take_match(from, msg.id, 0);
    if (!entry) {
        return;  // ack raced with crash cleanup; the entry is already gone
    }
    check_acks(entry->from, msg.id, acts);
}

void BroadcastProcess::check_acks(ProcessId from, MessageId m, Actions& acts) {
    if (from == kNoProcess) {
        st_.settle_own(acts, [this](MessageId next, PayloadRef payload, Actions& out) {
            start_broadcast(next, payload, /*relay=*/false, out);
        });
        return;
    }
    if (st_.acks.has_pending(from, m, 0)) {
        return;
    }
    const int debts = st_.take_debts(from, m, 0);
    const bool source_ok = mode_ == Reliability::Reliable || st_.view.contains(m.source);
    if (source_ok && st_.view.contains(from)) {
        WireMsg ack;
        ack.kind = MsgKind::Ack;
        ack.id = m;
        for (int i = 0; i < debts; ++i) {
            acts.sends.push_back({from, ack});
        }
    }
}

Actions BroadcastProcess::on_crash_notice(ProcessId crashed) {
    Actions acts;
    if (!st_.view.contains(crashed)) {
        return acts;  // perfect detector fires once; the guard makes this total
    }
    st_.view.remove(crashed);
    st_.drop_debts_toward(crashed);

    for (const AckEntry& e : st_.acks.snapshot()) {
        if (!st_.acks.contains(e.from, e.to, e.msg, e.epoch)) {
            continue;  // removed earlier in this sweep
        }
        const bool from_ok = e.from == kNoProcess || st_.view.contains(e.from);
        const bool drop = mode_ == Reliability::BestEffort
                              ? !(from_ok && st_.view.contains(e.msg.source))
                              : !from_ok;
        if (drop) {
            st_.acks.erase(e.from, e.to, e.msg, e.epoch);
            continue;
        }
        if (e.to != crashed) {
            continue;
        }
        // Retransmit toward the crashed process's replacement, if any, then
        // retire the dead entry; the subtree below the replacement rebuilds
        // itself from the duplicate copy.
        const ProcessId k = topo_->ff_neighbor(st_.view, topo_->cluster_index(st_.me, crashed));
        if (k != kNoProcess && st_.acks.insert(e.from, k, e.msg, 0, e.payload)) {
            acts.sends.push_back({k, tree_msg(e.msg, e.payload)});
        }
        st_.acks.erase(e.from, crashed, e.msg, 0);
        check_acks(e.from, e.msg, acts);
    }

    if (mode_ == Reliability::Reliable) {
        const auto& stored = st_.last[static_cast<std::size_t>(crashed)];
        if (stored) {
            start_broadcast(stored->id, stored->payload, /*relay=*/true, acts);
        }
    }
    return acts;
}

}  // namespace vcube
