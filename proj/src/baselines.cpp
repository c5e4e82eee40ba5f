#include "vcube/baselines.hpp"

#include <algorithm>

namespace vcube {

namespace {

WireMsg make_tree(MessageId m, PayloadRef payload, std::uint32_t epoch = 0, bool flood = false,
                  bool relay = false) {
    WireMsg msg;
    msg.kind = MsgKind::Tree;
    msg.id = m;
    msg.payload = payload;
    msg.epoch = epoch;
    msg.flood = flood;
    msg.relay = relay;
    return msg;
}

}  // namespace

// ---------------------------------------------------------------- AllProcess

AllProcess::AllProcess(ProcessId me, const Topology& topo, Reliability mode)
    : mode_(mode), st_(me, topo.size()) {}

Actions AllProcess::on_app_broadcast(PayloadRef payload) {
    Actions acts;
    st_.pending_app.push_back(payload);
    check_acks(kNoProcess, MessageId{}, acts);
    return acts;
}

void AllProcess::start_broadcast(MessageId m, PayloadRef payload, bool relay, Actions& acts) {
    if (!relay) {
        st_.store(m, payload);
        acts.delivers.push_back({m, payload});
    }
    for (ProcessId j = 0; j < st_.view.size(); ++j) {
        if (j == st_.me || !st_.view.contains(j)) {
            continue;
        }
        if (st_.acks.insert(kNoProcess, j, m, 0, payload)) {
            acts.sends.push_back({j, make_tree(m, payload, 0, false, relay)});
        }
    }
}

Actions AllProcess::on_message(ProcessId from, const WireMsg& msg) {
    Actions acts;
    if (msg.kind == MsgKind::Ack) {
        const auto entry = st_.acks.take_match(from, msg.id, 0);
        if (entry) {
            check_acks(entry->from, msg.id, acts);
        }
        return acts;
    }
    if (msg.kind != MsgKind::Tree) {
        return acts;
    }
    if (mode_ == Reliability::BestEffort) {
        if (!st_.view.contains(msg.id.source) || !st_.view.contains(from)) {
            return acts;
        }
    } else if (!st_.view.contains(from)) {
        return acts;
    }
    st_.add_debt(from, msg.id, 0);
    if (st_.is_new_message(msg.id)) {
        st_.store(msg.id, msg.payload);
        acts.delivers.push_back({msg.id, msg.payload});
        if (mode_ == Reliability::Reliable && !st_.view.contains(msg.id.source)) {
            start_broadcast(msg.id, msg.payload, /*relay=*/true, acts);
        }
    }
    check_acks(from, msg.id, acts);
    return acts;
}

void AllProcess::check_acks(ProcessId from, MessageId m, Actions& acts) {
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

Actions AllProcess::on_crash_notice(ProcessId crashed) {
    Actions acts;
    if (!st_.view.contains(crashed)) {
        return acts;
    }
    st_.view.remove(crashed);
    st_.drop_debts_toward(crashed);
    for (const AckEntry& e : st_.acks.snapshot()) {
        if (!st_.acks.contains(e.from, e.to, e.msg, e.epoch)) {
            continue;
        }
        const bool from_ok = e.from == kNoProcess || st_.view.contains(e.from);
        const bool drop = mode_ == Reliability::BestEffort
                              ? !(from_ok && st_.view.contains(e.msg.source))
                              : !from_ok;
        if (drop) {
            st_.acks.erase(e.from, e.to, e.msg, e.epoch);
            continue;
        }
        if (e.to == crashed) {
            // every other destination already has its own copy; nothing to reroute
            st_.acks.erase(e.from, e.to, e.msg, e.epoch);
            check_acks(e.from, e.msg, acts);
        }
    }
    if (mode_ == Reliability::Reliable) {
        const auto& stored = st_.last[static_cast<std::size_t>(crashed)];
        if (stored) {
            start_broadcast(stored->id, stored->payload, /*relay=*/true, acts);
        }
    }
    return acts;
}

// -------------------------------------------------------------- NatreeProcess

NatreeProcess::NatreeProcess(ProcessId me, const Topology& topo, Reliability mode)
    : mode_(mode), st_(me, topo.size()) {}

Actions NatreeProcess::on_app_broadcast(PayloadRef payload) {
    Actions acts;
    st_.pending_app.push_back(payload);
    check_acks(kNoProcess, MessageId{}, 0, acts);
    return acts;
}

void NatreeProcess::start_broadcast(MessageId m, PayloadRef payload, Actions& acts) {
    st_.store(m, payload);
    acts.delivers.push_back({m, payload});
    if (epoch_ == 0 || dirty_ || tree_source_ != st_.me) {
        flood(m, payload, acts);
        return;
    }
    for (ProcessId c : children_) {
        if (!st_.view.contains(c)) {
            continue;
        }
        if (st_.acks.insert(kNoProcess, c, m, epoch_, payload)) {
            acts.sends.push_back({c, make_tree(m, payload, epoch_)});
        }
    }
}

void NatreeProcess::flood(MessageId m, PayloadRef payload, Actions& acts) {
    ++epoch_;
    dirty_ = false;
    tree_source_ = st_.me;
    parent_ = kNoProcess;
    children_.clear();
    for (ProcessId j = 0; j < st_.view.size(); ++j) {
        if (j == st_.me || !st_.view.contains(j)) {
            continue;
        }
        if (st_.acks.insert(kNoProcess, j, m, epoch_, payload)) {
            acts.sends.push_back({j, make_tree(m, payload, epoch_, /*flood=*/true)});
        }
    }
}

void NatreeProcess::relay(MessageId m, PayloadRef payload, Actions& acts) {
    for (ProcessId j = 0; j < st_.view.size(); ++j) {
        if (j == st_.me || !st_.view.contains(j)) {
            continue;
        }
        if (st_.acks.insert(kNoProcess, j, m, 0, payload)) {
            acts.sends.push_back({j, make_tree(m, payload, 0, false, /*relay=*/true)});
        }
    }
}

Actions NatreeProcess::on_message(ProcessId from, const WireMsg& msg) {
    Actions acts;
    switch (msg.kind) {
        case MsgKind::Tree: handle_tree(from, msg, acts); break;
        case MsgKind::Ack:
        case MsgKind::Nack: handle_response(from, msg, acts); break;
        case MsgKind::Rebuild: handle_rebuild(msg, acts); break;
    }
    return acts;
}

void NatreeProcess::reply(ProcessId to, MsgKind kind, MessageId m, std::uint32_t epoch,
                          Actions& acts) {
    WireMsg msg;
    msg.kind = kind;
    msg.id = m;
    msg.epoch = epoch;
    acts.sends.push_back({to, msg});
}

void NatreeProcess::handle_tree(ProcessId from, const WireMsg& msg, Actions& acts) {
    if (mode_ == Reliability::BestEffort) {
        if (!st_.view.contains(msg.id.source) || !st_.view.contains(from)) {
            return;
        }
    } else if (!st_.view.contains(from)) {
        return;
    }

    if (msg.relay) {
        if (st_.is_new_message(msg.id)) {
            st_.store(msg.id, msg.payload);
            acts.delivers.push_back({msg.id, msg.payload});
            if (mode_ == Reliability::Reliable && !st_.view.contains(msg.id.source)) {
                relay(msg.id, msg.payload, acts);
            }
            reply(from, MsgKind::Ack, msg.id, msg.epoch, acts);
        } else {
            reply(from, MsgKind::Nack, msg.id, msg.epoch, acts);
        }
        return;
    }

    if (msg.flood) {
        if (msg.epoch <= epoch_) {
            // already in this tree (or the flood is from a superseded build)
            reply(from, MsgKind::Nack, msg.id, msg.epoch, acts);
            return;
        }
        epoch_ = msg.epoch;
        tree_source_ = msg.id.source;
        parent_ = from;
        children_.clear();
        dirty_ = false;
        st_.add_debt(from, msg.id, msg.epoch);
        if (st_.is_new_message(msg.id)) {
            st_.store(msg.id, msg.payload);
            acts.delivers.push_back({msg.id, msg.payload});
            if (mode_ == Reliability::Reliable && !st_.view.contains(msg.id.source)) {
                relay(msg.id, msg.payload, acts);
                check_acks(from, msg.id, msg.epoch, acts);
                return;
            }
        }
        for (ProcessId j = 0; j < st_.view.size(); ++j) {
            if (j == st_.me || j == from || !st_.view.contains(j)) {
                continue;
            }
            if (st_.acks.insert(from, j, msg.id, msg.epoch, msg.payload)) {
                acts.sends.push_back({j, make_tree(msg.id, msg.payload, msg.epoch, true)});
            }
        }
        check_acks(from, msg.id, msg.epoch, acts);
        return;
    }

    // steady copy along a tree edge
    if (msg.epoch != epoch_) {
        reply(from, MsgKind::Nack, msg.id, msg.epoch, acts);
        return;
    }
    st_.add_debt(from, msg.id, msg.epoch);
    if (st_.is_new_message(msg.id)) {
        st_.store(msg.id, msg.payload);
        acts.delivers.push_back({msg.id, msg.payload});
        if (mode_ == Reliability::Reliable && !st_.view.contains(msg.id.source)) {
            relay(msg.id, msg.payload, acts);
            check_acks(from, msg.id, msg.epoch, acts);
            return;
        }
    }
    for (ProcessId c : children_) {
        if (!st_.view.contains(c)) {
            continue;
        }
        if (st_.acks.insert(from, c, msg.id, epoch_, msg.payload)) {
            acts.sends.push_back({c, make_tree(msg.id, msg.payload, epoch_)});
        }
    }
    check_acks(from, msg.id, epoch_, acts);
}

void NatreeProcess::add_child(ProcessId child) {
    const auto it = std::lower_bound(children_.begin(), children_.end(), child);
    if (it == children_.end() || *it != child) {
        children_.insert(it, child);
    }
}

void NatreeProcess::handle_response(ProcessId from, const WireMsg& msg, Actions& acts) {
    const auto entry = st_.acks.take_match(from, msg.id, msg.epoch);
    if (!entry) {
        return;  // answers a copy whose entry crash cleanup already dropped
    }
    if (msg.kind == MsgKind::Ack && msg.epoch != 0 && msg.epoch == epoch_) {
        add_child(from);
    }
    check_acks(entry->from, msg.id, msg.epoch, acts);
}

void NatreeProcess::handle_rebuild(const WireMsg& msg, Actions& acts) {
    if (tree_source_ != st_.me || msg.epoch != epoch_) {
        return;  // not the root, or the requester's tree is already superseded
    }
    const auto& mine = st_.own_last();
    if (mine && st_.acks.has_pending_any_epoch(kNoProcess, mine->id)) {
        flood(mine->id, mine->payload, acts);
    } else {
        dirty_ = true;
    }
}

void NatreeProcess::check_acks(ProcessId from, MessageId m, std::uint32_t epoch, Actions& acts) {
    if (from == kNoProcess) {
        st_.settle_own(acts, [this](MessageId next, PayloadRef payload, Actions& out) {
            start_broadcast(next, payload, out);
        });
        return;
    }
    if (st_.acks.has_pending(from, m, epoch)) {
        return;
    }
    const int debts = st_.take_debts(from, m, epoch);
    const bool source_ok = mode_ == Reliability::Reliable || st_.view.contains(m.source);
    if (source_ok && st_.view.contains(from)) {
        for (int i = 0; i < debts; ++i) {
            reply(from, MsgKind::Ack, m, epoch, acts);
        }
    }
}

Actions NatreeProcess::on_crash_notice(ProcessId crashed) {
    Actions acts;
    if (!st_.view.contains(crashed)) {
        return acts;
    }
    st_.view.remove(crashed);
    st_.drop_debts_toward(crashed);
    dirty_ = true;  // next own broadcast must re-flood even if nothing is pending now

    for (const AckEntry& e : st_.acks.snapshot()) {
        if (!st_.acks.contains(e.from, e.to, e.msg, e.epoch)) {
            continue;
        }
        const bool from_ok = e.from == kNoProcess || st_.view.contains(e.from);
        const bool drop = mode_ == Reliability::BestEffort
                              ? !(from_ok && st_.view.contains(e.msg.source))
                              : !from_ok;
        if (drop) {
            st_.acks.erase(e.from, e.to, e.msg, e.epoch);
            continue;
        }
        if (e.to == crashed) {
            // the tree offers no alternate edge; re-delivery comes from the rebuild
            st_.acks.erase(e.from, e.to, e.msg, e.epoch);
            check_acks(e.from, e.msg, e.epoch, acts);
        }
    }

    if (tree_source_ == st_.me) {
        const auto& mine = st_.own_last();
        if (dirty_ && mine && st_.acks.has_pending_any_epoch(kNoProcess, mine->id)) {
            flood(mine->id, mine->payload, acts);
        }
    } else if (!st_.acks.empty() && tree_source_ != kNoProcess && st_.view.contains(tree_source_)) {
        WireMsg req;
        req.kind = MsgKind::Rebuild;
        req.id = MessageId{st_.me, 0};
        req.epoch = epoch_;
        acts.sends.push_back({tree_source_, req});
    }

    if (mode_ == Reliability::Reliable) {
        const auto& stored = st_.last[static_cast<std::size_t>(crashed)];
        if (stored) {
            relay(stored->id, stored->payload, acts);
        }
    }
    return acts;
}

}  // namespace vcube
