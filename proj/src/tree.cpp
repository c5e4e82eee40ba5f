#include "vcube/tree.hpp"

namespace vcube {

TreeProcess::TreeProcess(ProcessId me, const Topology& topo)
    : me_(me), topo_(&topo), view_(me, topo.size()) {}

WireMsg TreeProcess::tree_msg() const {
    WireMsg msg;
    msg.kind = MsgKind::Tree;
    msg.id = seen_.value_or(MessageId{me_, 1});
    return msg;
}

Actions TreeProcess::on_app_broadcast(PayloadRef payload) {
    Actions acts;
    seen_ = MessageId{me_, 1};
    WireMsg msg = tree_msg();
    msg.payload = payload;
    for (ProcessId k : topo_->neighborhood(view_, topo_->dimension())) {
        acts.sends.push_back({k, msg});
    }
    return acts;
}

Actions TreeProcess::on_message(ProcessId from, const WireMsg& msg) {
    Actions acts;
    if (msg.kind != MsgKind::Tree || !view_.contains(from)) {
        return acts;
    }
    if (!seen_) {
        seen_ = msg.id;
    }
    const int below = topo_->cluster_index(me_, from) - 1;
    for (ProcessId k : topo_->neighborhood(view_, below)) {
        acts.sends.push_back({k, msg});
    }
    return acts;
}

Actions TreeProcess::on_crash_notice(ProcessId crashed) {
    Actions acts;
    if (!view_.contains(crashed)) {
        return acts;  // duplicate notification
    }
    view_.remove(crashed);
    const ProcessId k = topo_->ff_neighbor(view_, topo_->cluster_index(me_, crashed));
    if (k != kNoProcess) {
        acts.sends.push_back({k, tree_msg()});
    }
    return acts;
}

}  // namespace vcube
