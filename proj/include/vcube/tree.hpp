#pragma once

#include <optional>

#include "vcube/process.hpp"
#include "vcube/topology.hpp"

namespace vcube {

// Bare spanning-tree propagation: one TREE message flows from a source down
// the cluster hierarchy, and crash notifications regenerate the affected
// subtree. Carries no payload memory and no acknowledgments, so one instance
// supports exactly one propagation; the broadcast protocols layer delivery
// semantics on top of this structure.
class TreeProcess final : public Process {
  public:
    TreeProcess(ProcessId me, const Topology& topo);

    // StartTree: send TREE to the first correct process of every cluster.
    Actions on_app_broadcast(PayloadRef payload) override;

    // Receive: if the sender is believed correct, retransmit into the
    // clusters below the sender's.
    Actions on_message(ProcessId from, const WireMsg& msg) override;

    // Crash: drop the process from the view and, when a replacement neighbor
    // exists in the crashed process's cluster, retransmit toward it. The
    // retransmission is unconditional by design: this machine keeps no record
    // of what was sent, matching the propagation rule literally.
    Actions on_crash_notice(ProcessId crashed) override;

    const View& view() const { return view_; }

  private:
    WireMsg tree_msg() const;

    ProcessId me_;
    const Topology* topo_;
    View view_;
    std::optional<MessageId> seen_;  // identity carried by the propagation, once known
};

}  // namespace vcube
