#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

namespace vcube {

using ProcessId = std::int32_t;
using SimTime = double;

// Null process marker (the algorithms' "no neighbor" / origin marker).
inline constexpr ProcessId kNoProcess = -1;

// Unique message identity: originating process plus its per-source counter.
// Timestamps start at 1 and increase by 1 per broadcast; payload bytes are
// opaque and never participate in equality.
struct MessageId {
    ProcessId source = kNoProcess;
    std::int32_t ts = 0;

    friend bool operator==(const MessageId&, const MessageId&) = default;
    friend auto operator<=>(const MessageId&, const MessageId&) = default;
};

enum class MsgKind : std::uint8_t {
    Tree,
    Ack,
    Nack,
    Rebuild,  // flood-tree control message; counted with NACKs in metrics
};

inline const char* to_string(MsgKind kind) {
    switch (kind) {
        case MsgKind::Tree: return "TREE";
        case MsgKind::Ack: return "ACK";
        case MsgKind::Nack: return "NACK";
        case MsgKind::Rebuild: return "REBUILD";
    }
    return "?";
}

// Payloads are interned per run; kNoPayload marks control traffic.
using PayloadRef = std::uint32_t;
inline constexpr PayloadRef kNoPayload = 0xffffffffu;

struct WireMsg {
    MsgKind kind = MsgKind::Tree;
    MessageId id;
    PayloadRef payload = kNoPayload;
    std::uint32_t epoch = 0;  // tree generation; only the flood-built baseline uses it
    bool flood = false;       // tree-building flood copy
    bool relay = false;       // direct relay of a crashed source's message
};

struct SendAction {
    ProcessId to = kNoProcess;
    WireMsg msg;
};

struct DeliverAction {
    MessageId id;
    PayloadRef payload = kNoPayload;
};

// Everything a state machine wants done in response to one event, in order.
// Machines never perform I/O themselves; the simulator (or a test) applies
// the actions, which keeps every machine deterministic and replayable.
struct Actions {
    std::vector<SendAction> sends;
    std::vector<DeliverAction> delivers;
    std::vector<MessageId> completions;  // locally originated broadcasts that finished

    bool empty() const { return sends.empty() && delivers.empty() && completions.empty(); }
};

}  // namespace vcube
