#pragma once

#include "vcube/types.hpp"

namespace vcube {

// One protocol state machine per process. Each machine handles one logical
// event at a time (run-to-completion) and returns the actions it wants
// performed instead of performing them; the simulator owns timing, delivery
// of messages, and crash-notification fan-out.
class Process {
  public:
    virtual ~Process() = default;

    // The application asked this process to broadcast.
    virtual Actions on_app_broadcast(PayloadRef payload) = 0;

    // A message arrived from `from` and was serviced.
    virtual Actions on_message(ProcessId from, const WireMsg& msg) = 0;

    // The failure detector reported `crashed` as crashed.
    virtual Actions on_crash_notice(ProcessId crashed) = 0;
};

}  // namespace vcube
