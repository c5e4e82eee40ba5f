#pragma once

#include <optional>
#include <vector>

#include "vcube/types.hpp"

namespace vcube {

struct CrashEntry {
    ProcessId process = kNoProcess;
    SimTime time = 0.0;

    friend bool operator==(const CrashEntry&, const CrashEntry&) = default;
};

// Static crash plan for one run. Crashes are permanent: a process crashing at
// time t performs no action at any time >= t, and messages in flight to it
// are dropped at arrival.
class CrashSchedule {
  public:
    CrashSchedule() = default;
    // Throws std::invalid_argument on duplicate processes or negative times.
    explicit CrashSchedule(std::vector<CrashEntry> entries);

    const std::vector<CrashEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    std::optional<SimTime> crash_time(ProcessId p) const;

    // True iff p has no crash entry or crashes strictly after t; the crash
    // takes effect at its own timestamp.
    bool is_correct_at(ProcessId p, SimTime t) const;

  private:
    std::vector<CrashEntry> entries_;
};

// Perfect-detector latency policy. The underlying detector's test traffic is
// not simulated; each (observer, crashed) pair just gets a deterministic
// notification time: the first test round at or after the crash, plus the
// timeout. With defaults the timeout is 4*(t_s + t_r + t_t) = 4.0 and rounds
// run every 5.0 time units.
struct DetectorPolicy {
    SimTime test_interval = 5.0;
    SimTime timeout = 4.0;
    SimTime phase = 0.0;  // offset of round 0; hook for desynchronized observers

    // Time at which observer's notification about crashed fires. Requires
    // observer != crashed; always strictly greater than crash_time and
    // non-decreasing in it.
    SimTime detection_time(ProcessId observer, ProcessId crashed, SimTime crash_time) const;

    void validate() const;  // throws std::invalid_argument on non-positive fields
};

}  // namespace vcube
