#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vcube/sim.hpp"

namespace vcube {

// Exhaustive crash-timing driver used by the delivery and agreement oracles:
// one run per assignment of every crash in `crash_set` to every event
// boundary of the fault-free run (the instant 0, the midpoint between each
// pair of consecutive distinct record times, and one point after
// quiescence). Under the deterministic kernel this covers all
// delivery-order-distinct interleavings of the crashes with the fault-free
// event structure.
struct EnumerationSpec {
    RunSpec base;  // run without crashes; its schedule must be empty
    std::vector<ProcessId> crash_set;
    std::size_t cap = 100'000;
    int threads = 1;
};

class EnumerationCapError : public std::runtime_error {
  public:
    EnumerationCapError(std::size_t required, std::size_t cap)
        : std::runtime_error("enumeration needs " + std::to_string(required) +
                             " runs, above the cap of " + std::to_string(cap)),
          required_(required) {}
    std::size_t required() const { return required_; }

  private:
    std::size_t required_;
};

// Candidate crash instants derived from the fault-free run of `base`.
std::vector<SimTime> crash_candidates(const RunSpec& base);

struct EnumerationOutcome {
    std::size_t runs = 0;
    // one line per violating run: the schedule plus the checker's complaint
    std::vector<std::string> violations;
};

// Checker returns an empty string for a clean run, a complaint otherwise.
using TraceChecker = std::function<std::string(const CrashSchedule&, const Trace&)>;

EnumerationOutcome enumerate_crash_timings(const EnumerationSpec& spec, const TraceChecker& check);

// Sequential variant handing every trace to the callback, for trace export.
void for_each_crash_timing(const EnumerationSpec& spec,
                           const std::function<void(const CrashSchedule&, const Trace&)>& fn);

}  // namespace vcube
