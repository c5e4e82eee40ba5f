#include "vcube/failure.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace vcube {

CrashSchedule::CrashSchedule(std::vector<CrashEntry> entries) : entries_(std::move(entries)) {
    std::unordered_set<ProcessId> seen;
    for (const auto& e : entries_) {
        if (e.process < 0) {
            throw std::invalid_argument("CrashSchedule: invalid process id");
        }
        if (e.time < 0.0) {
            throw std::invalid_argument("CrashSchedule: negative crash time");
        }
        if (!seen.insert(e.process).second) {
            throw std::invalid_argument("CrashSchedule: duplicate entry for one process");
        }
    }
}

std::optional<SimTime> CrashSchedule::crash_time(ProcessId p) const {
    for (const auto& e : entries_) {
        if (e.process == p) {
            return e.time;
        }
    }
    return std::nullopt;
}

bool CrashSchedule::is_correct_at(ProcessId p, SimTime t) const {
    const auto ct = crash_time(p);
    return !ct.has_value() || *ct > t;
}

void DetectorPolicy::validate() const {
    if (!(test_interval > 0.0) || !(timeout > 0.0) || phase < 0.0) {
        throw std::invalid_argument("DetectorPolicy: intervals must be positive");
    }
}

SimTime DetectorPolicy::detection_time(ProcessId observer, ProcessId crashed,
                                       SimTime crash_time) const {
    if (observer == crashed) {
        throw std::invalid_argument("detection_time: observer cannot observe itself");
    }
    validate();
    // First test round at or after the crash: round k runs at phase + k*interval.
    double k = 0.0;
    if (crash_time > phase) {
        k = std::ceil((crash_time - phase) / test_interval);
    }
    return phase + k * test_interval + timeout;
}

}  // namespace vcube
