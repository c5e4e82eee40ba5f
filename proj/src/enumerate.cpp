#include "vcube/enumerate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace vcube {

namespace {

std::size_t power(std::size_t base, std::size_t exp) {
    std::size_t out = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        out *= base;
    }
    return out;
}

CrashSchedule schedule_for(const EnumerationSpec& spec, const std::vector<SimTime>& candidates,
                           std::size_t index) {
    std::vector<CrashEntry> entries;
    entries.reserve(spec.crash_set.size());
    for (ProcessId p : spec.crash_set) {
        entries.push_back({p, candidates[index % candidates.size()]});
        index /= candidates.size();
    }
    return CrashSchedule(std::move(entries));
}

std::string schedule_text(const CrashSchedule& sched) {
    std::string out;
    for (const auto& e : sched.entries()) {
        out += "p" + std::to_string(e.process) + "@" + std::to_string(e.time) + " ";
    }
    return out;
}

}  // namespace

std::vector<SimTime> crash_candidates(const RunSpec& base) {
    const Trace trace = run(base);
    std::vector<SimTime> times;
    times.reserve(trace.records.size());
    for (const auto& r : trace.records) {
        times.push_back(r.time);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    std::vector<SimTime> candidates;
    candidates.reserve(times.size() + 2);
    candidates.push_back(0.0);
    for (std::size_t i = 1; i < times.size(); ++i) {
        candidates.push_back(0.5 * (times[i - 1] + times[i]));
    }
    if (!times.empty()) {
        candidates.push_back(times.back() + 1.0);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    // crash times must be non-negative
    candidates.erase(std::remove_if(candidates.begin(), candidates.end(),
                                    [](SimTime t) { return t < 0.0; }),
                     candidates.end());
    return candidates;
}

EnumerationOutcome enumerate_crash_timings(const EnumerationSpec& spec, const TraceChecker& check) {
    if (!spec.base.crashes.entries().empty()) {
        throw std::invalid_argument("enumerate: the base run must be crash-free");
    }
    const auto candidates = crash_candidates(spec.base);
    const std::size_t total = power(candidates.size(), spec.crash_set.size());
    if (total > spec.cap) {
        throw EnumerationCapError(total, spec.cap);
    }

    EnumerationOutcome outcome;
    outcome.runs = total;
    std::mutex mu;
    std::atomic<std::size_t> cursor{0};
    std::vector<std::pair<std::size_t, std::string>> found;

    const int workers = std::max(1, spec.threads);
    auto work = [&]() {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= total) {
                return;
            }
            RunSpec rs = spec.base;
            rs.crashes = schedule_for(spec, candidates, i);
            const Trace trace = run(rs);
            std::string complaint = check(rs.crashes, trace);
            if (trace.truncated) {
                complaint = "run truncated; " + complaint;
            }
            if (!complaint.empty()) {
                const std::lock_guard<std::mutex> lock(mu);
                found.emplace_back(i, schedule_text(rs.crashes) + "-> " + complaint);
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int i = 0; i < workers; ++i) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    std::sort(found.begin(), found.end());
    for (auto& [i, text] : found) {
        outcome.violations.push_back(std::move(text));
    }
    return outcome;
}

void for_each_crash_timing(const EnumerationSpec& spec,
                           const std::function<void(const CrashSchedule&, const Trace&)>& fn) {
    if (!spec.base.crashes.entries().empty()) {
        throw std::invalid_argument("enumerate: the base run must be crash-free");
    }
    const auto candidates = crash_candidates(spec.base);
    const std::size_t total = power(candidates.size(), spec.crash_set.size());
    if (total > spec.cap) {
        throw EnumerationCapError(total, spec.cap);
    }
    for (std::size_t i = 0; i < total; ++i) {
        RunSpec rs = spec.base;
        rs.crashes = schedule_for(spec, candidates, i);
        const Trace trace = run(rs);
        fn(rs.crashes, trace);
    }
}

}  // namespace vcube
