#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vcube/failure.hpp"
#include "vcube/process.hpp"
#include "vcube/topology.hpp"

namespace vcube {

// The three communication constants: per-copy send occupancy, per-copy
// receive occupancy, and wire delay. When one handler emits several copies
// they dispatch back to back, copy k at base + (k-1)*t_s; a copy dispatched
// at time T arrives at T + t_t and occupies its receiver for t_r once
// serviced, with arrivals at a busy receiver queueing FIFO.
struct TimingParams {
    SimTime t_s = 0.1;
    SimTime t_r = 0.1;
    SimTime t_t = 0.8;

    void validate() const;  // throws std::invalid_argument on negatives
};

enum class TraceActionKind : std::uint8_t { Send, Receive, Deliver, Crash, Detect };

const char* to_string(TraceActionKind kind);

struct TraceRecord {
    SimTime time = 0.0;
    ProcessId process = kNoProcess;
    TraceActionKind action = TraceActionKind::Send;
    MsgKind kind = MsgKind::Tree;     // meaningful for Send/Receive/Deliver
    ProcessId counterpart = kNoProcess;
    MessageId msg;
};

struct Trace {
    std::vector<TraceRecord> records;
    bool truncated = false;  // event horizon was hit before quiescence
};

// One line per record: time, process, action, kind, counterpart, source, ts.
std::string format_trace(const Trace& trace);
void write_trace(std::ostream& out, const Trace& trace);

class Process;

// Observer interface; the kernel reports every record as it happens plus the
// protocol-level completion callbacks the metrics layer consumes. Suites use
// a counting sink so multi-hundred-thousand-message runs never materialize
// record vectors.
class TraceSink {
  public:
    virtual ~TraceSink() = default;
    virtual void record(const TraceRecord& rec) = 0;
    virtual void on_deliver(ProcessId process, MessageId msg, PayloadRef payload, SimTime time) {
        (void)process, (void)msg, (void)payload, (void)time;
    }
    virtual void on_complete(ProcessId process, MessageId msg, SimTime time) {
        (void)process, (void)msg, (void)time;
    }
    // Called once when the event queue drains, with the final state machines;
    // lets tests assert quiescence-state properties directly.
    virtual void on_quiescent(const std::vector<std::unique_ptr<Process>>& processes) {
        (void)processes;
    }
};

class RecordingSink final : public TraceSink {
  public:
    void record(const TraceRecord& rec) override { trace.records.push_back(rec); }
    Trace trace;
};

struct AppBroadcast {
    SimTime time = 0.0;
    ProcessId source = 0;
    PayloadRef payload = 0;
};

// Everything one run needs. Deterministic: a RunSpec fully determines the
// trace; no randomness exists inside the kernel.
struct RunSpec {
    std::int32_t n = 8;
    std::string protocol = "atree-b";  // tree | atree-b | atree-r | all-b | all-r |
                                       // natree-b | natree-r
    TimingParams timing;
    DetectorPolicy detector;
    CrashSchedule crashes;
    std::vector<AppBroadcast> workload;
    std::vector<std::string> payloads = {""};  // PayloadRef -> bytes
    std::uint64_t max_events = 200'000'000;    // horizon; exceeding it truncates

    void validate() const;  // throws std::invalid_argument on config errors
};

// Runs to quiescence (or the event horizon) and reports through the sink.
// Returns true when the run quiesced, false when truncated.
bool run_with_sink(const RunSpec& spec, TraceSink& sink);

// Convenience wrapper collecting the full trace.
Trace run(const RunSpec& spec);

// Factory for the protocol machines; throws std::invalid_argument for an
// unknown protocol name or a workload the protocol cannot serve.
std::vector<std::unique_ptr<Process>> make_processes(const RunSpec& spec, const Topology& topo);

}  // namespace vcube
