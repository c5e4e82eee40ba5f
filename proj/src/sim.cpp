#include "vcube/sim.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "vcube/baselines.hpp"
#include "vcube/broadcast.hpp"
#include "vcube/tree.hpp"

namespace vcube {

const char* to_string(TraceActionKind kind) {
    switch (kind) {
        case TraceActionKind::Send: return "SEND";
        case TraceActionKind::Receive: return "RECEIVE";
        case TraceActionKind::Deliver: return "DELIVER";
        case TraceActionKind::Crash: return "CRASH";
        case TraceActionKind::Detect: return "DETECT";
    }
    return "?";
}

void TimingParams::validate() const {
    if (t_s < 0.0 || t_r < 0.0 || t_t < 0.0) {
        throw std::invalid_argument("TimingParams: negative interval");
    }
}

void RunSpec::validate() const {
    timing.validate();
    detector.validate();
    if (n < 2 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("RunSpec: n must be a power of two >= 2");
    }
    if (static_cast<std::int32_t>(crashes.entries().size()) > n - 1) {
        throw std::invalid_argument("RunSpec: at most n-1 processes may crash");
    }
    for (const auto& e : crashes.entries()) {
        if (e.process >= n) {
            throw std::invalid_argument("RunSpec: crash entry out of range");
        }
    }
    for (const auto& b : workload) {
        if (b.source < 0 || b.source >= n) {
            throw std::invalid_argument("RunSpec: workload source out of range");
        }
        if (b.time < 0.0) {
            throw std::invalid_argument("RunSpec: workload time negative");
        }
        if (b.payload != kNoPayload && b.payload >= payloads.size()) {
            throw std::invalid_argument("RunSpec: workload payload out of range");
        }
    }
}

std::vector<std::unique_ptr<Process>> make_processes(const RunSpec& spec, const Topology& topo) {
    std::vector<std::unique_ptr<Process>> procs;
    procs.reserve(static_cast<std::size_t>(spec.n));
    const auto mode = [&]() -> Reliability {
        return spec.protocol.ends_with("-r") ? Reliability::Reliable : Reliability::BestEffort;
    }();
    for (ProcessId p = 0; p < spec.n; ++p) {
        if (spec.protocol == "tree") {
            procs.push_back(std::make_unique<TreeProcess>(p, topo));
        } else if (spec.protocol == "atree-b" || spec.protocol == "atree-r") {
            procs.push_back(std::make_unique<BroadcastProcess>(p, topo, mode));
        } else if (spec.protocol == "all-b" || spec.protocol == "all-r") {
            procs.push_back(std::make_unique<AllProcess>(p, topo, mode));
        } else if (spec.protocol == "natree-b" || spec.protocol == "natree-r") {
            procs.push_back(std::make_unique<NatreeProcess>(p, topo, mode));
        } else {
            throw std::invalid_argument("unknown protocol: " + spec.protocol);
        }
    }
    if (spec.protocol.starts_with("natree")) {
        // NatreeState keeps a single parent/epoch, so one tree per run.
        for (const auto& b : spec.workload) {
            if (b.source != spec.workload.front().source) {
                throw std::invalid_argument("natree workloads must share a single source");
            }
        }
    }
    return procs;
}

namespace {

enum class EvKind : std::uint8_t { SendBatch, TryService, Finish, AppBroadcast, Crash, Detect };

struct Event {
    SimTime time = 0.0;
    std::uint64_t seq = 0;
    EvKind kind = EvKind::Finish;
    ProcessId target = kNoProcess;
    ProcessId other = kNoProcess;     // crashed process for Detect events
    std::uint32_t payload = 0;        // batch slot / application payload
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) {
            return a.time > b.time;
        }
        return a.seq > b.seq;
    }
};

struct InboxItem {
    ProcessId from = kNoProcess;
    WireMsg msg;
    bool is_notice = false;  // failure-detector notification; zero service time
};

class Simulator {
  public:
    Simulator(const RunSpec& spec, const Topology& topo, TraceSink& sink)
        : spec_(spec), sink_(sink) {
        procs_ = make_processes(spec, topo);
        const auto n = static_cast<std::size_t>(spec.n);
        crash_at_.assign(n, std::numeric_limits<SimTime>::infinity());
        busy_until_.assign(n, 0.0);
        inbox_.resize(n);
        service_inflight_.assign(n, 0);

        for (const auto& e : spec.crashes.entries()) {
            crash_at_[static_cast<std::size_t>(e.process)] = e.time;
            push({e.time, 0, EvKind::Crash, e.process, kNoProcess, 0});
            for (ProcessId obs = 0; obs < spec.n; ++obs) {
                if (obs == e.process) {
                    continue;
                }
                const SimTime when = spec.detector.detection_time(obs, e.process, e.time);
                push({when, 0, EvKind::Detect, obs, e.process, 0});
            }
        }
        for (const auto& b : spec.workload) {
            push({b.time, 0, EvKind::AppBroadcast, b.source, kNoProcess, b.payload});
        }
    }

    bool run() {
        std::uint64_t handled = 0;
        while (!queue_.empty()) {
            if (++handled > spec_.max_events) {
                return false;
            }
            const Event ev = queue_.top();
            queue_.pop();
            dispatch(ev);
        }
        sink_.on_quiescent(procs_);
        return true;
    }

  private:
    bool alive(ProcessId p, SimTime t) const {
        return t < crash_at_[static_cast<std::size_t>(p)];
    }

    void push(Event ev) {
        ev.seq = next_seq_++;
        queue_.push(ev);
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
            case EvKind::SendBatch: on_send_batch(ev); break;
            case EvKind::TryService: on_try_service(ev); break;
            case EvKind::Finish: on_finish(ev); break;
            case EvKind::AppBroadcast: on_app(ev); break;
            case EvKind::Crash:
                sink_.record({ev.time, ev.target, TraceActionKind::Crash, MsgKind::Tree,
                              kNoProcess, MessageId{}});
                inbox_[static_cast<std::size_t>(ev.target)].clear();
                break;
            case EvKind::Detect: on_detect(ev); break;
        }
    }

    // One live event walks a handler's send batch copy by copy; this keeps
    // the event queue proportional to active senders instead of messages in
    // flight, which matters for the flooding baseline.
    void on_send_batch(const Event& ev) {
        Batch& batch = batches_[ev.payload];
        const SendAction& send = batch.sends[batch.next];
        if (alive(send.to, ev.time)) {
            inbox_[static_cast<std::size_t>(send.to)].push_back({batch.sender, send.msg, false});
            kick(send.to, ev.time);
        }
        ++batch.next;
        if (batch.next < batch.sends.size()) {
            const SimTime arrival =
                (batch.base + static_cast<double>(batch.next) * spec_.timing.t_s) +
                spec_.timing.t_t;
            push({arrival, 0, EvKind::SendBatch, batch.sender, kNoProcess, ev.payload});
        } else {
            batch.sends.clear();
            free_batches_.push_back(ev.payload);
        }
    }

    void on_detect(const Event& ev) {
        if (!alive(ev.target, ev.time)) {
            return;  // the observer itself is gone
        }
        InboxItem item;
        item.from = ev.other;
        item.is_notice = true;
        inbox_[static_cast<std::size_t>(ev.target)].push_back(item);
        kick(ev.target, ev.time);
    }

    // Schedule a service slot for p unless a service chain is already live.
    void kick(ProcessId p, SimTime now) {
        const auto idx = static_cast<std::size_t>(p);
        if (service_inflight_[idx] || inbox_[idx].empty()) {
            return;
        }
        service_inflight_[idx] = 1;
        const SimTime start = std::max(now, busy_until_[idx]);
        push({start, 0, EvKind::TryService, p, kNoProcess, 0});
    }

    void on_try_service(const Event& ev) {
        const auto idx = static_cast<std::size_t>(ev.target);
        if (!alive(ev.target, ev.time)) {
            inbox_[idx].clear();
            service_inflight_[idx] = 0;
            return;
        }
        if (inbox_[idx].empty()) {
            service_inflight_[idx] = 0;
            return;
        }
        if (busy_until_[idx] > ev.time) {
            // The timeline grew after this slot was scheduled (an application
            // broadcast charged sends); try again when the process frees up.
            push({busy_until_[idx], 0, EvKind::TryService, ev.target, kNoProcess, 0});
            return;
        }
        begin_service(ev.target, ev.time);
    }

    // Start serving the inbox head at `start`; the item stays queued until
    // its Finish handler runs, so Finish events carry nothing. The in-flight
    // flag stays set until that handler completes.
    void begin_service(ProcessId p, SimTime start) {
        const auto idx = static_cast<std::size_t>(p);
        const SimTime cost = inbox_[idx].front().is_notice ? 0.0 : spec_.timing.t_r;
        const SimTime end = start + cost;
        busy_until_[idx] = end;
        push({end, 0, EvKind::Finish, p, kNoProcess, 0});
    }

    void on_finish(const Event& ev) {
        const auto idx = static_cast<std::size_t>(ev.target);
        if (!alive(ev.target, ev.time)) {
            inbox_[idx].clear();
            service_inflight_[idx] = 0;
            return;  // crashed mid-service: the handler never runs
        }
        const InboxItem item = inbox_[idx].front();
        inbox_[idx].pop_front();
        Actions acts;
        if (item.is_notice) {
            sink_.record({ev.time, ev.target, TraceActionKind::Detect, MsgKind::Tree, item.from,
                          MessageId{}});
            acts = procs_[idx]->on_crash_notice(item.from);
        } else {
            sink_.record({ev.time, ev.target, TraceActionKind::Receive, item.msg.kind, item.from,
                          item.msg.id});
            acts = procs_[idx]->on_message(item.from, item.msg);
        }
        apply(ev.target, ev.time, std::move(acts));
        // chain straight into the next queued item, after any sends just charged
        if (!inbox_[idx].empty()) {
            begin_service(ev.target, busy_until_[idx]);
        } else {
            service_inflight_[idx] = 0;
        }
    }

    void on_app(const Event& ev) {
        if (!alive(ev.target, ev.time)) {
            return;
        }
        Actions acts = procs_[static_cast<std::size_t>(ev.target)]->on_app_broadcast(ev.payload);
        apply(ev.target, ev.time, std::move(acts));
    }

    // Perform a handler's actions: deliveries at the handler time, sends
    // charged sequentially from the end of the process's committed work.
    void apply(ProcessId p, SimTime now, Actions&& acts) {
        const auto idx = static_cast<std::size_t>(p);
        for (const auto& d : acts.delivers) {
            sink_.record({now, p, TraceActionKind::Deliver, MsgKind::Tree, kNoProcess, d.id});
            sink_.on_deliver(p, d.id, d.payload, now);
        }
        for (const auto& m : acts.completions) {
            sink_.on_complete(p, m, now);
        }
        if (acts.sends.empty()) {
            return;
        }
        const SimTime base = std::max(now, busy_until_[idx]);
        std::size_t emitted = 0;
        for (std::size_t k = 0; k < acts.sends.size(); ++k) {
            const SimTime dispatch = base + static_cast<double>(k) * spec_.timing.t_s;
            if (!alive(p, dispatch)) {
                break;  // the process dies before this copy leaves
            }
            const auto& send = acts.sends[k];
            sink_.record({dispatch, p, TraceActionKind::Send, send.msg.kind, send.to,
                          send.msg.id});
            ++emitted;
        }
        busy_until_[idx] =
            base + static_cast<double>(acts.sends.size()) * spec_.timing.t_s;
        if (emitted == 0) {
            return;
        }
        acts.sends.resize(emitted);
        std::uint32_t slot;
        if (!free_batches_.empty()) {
            slot = free_batches_.back();
            free_batches_.pop_back();
        } else {
            slot = static_cast<std::uint32_t>(batches_.size());
            batches_.emplace_back();
        }
        Batch& batch = batches_[slot];
        batch.sender = p;
        batch.sends = std::move(acts.sends);
        batch.next = 0;
        batch.base = base;
        push({base + spec_.timing.t_t, 0, EvKind::SendBatch, p, kNoProcess, slot});
    }

    const RunSpec& spec_;
    TraceSink& sink_;
    std::vector<std::unique_ptr<Process>> procs_;
    std::vector<SimTime> crash_at_;
    std::vector<SimTime> busy_until_;
    struct Batch {
        ProcessId sender = kNoProcess;
        std::vector<SendAction> sends;
        std::size_t next = 0;
        SimTime base = 0.0;
    };

    std::vector<std::deque<InboxItem>> inbox_;
    std::vector<char> service_inflight_;
    std::vector<Batch> batches_;
    std::vector<std::uint32_t> free_batches_;
    std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace

bool run_with_sink(const RunSpec& spec, TraceSink& sink) {
    spec.validate();
    const Topology topo(spec.n);
    Simulator sim(spec, topo, sink);
    return sim.run();
}

Trace run(const RunSpec& spec) {
    RecordingSink sink;
    const bool quiesced = run_with_sink(spec, sink);
    sink.trace.truncated = !quiesced;
    return std::move(sink.trace);
}

std::string format_trace(const Trace& trace) {
    std::string out;
    out.reserve(trace.records.size() * 48 + 32);
    char line[160];
    for (const auto& r : trace.records) {
        const bool msgful = r.action == TraceActionKind::Send ||
                            r.action == TraceActionKind::Receive ||
                            r.action == TraceActionKind::Deliver;
        std::snprintf(line, sizeof(line), "%.6f\t%d\t%s\t%s\t%d\t%d\t%d\n", r.time, r.process,
                      to_string(r.action), msgful ? to_string(r.kind) : "-", r.counterpart,
                      msgful ? r.msg.source : kNoProcess, msgful ? r.msg.ts : 0);
        out += line;
    }
    if (trace.truncated) {
        out += "# truncated: event horizon exceeded\n";
    }
    return out;
}

void write_trace(std::ostream& out, const Trace& trace) {
    out << format_trace(trace);
}

}  // namespace vcube
