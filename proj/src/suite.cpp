#include "vcube/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace vcube {

namespace {

// Reduces a run to counters: sends by kind, per-message delivery bookkeeping,
// and the time of the last record.
class StatsSink final : public TraceSink {
  public:
    StatsSink(std::int32_t n, const std::vector<AppBroadcast>& workload) : n_(n) {
        // workload messages get timestamps 1..k per source, in submission order
        std::map<ProcessId, std::int32_t> next_ts;
        for (const auto& b : workload) {
            const std::int32_t ts = ++next_ts[b.source];
            index_[MessageId{b.source, ts}] = msgs_.size();
            msgs_.push_back(PerMessage{});
            msgs_.back().delivered_by.assign((static_cast<std::size_t>(n_) + 63) / 64, 0);
        }
    }

    void record(const TraceRecord& rec) override {
        last_time = std::max(last_time, rec.time);
        switch (rec.action) {
            case TraceActionKind::Send:
                switch (rec.kind) {
                    case MsgKind::Tree: ++counts.tree; break;
                    case MsgKind::Ack: ++counts.ack; break;
                    case MsgKind::Nack:
                    case MsgKind::Rebuild: ++counts.nack; break;
                }
                break;
            case TraceActionKind::Deliver: {
                const auto it = index_.find(rec.msg);
                if (it == index_.end()) {
                    break;
                }
                PerMessage& pm = msgs_[it->second];
                const auto word = static_cast<std::size_t>(rec.process) >> 6;
                const std::uint64_t bit = std::uint64_t{1}
                                          << (static_cast<unsigned>(rec.process) & 63u);
                if (pm.delivered_by[word] & bit) {
                    duplicate_delivery = true;
                }
                pm.delivered_by[word] |= bit;
                ++pm.delivery_count;
                pm.last_delivery = std::max(pm.last_delivery, rec.time);
                pm.first_delivery = pm.first_delivery < 0.0
                                        ? rec.time
                                        : std::min(pm.first_delivery, rec.time);
                if (rec.process == rec.msg.source) {
                    pm.source_delivery = rec.time;
                }
                break;
            }
            case TraceActionKind::Crash: crashed.push_back(rec.process); break;
            default: break;
        }
    }

    struct PerMessage {
        std::vector<std::uint64_t> delivered_by;
        std::int64_t delivery_count = 0;
        SimTime first_delivery = -1.0;
        SimTime last_delivery = -1.0;
        SimTime source_delivery = -1.0;

        bool delivered(ProcessId p) const {
            return (delivered_by[static_cast<std::size_t>(p) >> 6] >>
                    (static_cast<unsigned>(p) & 63u)) &
                   1u;
        }
    };

    MessageCounts counts;
    std::vector<ProcessId> crashed;
    bool duplicate_delivery = false;
    SimTime last_time = 0.0;
    std::int32_t n_ = 0;
    std::map<MessageId, std::size_t> index_;
    std::vector<PerMessage> msgs_;
};

unsigned resolve_threads(int requested) {
    if (requested > 0) {
        return static_cast<unsigned>(requested);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (count == 0) {
        return;
    }
    if (threads <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= count) {
                return;
            }
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    pool.reserve(spawn);
    for (unsigned i = 0; i < spawn; ++i) {
        pool.emplace_back(work);
    }
    for (auto& t : pool) {
        t.join();
    }
}

double sample_sd(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) {
        return 0.0;
    }
    double acc = 0.0;
    for (double x : xs) {
        acc += (x - mean) * (x - mean);
    }
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (double x : xs) {
        acc += x;
    }
    return acc / static_cast<double>(xs.size());
}

std::string format_row(double value) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", value);
    return buf;
}

}  // namespace

double RunStats::mean_latency() const {
    double acc = 0.0;
    int counted = 0;
    for (double l : latencies) {
        if (l >= 0.0) {
            acc += l;
            ++counted;
        }
    }
    return counted == 0 ? 0.0 : acc / counted;
}

RunStats run_stats(const RunSpec& spec) {
    StatsSink sink(spec.n, spec.workload);
    const bool quiesced = run_with_sink(spec, sink);

    RunStats stats;
    stats.counts = sink.counts;
    stats.quiesced = quiesced;
    stats.duration = sink.last_time;
    if (sink.duplicate_delivery) {
        throw std::logic_error("run_stats: duplicate delivery observed");
    }

    std::vector<char> is_crashed(static_cast<std::size_t>(spec.n), 0);
    for (ProcessId p : sink.crashed) {
        is_crashed[static_cast<std::size_t>(p)] = 1;
    }
    for (const auto& [id, idx] : sink.index_) {
        const auto& pm = sink.msgs_[idx];
        if (pm.delivery_count == 0) {
            if (!is_crashed[static_cast<std::size_t>(id.source)]) {
                std::vector<ProcessId> everyone;
                for (ProcessId p = 0; p < spec.n; ++p) {
                    if (!is_crashed[static_cast<std::size_t>(p)]) {
                        everyone.push_back(p);
                    }
                }
                throw DeliveryError(id, std::move(everyone));
            }
            stats.latencies.push_back(-1.0);  // its source crashed before it went out
            continue;
        }
        std::vector<ProcessId> missing;
        for (ProcessId p = 0; p < spec.n; ++p) {
            if (!is_crashed[static_cast<std::size_t>(p)] && !pm.delivered(p)) {
                missing.push_back(p);
            }
        }
        if (!missing.empty()) {
            throw DeliveryError(id, std::move(missing));
        }
        const SimTime start = pm.source_delivery >= 0.0 ? pm.source_delivery : pm.first_delivery;
        stats.latencies.push_back(pm.last_delivery - start);
    }
    return stats;
}

FaultFreeResults run_fault_free_sweep(const FaultFreeSweepSpec& spec) {
    struct Job {
        std::string protocol;
        std::int32_t n;
    };
    std::vector<Job> jobs;
    for (const auto& protocol : spec.protocols) {
        for (std::int32_t n : spec.sizes) {
            jobs.push_back({protocol, n});
        }
    }
    std::vector<FaultFreeRow> rows(jobs.size());
    parallel_for(jobs.size(), resolve_threads(spec.threads), [&](std::size_t i) {
        RunSpec rs;
        rs.n = jobs[i].n;
        rs.protocol = jobs[i].protocol;
        rs.timing = spec.timing;
        rs.detector = spec.detector;
        rs.workload = {{0.0, spec.source, 0}};
        const RunStats stats = run_stats(rs);
        const double latency = stats.mean_latency();
        rows[i] = {jobs[i].n, latency, latency > 0.0 ? 1.0 / latency : 0.0};
    });
    FaultFreeResults results;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        results[jobs[i].protocol].push_back(rows[i]);
    }
    for (auto& [protocol, list] : results) {
        std::sort(list.begin(), list.end(),
                  [](const FaultFreeRow& a, const FaultFreeRow& b) { return a.n < b.n; });
    }
    return results;
}

FaultResults run_fault_sweep(const FaultSweepSpec& spec) {
    struct Job {
        std::size_t protocol_idx;
        int faults;
        int seed_idx;
    };
    struct Outcome {
        double latency = 0.0;
        double tree = 0.0;
        double ack = 0.0;
        double nack = 0.0;
        bool failed = false;
    };

    // Active windows per protocol come from the crash-free runs; measured
    // up-front so every scenario of a protocol shares one window.
    std::vector<SimTime> windows(spec.protocols.size(), 0.0);
    parallel_for(spec.protocols.size(), resolve_threads(spec.threads), [&](std::size_t i) {
        RunSpec rs;
        rs.n = spec.n;
        rs.protocol = spec.protocols[i];
        rs.timing = spec.timing;
        rs.detector = spec.detector;
        for (int m = 0; m < spec.messages; ++m) {
            rs.workload.push_back({0.0, spec.source, 0});
        }
        windows[i] = run_duration(rs);
    });

    std::vector<Job> jobs;
    for (std::size_t p = 0; p < spec.protocols.size(); ++p) {
        for (int f = spec.min_faults; f <= spec.max_faults; ++f) {
            for (int s = 0; s < spec.seeds_per_point; ++s) {
                jobs.push_back({p, f, s});
            }
        }
    }
    std::vector<Outcome> outcomes(jobs.size());
    parallel_for(jobs.size(), resolve_threads(spec.threads), [&](std::size_t i) {
        const Job& job = jobs[i];
        const std::string& protocol = spec.protocols[job.protocol_idx];
        const bool reliable = protocol.ends_with("-r");
        Scenario sc;
        sc.n = spec.n;
        sc.protocol = protocol;
        sc.source = spec.source;
        sc.messages = spec.messages;
        sc.crash_count = job.faults;
        sc.allow_source_crash = reliable;
        sc.timing = spec.timing;
        sc.detector = spec.detector;
        sc.seed = mix_seed(mix_seed(mix_seed(spec.seed, fnv1a(protocol)),
                                    static_cast<std::uint64_t>(job.faults)),
                           static_cast<std::uint64_t>(job.seed_idx));
        try {
            const RunSpec rs = realize_scenario(sc, windows[job.protocol_idx]);
            const RunStats stats = run_stats(rs);
            if (!stats.quiesced) {
                outcomes[i].failed = true;
                return;
            }
            outcomes[i].latency = stats.mean_latency();
            outcomes[i].tree = static_cast<double>(stats.counts.tree);
            outcomes[i].ack = static_cast<double>(stats.counts.ack);
            outcomes[i].nack = static_cast<double>(stats.counts.nack);
        } catch (const DeliveryError&) {
            outcomes[i].failed = true;
        }
    });

    FaultResults results;
    for (std::size_t p = 0; p < spec.protocols.size(); ++p) {
        std::vector<FaultRow>& rows = results[spec.protocols[p]];
        for (int f = spec.min_faults; f <= spec.max_faults; ++f) {
            std::vector<double> latencies, trees, acks, nacks, totals;
            int failed = 0;
            for (std::size_t i = 0; i < jobs.size(); ++i) {
                if (jobs[i].protocol_idx != p || jobs[i].faults != f) {
                    continue;
                }
                if (outcomes[i].failed) {
                    ++failed;
                    continue;
                }
                latencies.push_back(outcomes[i].latency);
                trees.push_back(outcomes[i].tree);
                acks.push_back(outcomes[i].ack);
                nacks.push_back(outcomes[i].nack);
                totals.push_back(outcomes[i].tree + outcomes[i].ack + outcomes[i].nack);
            }
            FaultRow row;
            row.faults = f;
            row.latency_mean = mean_of(latencies);
            row.latency_sd = sample_sd(latencies, row.latency_mean);
            row.tree_mean = mean_of(trees);
            row.ack_mean = mean_of(acks);
            row.nack_mean = mean_of(nacks);
            row.total_sd = sample_sd(totals, mean_of(totals));
            row.failed_runs = failed;
            rows.push_back(row);
        }
    }
    return results;
}

std::string fault_free_tsv(const std::vector<FaultFreeRow>& rows) {
    std::string out = "p\tlatency\tthroughput\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + "\t" + format_row(r.latency) + "\t" +
               format_row(r.throughput) + "\n";
    }
    return out;
}

std::string fault_tsv(const std::vector<FaultRow>& rows) {
    std::string out = "f\tlatency\tdesvpad2\tTREE\tACK\tNACK\tdesvpad1\n";
    for (const auto& r : rows) {
        out += std::to_string(r.faults) + "\t" + format_row(r.latency_mean) + "\t" +
               format_row(r.latency_sd) + "\t" + format_row(r.tree_mean) + "\t" +
               format_row(r.ack_mean) + "\t" + format_row(r.nack_mean) + "\t" +
               format_row(r.total_sd) + "\n";
    }
    return out;
}

namespace {

void write_file(const std::string& out_dir, const std::string& filename,
                const std::string& body) {
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / filename;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << body;
}

}  // namespace

void write_fault_free_files(const std::string& out_dir, const std::string& name,
                            const FaultFreeResults& results) {
    for (const auto& [protocol, rows] : results) {
        write_file(out_dir, name + "." + protocol + ".tsv", fault_free_tsv(rows));
    }
}

void write_fault_files(const std::string& out_dir, const std::string& name,
                       const FaultResults& results) {
    for (const auto& [protocol, rows] : results) {
        write_file(out_dir, name + "." + protocol + ".tsv", fault_tsv(rows));
    }
}

}  // namespace vcube
