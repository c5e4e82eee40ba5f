#pragma once

#include <map>
#include <string>
#include <vector>

#include "vcube/metrics.hpp"
#include "vcube/scenario.hpp"

namespace vcube {

// Per-run aggregates collected without materializing a trace; a half-million
// message flood reduces to a handful of counters.
struct RunStats {
    MessageCounts counts;
    // one entry per workload message; negative when the message was never
    // delivered anywhere (its source crashed first)
    std::vector<double> latencies;
    bool quiesced = true;
    SimTime duration = 0.0;

    double mean_latency() const;  // over delivered messages
};

// Runs the spec and reduces it. Throws DeliveryError when some message
// reached part but not all of the end-correct processes.
RunStats run_stats(const RunSpec& spec);

struct FaultFreeRow {
    std::int32_t n = 0;
    double latency = 0.0;
    double throughput = 0.0;
};

struct FaultRow {
    int faults = 0;
    double latency_mean = 0.0;
    double latency_sd = 0.0;
    double tree_mean = 0.0;
    double ack_mean = 0.0;
    double nack_mean = 0.0;
    double total_sd = 0.0;
    int failed_runs = 0;  // runs that violated delivery or hit the horizon
};

struct FaultFreeSweepSpec {
    std::vector<std::string> protocols = {"atree-b", "all-b", "natree-b"};
    std::vector<std::int32_t> sizes = {8, 16, 32, 64, 128, 256, 512, 1024};
    ProcessId source = 0;
    TimingParams timing;
    DetectorPolicy detector;
    int threads = 0;  // 0 = hardware concurrency
};

struct FaultSweepSpec {
    std::vector<std::string> protocols = {"atree-b", "all-b", "natree-b"};
    std::int32_t n = 512;
    int min_faults = 0;
    int max_faults = 8;
    int seeds_per_point = 100;
    int messages = 10;
    ProcessId source = 0;
    std::uint64_t seed = 1;
    TimingParams timing;
    DetectorPolicy detector;
    int threads = 0;
};

using FaultFreeResults = std::map<std::string, std::vector<FaultFreeRow>>;
using FaultResults = std::map<std::string, std::vector<FaultRow>>;

// Single-broadcast scenarios per (protocol, n); latency plus 1/latency.
FaultFreeResults run_fault_free_sweep(const FaultFreeSweepSpec& spec);

// seeds_per_point random scenarios per (protocol, crash count); means and
// sample standard deviations per row. Individual failing runs are recorded in
// the row and never abort the sweep.
FaultResults run_fault_sweep(const FaultSweepSpec& spec);

// TSV renderings, one header row each, matching the experiment data layout:
// fault-free (p, latency, throughput); faulty (f, latency, desvpad2, TREE,
// ACK, NACK, desvpad1) where desvpad2 is the latency deviation and desvpad1
// the total-message deviation.
std::string fault_free_tsv(const std::vector<FaultFreeRow>& rows);
std::string fault_tsv(const std::vector<FaultRow>& rows);

// Writes <name>.<protocol>.tsv under out_dir for every protocol in the map.
void write_fault_free_files(const std::string& out_dir, const std::string& name,
                            const FaultFreeResults& results);
void write_fault_files(const std::string& out_dir, const std::string& name,
                       const FaultResults& results);

}  // namespace vcube
