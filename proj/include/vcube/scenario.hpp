#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vcube/sim.hpp"

namespace vcube {

// Deterministic generator for scenario sampling. Only the harness draws from
// it; the kernel itself is randomness-free. Hand-rolled so regenerated
// scenarios are identical across standard libraries and platforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    double next_unit();                      // uniform in [0, 1)
    std::int32_t next_below(std::int32_t n); // uniform in [0, n)

  private:
    std::uint64_t state_;
};

// Order-independent seed derivation for sub-experiments.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);
std::uint64_t fnv1a(const std::string& text);

// One runnable experiment, as loaded from a JSON scenario file. Crashes are
// either explicit or generated: `crash_count` targets are drawn without
// replacement (the workload source excluded unless allow_source_crash) and
// crash times land uniformly inside the fault-free run's active window.
struct Scenario {
    std::int32_t n = 8;
    std::string protocol = "atree-b";
    std::uint64_t seed = 1;
    ProcessId source = 0;
    int messages = 1;
    SimTime start = 0.0;
    std::vector<AppBroadcast> explicit_workload;  // overrides source/messages when set
    int crash_count = 0;
    std::vector<CrashEntry> explicit_crashes;  // overrides crash_count when set
    bool allow_source_crash = false;
    TimingParams timing;
    DetectorPolicy detector;

    void validate() const;
};

Scenario load_scenario_file(const std::string& path);
Scenario parse_scenario(const std::string& json_text);

// Distinct crash targets and uniform times over (0, window).
std::vector<CrashEntry> generate_crashes(Rng& rng, std::int32_t n, int count, SimTime window,
                                         std::optional<ProcessId> excluded);

// The spec without crashes (used to measure the active window).
RunSpec base_run_spec(const Scenario& sc);

// Fully resolved spec: generated crashes included. `window` is the active
// broadcast window; when unset it is measured from the crash-free run.
RunSpec realize_scenario(const Scenario& sc, std::optional<SimTime> window = std::nullopt);

// Duration of a run: time of its last trace record (0 for an empty trace).
SimTime run_duration(const RunSpec& spec);

}  // namespace vcube
