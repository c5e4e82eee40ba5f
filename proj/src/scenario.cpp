#include "vcube/scenario.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace vcube {

std::uint64_t Rng::next_u64() {
    // splitmix64
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::int32_t Rng::next_below(std::int32_t n) {
    // modulo rejection keeps the draw exactly uniform
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next_u64();
    while (x >= limit) {
        x = next_u64();
    }
    return static_cast<std::int32_t>(x % bound);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    Rng rng(seed ^ (salt * 0xd6e8feb86659fd93ull + 0x2545f4914f6cdd1dull));
    return rng.next_u64();
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

void Scenario::validate() const {
    if (n < 2 || (n & (n - 1)) != 0) {
        throw std::invalid_argument("scenario: n must be a power of two >= 2");
    }
    if (messages < 0 || (explicit_workload.empty() && messages < 1)) {
        throw std::invalid_argument("scenario: message count must be positive");
    }
    if (source < 0 || source >= n) {
        throw std::invalid_argument("scenario: source out of range");
    }
    if (crash_count < 0 || crash_count > n - 1) {
        throw std::invalid_argument("scenario: crash count must be in [0, n-1]");
    }
    timing.validate();
    detector.validate();
}

namespace {

using nlohmann::json;

Scenario scenario_from_json(const json& j) {
    Scenario sc;
    sc.n = j.at("n").get<std::int32_t>();
    sc.protocol = j.at("protocol").get<std::string>();
    sc.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("workload")) {
        const json& w = j.at("workload");
        if (w.is_array()) {
            for (const json& b : w) {
                AppBroadcast ab;
                ab.time = b.value("time", 0.0);
                ab.source = b.at("source").get<ProcessId>();
                sc.explicit_workload.push_back(ab);
            }
        } else {
            sc.source = w.value("source", 0);
            sc.messages = w.value("messages", 1);
            sc.start = w.value("start", 0.0);
        }
    }
    if (j.contains("crashes")) {
        const json& c = j.at("crashes");
        if (c.is_array()) {
            for (const json& e : c) {
                sc.explicit_crashes.push_back(
                    {e.at("process").get<ProcessId>(), e.at("time").get<double>()});
            }
        } else {
            sc.crash_count = c.value("count", 0);
            sc.allow_source_crash = c.value("allow_source", false);
        }
    }
    if (j.contains("timing")) {
        const json& t = j.at("timing");
        sc.timing.t_s = t.value("t_s", sc.timing.t_s);
        sc.timing.t_r = t.value("t_r", sc.timing.t_r);
        sc.timing.t_t = t.value("t_t", sc.timing.t_t);
    }
    if (j.contains("detector")) {
        const json& d = j.at("detector");
        sc.detector.test_interval = d.value("test_interval", sc.detector.test_interval);
        sc.detector.timeout = d.value("timeout", sc.detector.timeout);
        sc.detector.phase = d.value("phase", sc.detector.phase);
    }
    sc.validate();
    return sc;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& err) {
        throw std::invalid_argument(std::string("scenario: bad JSON: ") + err.what());
    }
    try {
        return scenario_from_json(j);
    } catch (const json::exception& err) {
        throw std::invalid_argument(std::string("scenario: ") + err.what());
    }
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("scenario: cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

std::vector<CrashEntry> generate_crashes(Rng& rng, std::int32_t n, int count, SimTime window,
                                         std::optional<ProcessId> excluded) {
    std::vector<ProcessId> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (ProcessId p = 0; p < n; ++p) {
        if (!excluded || p != *excluded) {
            pool.push_back(p);
        }
    }
    if (count > static_cast<int>(pool.size())) {
        throw std::invalid_argument("generate_crashes: more crashes than eligible processes");
    }
    std::vector<CrashEntry> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const std::int32_t pick = rng.next_below(static_cast<std::int32_t>(pool.size()));
        const ProcessId target = pool[static_cast<std::size_t>(pick)];
        pool.erase(pool.begin() + pick);
        const SimTime t = rng.next_unit() * window;
        out.push_back({target, t});
    }
    return out;
}

RunSpec base_run_spec(const Scenario& sc) {
    sc.validate();
    RunSpec spec;
    spec.n = sc.n;
    spec.protocol = sc.protocol;
    spec.timing = sc.timing;
    spec.detector = sc.detector;
    if (!sc.explicit_workload.empty()) {
        spec.workload = sc.explicit_workload;
    } else {
        for (int i = 0; i < sc.messages; ++i) {
            spec.workload.push_back({sc.start, sc.source, 0});
        }
    }
    return spec;
}

SimTime run_duration(const RunSpec& spec) {
    class LastTime final : public TraceSink {
      public:
        void record(const TraceRecord& rec) override { last = std::max(last, rec.time); }
        SimTime last = 0.0;
    } sink;
    run_with_sink(spec, sink);
    return sink.last;
}

RunSpec realize_scenario(const Scenario& sc, std::optional<SimTime> window) {
    RunSpec spec = base_run_spec(sc);
    if (!sc.explicit_crashes.empty()) {
        spec.crashes = CrashSchedule(sc.explicit_crashes);
    } else if (sc.crash_count > 0) {
        if (!window) {
            window = run_duration(spec);
        }
        Rng rng(sc.seed);
        const std::optional<ProcessId> excluded =
            sc.allow_source_crash ? std::nullopt
                                  : std::optional<ProcessId>(sc.explicit_workload.empty()
                                                                 ? sc.source
                                                                 : sc.explicit_workload[0].source);
        spec.crashes = CrashSchedule(generate_crashes(rng, sc.n, sc.crash_count, *window, excluded));
    }
    spec.validate();
    return spec;
}

}  // namespace vcube
