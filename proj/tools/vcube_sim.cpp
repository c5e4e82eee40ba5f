#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "vcube/acceptance.hpp"
#include "vcube/enumerate.hpp"
#include "vcube/metrics.hpp"
#include "vcube/scenario.hpp"
#include "vcube/sim.hpp"
#include "vcube/suite.hpp"

namespace {

using namespace vcube;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitViolation = 2;

struct RunOptions {
    std::string config;
    std::string out;
    std::optional<std::string> protocol;
    std::optional<std::int32_t> n;
    std::optional<std::uint64_t> seed;
    std::optional<int> crash_count;
    std::optional<int> messages;
    std::optional<double> t_s, t_r, t_t;
};

int cmd_run(const RunOptions& opt) {
    Scenario sc;
    if (!opt.config.empty()) {
        sc = load_scenario_file(opt.config);
    }
    if (opt.protocol) sc.protocol = *opt.protocol;
    if (opt.n) sc.n = *opt.n;
    if (opt.seed) sc.seed = *opt.seed;
    if (opt.crash_count) {
        sc.crash_count = *opt.crash_count;
        sc.explicit_crashes.clear();
    }
    if (opt.messages) sc.messages = *opt.messages;
    if (opt.t_s) sc.timing.t_s = *opt.t_s;
    if (opt.t_r) sc.timing.t_r = *opt.t_r;
    if (opt.t_t) sc.timing.t_t = *opt.t_t;
    sc.validate();

    const RunSpec spec = realize_scenario(sc);
    const Trace trace = run(spec);
    if (opt.out.empty()) {
        write_trace(std::cout, trace);
    } else {
        std::ofstream file(opt.out, std::ios::binary);
        if (!file) {
            throw std::invalid_argument("cannot write " + opt.out);
        }
        write_trace(file, trace);
    }
    const auto counts = message_counts(trace);
    std::fprintf(stderr, "n=%d protocol=%s crashes=%zu TREE=%lld ACK=%lld NACK=%lld%s\n", spec.n,
                 spec.protocol.c_str(), spec.crashes.entries().size(),
                 static_cast<long long>(counts.tree), static_cast<long long>(counts.ack),
                 static_cast<long long>(counts.nack), trace.truncated ? " (truncated)" : "");
    return trace.truncated ? kExitViolation : kExitOk;
}

struct SuiteOptions {
    std::string name;
    std::string out_dir = "results";
    std::vector<std::string> protocols;
    std::uint64_t seed = 1;
    int threads = 0;
    std::int32_t n = 512;
    int seeds_per_point = 100;
    int max_faults = 8;
    int messages = 10;
};

int cmd_suite(const SuiteOptions& opt) {
    if (opt.name == "fault-free-sweep") {
        FaultFreeSweepSpec spec;
        if (!opt.protocols.empty()) {
            spec.protocols = opt.protocols;
        }
        spec.threads = opt.threads;
        const auto results = run_fault_free_sweep(spec);
        write_fault_free_files(opt.out_dir, opt.name, results);
    } else if (opt.name == "fault-sweep") {
        FaultSweepSpec spec;
        if (!opt.protocols.empty()) {
            spec.protocols = opt.protocols;
        }
        spec.seed = opt.seed;
        spec.threads = opt.threads;
        spec.n = opt.n;
        spec.seeds_per_point = opt.seeds_per_point;
        spec.max_faults = opt.max_faults;
        spec.messages = opt.messages;
        const auto results = run_fault_sweep(spec);
        write_fault_files(opt.out_dir, opt.name, results);
        for (const auto& [protocol, rows] : results) {
            for (const auto& row : rows) {
                if (row.failed_runs > 0) {
                    std::fprintf(stderr, "warning: %s f=%d had %d failed runs\n",
                                 protocol.c_str(), row.faults, row.failed_runs);
                }
            }
        }
    } else {
        throw std::invalid_argument("unknown suite: " + opt.name +
                                    " (expected fault-free-sweep or fault-sweep)");
    }
    std::fprintf(stderr, "suite %s written to %s/\n", opt.name.c_str(), opt.out_dir.c_str());
    return kExitOk;
}

struct EnumerateOptions {
    std::int32_t n = 8;
    std::string protocol = "atree-b";
    std::vector<ProcessId> crash_set;
    std::size_t cap = 100'000;
    int threads = 0;
    std::string check = "delivery";
    double start = 1.0;
    int messages = 1;
};

int cmd_enumerate(const EnumerateOptions& opt) {
    EnumerationSpec spec;
    spec.base.n = opt.n;
    spec.base.protocol = opt.protocol;
    for (int i = 0; i < opt.messages; ++i) {
        spec.base.workload.push_back({opt.start, 0, 0});
    }
    spec.crash_set = opt.crash_set;
    spec.cap = opt.cap;
    spec.threads = opt.threads == 0 ? 2 : opt.threads;

    TraceChecker checker;
    if (opt.check == "delivery") {
        checker = [&](const CrashSchedule& sched, const Trace& trace) {
            const SimTime end = trace.records.empty() ? 0.0 : trace.records.back().time + 1.0;
            std::map<std::pair<ProcessId, MessageId>, int> count;
            for (const auto& r : trace.records) {
                if (r.action == TraceActionKind::Deliver) {
                    ++count[{r.process, r.msg}];
                }
            }
            for (int m = 1; m <= opt.messages; ++m) {
                const MessageId id{0, m};
                for (ProcessId p = 0; p < opt.n; ++p) {
                    if (!sched.is_correct_at(p, end)) {
                        continue;
                    }
                    if (count[{p, id}] != 1) {
                        return std::string("p" + std::to_string(p) + " delivered message " +
                                           std::to_string(m) + " " +
                                           std::to_string(count[{p, id}]) + " times");
                    }
                }
            }
            return std::string();
        };
    } else if (opt.check == "agreement") {
        checker = [&](const CrashSchedule& sched, const Trace& trace) {
            const SimTime end = trace.records.empty() ? 0.0 : trace.records.back().time + 1.0;
            std::map<ProcessId, std::set<MessageId>> sets;
            for (const auto& r : trace.records) {
                if (r.action == TraceActionKind::Deliver) {
                    sets[r.process].insert(r.msg);
                }
            }
            std::optional<std::set<MessageId>> reference;
            for (ProcessId p = 0; p < opt.n; ++p) {
                if (!sched.is_correct_at(p, end)) {
                    continue;
                }
                const auto mine = sets.contains(p) ? sets[p] : std::set<MessageId>{};
                if (!reference) {
                    reference = mine;
                } else if (*reference != mine) {
                    return std::string("delivered sets differ at p" + std::to_string(p));
                }
            }
            return std::string();
        };
    } else if (opt.check == "none") {
        checker = [](const CrashSchedule&, const Trace&) { return std::string(); };
    } else {
        throw std::invalid_argument("unknown check: " + opt.check);
    }

    const auto outcome = enumerate_crash_timings(spec, checker);
    std::printf("runs\t%zu\nviolations\t%zu\n", outcome.runs, outcome.violations.size());
    for (const auto& v : outcome.violations) {
        std::printf("violation\t%s\n", v.c_str());
    }
    return outcome.violations.empty() ? kExitOk : kExitViolation;
}

struct VerifyOptions {
    int threads = 0;
    std::vector<int> criteria;
    bool verbose = false;
};

int cmd_verify(const VerifyOptions& opt) {
    AcceptanceOptions options;
    options.threads = opt.threads;
    options.only = std::set<int>(opt.criteria.begin(), opt.criteria.end());
    options.verbose = opt.verbose;
    const auto results = run_acceptance(options);
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("%s criterion %d: %s%s%s [%.1fs]\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.empty() ? "" : " - ", r.detail.c_str(), r.seconds);
        all_pass = all_pass && r.pass;
    }
    return all_pass ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VCube spanning-tree broadcast simulator"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run_cmd = app.add_subcommand("run", "run one scenario and print its trace");
    run_cmd->add_option("--config", run_opt.config, "scenario JSON file");
    run_cmd->add_option("--out", run_opt.out, "trace output file (default stdout)");
    run_cmd->add_option("--protocol", run_opt.protocol,
                        "tree|atree-b|atree-r|all-b|all-r|natree-b|natree-r");
    run_cmd->add_option("--n", run_opt.n, "process count (power of two)");
    run_cmd->add_option("--seed", run_opt.seed, "scenario seed");
    run_cmd->add_option("--crashes", run_opt.crash_count, "generated crash count");
    run_cmd->add_option("--messages", run_opt.messages, "broadcasts from the source");
    run_cmd->add_option("--t-s", run_opt.t_s, "send cost per copy");
    run_cmd->add_option("--t-r", run_opt.t_r, "receive cost per copy");
    run_cmd->add_option("--t-t", run_opt.t_t, "transmission delay");

    SuiteOptions suite_opt;
    auto* suite_cmd = app.add_subcommand("suite", "run a named sweep and write TSV tables");
    suite_cmd->add_option("--name", suite_opt.name, "fault-free-sweep | fault-sweep")
        ->required();
    suite_cmd->add_option("--out-dir", suite_opt.out_dir, "output directory");
    suite_cmd->add_option("--protocols", suite_opt.protocols, "protocol list");
    suite_cmd->add_option("--seed", suite_opt.seed, "master seed");
    suite_cmd->add_option("--threads", suite_opt.threads, "worker threads (0 = all cores)");
    suite_cmd->add_option("--n", suite_opt.n, "system size for the fault sweep");
    suite_cmd->add_option("--seeds-per-point", suite_opt.seeds_per_point,
                          "scenarios per crash count");
    suite_cmd->add_option("--max-faults", suite_opt.max_faults, "largest crash count");
    suite_cmd->add_option("--messages", suite_opt.messages, "broadcasts per scenario");

    EnumerateOptions enum_opt;
    auto* enum_cmd =
        app.add_subcommand("enumerate", "exhaust crash timings over event boundaries");
    enum_cmd->add_option("--n", enum_opt.n, "process count");
    enum_cmd->add_option("--protocol", enum_opt.protocol, "protocol name");
    enum_cmd->add_option("--crash", enum_opt.crash_set, "crashing process (repeatable)")
        ->required();
    enum_cmd->add_option("--cap", enum_opt.cap, "largest run count to accept");
    enum_cmd->add_option("--threads", enum_opt.threads, "worker threads");
    enum_cmd->add_option("--check", enum_opt.check, "delivery | agreement | none");
    enum_cmd->add_option("--messages", enum_opt.messages, "broadcasts from process 0");

    VerifyOptions verify_opt;
    auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
    verify_cmd->add_option("--threads", verify_opt.threads, "worker threads (0 = all cores)");
    verify_cmd->add_option("--criteria", verify_opt.criteria, "criterion ids to run");
    verify_cmd->add_flag("--verbose", verify_opt.verbose, "progress notes on stderr");

    try {
        app.parse(argc, argv);
        if (run_cmd->parsed()) {
            return cmd_run(run_opt);
        }
        if (suite_cmd->parsed()) {
            return cmd_suite(suite_opt);
        }
        if (enum_cmd->parsed()) {
            return cmd_enumerate(enum_opt);
        }
        if (verify_cmd->parsed()) {
            return cmd_verify(verify_opt);
        }
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kExitConfig;
    } catch (const std::invalid_argument& err) {
        std::fprintf(stderr, "config error: %s\n", err.what());
        return kExitConfig;
    } catch (const EnumerationCapError& err) {
        std::fprintf(stderr, "config error: %s\n", err.what());
        return kExitConfig;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return kExitViolation;
    }
    return kExitConfig;
}
