#include "vcube/metrics.hpp"

#include <algorithm>
#include <deque>

namespace vcube {

MessageCounts message_counts(const Trace& trace) {
    MessageCounts counts;
    for (const auto& r : trace.records) {
        if (r.action != TraceActionKind::Send) {
            continue;
        }
        switch (r.kind) {
            case MsgKind::Tree: ++counts.tree; break;
            case MsgKind::Ack: ++counts.ack; break;
            case MsgKind::Nack:
            case MsgKind::Rebuild: ++counts.nack; break;
        }
    }
    return counts;
}

DeliveryError::DeliveryError(MessageId m, std::vector<ProcessId> missing)
    : std::runtime_error("message {" + std::to_string(m.source) + "," + std::to_string(m.ts) +
                         "} not delivered by " + std::to_string(missing.size()) +
                         " correct process(es)"),
      missing_(std::move(missing)) {}

std::set<ProcessId> crashed_processes(const Trace& trace) {
    std::set<ProcessId> out;
    for (const auto& r : trace.records) {
        if (r.action == TraceActionKind::Crash) {
            out.insert(r.process);
        }
    }
    return out;
}

std::vector<std::pair<ProcessId, SimTime>> deliveries_of(const Trace& trace, MessageId m) {
    std::vector<std::pair<ProcessId, SimTime>> out;
    for (const auto& r : trace.records) {
        if (r.action == TraceActionKind::Deliver && r.msg == m) {
            out.emplace_back(r.process, r.time);
        }
    }
    return out;
}

SimTime latency_of(const Trace& trace, MessageId m) {
    SimTime start = -1.0;
    SimTime last = -1.0;
    std::set<ProcessId> delivered;
    for (const auto& r : trace.records) {
        if (r.action != TraceActionKind::Deliver || r.msg != m) {
            continue;
        }
        delivered.insert(r.process);
        last = std::max(last, r.time);
        if (r.process == m.source) {
            start = r.time;
        }
    }
    if (delivered.empty()) {
        throw std::invalid_argument("latency_of: message never delivered in this trace");
    }
    const auto crashed = crashed_processes(trace);
    std::vector<ProcessId> missing;
    // Every end-correct process must have delivered; n is not recorded in the
    // trace, so derive the universe from the largest id seen.
    ProcessId max_id = 0;
    for (const auto& r : trace.records) {
        max_id = std::max({max_id, r.process, r.counterpart});
    }
    for (ProcessId p = 0; p <= max_id; ++p) {
        if (!crashed.contains(p) && !delivered.contains(p)) {
            missing.push_back(p);
        }
    }
    if (!missing.empty()) {
        throw DeliveryError(m, std::move(missing));
    }
    if (start < 0.0) {
        // the source crashed before its own local delivery; measure from the
        // earliest delivery instead
        for (const auto& [p, t] : deliveries_of(trace, m)) {
            start = start < 0.0 ? t : std::min(start, t);
        }
    }
    return last - start;
}

std::vector<TreeEdge> tree_edges(const Trace& trace) {
    std::vector<TreeEdge> out;
    for (const auto& r : trace.records) {
        if (r.action == TraceActionKind::Send && r.kind == MsgKind::Tree) {
            out.push_back({r.process, r.counterpart});
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

TreeShape tree_shape(const Trace& trace, ProcessId root, std::int32_t n) {
    TreeShape shape;
    const auto edges = tree_edges(trace);
    std::vector<ProcessId> parent(static_cast<std::size_t>(n), kNoProcess);
    std::vector<std::vector<ProcessId>> children(static_cast<std::size_t>(n));
    bool duplicate_parent = false;
    for (const auto& e : edges) {
        if (parent[static_cast<std::size_t>(e.to)] != kNoProcess) {
            duplicate_parent = true;
        }
        parent[static_cast<std::size_t>(e.to)] = e.from;
        children[static_cast<std::size_t>(e.from)].push_back(e.to);
    }
    shape.root_out_degree = static_cast<int>(children[static_cast<std::size_t>(root)].size());
    for (const auto& c : children) {
        shape.max_child_count = std::max(shape.max_child_count, static_cast<int>(c.size()));
    }
    // breadth-first from the root for depth and reachability
    std::vector<int> depth(static_cast<std::size_t>(n), -1);
    std::deque<ProcessId> frontier{root};
    depth[static_cast<std::size_t>(root)] = 0;
    std::int32_t reached = 1;
    while (!frontier.empty()) {
        const ProcessId p = frontier.front();
        frontier.pop_front();
        shape.depth = std::max(shape.depth, depth[static_cast<std::size_t>(p)]);
        for (ProcessId c : children[static_cast<std::size_t>(p)]) {
            if (depth[static_cast<std::size_t>(c)] < 0) {
                depth[static_cast<std::size_t>(c)] = depth[static_cast<std::size_t>(p)] + 1;
                frontier.push_back(c);
                ++reached;
            }
        }
    }
    shape.is_tree = !duplicate_parent && reached == n &&
                    static_cast<std::int32_t>(edges.size()) == n - 1;
    return shape;
}

}  // namespace vcube
