#include "vcube/ackset.hpp"

#include <algorithm>

namespace vcube {

AckSet::AckSet(std::int32_t n)
    : by_to_(static_cast<std::size_t>(n)), pending_(static_cast<std::size_t>(n) + 1) {}

bool AckSet::insert(ProcessId from, ProcessId to, MessageId msg, std::uint32_t epoch,
                    PayloadRef payload) {
    if (contains(from, to, msg, epoch)) {
        return false;
    }
    by_to_[static_cast<std::size_t>(to)].push_back({from, msg, epoch, payload, next_seq_++});
    bump(from, msg, epoch, +1);
    ++size_;
    return true;
}

bool AckSet::contains(ProcessId from, ProcessId to, MessageId msg, std::uint32_t epoch) const {
    const auto& cells = by_to_[static_cast<std::size_t>(to)];
    return std::any_of(cells.begin(), cells.end(), [&](const Cell& c) {
        return c.from == from && c.msg == msg && c.epoch == epoch;
    });
}

void AckSet::bump(ProcessId from, MessageId msg, std::uint32_t epoch, int delta) {
    auto& counts = pending_[static_cast<std::size_t>(from + 1)];
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i].msg == msg && counts[i].epoch == epoch) {
            counts[i].count += delta;
            if (counts[i].count == 0) {
                counts[i] = counts.back();
                counts.pop_back();
            }
            return;
        }
    }
    counts.push_back({msg, epoch, delta});
}

bool AckSet::erase(ProcessId from, ProcessId to, MessageId msg, std::uint32_t epoch) {
    auto& cells = by_to_[static_cast<std::size_t>(to)];
    const auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) {
        return c.from == from && c.msg == msg && c.epoch == epoch;
    });
    if (it == cells.end()) {
        return false;
    }
    *it = cells.back();
    cells.pop_back();
    bump(from, msg, epoch, -1);
    --size_;
    return true;
}

std::optional<AckEntry> AckSet::take_match(ProcessId to, MessageId msg, std::uint32_t epoch) {
    if (to < 0 || static_cast<std::size_t>(to) >= by_to_.size()) {
        return std::nullopt;
    }
    auto& cells = by_to_[static_cast<std::size_t>(to)];
    std::size_t best = cells.size();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].msg == msg && cells[i].epoch == epoch &&
            (best == cells.size() || cells[i].seq < cells[best].seq)) {
            best = i;
        }
    }
    if (best == cells.size()) {
        return std::nullopt;
    }
    AckEntry entry{cells[best].from, to, msg, epoch, cells[best].payload, cells[best].seq};
    cells[best] = cells.back();
    cells.pop_back();
    bump(entry.from, msg, epoch, -1);
    --size_;
    return entry;
}

bool AckSet::has_pending(ProcessId from, MessageId msg, std::uint32_t epoch) const {
    const auto& counts = pending_[static_cast<std::size_t>(from + 1)];
    return std::any_of(counts.begin(), counts.end(), [&](const PendingCount& c) {
        return c.msg == msg && c.epoch == epoch && c.count > 0;
    });
}

bool AckSet::has_pending_any_epoch(ProcessId from, MessageId msg) const {
    const auto& counts = pending_[static_cast<std::size_t>(from + 1)];
    return std::any_of(counts.begin(), counts.end(),
                       [&](const PendingCount& c) { return c.msg == msg && c.count > 0; });
}

std::vector<AckEntry> AckSet::snapshot() const {
    std::vector<AckEntry> out;
    out.reserve(size_);
    for (std::size_t to = 0; to < by_to_.size(); ++to) {
        for (const Cell& c : by_to_[to]) {
            out.push_back({c.from, static_cast<ProcessId>(to), c.msg, c.epoch, c.payload, c.seq});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const AckEntry& a, const AckEntry& b) { return a.seq < b.seq; });
    return out;
}

}  // namespace vcube
