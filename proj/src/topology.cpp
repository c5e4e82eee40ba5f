#include "vcube/topology.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace vcube {

View::View(ProcessId owner, std::int32_t n) : owner_(owner), n_(n), alive_(n) {
    if (n <= 0 || owner < 0 || owner >= n) {
        throw std::invalid_argument("View: owner out of range");
    }
    bits_.assign((static_cast<std::size_t>(n) + 63) / 64, ~std::uint64_t{0});
    // mask off the tail so alive bookkeeping stays exact
    const unsigned tail = static_cast<unsigned>(n) & 63u;
    if (tail != 0) {
        bits_.back() = (std::uint64_t{1} << tail) - 1;
    }
}

void View::remove(ProcessId p) {
    if (p < 0 || p >= n_ || !contains(p)) {
        return;
    }
    bits_[static_cast<std::size_t>(p) >> 6] &= ~(std::uint64_t{1} << (static_cast<unsigned>(p) & 63u));
    --alive_;
}

Topology::Topology(std::int32_t n) : n_(n) {
    if (n < 2 || (n & (n - 1)) != 0 || n > (1 << 20)) {
        throw std::invalid_argument("Topology: n must be a power of two in [2, 2^20], got " +
                                    std::to_string(n));
    }
    d_ = std::countr_zero(static_cast<std::uint32_t>(n));

    // Member lists are built bottom-up: the list for (i, s) is
    //   [ i ^ 2^(s-1) ] ++ members(i ^ 2^(s-1), 1) ++ ... ++ members(i ^ 2^(s-1), s-1)
    // so every piece of level s is already present once levels < s are done.
    offsets_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(d_) + 1, 0);
    std::size_t total = 0;
    for (int s = 1; s <= d_; ++s) {
        total += static_cast<std::size_t>(n_) * (std::size_t{1} << (s - 1));
    }
    flat_.resize(total);

    std::size_t cursor = 0;
    for (int s = 1; s <= d_; ++s) {
        for (ProcessId i = 0; i < n_; ++i) {
            const std::size_t slot = static_cast<std::size_t>(i) * d_ + (s - 1);
            offsets_[slot] = cursor;
            const ProcessId head = i ^ static_cast<ProcessId>(1 << (s - 1));
            flat_[cursor++] = head;
            for (int sub = 1; sub <= s - 1; ++sub) {
                const auto part = cluster_members(head, sub);
                for (ProcessId p : part) {
                    flat_[cursor++] = p;
                }
            }
        }
    }
    offsets_.back() = cursor;
}

std::span<const ProcessId> Topology::cluster_members(ProcessId i, int s) const {
    if (i < 0 || i >= n_) {
        throw std::invalid_argument("cluster_members: process out of range");
    }
    if (s < 1 || s > d_) {
        throw std::invalid_argument("cluster_members: cluster index out of range");
    }
    const std::size_t begin = offsets_[static_cast<std::size_t>(i) * d_ + (s - 1)];
    const std::size_t len = std::size_t{1} << (s - 1);
    return {flat_.data() + begin, len};
}

int Topology::cluster_index(ProcessId i, ProcessId j) const {
    if (i < 0 || i >= n_ || j < 0 || j >= n_) {
        throw std::invalid_argument("cluster_index: process out of range");
    }
    if (i == j) {
        throw std::invalid_argument("cluster_index: i and j must differ");
    }
    return std::bit_width(static_cast<std::uint32_t>(i ^ j));
}

ProcessId Topology::ff_neighbor(const View& view, int s) const {
    for (ProcessId p : cluster_members(view.owner(), s)) {
        if (view.contains(p)) {
            return p;
        }
    }
    return kNoProcess;
}

std::vector<ProcessId> Topology::neighborhood(const View& view, int h) const {
    if (h < 0 || h > d_) {
        throw std::invalid_argument("neighborhood: height out of range");
    }
    std::vector<ProcessId> out;
    out.reserve(static_cast<std::size_t>(h));
    for (int s = 1; s <= h; ++s) {
        const ProcessId p = ff_neighbor(view, s);
        if (p != kNoProcess) {
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace vcube
