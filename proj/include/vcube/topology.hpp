#pragma once

#include <span>
#include <vector>

#include "vcube/types.hpp"

namespace vcube {

// A process's local view: the set of processes it currently believes correct.
// Drives every topology function; each protocol state machine owns one.
class View {
  public:
    View(ProcessId owner, std::int32_t n);

    ProcessId owner() const { return owner_; }
    std::int32_t size() const { return n_; }
    bool contains(ProcessId p) const {
        return p >= 0 && p < n_ &&
               (bits_[static_cast<std::size_t>(p) >> 6] >> (static_cast<unsigned>(p) & 63u)) & 1u;
    }
    void remove(ProcessId p);
    std::int32_t alive_count() const { return alive_; }

  private:
    ProcessId owner_;
    std::int32_t n_;
    std::int32_t alive_;
    std::vector<std::uint64_t> bits_;
};

// The hierarchical cluster structure of a virtual hypercube on n = 2^d
// processes, plus the view-dependent neighbor selection built on it.
//
// Cluster s of process i (1 <= s <= d) holds the 2^(s-1) processes whose
// address differs from i exactly in bit s-1 and below-or-equal bits; the
// ordered member list is defined recursively from i xor 2^(s-1) and fixes
// the first-fault-free search order. All tables are built eagerly at
// construction, so a Topology is immutable and safe to share across threads.
class Topology {
  public:
    // n must be a power of two with 2 <= n <= 2^20; anything else is a
    // configuration error.
    explicit Topology(std::int32_t n);

    std::int32_t size() const { return n_; }
    int dimension() const { return d_; }

    // Ordered members of cluster s of process i; the order is the
    // first-fault-free search order. Throws std::invalid_argument when s is
    // outside [1, d] or i is out of range.
    std::span<const ProcessId> cluster_members(ProcessId i, int s) const;

    // The unique s with j in cluster s of i; equals the index of the
    // most-significant differing bit plus one. Requires i != j.
    int cluster_index(ProcessId i, ProcessId j) const;

    // First member of cluster s of view.owner() that the view considers
    // correct, or kNoProcess when the whole cluster is believed crashed.
    ProcessId ff_neighbor(const View& view, int s) const;

    // Union of non-null ff_neighbor results for s = 1..h, in ascending
    // cluster order (the send order every protocol uses). h = 0 yields the
    // empty set so leaf handlers need no special case.
    std::vector<ProcessId> neighborhood(const View& view, int h) const;

  private:
    std::int32_t n_;
    int d_;
    std::vector<ProcessId> flat_;       // all member lists, concatenated
    std::vector<std::size_t> offsets_;  // (i*d + s-1) -> begin index; length n*d+1
};

}  // namespace vcube
