#pragma once

#include <set>
#include <string>
#include <vector>

#include "vcube/types.hpp"

namespace vcube {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    int threads = 0;         // 0 = hardware concurrency
    std::set<int> only;      // empty = run everything
    bool verbose = false;    // progress notes on stderr
};

// Runs the acceptance checks (all ten unless filtered) and returns one
// result per criterion, in order.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

}  // namespace vcube
