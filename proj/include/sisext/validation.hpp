#pragma once

// Acceptance criteria A1..A12 with pinned thresholds. Each check returns a
// measured value, its threshold, and a verdict; runtime limits are part of
// the verdict.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sisext::validation {

struct CriterionResult {
    std::string id;
    std::string description;
    double measured = 0.0;
    double threshold = 0.0;
    std::string relation;  // how measured is compared with threshold, e.g. "<="
    bool within_threshold = false;
    double runtime_s = 0.0;
    double runtime_limit_s = 0.0;
    bool pass = false;  // within_threshold and runtime_s <= runtime_limit_s
    std::vector<std::pair<std::string, double>> detail;
    std::string note;  // set when the check threw
};

struct Options {
    std::uint64_t seed = 20140226;
    unsigned threads = 0;  // worker hint, never changes results
};

/// Criterion ids in order: "A1" .. "A12".
const std::vector<std::string>& criterion_ids();

/// Criterion ids for a suite name: gumbel, oracles, analytic, couplings,
/// montecarlo, repro, all, or a single criterion id. Throws
/// std::invalid_argument for unknown names.
std::vector<std::string> suite_criteria(std::string_view suite);

const std::vector<std::string>& suite_names();

/// Runs one criterion; exceptions are caught and reported as failures.
CriterionResult run_criterion(std::string_view id, const Options& opts);

std::vector<CriterionResult> run_criteria(const std::vector<std::string>& ids, const Options& opts);

}  // namespace sisext::validation
