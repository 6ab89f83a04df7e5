#pragma once

// The desk acceptance matrix: criteria 1-7 run in process, criterion 8 runs
// the zdm binary end to end. Tolerances and time limits are fixed here.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace zdm {

struct Subcheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    double seconds = 0.0;
    double limit_seconds = 0.0;
    std::vector<Subcheck> subchecks;

    bool within_time() const { return seconds < limit_seconds; }
    bool passed() const;
    /// One line: id, verdict, title, time against limit, failing subchecks.
    std::string line() const;
    nlohmann::json to_json() const;
};

inline constexpr std::uint64_t kDeskSeed = 20240611;

CriterionResult marker_suite(std::uint64_t seed);
CriterionResult marker_negative_control(std::uint64_t seed);
CriterionResult dense_embedding_suite(std::uint64_t seed);
CriterionResult noninvertible_suite(std::uint64_t seed);
CriterionResult encoder_suite(std::uint64_t seed);
CriterionResult selector_suite(std::uint64_t seed);
CriterionResult simplex_suite(std::uint64_t seed);

/// Criteria 1-7 in order; `on_result` sees each result as soon as it is done.
std::vector<CriterionResult> run_desk_suite(
    std::uint64_t seed, const std::function<void(const CriterionResult&)>& on_result = {});

/// Criterion 8: `<zdm> verify-all --suite desk --seed <seed>` exits 0 in time.
CriterionResult end_to_end(const std::string& zdm_binary, std::uint64_t seed);

}  // namespace zdm
