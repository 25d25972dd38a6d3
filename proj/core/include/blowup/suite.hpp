#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blowup/harness.hpp"

namespace blowup {

struct CriterionResult {
    int id = 0;
    std::string name;
    std::string tag;
    bool pass = false;
    double runtime_s = 0.0;
    double runtime_limit_s = 0.0;  // 0 when the criterion carries no time budget
    std::string summary;
    nlohmann::json detail;
};

struct SuiteOptions {
    std::uint64_t seed = 42;
    ExperimentConfig pipeline;  // paper-family defaults
    std::size_t fk_paths = 100000;
};

struct SuiteReport {
    std::vector<CriterionResult> results;
    bool passed() const;
};

/// Tags understood by verify_suite, in criterion order.
const std::vector<std::string>& suite_tags();

/// Runs every criterion whose tag is in `tags` ("all" selects everything). An empty set
/// yields an empty, passing report. `on_result` fires after each criterion.
SuiteReport verify_suite(const std::set<std::string>& tags, const SuiteOptions& opt = {},
                         const std::function<void(const CriterionResult&)>& on_result = {});

nlohmann::json to_json(const CriterionResult& r);
nlohmann::json to_json(const SuiteReport& r);

/// Fixed-width line, e.g. "[PASS] 01 heat     homogeneous blowup time ... (0.6 s)".
std::string format_line(const CriterionResult& r);

}  // namespace blowup
