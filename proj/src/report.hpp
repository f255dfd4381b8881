#pragma once

#include "groupoid.hpp"
#include "pool.hpp"
#include "syntax.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mgt {

inline constexpr const char* kToolVersion = "0.1.0";

// Bounds and toggles shared by every command; all overridable by flags.
struct RunOptions {
    int max_tuple = 3;
    int max_extra_vars = -1; // -1: use the max carrier total of the groupoid
    int size_bound = 4;
    int scheme_bound = 3;
    int basis_params = 2; // object-basis parameter bound
    int quant_bound = 1;  // object-basis existential bound
    int synth_bound = 2;  // signature-extension tuple bound
    PoolOptions pool;
    std::vector<std::string> checks; // empty = all of check's sub-checks
    std::vector<std::string> tuple;  // orbit command
    std::size_t family_cap = std::size_t(1) << 14;
};

enum class RunStatus { Pass = 0, Fail = 1, Usage = 2, Inconclusive = 3 };

struct RunResult {
    RunStatus status = RunStatus::Pass;
    std::string report_json; // versioned, deterministic
    std::string summary;     // human-readable lines
};

// Each command takes the raw input texts so the report can carry digests.
// Inputs are parsed/validated here; malformed input yields Usage.
RunResult run_check(const std::string& theory_dsl, const std::string& groupoid_json, const RunOptions& opt);
RunResult run_orbit(const std::string& groupoid_json, const RunOptions& opt);
RunResult run_topology(const std::string& groupoid_json, const RunOptions& opt);
RunResult run_etale(const std::string& groupoid_json, const RunOptions& opt);
RunResult run_synth(const std::string& groupoid_json, const RunOptions& opt);
RunResult run_morleyize(const std::string& theory_dsl, const RunOptions& opt);

} // namespace mgt
