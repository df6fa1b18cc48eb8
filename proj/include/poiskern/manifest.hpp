#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace poiskern {

inline constexpr const char* kToolVersion = "0.1.0";

// Everything needed to reproduce a run.  The hash covers only the
// reproducible fields (wall-clock time is informational), and every emitted
// artifact carries it so outputs can be traced back to their inputs.
struct RunManifest {
    std::string command;
    nlohmann::json spec;
    nlohmann::json parameters;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;
    nlohmann::json tolerances;
    std::vector<std::string> outputs;
    double wall_clock = 0;  // seconds

    nlohmann::json to_json() const;
    std::string hash() const;
};

}  // namespace poiskern
