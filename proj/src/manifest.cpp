#include "poiskern/manifest.hpp"

#include "poiskern/hash.hpp"

namespace poiskern {

namespace {

nlohmann::json reproducible_fields(const RunManifest& m) {
    return nlohmann::json{{"command", m.command},     {"spec", m.spec},
                          {"parameters", m.parameters}, {"seed", m.seed},
                          {"tool_version", m.tool_version}, {"tolerances", m.tolerances},
                          {"outputs", m.outputs}};
}

}  // namespace

std::string RunManifest::hash() const {
    // nlohmann objects keep keys sorted, so dump() is canonical
    return hex_hash(reproducible_fields(*this).dump());
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j = reproducible_fields(*this);
    j["manifest_hash"] = hash();
    j["wall_clock"] = wall_clock;
    return j;
}

}  // namespace poiskern
