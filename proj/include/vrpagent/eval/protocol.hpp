#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vrpagent {

/// Version of the shim headers candidates are compiled against.
inline constexpr int kShimVersion = 1;

struct ChildTask {
    std::string id;
    std::filesystem::path path;
    std::uint64_t seed = 0;
};

/// File handed to a candidate runner as argv[1].
struct ChildManifest {
    std::vector<ChildTask> tasks;
    double time_limit = 20.0;
    std::optional<std::int64_t> max_iterations;
};

nlohmann::json to_json(const ChildManifest& m);
ChildManifest child_manifest_from_json(const nlohmann::json& j);

/**
 * One line of runner output. Result lines:
 *   {"type":"result","id":..,"objective":..,"feasible":..,"iterations":..,"tours":[[..],..]}
 * Error lines:
 *   {"type":"error","id":..,"kind":"operator"|"setup","message":..}
 */
struct ChildRecord {
    std::string type;
    std::string id;
    double objective = 0.0;
    bool feasible = false;
    std::int64_t iterations = 0;
    std::vector<std::vector<int>> tours;
    std::string kind;
    std::string message;
};

std::string format_record(const ChildRecord& r);
/// Throws std::invalid_argument on a malformed line.
ChildRecord parse_record(const std::string& line);

} // namespace vrpagent
