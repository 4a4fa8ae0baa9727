#include "vrpagent/eval/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace vrpagent {

nlohmann::json to_json(const ChildManifest& m) {
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& t : m.tasks) {
        tasks.push_back({{"id", t.id}, {"path", t.path.string()}, {"seed", t.seed}});
    }
    nlohmann::json j{{"shim_version", kShimVersion}, {"time_limit", m.time_limit}, {"tasks", tasks}};
    if (m.max_iterations) {
        j["max_iterations"] = *m.max_iterations;
    }
    return j;
}

ChildManifest child_manifest_from_json(const nlohmann::json& j) {
    if (j.value("shim_version", 0) != kShimVersion) {
        throw std::invalid_argument("child manifest shim version mismatch");
    }
    ChildManifest m;
    m.time_limit = j.at("time_limit").get<double>();
    if (j.contains("max_iterations")) {
        m.max_iterations = j.at("max_iterations").get<std::int64_t>();
    }
    for (const auto& t : j.at("tasks")) {
        m.tasks.push_back({t.at("id").get<std::string>(), t.at("path").get<std::string>(), t.at("seed").get<std::uint64_t>()});
    }
    return m;
}

std::string format_record(const ChildRecord& r) {
    nlohmann::json j{{"type", r.type}, {"id", r.id}};
    if (r.type == "result") {
        j["objective"] = r.objective;
        j["feasible"] = r.feasible;
        j["iterations"] = r.iterations;
        j["tours"] = r.tours;
    } else {
        j["kind"] = r.kind;
        j["message"] = r.message;
    }
    return j.dump();
}

ChildRecord parse_record(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::invalid_argument("record is not a JSON object");
    }
    ChildRecord r;
    try {
        r.type = j.at("type").get<std::string>();
        r.id = j.at("id").get<std::string>();
        if (r.type == "result") {
            r.objective = j.at("objective").get<double>();
            r.feasible = j.at("feasible").get<bool>();
            r.iterations = j.at("iterations").get<std::int64_t>();
            r.tours = j.at("tours").get<std::vector<std::vector<int>>>();
            if (!std::isfinite(r.objective)) {
                throw std::invalid_argument("objective is not finite");
            }
        } else if (r.type == "error") {
            r.kind = j.value("kind", std::string());
            r.message = j.value("message", std::string());
        } else {
            throw std::invalid_argument("unknown record type '" + r.type + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("bad record: ") + e.what());
    }
    return r;
}

} // namespace vrpagent
