#include "vrpagent/instances/splits.hpp"

#include "vrpagent/instances/instance_file.hpp"
#include "vrpagent/util/digest.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

namespace vrpagent {

namespace fs = std::filesystem;

void check_disjoint(const std::vector<SeedRange>& ranges) {
    for (std::size_t a = 0; a < ranges.size(); ++a) {
        for (std::size_t b = a + 1; b < ranges.size(); ++b) {
            const auto& x = ranges[a];
            const auto& y = ranges[b];
            if (x.count == 0 || y.count == 0) {
                continue;
            }
            bool apart = x.first + x.count <= y.first || y.first + y.count <= x.first;
            if (!apart) {
                throw std::invalid_argument("seed ranges of splits '" + x.split + "' and '" + y.split + "' overlap");
            }
        }
    }
}

std::vector<SeedRange> split_seed_ranges(std::uint64_t master_seed, const SplitSizes& sizes) {
    std::vector<SeedRange> ranges{{"train", master_seed, sizes.train},
                                  {"validation", master_seed + kValidationSeedOffset, sizes.validation}};
    check_disjoint(ranges);
    return ranges;
}

const std::vector<ManifestEntry>& SplitManifest::split(const std::string& name) const {
    if (name == "train") {
        return train;
    }
    if (name == "validation") {
        return validation;
    }
    throw std::invalid_argument("unknown split '" + name + "'");
}

nlohmann::json to_json(const GenParams& p) {
    return {{"problem", std::string(to_string(p.kind))},
            {"n", p.n},
            {"seed", p.seed},
            {"capacity", p.capacity},
            {"demand_range", {p.demand_lo, p.demand_hi}},
            {"horizon", p.horizon},
            {"tw_width_range", {p.tw_width_lo, p.tw_width_hi}},
            {"service_time", p.service_time},
            {"prize_range", {p.prize_lo, p.prize_hi}}};
}

GenParams gen_params_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known{"problem",  "n",       "seed",           "capacity",     "demand_range",
                                             "horizon",  "tw_width_range", "service_time", "prize_range"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) {
            throw std::invalid_argument("unknown generator key '" + key + "'");
        }
    }
    GenParams p;
    if (j.contains("problem")) {
        p.kind = parse_problem_kind(j.at("problem").get<std::string>());
    }
    p.n = j.value("n", p.n);
    p.seed = j.value("seed", p.seed);
    p.capacity = j.value("capacity", p.capacity);
    if (j.contains("demand_range")) {
        p.demand_lo = j.at("demand_range").at(0).get<int>();
        p.demand_hi = j.at("demand_range").at(1).get<int>();
    }
    p.horizon = j.value("horizon", p.horizon);
    if (j.contains("tw_width_range")) {
        p.tw_width_lo = j.at("tw_width_range").at(0).get<double>();
        p.tw_width_hi = j.at("tw_width_range").at(1).get<double>();
    }
    p.service_time = j.value("service_time", p.service_time);
    if (j.contains("prize_range")) {
        p.prize_lo = j.at("prize_range").at(0).get<double>();
        p.prize_hi = j.at("prize_range").at(1).get<double>();
    }
    p.check();
    return p;
}

namespace {

nlohmann::json entries_to_json(const std::vector<ManifestEntry>& entries) {
    auto arr = nlohmann::json::array();
    for (const auto& e : entries) {
        arr.push_back({{"id", e.id}, {"seed", e.seed}, {"path", e.path.generic_string()}, {"sha256", e.sha256}});
    }
    return arr;
}

std::vector<ManifestEntry> entries_from_json(const nlohmann::json& arr) {
    std::vector<ManifestEntry> out;
    for (const auto& e : arr) {
        out.push_back({e.at("id").get<std::string>(), e.at("seed").get<std::uint64_t>(),
                       fs::path(e.at("path").get<std::string>()), e.at("sha256").get<std::string>()});
    }
    return out;
}

} // namespace

void save_manifest(const SplitManifest& m, const fs::path& manifest_path) {
    nlohmann::json j{{"format", "vrpagent-split-manifest"},
                     {"version", 1},
                     {"master_seed", m.master_seed},
                     {"generator", to_json(m.params)},
                     {"train", entries_to_json(m.train)},
                     {"validation", entries_to_json(m.validation)}};
    if (manifest_path.has_parent_path()) {
        fs::create_directories(manifest_path.parent_path());
    }
    std::ofstream out(manifest_path, std::ios::trunc);
    out << j.dump(2) << '\n';
}

SplitManifest load_manifest(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) {
        throw std::runtime_error("cannot read manifest " + manifest_path.string());
    }
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("format", "") != "vrpagent-split-manifest" || j.value("version", 0) != 1) {
        throw std::runtime_error("not a version 1 split manifest: " + manifest_path.string());
    }
    SplitManifest m;
    m.root = manifest_path.parent_path();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.params = gen_params_from_json(j.at("generator"));
    m.train = entries_from_json(j.at("train"));
    m.validation = entries_from_json(j.value("validation", nlohmann::json::array()));
    for (const auto* split : {&m.train, &m.validation}) {
        for (const auto& e : *split) {
            if (sha256_file(m.resolve(e)) != e.sha256) {
                throw std::runtime_error("checksum mismatch for " + m.resolve(e).string());
            }
        }
    }
    return m;
}

SplitManifest make_splits(std::uint64_t master_seed, const SplitSizes& sizes, const GenParams& params,
                          const fs::path& out_dir) {
    auto ranges = split_seed_ranges(master_seed, sizes);
    SplitManifest m;
    m.master_seed = master_seed;
    m.params = params;
    m.root = out_dir;
    for (const auto& range : ranges) {
        auto& entries = range.split == "train" ? m.train : m.validation;
        for (std::uint64_t i = 0; i < range.count; ++i) {
            GenParams p = params;
            p.seed = range.first + i;
            Instance inst = generate(p);
            char id[64];
            std::snprintf(id, sizeof id, "%s-%04llu", range.split.c_str(), static_cast<unsigned long long>(i));
            fs::path rel = fs::path(range.split) / (std::string(id) + ".vrp");
            std::string text = serialize_instance(inst);
            fs::create_directories((out_dir / rel).parent_path());
            std::ofstream(out_dir / rel, std::ios::binary | std::ios::trunc) << text;
            entries.push_back({id, p.seed, rel, sha256_hex(text)});
        }
    }
    m.params.seed = 0;
    save_manifest(m, out_dir / "manifest.json");
    return m;
}

} // namespace vrpagent
