#pragma once

#include "vrpagent/instances/generator.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vrpagent {

struct SeedRange {
    std::string split;
    std::uint64_t first = 0;
    std::uint64_t count = 0;
};

struct SplitSizes {
    std::uint64_t train = 64;
    std::uint64_t validation = 16;
};

/// Offset between the first train seed and the first validation seed.
inline constexpr std::uint64_t kValidationSeedOffset = 1ULL << 32;

/// Train seeds are [master, master + train); validation seeds start at
/// master + kValidationSeedOffset. Throws std::invalid_argument on overlap.
std::vector<SeedRange> split_seed_ranges(std::uint64_t master_seed, const SplitSizes& sizes);

/// Throws std::invalid_argument if any two ranges intersect.
void check_disjoint(const std::vector<SeedRange>& ranges);

struct ManifestEntry {
    std::string id;
    std::uint64_t seed = 0;
    std::filesystem::path path;  // relative to the manifest directory
    std::string sha256;
};

struct SplitManifest {
    std::uint64_t master_seed = 0;
    GenParams params;
    std::vector<ManifestEntry> train;
    std::vector<ManifestEntry> validation;
    std::filesystem::path root;  // directory holding manifest.json; not serialized

    std::filesystem::path resolve(const ManifestEntry& e) const { return root / e.path; }
    const std::vector<ManifestEntry>& split(const std::string& name) const;
};

/// Generates the instances of both splits under `out_dir` and writes
/// out_dir/manifest.json. The manifest content depends only on the inputs.
SplitManifest make_splits(std::uint64_t master_seed, const SplitSizes& sizes, const GenParams& params,
                          const std::filesystem::path& out_dir);

/// Reads a manifest and verifies the checksum of every listed file.
SplitManifest load_manifest(const std::filesystem::path& manifest_path);
void save_manifest(const SplitManifest& manifest, const std::filesystem::path& manifest_path);

nlohmann::json to_json(const GenParams& params);
GenParams gen_params_from_json(const nlohmann::json& j);

} // namespace vrpagent
