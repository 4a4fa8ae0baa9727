#pragma once

#include <string_view>

// Raw prompt and context texts, stored byte for byte.
namespace vrpagent::prompts {

extern const std::string_view kSystem;
extern const std::string_view kSeed;
extern const std::string_view kCrossover;
extern const std::string_view kCrossoverStandard;
extern const std::string_view kMutationAblation;
extern const std::string_view kMutationExtend;
extern const std::string_view kMutationAdjust;
extern const std::string_view kMutationRefactor;
extern const std::string_view kCvrpDescription;
extern const std::string_view kVrptwDescription;
extern const std::string_view kPcvrpDescription;
extern const std::string_view kCvrpHeaders;
extern const std::string_view kVrptwHeaders;
extern const std::string_view kPcvrpHeaders;
extern const std::string_view kSeedCode;

} // namespace vrpagent::prompts
