#pragma once

#include "vrpagent/model/instance.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace vrpagent {

/// Raised by the instance reader; line() is 1-based, 0 when not tied to a line.
class InstanceFormatError : public std::runtime_error {
public:
    InstanceFormatError(const std::string& what, int line)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

inline constexpr int kInstanceFormatVersion = 1;

/**
 * Instance file format v1 (text, LF line endings):
 *
 *   vrpagent-instance 1
 *   name <token>
 *   problem CVRP|VRPTW|PCVRP
 *   customers <n>
 *   capacity <C>
 *   fields id x y demand tw_start tw_end service prize
 *   node <id> <x> <y> <demand> <tw_start> <tw_end> <service> <prize>   (n+1 rows, depot first)
 *   checksum sha256 <hex>
 *
 * Reals are written in shortest round-trip form. The checksum covers every
 * byte before the checksum line.
 */
std::string serialize_instance(const Instance& instance);
Instance parse_instance(const std::string& text);

void save_instance(const Instance& instance, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

/// Shortest decimal form that parses back to exactly `value`.
std::string format_real(double value);

} // namespace vrpagent
