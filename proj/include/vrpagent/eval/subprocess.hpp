#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vrpagent {

struct ProcessLimits {
    double timeout = 0.0;                   // seconds of wall clock; 0 = none
    std::uint64_t memory_bytes = 0;         // RLIMIT_AS for the child; 0 = inherit
    std::size_t max_stdout = 64u << 20;     // child is killed when exceeded
    std::size_t max_stderr = 256u << 10;    // excess stderr is dropped, not fatal
};

struct ProcessResult {
    int exit_code = -1;     // valid when exited normally
    int signal = 0;         // terminating signal, 0 if none
    bool timed_out = false;
    bool output_overflow = false;
    std::string out;
    std::string err;
    double elapsed = 0.0;

    bool ok() const { return !timed_out && !output_overflow && signal == 0 && exit_code == 0; }
    std::string describe() const;
};

class SpawnError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Runs argv[0] (path, not searched) in its own process group with stdin from
 * /dev/null, collecting stdout and stderr. On timeout or stdout overflow the
 * whole group receives SIGKILL. Safe to call from several threads.
 */
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessLimits& limits,
                          const std::optional<std::filesystem::path>& cwd = std::nullopt);

} // namespace vrpagent
