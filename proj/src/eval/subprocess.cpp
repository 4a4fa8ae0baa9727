#include "vrpagent/eval/subprocess.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

namespace vrpagent {

std::string ProcessResult::describe() const {
    if (timed_out) {
        return "timed out after " + std::to_string(elapsed) + " s";
    }
    if (output_overflow) {
        return "output limit exceeded";
    }
    if (signal != 0) {
        return std::string("killed by signal ") + strsignal(signal);
    }
    return "exit code " + std::to_string(exit_code);
}

namespace {

struct Fd {
    int fd = -1;
    ~Fd() { reset(); }
    void reset() {
        if (fd >= 0) {
            ::close(fd);
            fd = -1;
        }
    }
};

} // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessLimits& limits,
                          const std::optional<std::filesystem::path>& cwd) {
    if (argv.empty()) {
        throw SpawnError("empty argv");
    }
    // Everything the child needs is prepared before fork.
    std::vector<char*> cargv;
    for (const auto& a : argv) {
        cargv.push_back(const_cast<char*>(a.c_str()));
    }
    cargv.push_back(nullptr);
    std::string cwd_str = cwd ? cwd->string() : std::string();

    int out_pipe[2];
    int err_pipe[2];
    if (pipe2(out_pipe, O_CLOEXEC) != 0) {
        throw SpawnError(std::string("pipe: ") + std::strerror(errno));
    }
    Fd out_r{out_pipe[0]}, out_w{out_pipe[1]};
    if (pipe2(err_pipe, O_CLOEXEC) != 0) {
        throw SpawnError(std::string("pipe: ") + std::strerror(errno));
    }
    Fd err_r{err_pipe[0]}, err_w{err_pipe[1]};
    Fd devnull{::open("/dev/null", O_RDONLY | O_CLOEXEC)};

    auto started = std::chrono::steady_clock::now();
    pid_t pid = fork();
    if (pid < 0) {
        throw SpawnError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        setpgid(0, 0);
        if (limits.memory_bytes > 0) {
            rlimit rl{limits.memory_bytes, limits.memory_bytes};
            setrlimit(RLIMIT_AS, &rl);
        }
        if (!cwd_str.empty() && chdir(cwd_str.c_str()) != 0) {
            _exit(126);
        }
        dup2(devnull.fd, STDIN_FILENO);
        dup2(out_w.fd, STDOUT_FILENO);
        dup2(err_w.fd, STDERR_FILENO);
        execv(cargv[0], cargv.data());
        _exit(127);
    }
    setpgid(pid, pid);  // also done in the child; whichever runs first wins
    out_w.reset();
    err_w.reset();

    ProcessResult result;
    auto deadline = started + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double>(limits.timeout));
    bool killed = false;
    auto kill_group = [&] {
        if (!killed) {
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            killed = true;
        }
    };
    char buf[65536];
    while (out_r.fd >= 0 || err_r.fd >= 0) {
        pollfd fds[2];
        int nfds = 0;
        if (out_r.fd >= 0) {
            fds[nfds++] = {out_r.fd, POLLIN, 0};
        }
        if (err_r.fd >= 0) {
            fds[nfds++] = {err_r.fd, POLLIN, 0};
        }
        int wait_ms = -1;
        if (limits.timeout > 0.0 && !killed) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            wait_ms = static_cast<int>(std::max<long long>(0, left.count()));
        }
        int rc = poll(fds, static_cast<nfds_t>(nfds), wait_ms);
        if (rc < 0 && errno != EINTR) {
            kill_group();
            break;
        }
        if (rc == 0) {
            result.timed_out = true;
            kill_group();
            continue;
        }
        for (int i = 0; i < nfds; ++i) {
            if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) {
                continue;
            }
            bool is_out = out_r.fd >= 0 && fds[i].fd == out_r.fd;
            ssize_t got = ::read(fds[i].fd, buf, sizeof buf);
            if (got <= 0) {
                if (got < 0 && errno == EINTR) {
                    continue;
                }
                (is_out ? out_r : err_r).reset();
                continue;
            }
            if (is_out) {
                if (result.out.size() + static_cast<std::size_t>(got) > limits.max_stdout) {
                    result.output_overflow = true;
                    kill_group();
                } else {
                    result.out.append(buf, static_cast<std::size_t>(got));
                }
            } else if (result.err.size() < limits.max_stderr) {
                result.err.append(buf, std::min(static_cast<std::size_t>(got), limits.max_stderr - result.err.size()));
            }
        }
    }
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    // Reap stragglers the candidate may have forked into its group.
    ::kill(-pid, SIGKILL);
    result.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.signal = WTERMSIG(status);
    }
    return result;
}

} // namespace vrpagent
