#include "sstub/process.hpp"

#include "sstub/errors.hpp"

#include <array>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <map>
#include <csignal>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace sstub {

namespace {

class Pipe {
public:
    Pipe()
    {
        if (::pipe2(fds_.data(), O_CLOEXEC) != 0)
            throw ToolError(std::string("pipe: ") + std::strerror(errno));
    }
    ~Pipe()
    {
        close_read();
        close_write();
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;

    int read_end() const { return fds_[0]; }
    int write_end() const { return fds_[1]; }
    void close_read() { close_fd(fds_[0]); }
    void close_write() { close_fd(fds_[1]); }

private:
    static void close_fd(int& fd)
    {
        if (fd >= 0) {
            ::close(fd);
            fd = -1;
        }
    }

    std::array<int, 2> fds_ { -1, -1 };
};

std::vector<std::string> build_environment(const std::vector<std::pair<std::string, std::string>>& overrides)
{
    std::map<std::string, std::string> merged;
    for (char** e = environ; e && *e; ++e) {
        std::string entry(*e);
        auto eq = entry.find('=');
        if (eq == std::string::npos)
            continue;
        merged[entry.substr(0, eq)] = entry.substr(eq + 1);
    }
    for (const auto& [key, value] : overrides)
        merged[key] = value;

    std::vector<std::string> out;
    out.reserve(merged.size());
    for (const auto& [key, value] : merged)
        out.push_back(key + "=" + value);
    return out;
}

std::vector<char*> as_c_array(std::vector<std::string>& strings)
{
    std::vector<char*> out;
    out.reserve(strings.size() + 1);
    for (auto& s : strings)
        out.push_back(s.data());
    out.push_back(nullptr);
    return out;
}

} // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options)
{
    if (argv.empty())
        throw ToolError("run_process: empty argument list");

    // A child that exits before reading its input must not kill us.
    static const bool sigpipe_ignored = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)sigpipe_ignored;

    Pipe in, out, err;

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in.read_end(), STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out.write_end(), STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err.write_end(), STDERR_FILENO);
    if (!options.cwd.empty())
        posix_spawn_file_actions_addchdir_np(&actions, options.cwd.c_str());

    auto args = argv;
    auto c_args = as_c_array(args);
    std::vector<std::string> env_strings;
    std::vector<char*> c_env;
    char** envp = environ;
    if (!options.env.empty()) {
        env_strings = build_environment(options.env);
        c_env = as_c_array(env_strings);
        envp = c_env.data();
    }

    pid_t pid = 0;
    int rc = posix_spawnp(&pid, c_args[0], &actions, nullptr, c_args.data(), envp);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0)
        throw ToolError("cannot start '" + argv[0] + "': " + std::strerror(rc));

    in.close_read();
    out.close_write();
    err.close_write();

    ProcessResult result;
    std::size_t written = 0;
    if (options.input.empty())
        in.close_write();

    std::array<char, 65536> buffer {};
    bool out_open = true, err_open = true;
    while (out_open || err_open) {
        std::vector<pollfd> fds;
        if (out_open)
            fds.push_back({ out.read_end(), POLLIN, 0 });
        if (err_open)
            fds.push_back({ err.read_end(), POLLIN, 0 });
        bool feeding = in.write_end() >= 0;
        if (feeding)
            fds.push_back({ in.write_end(), POLLOUT, 0 });

        if (::poll(fds.data(), fds.size(), -1) < 0) {
            if (errno == EINTR)
                continue;
            break;
        }
        for (const auto& p : fds) {
            if (p.revents == 0)
                continue;
            if (p.fd == in.write_end()) {
                ssize_t n = ::write(p.fd, options.input.data() + written, options.input.size() - written);
                if (n > 0)
                    written += static_cast<std::size_t>(n);
                if (n < 0 || written == options.input.size())
                    in.close_write();
                continue;
            }
            ssize_t n = ::read(p.fd, buffer.data(), buffer.size());
            if (n < 0 && errno == EINTR)
                continue;
            bool is_out = p.fd == out.read_end();
            if (n <= 0) {
                (is_out ? out_open : err_open) = false;
                continue;
            }
            (is_out ? result.out : result.err).append(buffer.data(), static_cast<std::size_t>(n));
        }
    }
    in.close_write();

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR)
            throw ToolError(std::string("waitpid: ") + std::strerror(errno));
    }
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = 128 + WTERMSIG(status);
    return result;
}

} // namespace sstub
