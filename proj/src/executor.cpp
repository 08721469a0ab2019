#include "envalign/executor.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cerrno>
#include <cstdlib>
#include <cstring>

extern char** environ;

namespace envalign {

namespace fs = std::filesystem;

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::install: return "install";
    case Phase::launch: return "launch";
    case Phase::test: return "test";
  }
  return "install";
}

const std::optional<CommandTemplate>& ExecConfig::command_for(Phase phase) const {
  switch (phase) {
    case Phase::install: return install_cmd;
    case Phase::launch: return launch_cmd;
    case Phase::test: return test_cmd;
  }
  return install_cmd;
}

namespace {

constexpr double kTimeoutGraceSeconds = 5.0;

std::vector<std::string> expand_argv(const CommandTemplate& cmd, const fs::path& workspace) {
  std::vector<std::string> argv;
  // The child chdirs into the workspace, so {root} must stay valid from there.
  std::string root = fs::absolute(workspace).string();
  for (const auto& arg : cmd.argv) {
    std::string expanded = arg;
    size_t pos;
    while ((pos = expanded.find("{root}")) != std::string::npos) {
      expanded.replace(pos, 6, root);
    }
    argv.push_back(std::move(expanded));
  }
  return argv;
}

std::vector<std::string> sanitized_env(const std::vector<std::string>& allowlist) {
  std::vector<std::string> env;
  for (const auto& name : allowlist) {
    const char* value = std::getenv(name.c_str());
    if (value) env.push_back(name + "=" + value);
  }
  return env;
}

void append_capped(std::string& buffer, bool& truncated, const char* data, size_t len,
                   size_t cap) {
  buffer.append(data, len);
  if (buffer.size() > cap) {
    buffer.erase(0, buffer.size() - cap);  // keep the tail
    truncated = true;
  }
}

}  // namespace

RawExecutionLog run_phase(const fs::path& workspace, Phase phase, const ExecConfig& config) {
  RawExecutionLog log;
  log.phase = phase;
  const auto& cmd = config.command_for(phase);
  if (!cmd || cmd->argv.empty()) {
    log.exit_code = 0;  // disabled phase treated as vacuous pass by callers
    return log;
  }

  auto argv_strings = expand_argv(*cmd, workspace);
  std::vector<char*> argv;
  for (auto& s : argv_strings) argv.push_back(s.data());
  argv.push_back(nullptr);

  auto env_strings = sanitized_env(config.env_allowlist);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);

  int out_pipe[2];
  int err_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
    log.exit_code = 127;
    log.stderr_text = "envalign: pipe creation failed";
    return log;
  }

  auto start = std::chrono::steady_clock::now();
  pid_t pid = fork();
  if (pid < 0) {
    log.exit_code = 127;
    log.stderr_text = "envalign: fork failed";
    return log;
  }
  if (pid == 0) {
    setpgid(0, 0);
    if (chdir(workspace.c_str()) != 0) _exit(126);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    close(err_pipe[1]);
    execvpe(argv[0], argv.data(), envp.data());
    const char* msg = "envalign: command not found: ";
    (void)!write(STDERR_FILENO, msg, std::strlen(msg));
    (void)!write(STDERR_FILENO, argv[0], std::strlen(argv[0]));
    (void)!write(STDERR_FILENO, "\n", 1);
    _exit(127);
  }

  close(out_pipe[1]);
  close(err_pipe[1]);
  fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
  fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

  double deadline = config.timeout_seconds;
  bool killed = false;
  bool out_open = true;
  bool err_open = true;
  char buf[8192];

  while (out_open || err_open) {
    struct pollfd fds[2];
    nfds_t nfds = 0;
    if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
    if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};

    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    int timeout_ms = killed ? 1000 : static_cast<int>((deadline - elapsed) * 1000.0) + 1;
    if (timeout_ms < 0) timeout_ms = 0;
    int rc = poll(fds, nfds, timeout_ms);
    if (rc > 0) {
      for (nfds_t i = 0; i < nfds; ++i) {
        if (!(fds[i].revents & (POLLIN | POLLHUP))) continue;
        bool is_out = fds[i].fd == out_pipe[0];
        ssize_t n;
        while ((n = read(fds[i].fd, buf, sizeof(buf))) > 0) {
          if (is_out) {
            append_capped(log.stdout_text, log.stdout_truncated, buf, n, config.stream_cap);
          } else {
            append_capped(log.stderr_text, log.stderr_truncated, buf, n, config.stream_cap);
          }
        }
        if (n == 0) {
          close(fds[i].fd);
          if (is_out) out_open = false;
          else err_open = false;
        }
      }
    }
    elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!killed && elapsed >= deadline) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      killed = true;
      log.timed_out = true;
    }
    if (killed && elapsed >= deadline + kTimeoutGraceSeconds) {
      if (out_open) close(out_pipe[0]);
      if (err_open) close(err_pipe[0]);
      out_open = err_open = false;
    }
  }

  int status = 0;
  waitpid(pid, &status, 0);
  log.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!log.timed_out) {
    if (WIFEXITED(status)) {
      log.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      log.exit_code = 128 + WTERMSIG(status);
    } else {
      log.exit_code = 1;
    }
  }
  return log;
}

namespace {

bool phase_passed(const RawExecutionLog& log) {
  return !log.timed_out && log.exit_code && *log.exit_code == 0;
}

std::vector<RawExecutionLog> run_phases_in(const fs::path& workspace, const ExecConfig& config) {
  std::vector<RawExecutionLog> logs;
  for (Phase phase : {Phase::install, Phase::launch, Phase::test}) {
    const auto& cmd = config.command_for(phase);
    if (!cmd || cmd->argv.empty()) continue;  // disabled
    logs.push_back(run_phase(workspace, phase, config));
    if (!phase_passed(logs.back())) break;  // downstream phases would be masked
  }
  return logs;
}

}  // namespace

std::vector<RawExecutionLog> run_all(const fs::path& workspace, const ExecConfig& config) {
  if (config.workspace_policy == WorkspacePolicy::in_place) {
    return run_phases_in(workspace, config);
  }
  std::error_code ec;
  fs::path tmp = fs::temp_directory_path() / ("envalign-exec-" + std::to_string(getpid()) + "-" +
                                              std::to_string(rand()));
  fs::create_directories(tmp, ec);
  fs::copy(workspace, tmp, fs::copy_options::recursive, ec);
  auto logs = run_phases_in(tmp, config);
  fs::remove_all(tmp, ec);
  return logs;
}

bool pass_exec(const std::vector<RawExecutionLog>& logs) {
  for (const auto& log : logs) {
    if (!phase_passed(log)) return false;
  }
  return true;  // vacuous when all phases disabled
}

}  // namespace envalign
