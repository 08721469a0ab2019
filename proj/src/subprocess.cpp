#include "envalign/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>

namespace envalign {

SubprocessResult run_command(const std::vector<std::string>& argv, const std::string& stdin_data,
                             double timeout_seconds,
                             const std::optional<std::filesystem::path>& cwd) {
  SubprocessResult result;
  if (argv.empty()) {
    result.exit_code = 127;
    return result;
  }
  std::vector<std::string> argv_copy = argv;
  std::vector<char*> cargv;
  for (auto& s : argv_copy) cargv.push_back(s.data());
  cargv.push_back(nullptr);

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
    result.exit_code = 127;
    return result;
  }

  pid_t pid = fork();
  if (pid < 0) {
    result.exit_code = 127;
    return result;
  }
  if (pid == 0) {
    setpgid(0, 0);
    if (cwd && chdir(cwd->c_str()) != 0) _exit(126);
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) {
      close(fd);
    }
    execvp(cargv[0], cargv.data());
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);
  fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
  fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
  fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);
  signal(SIGPIPE, SIG_IGN);

  auto start = std::chrono::steady_clock::now();
  size_t written = 0;
  bool in_open = true, out_open = true, err_open = true;
  bool killed = false;
  char buf[8192];

  while (in_open || out_open || err_open) {
    struct pollfd fds[3];
    nfds_t nfds = 0;
    if (in_open) fds[nfds++] = {in_pipe[1], POLLOUT, 0};
    if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
    if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};

    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    int timeout_ms = static_cast<int>((timeout_seconds - elapsed) * 1000.0) + 1;
    if (timeout_ms < 0) timeout_ms = 0;
    poll(fds, nfds, killed ? 200 : timeout_ms);

    for (nfds_t i = 0; i < nfds; ++i) {
      if (fds[i].fd == in_pipe[1] && (fds[i].revents & (POLLOUT | POLLERR))) {
        if (fds[i].revents & POLLERR) {
          close(in_pipe[1]);
          in_open = false;
          continue;
        }
        ssize_t n = write(in_pipe[1], stdin_data.data() + written, stdin_data.size() - written);
        if (n > 0) written += n;
        if (written >= stdin_data.size() || n < 0) {
          close(in_pipe[1]);
          in_open = false;
        }
      } else if (fds[i].revents & (POLLIN | POLLHUP)) {
        bool is_out = fds[i].fd == out_pipe[0];
        ssize_t n;
        while ((n = read(fds[i].fd, buf, sizeof(buf))) > 0) {
          (is_out ? result.stdout_text : result.stderr_text).append(buf, n);
        }
        if (n == 0) {
          close(fds[i].fd);
          if (is_out) out_open = false;
          else err_open = false;
        }
      }
    }

    elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!killed && elapsed >= timeout_seconds) {
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      killed = true;
      result.timed_out = true;
    }
    if (killed && elapsed >= timeout_seconds + 5.0) {
      if (in_open) close(in_pipe[1]);
      if (out_open) close(out_pipe[0]);
      if (err_open) close(err_pipe[0]);
      in_open = out_open = err_open = false;
    }
  }

  int status = 0;
  waitpid(pid, &status, 0);
  if (!result.timed_out) {
    if (WIFEXITED(status)) {
      result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      result.exit_code = 128 + WTERMSIG(status);
    } else {
      result.exit_code = 1;
    }
  }
  return result;
}

}  // namespace envalign
