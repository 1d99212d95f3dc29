#include "metatune/subprocess.hpp"

#include "metatune/error.hpp"

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace metatune {

namespace {

constexpr std::size_t kMaxCapture = 4u << 20;

class Fd {
public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd &) = delete;
  Fd &operator=(const Fd &) = delete;
  Fd(Fd &&o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  ~Fd() { reset(); }

  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0)
      ::close(fd_);
    fd_ = -1;
  }

private:
  int fd_ = -1;
};

std::pair<Fd, Fd> make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0)
    throw SpawnFailure(std::string("pipe: ") + std::strerror(errno));
  return {Fd(fds[0]), Fd(fds[1])};
}

int decode_status(int status) {
  if (WIFEXITED(status))
    return WEXITSTATUS(status);
  if (WIFSIGNALED(status))
    return 128 + WTERMSIG(status);
  return -1;
}

} // namespace

ProcessResult run_process(const std::vector<std::string> &argv, double timeout_s) {
  if (argv.empty())
    throw SpawnFailure("empty command line");

  std::vector<char *> cargv;
  for (const auto &a : argv)
    cargv.push_back(const_cast<char *>(a.c_str()));
  cargv.push_back(nullptr);

  auto [out_r, out_w] = make_pipe();
  auto [err_r, err_w] = make_pipe();

  using Clock = std::chrono::steady_clock;
  const auto started = Clock::now();
  const auto deadline = started + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(timeout_s));

  const pid_t pid = ::fork();
  if (pid < 0)
    throw SpawnFailure(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(out_w.get(), STDOUT_FILENO);
    ::dup2(out_w.get(), STDERR_FILENO);
    ::execvp(cargv[0], cargv.data());
    const int code = errno;
    [[maybe_unused]] auto n = ::write(err_w.get(), &code, sizeof code);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  out_w.reset();
  err_w.reset();

  int exec_errno = 0;
  ssize_t got;
  do {
    got = ::read(err_r.get(), &exec_errno, sizeof exec_errno);
  } while (got < 0 && errno == EINTR);
  if (got == static_cast<ssize_t>(sizeof exec_errno)) {
    int status;
    ::waitpid(pid, &status, 0);
    throw SpawnFailure("cannot execute '" + argv[0] + "': " + std::strerror(exec_errno));
  }

  ProcessResult result;
  bool eof = false;
  bool reaped = false;
  int status = 0;
  char buf[8192];

  while (!reaped) {
    const auto now = Clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      break;
    }
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
    if (!eof) {
      pollfd p{out_r.get(), POLLIN, 0};
      const int ready = ::poll(&p, 1, static_cast<int>(std::min<long long>(remaining, 50)));
      if (ready > 0) {
        const ssize_t n = ::read(out_r.get(), buf, sizeof buf);
        if (n > 0) {
          if (result.output.size() < kMaxCapture)
            result.output.append(buf, static_cast<std::size_t>(n));
        } else if (n == 0) {
          eof = true;
        }
      }
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(std::min<long long>(remaining, 5)));
    }
    const pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid)
      reaped = true;
  }

  if (result.timed_out) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
  } else {
    // Leftover descendants must not outlive the run.
    ::kill(-pid, SIGKILL);
  }

  // Collect whatever is still buffered in the pipe.
  pollfd p{out_r.get(), POLLIN, 0};
  while (!eof && ::poll(&p, 1, 0) > 0) {
    const ssize_t n = ::read(out_r.get(), buf, sizeof buf);
    if (n <= 0)
      break;
    if (result.output.size() < kMaxCapture)
      result.output.append(buf, static_cast<std::size_t>(n));
  }

  result.exit_status = decode_status(status);
  result.wall_time_s = std::chrono::duration<double>(Clock::now() - started).count();
  return result;
}

} // namespace metatune
