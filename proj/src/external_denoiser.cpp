#include "ptycho/external_denoiser.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "ptycho/image_io.hpp"

namespace ptycho {
namespace {

using Kind = ExternalDenoiserError::Kind;

void ignore_sigpipe_once() {
  // A child that exits before consuming its stdin must not kill the host.
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

struct ChildProcess {
  pid_t pid = -1;
  int stdin_fd = -1;
  int stdout_fd = -1;

  ~ChildProcess() {
    if (stdin_fd >= 0) ::close(stdin_fd);
    if (stdout_fd >= 0) ::close(stdout_fd);
    if (pid > 0) {
      ::kill(pid, SIGKILL);
      int status = 0;
      ::waitpid(pid, &status, 0);
    }
  }
};

ChildProcess spawn(const std::vector<std::string>& command) {
  if (command.empty())
    throw ExternalDenoiserError(Kind::spawn, "external denoiser: empty command");
  ignore_sigpipe_once();

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0)
    throw ExternalDenoiserError(Kind::spawn, "external denoiser: pipe() failed");
  ::fcntl(err_pipe[1], F_SETFD, FD_CLOEXEC);

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]})
      ::close(fd);
    throw ExternalDenoiserError(Kind::spawn, "external denoiser: fork() failed");
  }

  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0]}) ::close(fd);
    std::vector<char*> argv;
    argv.reserve(command.size() + 1);
    for (const auto& arg : command) argv.push_back(const_cast<char*>(arg.c_str()));
    argv.push_back(nullptr);
    ::execvp(argv[0], argv.data());
    const int err = errno;
    ssize_t ignored = ::write(err_pipe[1], &err, sizeof(err));
    (void)ignored;
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  // The exec-error pipe reports ENOENT and friends synchronously.
  int exec_errno = 0;
  const ssize_t n = ::read(err_pipe[0], &exec_errno, sizeof(exec_errno));
  ::close(err_pipe[0]);
  if (n > 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    int status = 0;
    ::waitpid(pid, &status, 0);
    throw ExternalDenoiserError(Kind::spawn, std::string("external denoiser: cannot execute '") +
                                                 command[0] + "': " + std::strerror(exec_errno));
  }

  ChildProcess child;
  child.pid = pid;
  child.stdin_fd = in_pipe[1];
  child.stdout_fd = out_pipe[0];
  set_nonblocking(child.stdin_fd);
  set_nonblocking(child.stdout_fd);
  return child;
}

std::vector<std::uint8_t> exchange(const std::vector<std::string>& command,
                                   const std::vector<std::uint8_t>& request,
                                   double timeout_seconds) {
  ChildProcess child = spawn(command);

  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
  std::size_t written = 0;
  std::vector<std::uint8_t> response;
  bool stdout_open = true;

  // Request and response are multiplexed; either side can exceed the pipe
  // buffer for desk-scale images.
  while (stdout_open || written < request.size()) {
    const auto remaining = deadline - std::chrono::steady_clock::now();
    const int wait_ms = static_cast<int>(
        std::max<long long>(0, std::chrono::duration_cast<std::chrono::milliseconds>(remaining).count()));
    if (wait_ms <= 0) {
      throw ExternalDenoiserError(Kind::timeout, "external denoiser: timed out after " +
                                                     std::to_string(timeout_seconds) + " s");
    }

    pollfd fds[2];
    nfds_t nfds = 0;
    int write_slot = -1, read_slot = -1;
    if (written < request.size()) {
      write_slot = static_cast<int>(nfds);
      fds[nfds++] = {child.stdin_fd, POLLOUT, 0};
    }
    if (stdout_open) {
      read_slot = static_cast<int>(nfds);
      fds[nfds++] = {child.stdout_fd, POLLIN, 0};
    }

    const int rc = ::poll(fds, nfds, wait_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw ExternalDenoiserError(Kind::spawn, "external denoiser: poll() failed");
    }
    if (rc == 0) continue;

    if (write_slot >= 0 && (fds[write_slot].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t n =
          ::write(child.stdin_fd, request.data() + written, request.size() - written);
      if (n > 0) {
        written += static_cast<std::size_t>(n);
        if (written == request.size()) {
          ::close(child.stdin_fd);
          child.stdin_fd = -1;
        }
      } else if (n < 0 && errno != EAGAIN && errno != EINTR) {
        // Child closed its stdin early; it may still produce a response.
        ::close(child.stdin_fd);
        child.stdin_fd = -1;
        written = request.size();
      }
    }

    if (read_slot >= 0 && (fds[read_slot].revents & (POLLIN | POLLHUP | POLLERR))) {
      std::uint8_t buf[65536];
      const ssize_t n = ::read(child.stdout_fd, buf, sizeof(buf));
      if (n > 0) {
        response.insert(response.end(), buf, buf + n);
      } else if (n == 0) {
        stdout_open = false;
        ::close(child.stdout_fd);
        child.stdout_fd = -1;
      } else if (errno != EAGAIN && errno != EINTR) {
        stdout_open = false;
        ::close(child.stdout_fd);
        child.stdout_fd = -1;
      }
    }
  }

  int status = 0;
  const pid_t pid = child.pid;
  child.pid = -1;
  // Bounded wait so a child that closed stdout but never exits still times out.
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw ExternalDenoiserError(Kind::spawn, "external denoiser: waitpid() failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      throw ExternalDenoiserError(Kind::timeout, "external denoiser: timed out waiting for exit");
    }
    ::poll(nullptr, 0, 5);
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw ExternalDenoiserError(Kind::process_failure,
                                "external denoiser: process reported failure (status " +
                                    std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) +
                                    ")");
  return response;
}

std::vector<std::uint8_t> build_request(std::uint8_t mode, double strength,
                                        const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> req;
  req.reserve(4 + 1 + 8 + payload.size());
  const char magic[4] = {'D', 'N', 'Z', '1'};
  req.insert(req.end(), magic, magic + 4);
  req.push_back(mode);
  detail::put_f64le(req, strength);
  req.insert(req.end(), payload.begin(), payload.end());
  return req;
}

template <typename ImageT, typename Decode>
ImageT run_request(const ImageT& image, std::uint8_t mode, double strength,
                   const std::vector<std::string>& command, double timeout_seconds,
                   const std::vector<std::uint8_t>& payload, Decode decode) {
  const auto response = exchange(command, build_request(mode, strength, payload), timeout_seconds);
  ImageT out;
  try {
    out = decode(response.data(), response.size());
  } catch (const std::exception& e) {
    throw ExternalDenoiserError(Kind::malformed_response,
                                std::string("external denoiser: malformed response: ") + e.what());
  }
  if (out.rows() != image.rows() || out.cols() != image.cols())
    throw ExternalDenoiserError(Kind::shape_mismatch,
                                "external denoiser: response shape mismatch");
  return out;
}

}  // namespace

ComplexImage external_denoise(const ComplexImage& image, double strength,
                              const std::vector<std::string>& command, double timeout_seconds) {
  return run_request(image, 1, strength, command, timeout_seconds, encode_cimg(image),
                     decode_cimg);
}

RealImage external_denoise(const RealImage& image, double strength,
                           const std::vector<std::string>& command, double timeout_seconds) {
  return run_request(image, 0, strength, command, timeout_seconds, encode_rimg(image),
                     decode_rimg);
}

}  // namespace ptycho
