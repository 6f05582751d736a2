#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <string>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "fabolas/benchmarks.hpp"

namespace fabolas {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

class Pipe {
 public:
  Pipe() {
    if (::pipe(fd_) != 0) throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  int read_end() const { return fd_[0]; }
  int write_end() const { return fd_[1]; }
  void close_read() { close_fd(fd_[0]); }
  void close_write() { close_fd(fd_[1]); }

 private:
  static void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
  int fd_[2] = {-1, -1};
};

// Reaps the child; kills it first if still running.
int reap(pid_t pid, bool kill_first) {
  if (kill_first) ::kill(pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  return status;
}

}  // namespace

ObjectiveResult subprocess_eval(const std::string& command, const std::vector<std::string>& names,
                                const Eigen::VectorXd& x, double s, std::uint64_t seed, double timeout_seconds) {
  if (static_cast<std::size_t>(x.size()) != names.size())
    throw std::invalid_argument("subprocess_eval: one name per configuration entry is required");
  if (!(timeout_seconds > 0.0)) throw std::invalid_argument("subprocess_eval: timeout must be positive");

  nlohmann::json request;
  request["config"] = nlohmann::json::object();
  std::string cmd = command;
  for (std::size_t i = 0; i < names.size(); ++i) {
    request["config"][names[i]] = x[static_cast<Eigen::Index>(i)];
    replace_all(cmd, "{" + names[i] + "}", format_number(x[static_cast<Eigen::Index>(i)]));
  }
  request["subset_fraction"] = s;
  request["seed"] = seed;
  replace_all(cmd, "{subset_fraction}", format_number(s));
  replace_all(cmd, "{seed}", std::to_string(seed));
  const std::string payload = request.dump() + "\n";

  Pipe to_child;
  Pipe from_child;
  const auto t0 = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) throw EvaluationFailure(std::string("fork failed: ") + std::strerror(errno), 0.0);
  if (pid == 0) {
    ::dup2(to_child.read_end(), STDIN_FILENO);
    ::dup2(from_child.write_end(), STDOUT_FILENO);
    ::close(to_child.read_end());
    ::close(to_child.write_end());
    ::close(from_child.read_end());
    ::close(from_child.write_end());
    ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  to_child.close_read();
  from_child.close_write();

  // a child that never reads stdin must not block us
  std::signal(SIGPIPE, SIG_IGN);
  {
    std::size_t written = 0;
    while (written < payload.size()) {
      const ssize_t n = ::write(to_child.write_end(), payload.data() + written, payload.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        break;
      }
      written += static_cast<std::size_t>(n);
    }
    to_child.close_write();
  }

  std::string output;
  char buf[4096];
  bool timed_out = false;
  for (;;) {
    const double remaining = timeout_seconds - seconds_since(t0);
    if (remaining <= 0.0) {
      timed_out = true;
      break;
    }
    pollfd pfd{from_child.read_end(), POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(std::ceil(remaining * 1000.0)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) continue;
    const ssize_t n = ::read(from_child.read_end(), buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n == 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }
  const int status = reap(pid, timed_out);
  const double wall = seconds_since(t0);
  if (timed_out) throw EvaluationFailure("evaluation timed out after " + format_number(timeout_seconds) + " s", wall);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
    throw EvaluationFailure("evaluation process exited abnormally", wall);

  // the reply is the last non-empty line
  std::string line;
  {
    std::size_t end = output.find_last_not_of(" \t\r\n");
    if (end == std::string::npos) throw EvaluationFailure("evaluation process produced no output", wall);
    const std::size_t begin = output.rfind('\n', end);
    line = output.substr(begin == std::string::npos ? 0 : begin + 1, end + 1 - (begin == std::string::npos ? 0 : begin + 1));
  }
  const nlohmann::json reply = nlohmann::json::parse(line, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("loss") || !reply["loss"].is_number())
    throw EvaluationFailure("malformed evaluation reply: " + line, wall);
  ObjectiveResult result;
  result.loss = reply["loss"].get<double>();
  if (!std::isfinite(result.loss)) throw EvaluationFailure("evaluation returned a non-finite loss", wall);
  result.cost = wall;
  if (reply.contains("cost_seconds") && !reply["cost_seconds"].is_null()) {
    if (!reply["cost_seconds"].is_number()) throw EvaluationFailure("malformed cost_seconds: " + line, wall);
    result.cost = reply["cost_seconds"].get<double>();
  }
  if (!(result.cost > 0.0) || !std::isfinite(result.cost))
    throw EvaluationFailure("evaluation reported a non-positive cost", wall);
  return result;
}

}  // namespace fabolas
