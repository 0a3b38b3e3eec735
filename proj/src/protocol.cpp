#include "roadsearch/protocol.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>

namespace roadsearch::harness {

using nlohmann::json;
using search::ErrorKind;

namespace {

ExternalOutcome failure(ErrorKind kind, std::string detail) {
  ExternalOutcome out;
  out.result.verdict = sim::Verdict::kInvalid;
  out.error = kind;
  out.detail = std::move(detail);
  return out;
}

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

/// Owns a file descriptor.
class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_{-1};
};

/// Child process with piped stdin/stdout; killed and reaped on destruction.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command) {
    int in_pipe[2];
    int out_pipe[2];
    if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw std::runtime_error(std::strerror(errno));
    if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
      throw std::runtime_error(std::strerror(errno));
    }
    Fd in_r(in_pipe[0]), in_w(in_pipe[1]), out_r(out_pipe[0]), out_w(out_pipe[1]);

    pid_ = ::fork();
    if (pid_ < 0) throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      ::dup2(in_r.get(), STDIN_FILENO);
      ::dup2(out_w.get(), STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    stdin_ = std::move(in_w);
    stdout_ = std::move(out_r);
    ::fcntl(stdin_.get(), F_SETFL, O_NONBLOCK);
    ::fcntl(stdout_.get(), F_SETFL, O_NONBLOCK);
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() {
    stdin_.reset();
    stdout_.reset();
    if (pid_ > 0 && !reaped_) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
  }

  Fd& input() { return stdin_; }
  Fd& output() { return stdout_; }

  /// Waits up to `grace` for the child to exit; returns its exit code or -1.
  int wait_exit(std::chrono::milliseconds grace) {
    const auto deadline = std::chrono::steady_clock::now() + grace;
    while (true) {
      int status = 0;
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_) {
        reaped_ = true;
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      }
      if (std::chrono::steady_clock::now() >= deadline) return -1;
      ::usleep(1000);
    }
  }

 private:
  pid_t pid_{-1};
  bool reaped_{false};
  Fd stdin_;
  Fd stdout_;
};

enum class Exchange { kReply, kTimeout, kClosed };

/// Writes the request and collects output up to the first newline.
Exchange exchange(ChildProcess& child, const std::string& request, double timeout_s,
                  std::string& reply) {
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(timeout_s));
  std::size_t written = 0;
  char buf[4096];
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) return Exchange::kTimeout;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);

    pollfd fds[2];
    nfds_t nfds = 0;
    fds[nfds++] = {child.output().get(), POLLIN, 0};
    const bool writing = child.input().get() >= 0;
    if (writing) fds[nfds++] = {child.input().get(), POLLOUT, 0};

    const int ready = ::poll(fds, nfds, static_cast<int>(std::max<long long>(1, left.count())));
    if (ready < 0) {
      if (errno == EINTR) continue;
      return Exchange::kClosed;
    }
    if (writing && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t n = ::write(child.input().get(), request.data() + written, request.size() - written);
      if (n > 0) written += static_cast<std::size_t>(n);
      // A child that stopped reading just gets its stdin closed.
      if (n < 0 && errno != EAGAIN) written = request.size();
      if (written == request.size()) child.input().reset();
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      const ssize_t n = ::read(child.output().get(), buf, sizeof buf);
      if (n > 0) {
        reply.append(buf, static_cast<std::size_t>(n));
        const auto nl = reply.find('\n');
        if (nl != std::string::npos) {
          reply.resize(nl);
          return Exchange::kReply;
        }
      } else if (n == 0) {
        return reply.empty() ? Exchange::kClosed : Exchange::kReply;
      } else if (errno != EAGAIN && errno != EINTR) {
        return Exchange::kClosed;
      }
    }
  }
}

}  // namespace

std::string make_request(const road::RoadSpec& road) {
  json req = {{"type", "evaluate"}, {"road", road}};
  return req.dump() + "\n";
}

ExternalOutcome parse_reply(const std::string& line) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error&) {
    return failure(ErrorKind::kProtocol, "reply is not JSON: '" + line.substr(0, 80) + "'");
  }
  if (!doc.is_object()) return failure(ErrorKind::kProtocol, "reply is not an object");
  if (doc.contains("error")) {
    return failure(ErrorKind::kProtocol, "SUT error: " + doc.at("error").dump());
  }
  if (!doc.contains("verdict") || !doc.at("verdict").is_string()) {
    return failure(ErrorKind::kProtocol, "reply lacks a verdict");
  }
  if (!doc.contains("max_oob") || !doc.at("max_oob").is_number()) {
    return failure(ErrorKind::kProtocol, "reply lacks max_oob");
  }
  ExternalOutcome out;
  try {
    out.result.verdict = sim::verdict_from_string(doc.at("verdict").get<std::string>());
  } catch (const DomainError& e) {
    return failure(ErrorKind::kProtocol, e.what());
  }
  const double oob = doc.at("max_oob").get<double>();
  if (!std::isfinite(oob) || oob < 0.0 || oob > 100.0) {
    return failure(ErrorKind::kProtocol, "max_oob outside [0, 100]");
  }
  out.result.max_oob = oob;
  if (doc.contains("trajectory")) {
    try {
      out.result.trajectory = doc.at("trajectory").get<std::vector<sim::VehicleState>>();
    } catch (const std::exception&) {
      return failure(ErrorKind::kProtocol, "malformed trajectory");
    }
  }
  out.result.completed = out.result.verdict != sim::Verdict::kInvalid;
  return out;
}

ExternalOutcome external_evaluate(const road::RoadSpec& road, const SutDescriptor& sut) {
  if (sut.command.empty()) return failure(ErrorKind::kSpawn, "empty SUT command");
  ignore_sigpipe();

  std::optional<ChildProcess> child;
  try {
    child.emplace(sut.command);
  } catch (const std::exception& e) {
    return failure(ErrorKind::kSpawn, e.what());
  }

  std::string reply;
  switch (exchange(*child, make_request(road), sut.timeout, reply)) {
    case Exchange::kTimeout:
      return failure(ErrorKind::kTimeout, "no reply within " + std::to_string(sut.timeout) + " s");
    case Exchange::kClosed: {
      const int code = child->wait_exit(std::chrono::milliseconds(500));
      if (code == 126 || code == 127) {
        return failure(ErrorKind::kSpawn, "cannot run '" + sut.command + "' (exit " +
                                              std::to_string(code) + ")");
      }
      return failure(ErrorKind::kProtocol, "SUT closed its output without replying");
    }
    case Exchange::kReply:
      break;
  }
  return parse_reply(reply);
}

ExternalEvaluator::ExternalEvaluator(road::RoadParams road, SutDescriptor sut)
    : search::Evaluator(std::move(road)), sut_(std::move(sut)) {
  if (sut_.command.empty()) throw ConfigError("sut.command", "required for an external SUT");
}

search::Evaluation ExternalEvaluator::evaluate(const search::ControlPointSet& genotype) const {
  return search::evaluate_road(genotype, road_params(), [this](const road::RoadSpec& road) {
    ExternalOutcome o = external_evaluate(road, sut_);
    search::Evaluation e;
    e.verdict = o.result.verdict;
    e.fitness = o.result.max_oob;
    e.error = o.error;
    e.error_detail = o.detail;
    e.result = std::move(o.result);
    return e;
  });
}

json builtin_reply(const json& request, const HarnessConfig& config, bool include_trajectory) {
  try {
    if (!request.is_object() || !request.contains("road")) {
      return json{{"error", "request lacks a road"}};
    }
    const auto road = request.at("road").get<road::RoadSpec>();
    const sim::TestResult r = sim::run_test(road, config.vehicle, config.simulation);
    json reply = {{"verdict", sim::to_string(r.verdict)}, {"max_oob", r.max_oob}};
    if (include_trajectory) reply["trajectory"] = r.trajectory;
    return reply;
  } catch (const std::exception& e) {
    return json{{"error", e.what()}};
  }
}

void serve_builtin(std::istream& in, std::ostream& out, const HarnessConfig& config,
                   bool include_trajectory) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json reply;
    try {
      reply = builtin_reply(json::parse(line), config, include_trajectory);
    } catch (const json::parse_error& e) {
      reply = json{{"error", std::string("malformed request: ") + e.what()}};
    }
    out << reply.dump() << '\n' << std::flush;
  }
}

}  // namespace roadsearch::harness
