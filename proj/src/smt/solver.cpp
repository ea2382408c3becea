#include "chmc/smt/solver.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <sstream>

extern char ** environ;

namespace chmc::smt {

namespace {
const char * const kOptions = "(set-option :print-success false)\n(set-option :produce-models true)\n";
}

const char * check_result_name(CheckResult r)
{
  switch (r) {
    case CheckResult::Sat: return "sat";
    case CheckResult::Unsat: return "unsat";
    case CheckResult::Unknown: return "unknown";
    case CheckResult::Timeout: return "timeout";
    case CheckResult::Cancelled: return "cancelled";
  }
  return "?";
}

std::string default_solver_command()
{
  const char * env = std::getenv("CHMC_SOLVER");
  if (env && *env) return env;
  return "z3 -in";
}

SolverSession::SolverSession(const std::string & command, const std::atomic<bool> * cancel) : cancel_(cancel)
{
  std::vector<std::string> argv_s;
  std::istringstream in(command);
  for (std::string w; in >> w;) argv_s.push_back(w);
  if (argv_s.empty()) throw SolverError("empty solver command");
  std::vector<char *> argv;
  for (auto & a : argv_s) argv.push_back(a.data());
  argv.push_back(nullptr);

  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) throw SolverError("pipe failed");
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_adddup2(&fa, in_pipe[0], 0);
  posix_spawn_file_actions_adddup2(&fa, out_pipe[1], 1);
  posix_spawn_file_actions_adddup2(&fa, out_pipe[1], 2);
  posix_spawn_file_actions_addclose(&fa, in_pipe[1]);
  posix_spawn_file_actions_addclose(&fa, out_pipe[0]);
  pid_t pid;
  int rc = posix_spawnp(&pid, argv[0], &fa, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&fa);
  close(in_pipe[0]);
  close(out_pipe[1]);
  if (rc != 0) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    throw SolverError("cannot launch solver '" + command + "': " + std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  signal(SIGPIPE, SIG_IGN);
  send(kOptions);
}

SolverSession::~SolverSession()
{
  if (pid_ > 0) {
    std::string bye = "(exit)\n";
    [[maybe_unused]] auto n = ::write(to_child_, bye.data(), bye.size());
  }
  kill();
}

void SolverSession::kill()
{
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    ::kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
  }
  pid_ = -1;
}

void SolverSession::write_all(const std::string & s)
{
  if (pid_ <= 0) throw SolverError("solver process is not running");
  std::size_t off = 0;
  while (off < s.size()) {
    ssize_t n = ::write(to_child_, s.data() + off, s.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SolverError("solver process closed its input");
    }
    off += static_cast<std::size_t>(n);
  }
}

void SolverSession::send(const std::string & text)
{
  if (text.empty()) return;
  write_all(text.back() == '\n' ? text : text + "\n");
}

void SolverSession::push()
{
  send("(push 1)");
  ++depth_;
}

void SolverSession::reset()
{
  send(std::string("(reset)\n") + kOptions);
  depth_ = 0;
}

void SolverSession::pop()
{
  if (depth_ == 0) throw SolverError("unbalanced pop");
  send("(pop 1)");
  --depth_;
}

// One complete response: an atom line or a balanced s-expression.
std::optional<std::string> SolverSession::read_response(std::chrono::steady_clock::time_point deadline)
{
  for (;;) {
    // try to cut a response from the buffer
    std::size_t i = 0;
    while (i < buffer_.size() && std::isspace(static_cast<unsigned char>(buffer_[i]))) ++i;
    if (i < buffer_.size()) {
      if (buffer_[i] == '(') {
        int depth = 0;
        bool in_str = false;
        for (std::size_t j = i; j < buffer_.size(); ++j) {
          char c = buffer_[j];
          if (c == '"') in_str = !in_str;
          if (in_str) continue;
          if (c == '(') ++depth;
          if (c == ')' && --depth == 0) {
            std::string r = buffer_.substr(i, j + 1 - i);
            buffer_.erase(0, j + 1);
            return r;
          }
        }
      } else {
        auto nl = buffer_.find('\n', i);
        if (nl != std::string::npos) {
          std::string r = buffer_.substr(i, nl - i);
          buffer_.erase(0, nl + 1);
          while (!r.empty() && std::isspace(static_cast<unsigned char>(r.back()))) r.pop_back();
          return r;
        }
      }
    }
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) return std::nullopt;
    if (cancel_ && cancel_->load()) return std::nullopt;
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    pollfd p{ from_child_, POLLIN, 0 };
    int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(left, 50)));
    if (rc < 0 && errno != EINTR) throw SolverError("poll failed");
    if (rc > 0) {
      char buf[65536];
      ssize_t n = ::read(from_child_, buf, sizeof buf);
      if (n <= 0) throw SolverError("solver process exited unexpectedly" + (buffer_.empty() ? "" : ": " + buffer_));
      buffer_.append(buf, static_cast<std::size_t>(n));
    }
  }
}

CheckResult SolverSession::check_sat(std::chrono::steady_clock::time_point deadline)
{
  auto t0 = std::chrono::steady_clock::now();
  send("(check-sat)");
  auto r = read_response(deadline);
  solver_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!r) {
    bool cancelled = cancel_ && cancel_->load();
    kill();
    return cancelled ? CheckResult::Cancelled : CheckResult::Timeout;
  }
  if (*r == "sat") return CheckResult::Sat;
  if (*r == "unsat") return CheckResult::Unsat;
  if (*r == "unknown") return CheckResult::Unknown;
  throw SolverError("unexpected solver response: " + *r);
}

std::vector<std::int64_t> SolverSession::get_values(const std::vector<std::string> & terms)
{
  if (terms.empty()) return {};
  std::string q = "(get-value (";
  for (std::size_t i = 0; i < terms.size(); ++i) q += (i ? " " : "") + terms[i];
  q += "))";
  send(q);
  auto r = read_response(std::chrono::steady_clock::now() + std::chrono::seconds(60));
  if (!r) throw SolverError("no answer to get-value");
  if (r->rfind("(error", 0) == 0) throw SolverError("solver error: " + *r);
  return parse_values(*r, terms.size());
}

namespace {

struct Sexp
{
  std::string atom;
  std::vector<Sexp> kids;
  bool list = false;
};

Sexp parse_sexp(const std::string & s, std::size_t & i)
{
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  if (i >= s.size()) throw SolverError("truncated solver response");
  Sexp e;
  if (s[i] == '(') {
    e.list = true;
    ++i;
    for (;;) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i >= s.size()) throw SolverError("truncated solver response");
      if (s[i] == ')') {
        ++i;
        return e;
      }
      e.kids.push_back(parse_sexp(s, i));
    }
  }
  if (s[i] == ')') throw SolverError("unbalanced solver response");
  std::size_t j = i;
  if (s[i] == '|') {
    j = s.find('|', i + 1);
    if (j == std::string::npos) throw SolverError("truncated solver response");
    ++j;
  } else {
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')') ++j;
  }
  e.atom = s.substr(i, j - i);
  i = j;
  return e;
}

std::int64_t value_of(const Sexp & e)
{
  if (!e.list) {
    if (e.atom == "true") return 1;
    if (e.atom == "false") return 0;
    try {
      std::size_t pos = 0;
      std::int64_t v = std::stoll(e.atom, &pos);
      if (pos == e.atom.size()) return v;
    } catch (const std::exception &) {
    }
    throw SolverError("cannot read model value '" + e.atom + "'");
  }
  if (e.kids.size() == 2 && !e.kids[0].list && e.kids[0].atom == "-") return -value_of(e.kids[1]);
  throw SolverError("cannot read model value");
}

}  // namespace

std::vector<std::int64_t> parse_values(const std::string & response, std::size_t expected)
{
  std::size_t i = 0;
  Sexp e = parse_sexp(response, i);
  if (!e.list || e.kids.size() != expected) throw SolverError("malformed get-value response: " + response);
  std::vector<std::int64_t> out;
  for (const auto & pair : e.kids) {
    if (!pair.list || pair.kids.size() != 2) throw SolverError("malformed get-value response: " + response);
    out.push_back(value_of(pair.kids[1]));
  }
  return out;
}

}  // namespace chmc::smt
