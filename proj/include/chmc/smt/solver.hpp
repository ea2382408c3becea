#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chmc::smt {

class SolverError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

enum class CheckResult
{
  Sat,
  Unsat,
  Unknown,
  Timeout,
  Cancelled
};

const char * check_result_name(CheckResult r);

// Default solver command: $CHMC_SOLVER, else "z3 -in".
std::string default_solver_command();

// An external SMT-LIB2 solver process driven over its standard streams.
class SolverSession
{
 public:
  SolverSession(const std::string & command, const std::atomic<bool> * cancel = nullptr);
  ~SolverSession();
  SolverSession(const SolverSession &) = delete;
  SolverSession & operator=(const SolverSession &) = delete;

  // Sends commands that produce no output.
  void send(const std::string & text);
  void push();
  void pop();
  // clears all assertions and definitions; options are restored
  void reset();
  int depth() const { return depth_; }

  // deadline bounds the wall-clock wait; the process is killed on expiry
  CheckResult check_sat(std::chrono::steady_clock::time_point deadline);

  // (get-value ...) on the given terms; values are ints (bools as 0/1).
  std::vector<std::int64_t> get_values(const std::vector<std::string> & terms);

  double solver_seconds() const { return solver_seconds_; }
  bool alive() const { return pid_ > 0; }
  void kill();

 private:
  std::optional<std::string> read_response(std::chrono::steady_clock::time_point deadline);
  void write_all(const std::string & s);

  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  int depth_ = 0;
  double solver_seconds_ = 0;
  const std::atomic<bool> * cancel_;
};

// Parses one value from (get-value) output: 12, (- 3), true, false.
std::vector<std::int64_t> parse_values(const std::string & response, std::size_t expected);

}  // namespace chmc::smt
