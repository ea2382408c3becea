#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace chmc::driver {

enum class Engine
{
  All,
  Bmc,
  Kind,
  Oracle
};

Engine parse_engine(const std::string & s);
const char * engine_name(Engine e);

struct TaskConfig
{
  std::string contract_path;
  std::string props_path;
  std::string only_property;  // empty: all
  std::vector<std::string> addresses = { "A", "B", "M" };  // contract names are skipped
  Engine engine = Engine::All;
  int max_depth = 10;
  int max_k = 10;
  int oracle_depth = 2;  // explored depth for the oracle engine
  double timeout = 1000;
  std::string solver;    // empty: $CHMC_SOLVER or "z3 -in"
  std::optional<std::pair<std::int64_t, std::int64_t>> bound_ints;
  std::pair<std::int64_t, std::int64_t> oracle_ints = { 0, 10 };
  std::string emit_dir;
  bool cross_check = true;  // replay counterexamples through the oracle
  std::int64_t user_balance = 10;
};

struct PropertyResult
{
  std::string name;
  std::string verdict;  // valid | invalid | unknown
  int depth = 0;
  std::string engine;
  double seconds = 0;
  double solver_seconds = 0;
  bool bounded = false;
  std::string reason;
  nlohmann::json trace;      // shared trace format; null unless invalid
  std::string oracle_check;  // confirmed | refuted | skipped | "" when not run

  bool operator==(const PropertyResult &) const = default;
};

struct Report
{
  std::string contract;
  std::string properties;
  std::vector<PropertyResult> results;
  std::vector<std::string> errors;

  bool operator==(const Report &) const = default;
};

nlohmann::json report_to_json(const Report & r);
Report report_from_json(const nlohmann::json & j);

// Frontend errors are collected before any solving and end the run.
Report verify(const TaskConfig & cfg);

// 0 iff no property is Invalid and there was no error; 1 if a property is
// Invalid; 2 on errors.
int exit_code(const Report & r);

void print_report(std::ostream & os, const Report & r);

struct BenchRow
{
  std::string usecase;
  std::string property;
  std::string variant;
  std::string status;
  int depth = 0;
  double seconds = 0;
  std::string expected;
  int expected_depth = -1;  // witness length for invalid labels
  bool match = false;
};

struct BenchResult
{
  std::vector<BenchRow> rows;  // sorted by (usecase, property, variant)
  bool all_match() const;
};

struct BenchOptions
{
  double timeout = 1000;
  int workers = 0;  // 0: hardware concurrency / 2
  std::string solver;
};

// Runs every (use case, variant, property) under corpus_dir against its
// ground_truth.json. A missing ground truth file is an error.
BenchResult bench(const std::string & corpus_dir, const BenchOptions & opt = {});
nlohmann::json bench_to_json(const BenchResult & b);
void print_bench(std::ostream & os, const BenchResult & b);

struct ReplayResult
{
  std::vector<std::string> states;  // formatted, initial state first
  std::vector<bool> reverted;       // per step
  bool property_holds = false;
  std::string property;
};

ReplayResult replay(const std::string & trace_path, const std::string & contract_path, const std::string & props_path,
                    const std::string & property, std::pair<std::int64_t, std::int64_t> ints = { 0, 10 });

std::string read_text(const std::string & path);

}  // namespace chmc::driver
