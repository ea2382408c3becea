#pragma once

#include <atomic>
#include <string>
#include <vector>

#include "chmc/fol/encoder.hpp"
#include "chmc/semantics/state.hpp"

namespace chmc::smt {

enum class VerdictKind
{
  Valid,
  Invalid,
  Unknown
};

const char * verdict_name(VerdictKind k);

struct Verdict
{
  VerdictKind kind = VerdictKind::Unknown;
  // Valid: induction depth k. Invalid: trace length. Unknown: depth reached.
  int depth = 0;
  std::vector<Transaction> trace;
  std::string reason;  // Unknown: timeout | solver-error | inconclusive
  std::string engine;
  bool bounded = false;
  double seconds = 0;
  double solver_seconds = 0;

  bool conclusive() const { return kind != VerdictKind::Unknown; }
};

struct EngineConfig
{
  int max_depth = 10;
  int max_k = 10;
  double timeout = 1000;  // seconds, per task
  std::string solver;     // empty: default_solver_command()
  std::string emit_dir;   // dump every query here when set
  std::string emit_prefix = "query";
  bool invariants = true;
  // keep one solver context with push/pop; off: reset and replay before
  // every check, which z3 handles far better on quantified queries
  bool incremental = false;
  bool bounded = false;   // label only; the property term carries the expansion
};

// Everything the engines send to the solver, rendered up front so engine
// threads never touch the term manager.
struct PreparedTask
{
  const fol::TransitionSystem * ts = nullptr;
  std::string definitions;  // preamble, system and property definitions
  std::vector<std::string> candidate_defs;
  std::vector<std::string> candidate_names;
  std::size_t num_state_vars = 0;
};

PreparedTask prepare_task(const fol::TransitionSystem & ts, fol::Term prop, bool invariants);

// Candidate invariants over the base state copy, already filtered by the
// initial state.
std::vector<std::pair<std::string, fol::Term>> invariant_candidates(const fol::TransitionSystem & ts);

Verdict bmc(const PreparedTask & task, const EngineConfig & cfg, const std::atomic<bool> * cancel = nullptr);
Verdict kinduction(const PreparedTask & task, const EngineConfig & cfg, const std::atomic<bool> * cancel = nullptr);

// Houdini filter: the largest inductive subset of the candidates (names).
std::vector<std::string> houdini(const PreparedTask & task, const EngineConfig & cfg,
                                 const std::atomic<bool> * cancel = nullptr);

// Runs the selected engines concurrently; the first conclusive verdict
// wins and cancels the rest. Contradicting verdicts throw.
Verdict run_engines(const PreparedTask & task, const EngineConfig & cfg, bool use_bmc, bool use_kind);

}  // namespace chmc::smt
