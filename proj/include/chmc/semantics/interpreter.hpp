#pragma once

#include <optional>

#include "chmc/semantics/state.hpp"

namespace chmc {

struct Env
{
  int contract = -1;  // executing contract index
  int self = 0;       // its address id
  int sender = 0;
  std::int64_t value = 0;
  const std::vector<Value> * args = nullptr;
  int call_depth = 0;
};

// nullopt means undefined; the enclosing transaction is then invalid.
std::optional<Value> eval_expr(const System & sys, const Env & env,
                               const ChainState & s, const Expr & e);

// Big-step execution in place. Returns false on failure, in which case the
// state content is unspecified and the caller must roll back.
bool exec_stmt_inplace(const System & sys, const Env & env, ChainState & s,
                       const Stmt & st);

// Pure variant: nullopt is the failed computation.
std::optional<ChainState> exec_stmt(const System & sys, const Env & env,
                                    const ChainState & s, const Stmt & st);

// nullopt means the transaction is invalid (the state is left unchanged).
std::optional<ChainState> apply_tx(const System & sys, const ChainState & s,
                                   const Transaction & tx);

// Left-total flagged step.
FlaggedState step_flagged(const System & sys, const FlaggedState & s,
                          const Transaction & tx);

}  // namespace chmc
