#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "chmc/chml/formula.hpp"
#include "chmc/semantics/state.hpp"

namespace chmc {

// Finite domains for brute-force evaluation. Addresses and procedures come
// from the System; ints covers quantified ints, int arguments and
// transferred values.
struct FiniteDomains
{
  std::vector<std::int64_t> ints;
  std::vector<std::int64_t> deltas = { 0 };
  std::int64_t user_balance = 10;
  std::uint64_t eval_limit = 200'000'000;
  std::size_t node_limit = 5'000'000;
};

// [lo, hi] plus every literal k (and k-1, k+1) from the contracts and the
// given formulas. Block advances {0, 1} when a block number is observable.
FiniteDomains make_domains(const System & sys, const std::vector<const Formula *> & formulas,
                           std::int64_t lo = 0, std::int64_t hi = 10);

class DomainExhausted : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

struct SeqNode
{
  FlaggedState state;
  std::shared_ptr<const SeqNode> tail;
};
using StateSeq = std::shared_ptr<const SeqNode>;

StateSeq seq_singleton(FlaggedState s);
StateSeq seq_push(const StateSeq & seq, FlaggedState s);

bool eval_formula(const System & sys, const StateSeq & seq, const TypedFormula & f,
                  const FiniteDomains & dom);

enum class OracleStatus
{
  Holds,
  Fails,
  Inconclusive
};

const char * oracle_status_name(OracleStatus s);

struct OracleVerdict
{
  OracleStatus status = OracleStatus::Holds;
  std::vector<Transaction> witness;  // shortest violating prefix when Fails
  std::size_t states = 0;
  std::string reason;
};

// Breadth-first exploration of every flagged state reachable within `depth`
// transactions. Dedup is on flagged states.
OracleVerdict check_reachable(const System & sys, const TypedFormula & f, int depth,
                              const FiniteDomains & dom);

// All flagged states reachable within `depth` steps (deduplicated, BFS
// order, initial state first).
std::vector<FlaggedState> reachable_states(const System & sys, int depth,
                                           const FiniteDomains & dom);

// Every candidate transaction the oracle enumerates from a state. Invalid
// ones are pruned except for a single representative.
std::vector<Transaction> enumerate_transactions(const System & sys, const ChainState & s,
                                                const FiniteDomains & dom);

}  // namespace chmc
