#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "chmc/semantics/state.hpp"
#include "chmc/fol/term.hpp"

namespace chmc::fol {

class EncodeError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

struct VarInfo
{
  std::string name;
  Sort sort = Sort::Int;
};

// State variables (SVars): one per balance, construction flag, storage slot,
// plus the block number and the revert flag.
struct StateLayout
{
  std::vector<VarInfo> vars;
  std::vector<int> balance;                  // by address id; -1 for null
  std::vector<int> constructed;              // by contract
  std::vector<std::vector<int>> slot;        // [contract][storage slot]
  int block = -1;
  int reverted = -1;
};

// Transaction variables (TVars).
struct TxLayout
{
  std::vector<VarInfo> vars;
  int sender = -1;
  int value = -1;
  int contract = -1;
  int proc = -1;
  int delta = -1;
  std::vector<std::vector<int>> params;  // [global proc][param]
};

using StateTerms = std::vector<Term>;

// Symbolic transaction: the terms for one step's inputs.
struct TxTerms
{
  Term sender = nullptr;
  Term value = nullptr;
  Term delta = nullptr;
  std::vector<Term> args;
};

struct StmtEnc
{
  StateTerms out;
  Term fail = nullptr;
};

class TransitionSystem
{
 public:
  TransitionSystem(TermManager & tm, const System & sys, std::int64_t user_balance = 10);

  TermManager & tm() const { return tm_; }
  const System & sys() const { return sys_; }
  const StateLayout & state_layout() const { return sl_; }
  const TxLayout & tx_layout() const { return tl_; }

  // Variable copies; suffix "" gives the base copy used by the stored terms.
  StateTerms state_vars(const std::string & suffix) const;
  std::vector<Term> tx_vars(const std::string & suffix) const;
  static std::string copy_name(const std::string & base, const std::string & suffix);

  const StateTerms & s() const { return s_; }
  const std::vector<Term> & t() const { return t_; }
  const StateTerms & nx() const { return nx_; }

  Term init() const { return init_; }
  Term trans() const { return trans_; }
  const StateTerms & next() const { return next_; }
  const StateTerms & next_by_proc(int proc) const { return next_by_proc_[proc]; }
  Term proc_reverted(int proc) const { return next_by_proc_[proc][sl_.reverted]; }

  // Range constraint for a finite-sort variable (true for ints and bools).
  Term domain_of(Term var) const;
  Term state_domain(const StateTerms & s) const;
  Term tx_domain(const std::vector<Term> & t) const;

  // Successor of `state` under procedure `proc` with the given inputs.
  StateTerms step(const StateTerms & state, int proc, const TxTerms & tx) const;
  // Successor of an invalid transaction: unchanged, flagged reverted.
  StateTerms invalid_step(const StateTerms & state) const;
  // Init instantiated on a copy.
  Term init_on(const StateTerms & state) const;
  // Trans instantiated on copies.
  Term trans_on(const StateTerms & pre, const std::vector<Term> & tx, const StateTerms & post) const;

  std::vector<std::int64_t> encode_state(const FlaggedState & s) const;
  FlaggedState decode_state(const std::vector<std::int64_t> & v) const;
  std::vector<std::int64_t> encode_tx(const Transaction & tx) const;
  Transaction decode_tx(const std::vector<std::int64_t> & v) const;

  // Contract-level pieces, exposed for testing.
  Term encode_expr(const Expr & e, int contract, const StateTerms & state, const TxTerms & tx) const;
  StmtEnc encode_statement(const Stmt & st, int contract, const StateTerms & state, const TxTerms & tx) const;
  Term statement_relation(const Stmt & st, int contract, const StateTerms & pre, const TxTerms & tx,
                          const StateTerms & post) const;
  StateTerms encode_procedure(int proc, const StateTerms & state, const TxTerms & tx) const;

  Term read_map(int contract, int field, Term key, const StateTerms & state) const;
  Term read_balance(Term addr, const StateTerms & state) const;

 private:
  Term addr_is_user(Term a) const;

  TermManager & tm_;
  const System & sys_;
  std::int64_t user_balance_;
  StateLayout sl_;
  TxLayout tl_;
  StateTerms s_;
  std::vector<Term> t_;
  StateTerms nx_;
  Term init_ = nullptr;
  Term trans_ = nullptr;
  StateTerms next_;
  std::vector<StateTerms> next_by_proc_;
};

}  // namespace chmc::fol
