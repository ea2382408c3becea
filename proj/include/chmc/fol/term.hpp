#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "chmc/contract/ast.hpp"

namespace chmc::fol {

// Sorts reuse the contract ones: Bool, Int, Address, Proc. Addresses and
// procedures are finite enumerations, lowered to bounded ints on emission.
enum class Op
{
  True,
  False,
  Const,
  Var,
  Not,
  And,
  Or,
  Ite,
  Eq,
  Le,
  Lt,
  Add,
  Mul,
  Forall,
  Exists
};

struct Node
{
  Op op = Op::True;
  Sort sort = Sort::Bool;
  std::int64_t value = 0;  // Const payload
  std::string name;        // Var name
  // operands; quantifiers keep the bound variables first and the body last
  std::vector<const Node *> kids;
  std::uint32_t id = 0;
  std::size_t hash = 0;
};

using Term = const Node *;

struct TermVecHash
{
  std::size_t operator()(const std::vector<Term> & v) const;
};

class TermManager
{
 public:
  TermManager();
  TermManager(const TermManager &) = delete;
  TermManager & operator=(const TermManager &) = delete;

  Term mk_true() const { return true_; }
  Term mk_false() const { return false_; }
  Term mk_bool(bool b) const { return b ? true_ : false_; }
  Term mk_int(std::int64_t v);
  Term mk_addr(int id);
  Term mk_proc(int id);
  Term mk_const(Sort s, std::int64_t v);
  Term mk_var(const std::string & name, Sort s);

  Term mk_not(Term a);
  Term mk_and(std::vector<Term> kids);
  Term mk_and(Term a, Term b) { return mk_and(std::vector<Term>{ a, b }); }
  Term mk_or(std::vector<Term> kids);
  Term mk_or(Term a, Term b) { return mk_or(std::vector<Term>{ a, b }); }
  Term mk_implies(Term a, Term b) { return mk_or(mk_not(a), b); }
  Term mk_ite(Term c, Term a, Term b);
  Term mk_eq(Term a, Term b);
  Term mk_le(Term a, Term b);
  Term mk_lt(Term a, Term b);
  Term mk_ge(Term a, Term b) { return mk_le(b, a); }
  Term mk_gt(Term a, Term b) { return mk_lt(b, a); }
  Term mk_add(std::vector<Term> kids);
  Term mk_add(Term a, Term b) { return mk_add(std::vector<Term>{ a, b }); }
  Term mk_sub(Term a, Term b);
  Term mk_neg(Term a);
  Term mk_mul(Term a, Term b);
  Term mk_forall(std::vector<Term> vars, Term body);
  Term mk_exists(std::vector<Term> vars, Term body);
  Term mk_quant(Op q, std::vector<Term> vars, Term body);

  // Simultaneous substitution of variables. Rebuilds through the
  // simplifying constructors.
  Term subst(Term t, const std::unordered_map<Term, Term> & map);
  // Same, sharing work across all the terms.
  std::vector<Term> subst(const std::vector<Term> & ts, const std::unordered_map<Term, Term> & map);

  // Free variables, sorted by id; cached.
  const std::vector<Term> & free_vars(Term t);
  bool occurs(Term var, Term t);

  std::size_t dag_size(Term t) const;
  std::size_t num_nodes() const { return nodes_.size(); }

  // Fresh variable with a unique name derived from `base`.
  Term fresh_var(const std::string & base, Sort s);

 private:
  Term intern(Node n);
  Term scale(Term t, std::int64_t k);

  struct NodeHash
  {
    std::size_t operator()(const Node * n) const { return n->hash; }
  };
  struct NodeEq
  {
    bool operator()(const Node * a, const Node * b) const;
  };

  std::deque<Node> nodes_;
  std::unordered_set<const Node *, NodeHash, NodeEq> table_;
  std::unordered_map<Term, std::vector<Term>> fv_cache_;
  std::unordered_map<std::string, int> fresh_;
  Term true_ = nullptr;
  Term false_ = nullptr;
};

bool is_const(Term t);
bool is_bool_const(Term t);

// Concrete evaluation. Quantifiers over addresses, procedures and booleans
// are expanded; int quantifiers need an explicit domain.
struct EvalDomains
{
  int num_addresses = 0;  // ids 0 .. num_addresses-1
  int num_procs = 0;
  std::optional<std::vector<std::int64_t>> ints;
};

class Evaluator
{
 public:
  Evaluator(const EvalDomains & dom) : dom_(dom) {}

  void set(Term var, std::int64_t v) { env_[var] = v; memo_.clear(); }
  std::int64_t eval(Term t);

 private:
  std::int64_t eval_rec(Term t, std::unordered_map<Term, std::int64_t> & memo);

  const EvalDomains & dom_;
  std::unordered_map<Term, std::int64_t> env_;
  std::unordered_map<Term, std::int64_t> memo_;
};

// S-expression text. With `share`, repeated subterms are let-bound (scoped
// below the quantifiers whose variables they mention). With `lower`,
// address and procedure sorts print as Int; binders over them are refused.
std::string to_sexpr(TermManager & tm, Term t, bool share = true, bool lower = false);
std::string sort_smt(Sort s);

}  // namespace chmc::fol
