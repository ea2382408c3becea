#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chmc/contract/system.hpp"

namespace chmc {

enum class FormulaKind
{
  Expr,
  Not,
  And,
  Forall,
  Modal
};

// <sender, contract.proc(args), value[, delta]>
struct ModalLabel
{
  Expr sender;
  std::string contract;
  Expr proc;  // Name when parsed; ProcConst or BoundVar once checked
  std::vector<Expr> args;
  Expr value;
  bool has_delta = false;
  Expr delta;

  int contract_index = -1;
  bool args_var = false;  // args is a single args-typed variable
};

struct Formula
{
  FormulaKind kind = FormulaKind::Expr;
  Span span;
  Expr expr;
  std::vector<Formula> kids;
  std::string var;
  Sort var_sort = Sort::Int;
  int var_id = -1;
  ModalLabel label;
  int depth = 0;  // number of enclosing modal operators
};

struct Property
{
  std::string name;
  Formula formula;
  Span span;
};

struct TypedFormula
{
  Formula root;
  std::vector<Sort> var_sorts;        // by var_id
  std::vector<std::string> var_names;  // by var_id
};

struct TypedProperty
{
  std::string name;
  TypedFormula formula;
};

// Parses `property <name> { <formula> }` blocks. Derived connectives are
// desugared into the core {expr, not, and, forall, modal}.
std::vector<Property> parse_properties(std::string_view src);
Formula parse_formula(std::string_view src);

TypedFormula typecheck_formula(const Formula & f, const System & sys);
std::vector<TypedProperty> typecheck_properties(const std::vector<Property> & props,
                                                const System & sys);
std::vector<TypedProperty> load_properties(const std::string & src, const System & sys);

std::string print_formula(const Formula & f);

int modal_depth(const Formula & f);
bool formula_uses_block_number(const Formula & f);
std::vector<std::int64_t> formula_int_literals(const Formula & f);

// Builds connectives the way the parser desugars them.
Formula mk_not(Formula f);
Formula mk_and(Formula a, Formula b);
Formula mk_or(Formula a, Formula b);
Formula mk_implies(Formula a, Formula b);

}  // namespace chmc
