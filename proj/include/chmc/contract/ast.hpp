#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chmc/diagnostics.hpp"

namespace chmc {

// Value sorts shared by the contract language and the property logic.
enum class Sort
{
  Bool,
  Int,
  Address,
  Proc,
  Args
};

const char * sort_name(Sort s);

// Declared type of a field or parameter. Maps are keyed by address only.
struct ContractType
{
  Sort scalar = Sort::Int;
  bool is_map = false;
  bool nonneg = false;  // declared as uint

  bool operator==(const ContractType &) const = default;
};

std::string type_name(const ContractType & t);

enum class ExprKind
{
  Null,
  BoolLit,
  IntLit,
  Name,    // unresolved identifier
  Member,  // owner.name, unresolved
  Index,   // kids[0][kids[1]], unresolved
  Sender,
  Value,
  This,
  BlockNumber,
  Balance,  // balance[kids[0]]; no kid means the bare keyword
  Unary,
  Binary,
  Old,
  LastReverted,
  // resolved by the type checkers
  AddrConst,  // index = address id
  Param,      // index = parameter position
  Field,      // owner_index = contract, index = field
  MapLookup,  // owner_index = contract, index = field, kids[0] = key
  ProcConst,  // index = global procedure id
  BoundVar    // index = variable id
};

enum class Op
{
  Add,
  Sub,
  Mul,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  And,
  Or,
  Neg,
  Not
};

const char * op_text(Op op);

struct Expr
{
  ExprKind kind = ExprKind::Null;
  Span span;
  std::int64_t num = 0;
  std::string name;
  std::string owner;
  Op op = Op::Add;
  std::vector<Expr> kids;

  Sort type = Sort::Int;
  int index = -1;
  int owner_index = -1;
};

// Structural equality that ignores spans and checker annotations.
bool same_shape(const Expr & a, const Expr & b);

enum class StmtKind
{
  Skip,
  Require,
  Assign,
  MapAssign,
  Transfer,
  Seq,
  If,
  Call
};

// exprs layout: Require [cond], Assign [value], MapAssign [key, value],
// Transfer [recipient, amount], If [cond], Call [args..., value].
// body layout: Seq children, If [then, else].
struct Stmt
{
  StmtKind kind = StmtKind::Skip;
  Span span;
  std::string target;  // assigned field or called contract
  std::string proc;    // called procedure
  std::vector<Expr> exprs;
  std::vector<Stmt> body;
  bool implicit = false;

  int field_index = -1;
  int contract_index = -1;
  int proc_index = -1;
};

bool same_shape(const Stmt & a, const Stmt & b);

struct FieldDecl
{
  std::string name;
  ContractType type;
  Span span;
};

struct Param
{
  std::string name;
  ContractType type;
  Span span;
};

struct Procedure
{
  std::string name;
  std::vector<Param> params;
  bool payable = false;
  Stmt body;  // always a Seq
  Span span;
  bool synthesized = false;

  bool is_constructor() const { return name == "constructor"; }
};

struct ContractDecl
{
  std::string name;
  std::vector<FieldDecl> fields;
  std::vector<Procedure> procedures;
  Span span;

  int find_field(const std::string & n) const;
  int find_proc(const std::string & n) const;
};

bool same_shape(const ContractDecl & a, const ContractDecl & b);

}  // namespace chmc
