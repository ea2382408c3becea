#include "chmc/contract/ast.hpp"

namespace chmc {

const char * sort_name(Sort s)
{
  switch (s) {
    case Sort::Bool: return "bool";
    case Sort::Int: return "int";
    case Sort::Address: return "address";
    case Sort::Proc: return "proc";
    case Sort::Args: return "args";
  }
  return "?";
}

std::string type_name(const ContractType & t)
{
  std::string base = t.nonneg ? "uint" : sort_name(t.scalar);
  if (t.is_map) return "mapping(address => " + base + ")";
  return base;
}

const char * op_text(Op op)
{
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::And: return "&&";
    case Op::Or: return "||";
    case Op::Neg: return "-";
    case Op::Not: return "!";
  }
  return "?";
}

bool same_shape(const Expr & a, const Expr & b)
{
  if (a.kind != b.kind || a.num != b.num || a.name != b.name
      || a.owner != b.owner || a.kids.size() != b.kids.size())
    return false;
  if ((a.kind == ExprKind::Unary || a.kind == ExprKind::Binary) && a.op != b.op)
    return false;
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (!same_shape(a.kids[i], b.kids[i])) return false;
  return true;
}

bool same_shape(const Stmt & a, const Stmt & b)
{
  if (a.kind != b.kind || a.target != b.target || a.proc != b.proc
      || a.implicit != b.implicit || a.exprs.size() != b.exprs.size()
      || a.body.size() != b.body.size())
    return false;
  for (size_t i = 0; i < a.exprs.size(); ++i)
    if (!same_shape(a.exprs[i], b.exprs[i])) return false;
  for (size_t i = 0; i < a.body.size(); ++i)
    if (!same_shape(a.body[i], b.body[i])) return false;
  return true;
}

bool same_shape(const ContractDecl & a, const ContractDecl & b)
{
  if (a.name != b.name || a.fields.size() != b.fields.size()
      || a.procedures.size() != b.procedures.size())
    return false;
  for (size_t i = 0; i < a.fields.size(); ++i)
    if (a.fields[i].name != b.fields[i].name
        || !(a.fields[i].type == b.fields[i].type))
      return false;
  for (size_t i = 0; i < a.procedures.size(); ++i) {
    const auto & p = a.procedures[i];
    const auto & q = b.procedures[i];
    if (p.name != q.name || p.payable != q.payable
        || p.params.size() != q.params.size() || !same_shape(p.body, q.body))
      return false;
    for (size_t j = 0; j < p.params.size(); ++j)
      if (p.params[j].name != q.params[j].name
          || !(p.params[j].type == q.params[j].type))
        return false;
  }
  return true;
}

int ContractDecl::find_field(const std::string & n) const
{
  for (size_t i = 0; i < fields.size(); ++i)
    if (fields[i].name == n) return static_cast<int>(i);
  return -1;
}

int ContractDecl::find_proc(const std::string & n) const
{
  for (size_t i = 0; i < procedures.size(); ++i)
    if (procedures[i].name == n) return static_cast<int>(i);
  return -1;
}

}  // namespace chmc
