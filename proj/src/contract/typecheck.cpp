#include "chmc/contract/typecheck.hpp"

#include <set>

#include "chmc/contract/parser.hpp"

namespace chmc {

bool infer_binary_type(Expr & e, std::vector<Diagnostic> & errors)
{
  const Expr & l = e.kids[0];
  const Expr & r = e.kids[1];
  switch (e.op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
      if (l.type != Sort::Int || r.type != Sort::Int) {
        errors.push_back({ e.span, std::string("type mismatch: ") + sort_name(l.type) + " "
                          + op_text(e.op) + " " + sort_name(r.type) });
        return false;
      }
      e.type = Sort::Int;
      return true;
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge:
      if (l.type != Sort::Int || r.type != Sort::Int) {
        errors.push_back({ e.span, std::string("type mismatch: ") + sort_name(l.type) + " "
                          + op_text(e.op) + " " + sort_name(r.type) });
        return false;
      }
      e.type = Sort::Bool;
      return true;
    case Op::Eq:
    case Op::Ne:
      if (l.type != r.type) {
        errors.push_back({ e.span, std::string("type mismatch: ") + sort_name(l.type) + " "
                          + op_text(e.op) + " " + sort_name(r.type) });
        return false;
      }
      e.type = Sort::Bool;
      return true;
    case Op::And:
    case Op::Or:
      if (l.type != Sort::Bool || r.type != Sort::Bool) {
        errors.push_back({ e.span, std::string("type mismatch: ") + sort_name(l.type) + " "
                          + op_text(e.op) + " " + sort_name(r.type) });
        return false;
      }
      e.type = Sort::Bool;
      return true;
    default: break;
  }
  errors.push_back({ e.span, "bad operator" });
  return false;
}


namespace {

const std::set<std::string> kReserved = { "balance", "sender", "value", "this",
                                          "null",    "true",   "false", "msg",
                                          "block",   "old",    "last_reverted" };

class Checker
{
 public:
  explicit Checker(System & sys) : sys_(sys) {}

  void check_contract(int c)
  {
    c_ = c;
    ContractDecl & d = sys_.contracts[c].decl;
    std::set<std::string> names;
    for (auto & f : d.fields) {
      if (kReserved.count(f.name)) error(f.span, "reserved name '" + f.name + "'");
      if (!names.insert(f.name).second)
        error(f.span, "duplicate field '" + f.name + "'");
    }
    std::set<std::string> procs;
    for (auto & p : d.procedures) {
      if (!procs.insert(p.name).second)
        error(p.span, "duplicate procedure '" + p.name + "'");
      proc_ = &p;
      std::set<std::string> params;
      for (auto & prm : p.params)
        if (!params.insert(prm.name).second)
          error(prm.span, "duplicate parameter '" + prm.name + "'");
      check_stmt(p.body);
      if (!p.payable) {
        Stmt pro;
        pro.kind = StmtKind::Require;
        pro.span = p.span;
        pro.implicit = true;
        Expr eq;
        eq.kind = ExprKind::Binary;
        eq.op = Op::Eq;
        eq.span = p.span;
        eq.type = Sort::Bool;
        Expr v;
        v.kind = ExprKind::Value;
        v.span = p.span;
        v.type = Sort::Int;
        Expr z;
        z.kind = ExprKind::IntLit;
        z.span = p.span;
        z.type = Sort::Int;
        eq.kids = { v, z };
        pro.exprs.push_back(eq);
        p.body.body.insert(p.body.body.begin(), std::move(pro));
      }
    }
    proc_ = nullptr;
  }

  std::vector<Diagnostic> errors;

 private:
  void error(Span sp, const std::string & msg) { errors.push_back({ sp, msg }); }

  const ContractDecl & self() const { return sys_.contracts[c_].decl; }

  int address_of_name(const std::string & n) const
  {
    int id = sys_.roster.id_of(n);
    return n == "null" ? -1 : id;
  }

  bool expect_sort(const Expr & e, Sort s, const char * what)
  {
    if (e.type == s) return true;
    errors.push_back({ e.span, std::string(what) + " must be " + sort_name(s)
                                   + ", got " + sort_name(e.type) });
    return false;
  }

  // Returns false if resolution failed; e.type is only meaningful on success.
  bool check_expr(Expr & e)
  {
    switch (e.kind) {
      case ExprKind::Null: e.type = Sort::Address; return true;
      case ExprKind::BoolLit: e.type = Sort::Bool; return true;
      case ExprKind::IntLit: e.type = Sort::Int; return true;
      case ExprKind::Sender: e.type = Sort::Address; return true;
      case ExprKind::Value: e.type = Sort::Int; return true;
      case ExprKind::BlockNumber: e.type = Sort::Int; return true;
      case ExprKind::This:
        e.type = Sort::Address;
        e.index = sys_.roster.contract_address(c_);
        return true;
      case ExprKind::Old:
      case ExprKind::LastReverted:
        error(e.span, "only allowed in properties");
        return false;
      case ExprKind::Name: {
        for (size_t i = 0; i < proc_->params.size(); ++i) {
          if (proc_->params[i].name == e.name) {
            e.kind = ExprKind::Param;
            e.index = static_cast<int>(i);
            e.type = proc_->params[i].type.scalar;
            return true;
          }
        }
        int f = self().find_field(e.name);
        if (f >= 0) {
          if (self().fields[f].type.is_map) {
            error(e.span, "map '" + e.name + "' used without index");
            return false;
          }
          e.kind = ExprKind::Field;
          e.owner_index = c_;
          e.index = f;
          e.type = self().fields[f].type.scalar;
          return true;
        }
        int id = address_of_name(e.name);
        if (id > 0) {
          e.kind = ExprKind::AddrConst;
          e.index = id;
          e.type = Sort::Address;
          return true;
        }
        error(e.span, "unknown identifier '" + e.name + "'");
        return false;
      }
      case ExprKind::Member: {
        int d = sys_.find_contract(e.owner);
        if (d < 0) {
          error(e.span, "unknown contract '" + e.owner + "'");
          return false;
        }
        int f = sys_.contracts[d].decl.find_field(e.name);
        if (f < 0) {
          error(e.span, "unknown field '" + e.owner + "." + e.name + "'");
          return false;
        }
        const FieldDecl & fd = sys_.contracts[d].decl.fields[f];
        if (fd.type.is_map) {
          error(e.span, "map '" + e.name + "' used without index");
          return false;
        }
        e.kind = ExprKind::Field;
        e.owner_index = d;
        e.index = f;
        e.type = fd.type.scalar;
        return true;
      }
      case ExprKind::Index: {
        Expr & base = e.kids[0];
        int d = -1;
        std::string fname;
        if (base.kind == ExprKind::Name) {
          d = c_;
          fname = base.name;
        } else if (base.kind == ExprKind::Member) {
          d = sys_.find_contract(base.owner);
          fname = base.name;
          if (d < 0) {
            error(base.span, "unknown contract '" + base.owner + "'");
            return false;
          }
        } else {
          error(e.span, "only maps can be indexed");
          return false;
        }
        int f = sys_.contracts[d].decl.find_field(fname);
        if (f < 0 || !sys_.contracts[d].decl.fields[f].type.is_map) {
          error(base.span, "'" + fname + "' is not a map field");
          return false;
        }
        Expr key = std::move(e.kids[1]);
        if (!check_expr(key)) return false;
        if (!expect_sort(key, Sort::Address, "map key")) return false;
        e.kind = ExprKind::MapLookup;
        e.owner = base.kind == ExprKind::Member ? base.owner : "";
        e.name = fname;
        e.owner_index = d;
        e.index = f;
        e.type = sys_.contracts[d].decl.fields[f].type.scalar;
        e.kids.clear();
        e.kids.push_back(std::move(key));
        return true;
      }
      case ExprKind::Balance: {
        if (e.kids.empty()) {
          Expr t;
          t.kind = ExprKind::This;
          t.span = e.span;
          e.kids.push_back(t);
        }
        if (!check_expr(e.kids[0])) return false;
        if (!expect_sort(e.kids[0], Sort::Address, "balance owner")) return false;
        e.type = Sort::Int;
        return true;
      }
      case ExprKind::Unary: {
        if (!check_expr(e.kids[0])) return false;
        Sort want = e.op == Op::Not ? Sort::Bool : Sort::Int;
        if (!expect_sort(e.kids[0], want, "operand")) return false;
        e.type = want;
        return true;
      }
      case ExprKind::Binary: {
        bool ok = check_expr(e.kids[0]);
        ok = check_expr(e.kids[1]) && ok;
        if (!ok) return false;
        return type_binary(e);
      }
      default:
        error(e.span, "unexpected expression");
        return false;
    }
  }

  bool type_binary(Expr & e) { return infer_binary_type(e, errors); }

  void check_stmt(Stmt & s)
  {
    switch (s.kind) {
      case StmtKind::Skip: return;
      case StmtKind::Seq:
        for (auto & k : s.body) check_stmt(k);
        return;
      case StmtKind::Require:
      case StmtKind::If:
        if (check_expr(s.exprs[0]))
          expect_sort(s.exprs[0], Sort::Bool,
                      s.kind == StmtKind::If ? "if condition" : "require argument");
        for (auto & b : s.body) check_stmt(b);
        return;
      case StmtKind::Assign: {
        int f = self().find_field(s.target);
        bool ok = check_expr(s.exprs[0]);
        if (s.target == "balance") {
          error(s.span, "assignment to balance");
          return;
        }
        if (f < 0) {
          error(s.span, "assignment to undeclared field '" + s.target + "'");
          return;
        }
        const ContractType & t = self().fields[f].type;
        if (t.is_map) {
          error(s.span, "map '" + s.target + "' assigned without index");
          return;
        }
        s.field_index = f;
        if (ok && s.exprs[0].type != t.scalar)
          error(s.exprs[0].span, std::string(sort_name(t.scalar))
                                     + " := " + sort_name(s.exprs[0].type));
        return;
      }
      case StmtKind::MapAssign: {
        int f = self().find_field(s.target);
        bool ok_key = check_expr(s.exprs[0]);
        bool ok_val = check_expr(s.exprs[1]);
        if (f < 0) {
          error(s.span, "assignment to undeclared field '" + s.target + "'");
          return;
        }
        const ContractType & t = self().fields[f].type;
        if (!t.is_map) {
          error(s.span, "'" + s.target + "' is not a map field");
          return;
        }
        s.field_index = f;
        if (ok_key) expect_sort(s.exprs[0], Sort::Address, "map key");
        if (ok_val && s.exprs[1].type != t.scalar)
          error(s.exprs[1].span, std::string(sort_name(t.scalar))
                                     + " := " + sort_name(s.exprs[1].type));
        return;
      }
      case StmtKind::Transfer:
        if (check_expr(s.exprs[0]))
          expect_sort(s.exprs[0], Sort::Address, "transfer recipient");
        if (check_expr(s.exprs[1]))
          expect_sort(s.exprs[1], Sort::Int, "transfer amount");
        return;
      case StmtKind::Call: {
        sys_.contracts[c_].uses_calls = true;
        bool ok = true;
        for (auto & e : s.exprs) ok = check_expr(e) && ok;
        if (!ok) return;
        int d = sys_.find_contract(s.target);
        if (d < 0) {
          error(s.span, "unknown contract '" + s.target + "'");
          return;
        }
        int p = sys_.contracts[d].decl.find_proc(s.proc);
        if (p < 0) {
          error(s.span, "unknown procedure '" + s.target + "." + s.proc + "'");
          return;
        }
        const Procedure & callee = sys_.contracts[d].decl.procedures[p];
        if (callee.is_constructor()) {
          error(s.span, "constructors cannot be called");
          return;
        }
        if (callee.params.size() + 1 != s.exprs.size()) {
          error(s.span, "arity mismatch calling '" + s.proc + "'");
          return;
        }
        for (size_t i = 0; i < callee.params.size(); ++i)
          if (s.exprs[i].type != callee.params[i].type.scalar)
            error(s.exprs[i].span, "argument " + std::to_string(i + 1) + " must be "
                                       + sort_name(callee.params[i].type.scalar));
        expect_sort(s.exprs.back(), Sort::Int, "call value");
        s.contract_index = d;
        s.proc_index = p;
        return;
      }
    }
  }

  System & sys_;
  int c_ = -1;
  const Procedure * proc_ = nullptr;
};

}  // namespace

System typecheck_system(std::vector<ContractDecl> decls, std::vector<std::string> users)
{
  std::vector<Diagnostic> errs;
  std::vector<std::string> names;
  std::set<std::string> seen(users.begin(), users.end());
  if (seen.size() != users.size())
    errs.push_back({ Span{}, "duplicate user address in roster" });
  for (const auto & u : users)
    if (kReserved.count(u)) errs.push_back({ Span{}, "reserved address name '" + u + "'" });
  for (const auto & d : decls) {
    if (!seen.insert(d.name).second)
      errs.push_back({ d.span, "duplicate contract or address name '" + d.name + "'" });
    names.push_back(d.name);
  }
  if (!errs.empty()) throw FrontendError(errs);

  System sys;
  sys.roster = Roster(std::move(users), names);
  for (auto & d : decls) {
    TypedContract tc;
    int ctor = d.find_proc("constructor");
    if (ctor < 0) {
      Procedure p;
      p.name = "constructor";
      p.span = d.span;
      p.synthesized = true;
      p.body.kind = StmtKind::Seq;
      p.body.span = d.span;
      d.procedures.insert(d.procedures.begin(), std::move(p));
      tc.starts_constructed = true;
    }
    tc.decl = std::move(d);
    sys.contracts.push_back(std::move(tc));
  }
  for (size_t c = 0; c < sys.contracts.size(); ++c) {
    const auto & d = sys.contracts[c].decl;
    for (size_t p = 0; p < d.procedures.size(); ++p)
      sys.procs.push_back({ static_cast<int>(c), static_cast<int>(p),
                            d.procedures[p].name });
    std::vector<int> slots;
    int next = 0;
    for (const auto & f : d.fields) {
      slots.push_back(next);
      next += f.type.is_map ? sys.roster.size() : 1;
    }
    sys.field_slot.push_back(std::move(slots));
    sys.slot_count.push_back(next);
  }
  Checker ck(sys);
  for (size_t c = 0; c < sys.contracts.size(); ++c) ck.check_contract(static_cast<int>(c));
  if (!ck.errors.empty()) throw FrontendError(ck.errors);
  return sys;
}

TypedContract typecheck_contract(const ContractDecl & decl, std::vector<std::string> users)
{
  System sys = typecheck_system({ decl }, std::move(users));
  return std::move(sys.contracts[0]);
}

System load_system(const std::string & source, std::vector<std::string> users)
{
  return typecheck_system(parse_contracts(source), std::move(users));
}

}  // namespace chmc
