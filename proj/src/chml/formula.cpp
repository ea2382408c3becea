#include "chmc/chml/formula.hpp"

#include <functional>
#include <map>
#include <set>

#include "chmc/contract/parser.hpp"
#include "chmc/contract/typecheck.hpp"

namespace chmc {

Formula mk_not(Formula f)
{
  Formula n;
  n.kind = FormulaKind::Not;
  n.span = f.span;
  n.kids.push_back(std::move(f));
  return n;
}

Formula mk_and(Formula a, Formula b)
{
  Formula n;
  n.kind = FormulaKind::And;
  n.span = a.span;
  n.kids.push_back(std::move(a));
  n.kids.push_back(std::move(b));
  return n;
}

Formula mk_or(Formula a, Formula b)
{
  return mk_not(mk_and(mk_not(std::move(a)), mk_not(std::move(b))));
}

Formula mk_implies(Formula a, Formula b)
{
  return mk_not(mk_and(std::move(a), mk_not(std::move(b))));
}

namespace {

bool is_expr_continuation(const TokenStream & ts)
{
  static const char * ops[] = { "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "[" };
  for (const char * o : ops)
    if (ts.is(o)) return true;
  return false;
}

class FormulaParser
{
 public:
  explicit FormulaParser(TokenStream & ts) : ts_(ts), ep_(ts) {}

  Formula parse_formula() { return parse_implies(); }

  int next_var = 0;

 private:
  Formula parse_implies()
  {
    Formula l = parse_or();
    if (ts_.accept("->")) return mk_implies(std::move(l), parse_implies());
    return l;
  }

  Formula parse_or()
  {
    Formula l = parse_and();
    while (ts_.accept("||")) l = mk_or(std::move(l), parse_and());
    return l;
  }

  Formula parse_and()
  {
    Formula l = parse_unary();
    while (ts_.accept("&&")) l = mk_and(std::move(l), parse_unary());
    return l;
  }

  Sort parse_ctype()
  {
    const Token & t = ts_.expect_ident("type");
    if (t.text == "bool") return Sort::Bool;
    if (t.text == "int" || t.text == "uint") return Sort::Int;
    if (t.text == "address") return Sort::Address;
    if (t.text == "proc") return Sort::Proc;
    if (t.text == "args") return Sort::Args;
    throw FrontendError(t.span, "unknown type '" + t.text + "'");
  }

  Formula parse_quant(bool exists, Span sp)
  {
    std::vector<std::pair<std::string, Sort>> binders;
    std::vector<Span> spans;
    do {
      std::vector<std::string> names;
      names.push_back(ts_.expect_ident("variable").text);
      spans.push_back(ts_.peek().span);
      while (ts_.accept(",")) {
        names.push_back(ts_.expect_ident("variable").text);
        spans.push_back(ts_.peek().span);
      }
      ts_.expect(":");
      Sort s = parse_ctype();
      for (auto & n : names) binders.emplace_back(n, s);
    } while (ts_.accept(","));
    ts_.expect(".");
    std::vector<int> ids;
    for (size_t i = 0; i < binders.size(); ++i) ids.push_back(next_var++);
    Formula body = parse_formula();
    for (size_t i = binders.size(); i-- > 0;) {
      Formula q;
      q.kind = FormulaKind::Forall;
      q.span = sp;
      q.var = binders[i].first;
      q.var_sort = binders[i].second;
      q.var_id = ids[i];
      q.kids.push_back(exists ? mk_not(std::move(body)) : std::move(body));
      body = exists ? mk_not(std::move(q)) : std::move(q);
    }
    return body;
  }

  Formula parse_modal()
  {
    Formula m;
    m.kind = FormulaKind::Modal;
    m.span = ts_.expect("<").span;
    ModalLabel & l = m.label;
    l.sender = ep_.parse_additive();
    ts_.expect(",");
    l.contract = ts_.expect_ident("contract name").text;
    ts_.expect(".");
    const Token & p = ts_.expect_ident("procedure");
    l.proc.kind = ExprKind::Name;
    l.proc.name = p.text;
    l.proc.span = p.span;
    ts_.expect("(");
    if (!ts_.is(")")) {
      do {
        l.args.push_back(ep_.parse_expr());
      } while (ts_.accept(","));
    }
    ts_.expect(")");
    ts_.expect(",");
    l.value = ep_.parse_additive();
    if (ts_.accept(",")) {
      l.has_delta = true;
      l.delta = ep_.parse_additive();
    }
    ts_.expect(">");
    m.kids.push_back(parse_unary());
    return m;
  }

  Formula atom()
  {
    Formula f;
    f.kind = FormulaKind::Expr;
    f.span = ts_.peek().span;
    f.expr = ep_.parse_comparison();
    return f;
  }

  Formula parse_unary()
  {
    if (ts_.is("!")) {
      ts_.next();
      return mk_not(parse_unary());
    }
    if (ts_.is("forall") || ts_.is("exists")) {
      bool ex = ts_.peek().text == "exists";
      Span sp = ts_.next().span;
      return parse_quant(ex, sp);
    }
    if (ts_.is("<")) return parse_modal();
    if (ts_.is("(")) {
      size_t save = ts_.pos();
      int save_var = next_var;
      try {
        ts_.next();
        Formula f = parse_formula();
        ts_.expect(")");
        if (!is_expr_continuation(ts_)) return f;
      } catch (const FrontendError &) {
      }
      ts_.reset(save);
      next_var = save_var;
    }
    return atom();
  }

  TokenStream & ts_;
  ExprParser ep_;
};

}  // namespace

std::vector<Property> parse_properties(std::string_view src)
{
  TokenStream ts(tokenize(src));
  std::vector<Property> out;
  std::set<std::string> names;
  while (!ts.at_end()) {
    Property p;
    p.span = ts.expect("property").span;
    const Token & n = ts.expect_ident("property name");
    p.name = n.text;
    if (!names.insert(p.name).second)
      throw FrontendError(n.span, "duplicate property '" + p.name + "'");
    ts.expect("{");
    FormulaParser fp(ts);
    p.formula = fp.parse_formula();
    ts.expect("}");
    out.push_back(std::move(p));
  }
  return out;
}

Formula parse_formula(std::string_view src)
{
  TokenStream ts(tokenize(src));
  FormulaParser fp(ts);
  Formula f = fp.parse_formula();
  if (!ts.at_end()) ts.fail("unexpected trailing input");
  return f;
}

// ---------------------------------------------------------------------------
// type checking

namespace {

struct Binding
{
  std::string name;
  int id;
  Sort sort;
};

class FormulaChecker
{
 public:
  FormulaChecker(const System & sys, TypedFormula & out) : sys_(sys), out_(out) {}

  void check(Formula & f, int n)
  {
    f.depth = n;
    switch (f.kind) {
      case FormulaKind::Expr:
        if (check_expr(f.expr, n)) expect(f.expr, Sort::Bool, "formula atom");
        return;
      case FormulaKind::Not:
      case FormulaKind::And:
        for (auto & k : f.kids) check(k, n);
        return;
      case FormulaKind::Forall: {
        if (f.var_id >= static_cast<int>(out_.var_sorts.size())) {
          out_.var_sorts.resize(f.var_id + 1, Sort::Int);
          out_.var_names.resize(f.var_id + 1);
        }
        out_.var_sorts[f.var_id] = f.var_sort;
        out_.var_names[f.var_id] = f.var;
        scope_.push_back({ f.var, f.var_id, f.var_sort });
        check(f.kids[0], n);
        scope_.pop_back();
        return;
      }
      case FormulaKind::Modal:
        check_label(f.label, f.span, n);
        check(f.kids[0], n + 1);
        return;
    }
  }

  std::vector<Diagnostic> errors;

 private:
  void error(Span sp, const std::string & m) { errors.push_back({ sp, m }); }

  bool expect(const Expr & e, Sort s, const char * what)
  {
    if (e.type == s) return true;
    error(e.span, std::string(what) + " must be " + sort_name(s) + ", got "
                      + sort_name(e.type));
    return false;
  }

  const Binding * lookup(const std::string & name) const
  {
    for (size_t i = scope_.size(); i-- > 0;)
      if (scope_[i].name == name) return &scope_[i];
    return nullptr;
  }

  // The unique contract declaring a field named `name`, or -1.
  int unique_owner(const std::string & name, Span sp, bool want_map)
  {
    int found = -1;
    for (size_t c = 0; c < sys_.contracts.size(); ++c) {
      int f = sys_.decl(static_cast<int>(c)).find_field(name);
      if (f < 0 || sys_.decl(static_cast<int>(c)).fields[f].type.is_map != want_map) continue;
      if (found >= 0) {
        error(sp, "ambiguous field '" + name + "'; qualify it with a contract");
        return -2;
      }
      found = static_cast<int>(c);
    }
    return found;
  }

  int unique_proc(const std::string & name)
  {
    int found = -1;
    for (size_t i = 0; i < sys_.procs.size(); ++i) {
      if (sys_.procs[i].name != name) continue;
      if (found >= 0) return -2;
      found = static_cast<int>(i);
    }
    return found;
  }

  bool check_expr(Expr & e, int n)
  {
    switch (e.kind) {
      case ExprKind::Null: e.type = Sort::Address; return true;
      case ExprKind::BoolLit: e.type = Sort::Bool; return true;
      case ExprKind::IntLit: e.type = Sort::Int; return true;
      case ExprKind::BlockNumber: e.type = Sort::Int; return true;
      case ExprKind::LastReverted: e.type = Sort::Bool; return true;
      case ExprKind::Sender:
      case ExprKind::Value:
      case ExprKind::This:
        error(e.span, "'" + print_expr(e) + "' is not available in properties");
        return false;
      case ExprKind::Old:
        if (n == 0) {
          error(e.span, "old(...) at modal depth 0");
          return false;
        }
        if (!check_expr(e.kids[0], n - 1)) return false;
        e.type = e.kids[0].type;
        return true;
      case ExprKind::Name: {
        if (const Binding * b = lookup(e.name)) {
          if (b->sort == Sort::Args) {
            error(e.span, "args variable '" + e.name + "' used outside a modal argument");
            return false;
          }
          e.kind = ExprKind::BoundVar;
          e.index = b->id;
          e.type = b->sort;
          return true;
        }
        int id = sys_.roster.id_of(e.name);
        if (id > 0) {
          e.kind = ExprKind::AddrConst;
          e.index = id;
          e.type = Sort::Address;
          return true;
        }
        int c = unique_owner(e.name, e.span, false);
        if (c == -2) return false;
        if (c >= 0) {
          e.kind = ExprKind::Field;
          e.owner_index = c;
          e.index = sys_.decl(c).find_field(e.name);
          e.type = sys_.decl(c).fields[e.index].type.scalar;
          return true;
        }
        int p = unique_proc(e.name);
        if (p >= 0) {
          e.kind = ExprKind::ProcConst;
          e.index = p;
          e.type = Sort::Proc;
          return true;
        }
        error(e.span, "unknown identifier '" + e.name + "'");
        return false;
      }
      case ExprKind::Member: {
        int c = sys_.find_contract(e.owner);
        if (c < 0) {
          error(e.span, "unknown contract '" + e.owner + "'");
          return false;
        }
        int f = sys_.decl(c).find_field(e.name);
        if (f >= 0 && !sys_.decl(c).fields[f].type.is_map) {
          e.kind = ExprKind::Field;
          e.owner_index = c;
          e.index = f;
          e.type = sys_.decl(c).fields[f].type.scalar;
          return true;
        }
        int p = sys_.find_proc(c, e.name);
        if (p >= 0) {
          e.kind = ExprKind::ProcConst;
          e.index = p;
          e.type = Sort::Proc;
          return true;
        }
        error(e.span, "unknown field '" + e.owner + "." + e.name + "'");
        return false;
      }
      case ExprKind::Index: {
        Expr & base = e.kids[0];
        int c = -1;
        if (base.kind == ExprKind::Name) {
          c = unique_owner(base.name, base.span, true);
          if (c == -2) return false;
        } else if (base.kind == ExprKind::Member) {
          c = sys_.find_contract(base.owner);
        }
        std::string fname = base.name;
        int f = c >= 0 ? sys_.decl(c).find_field(fname) : -1;
        if (f < 0 || !sys_.decl(c).fields[f].type.is_map) {
          error(base.span, "'" + print_expr(base) + "' is not a map field");
          return false;
        }
        Expr key = std::move(e.kids[1]);
        if (!check_expr(key, n) || !expect(key, Sort::Address, "map key")) return false;
        e.kind = ExprKind::MapLookup;
        e.owner = sys_.decl(c).name;
        e.name = fname;
        e.owner_index = c;
        e.index = f;
        e.type = sys_.decl(c).fields[f].type.scalar;
        e.kids.clear();
        e.kids.push_back(std::move(key));
        return true;
      }
      case ExprKind::Balance: {
        if (e.kids.empty()) {
          if (sys_.contracts.size() != 1) {
            error(e.span, "bare 'balance' needs a unique contract");
            return false;
          }
          Expr a;
          a.kind = ExprKind::AddrConst;
          a.span = e.span;
          a.name = sys_.decl(0).name;
          a.index = sys_.roster.contract_address(0);
          a.type = Sort::Address;
          e.kids.push_back(a);
          e.type = Sort::Int;
          return true;
        }
        if (!check_expr(e.kids[0], n) || !expect(e.kids[0], Sort::Address, "balance owner"))
          return false;
        e.type = Sort::Int;
        return true;
      }
      case ExprKind::Unary: {
        if (!check_expr(e.kids[0], n)) return false;
        Sort want = e.op == Op::Not ? Sort::Bool : Sort::Int;
        if (!expect(e.kids[0], want, "operand")) return false;
        e.type = want;
        return true;
      }
      case ExprKind::Binary: {
        bool ok = check_expr(e.kids[0], n);
        ok = check_expr(e.kids[1], n) && ok;
        if (!ok) return false;
        return infer_binary_type(e, errors);
      }
      default:
        error(e.span, "unexpected expression");
        return false;
    }
  }

  void check_label(ModalLabel & l, Span sp, int n)
  {
    if (check_expr(l.sender, n)) expect(l.sender, Sort::Address, "modal sender");
    if (check_expr(l.value, n)) expect(l.value, Sort::Int, "modal value");
    if (l.has_delta && check_expr(l.delta, n)) expect(l.delta, Sort::Int, "block advance");
    l.contract_index = sys_.find_contract(l.contract);
    if (l.contract_index < 0) {
      error(sp, "unknown contract '" + l.contract + "'");
      return;
    }
    const Binding * pb = lookup(l.proc.name);
    bool proc_var = false;
    const Procedure * target = nullptr;
    if (pb && pb->sort == Sort::Proc) {
      l.proc.kind = ExprKind::BoundVar;
      l.proc.index = pb->id;
      l.proc.type = Sort::Proc;
      proc_var = true;
    } else {
      int p = sys_.find_proc(l.contract_index, l.proc.name);
      if (p < 0) {
        error(l.proc.span, "unknown procedure '" + l.contract + "." + l.proc.name + "'");
        return;
      }
      l.proc.kind = ExprKind::ProcConst;
      l.proc.index = p;
      l.proc.type = Sort::Proc;
      target = &sys_.proc(p);
    }
    if (l.args.size() == 1 && l.args[0].kind == ExprKind::Name) {
      const Binding * ab = lookup(l.args[0].name);
      if (ab && ab->sort == Sort::Args) {
        l.args_var = true;
        l.args[0].kind = ExprKind::BoundVar;
        l.args[0].index = ab->id;
        l.args[0].type = Sort::Args;
        return;
      }
    }
    if (proc_var) {
      error(sp, "a procedure variable takes a single args variable");
      return;
    }
    if (l.args.size() != target->params.size()) {
      error(sp, "arity mismatch: '" + l.proc.name + "' takes "
                    + std::to_string(target->params.size()) + " argument(s)");
      return;
    }
    for (size_t i = 0; i < l.args.size(); ++i) {
      if (!check_expr(l.args[i], n)) continue;
      if (l.args[i].type != target->params[i].type.scalar)
        error(l.args[i].span, "argument " + std::to_string(i + 1) + " of '" + l.proc.name
                                  + "' must be " + sort_name(target->params[i].type.scalar));
    }
  }

  const System & sys_;
  TypedFormula & out_;
  std::vector<Binding> scope_;
};

}  // namespace

TypedFormula typecheck_formula(const Formula & f, const System & sys)
{
  TypedFormula out;
  out.root = f;
  FormulaChecker ck(sys, out);
  ck.check(out.root, 0);
  if (!ck.errors.empty()) throw FrontendError(ck.errors);
  return out;
}

std::vector<TypedProperty> typecheck_properties(const std::vector<Property> & props,
                                                const System & sys)
{
  std::vector<TypedProperty> out;
  std::vector<Diagnostic> errs;
  for (const auto & p : props) {
    try {
      out.push_back({ p.name, typecheck_formula(p.formula, sys) });
    } catch (const FrontendError & e) {
      for (auto d : e.diagnostics()) {
        d.message = "property " + p.name + ": " + d.message;
        errs.push_back(d);
      }
    }
  }
  if (!errs.empty()) throw FrontendError(errs);
  return out;
}

std::vector<TypedProperty> load_properties(const std::string & src, const System & sys)
{
  return typecheck_properties(parse_properties(src), sys);
}

// ---------------------------------------------------------------------------

std::string print_formula(const Formula & f)
{
  switch (f.kind) {
    case FormulaKind::Expr: return print_expr(f.expr);
    case FormulaKind::Not: return "!(" + print_formula(f.kids[0]) + ")";
    case FormulaKind::And:
      return "(" + print_formula(f.kids[0]) + " && " + print_formula(f.kids[1]) + ")";
    case FormulaKind::Forall:
      return "(forall " + f.var + ": " + sort_name(f.var_sort) + ". "
             + print_formula(f.kids[0]) + ")";
    case FormulaKind::Modal: {
      const ModalLabel & l = f.label;
      std::string s = "<" + print_expr(l.sender) + ", " + l.contract + "." + l.proc.name + "(";
      for (size_t i = 0; i < l.args.size(); ++i) {
        if (i) s += ", ";
        s += print_expr(l.args[i]);
      }
      s += "), " + print_expr(l.value);
      if (l.has_delta) s += ", " + print_expr(l.delta);
      return s + "> " + "(" + print_formula(f.kids[0]) + ")";
    }
  }
  return "?";
}

int modal_depth(const Formula & f)
{
  int d = 0;
  for (const auto & k : f.kids) d = std::max(d, modal_depth(k));
  return f.kind == FormulaKind::Modal ? d + 1 : d;
}

namespace {

void visit_exprs(const Formula & f, const std::function<void(const Expr &)> & fn)
{
  std::function<void(const Expr &)> rec = [&](const Expr & e) {
    fn(e);
    for (const auto & k : e.kids) rec(k);
  };
  if (f.kind == FormulaKind::Expr) rec(f.expr);
  if (f.kind == FormulaKind::Modal) {
    rec(f.label.sender);
    rec(f.label.value);
    if (f.label.has_delta) rec(f.label.delta);
    for (const auto & a : f.label.args) rec(a);
  }
  for (const auto & k : f.kids) visit_exprs(k, fn);
}

}  // namespace

bool formula_uses_block_number(const Formula & f)
{
  bool found = false;
  visit_exprs(f, [&](const Expr & e) {
    if (e.kind == ExprKind::BlockNumber) found = true;
  });
  return found;
}

std::vector<std::int64_t> formula_int_literals(const Formula & f)
{
  std::set<std::int64_t> lits;
  visit_exprs(f, [&](const Expr & e) {
    if (e.kind == ExprKind::IntLit) lits.insert(e.num);
  });
  return { lits.begin(), lits.end() };
}

}  // namespace chmc
