#include "chmc/contract/parser.hpp"

#include <set>

namespace chmc {

namespace {

Expr make(ExprKind k, Span sp)
{
  Expr e;
  e.kind = k;
  e.span = sp;
  return e;
}

Expr make_binary(Op op, Expr l, Expr r, Span sp)
{
  Expr e = make(ExprKind::Binary, sp);
  e.op = op;
  e.kids.push_back(std::move(l));
  e.kids.push_back(std::move(r));
  return e;
}

}  // namespace

Expr ExprParser::parse_expr() { return parse_or(); }

Expr ExprParser::parse_or()
{
  Expr l = parse_and();
  while (ts_.is("||")) {
    Span sp = ts_.next().span;
    l = make_binary(Op::Or, std::move(l), parse_and(), sp);
  }
  return l;
}

Expr ExprParser::parse_and()
{
  Expr l = parse_equality();
  while (ts_.is("&&")) {
    Span sp = ts_.next().span;
    l = make_binary(Op::And, std::move(l), parse_equality(), sp);
  }
  return l;
}

Expr ExprParser::parse_equality()
{
  Expr l = parse_relational();
  while (ts_.is("==") || ts_.is("!=")) {
    const Token & t = ts_.next();
    Op op = t.text == "==" ? Op::Eq : Op::Ne;
    l = make_binary(op, std::move(l), parse_relational(), t.span);
  }
  return l;
}

Expr ExprParser::parse_relational()
{
  Expr l = parse_additive();
  while (ts_.is("<") || ts_.is("<=") || ts_.is(">") || ts_.is(">=")) {
    const Token & t = ts_.next();
    Op op = t.text == "<"    ? Op::Lt
            : t.text == "<=" ? Op::Le
            : t.text == ">"  ? Op::Gt
                             : Op::Ge;
    l = make_binary(op, std::move(l), parse_additive(), t.span);
  }
  return l;
}

Expr ExprParser::parse_additive()
{
  Expr l = parse_mul();
  while (ts_.is("+") || ts_.is("-")) {
    const Token & t = ts_.next();
    Op op = t.text == "+" ? Op::Add : Op::Sub;
    l = make_binary(op, std::move(l), parse_mul(), t.span);
  }
  return l;
}

Expr ExprParser::parse_mul()
{
  Expr l = parse_unary();
  while (ts_.is("*")) {
    Span sp = ts_.next().span;
    l = make_binary(Op::Mul, std::move(l), parse_unary(), sp);
  }
  return l;
}

Expr ExprParser::parse_unary()
{
  if (ts_.is("!") || ts_.is("-")) {
    const Token & t = ts_.next();
    Expr e = make(ExprKind::Unary, t.span);
    e.op = t.text == "!" ? Op::Not : Op::Neg;
    e.kids.push_back(parse_unary());
    return e;
  }
  return parse_postfix();
}

Expr ExprParser::parse_postfix()
{
  Expr e = parse_primary();
  for (;;) {
    if (ts_.is("[")) {
      Span sp = ts_.next().span;
      Expr key = parse_expr();
      ts_.expect("]");
      Expr idx = make(ExprKind::Index, sp);
      idx.kids.push_back(std::move(e));
      idx.kids.push_back(std::move(key));
      e = std::move(idx);
      continue;
    }
    if (ts_.is(".") && ts_.is_ident(1)) {
      const std::string & member = ts_.peek(1).text;
      if (member == "balance") {
        Span sp = ts_.next().span;
        ts_.next();
        Expr b = make(ExprKind::Balance, sp);
        b.kids.push_back(std::move(e));
        e = std::move(b);
        continue;
      }
      // `x.transfer(...)` and `C.f(...)` are statement forms handled by the
      // caller; only a bare name can own a field.
      if (e.kind == ExprKind::Name && member != "transfer"
          && !ts_.is("(", 2)) {
        ts_.next();
        const Token & m = ts_.next();
        Expr mem = make(ExprKind::Member, e.span);
        mem.owner = e.name;
        mem.name = m.text;
        e = std::move(mem);
        continue;
      }
    }
    break;
  }
  return e;
}

Expr ExprParser::parse_primary()
{
  const Token & t = ts_.peek();
  if (t.kind == TokKind::Number) {
    ts_.next();
    Expr e = make(ExprKind::IntLit, t.span);
    e.num = t.number;
    return e;
  }
  if (ts_.accept("(")) {
    Expr e = parse_expr();
    ts_.expect(")");
    return e;
  }
  if (t.kind != TokKind::Ident) ts_.fail("expected expression");
  Span sp = t.span;
  std::string w = t.text;
  ts_.next();
  if (w == "true" || w == "false") {
    Expr e = make(ExprKind::BoolLit, sp);
    e.num = w == "true" ? 1 : 0;
    return e;
  }
  if (w == "null") return make(ExprKind::Null, sp);
  if (w == "this") return make(ExprKind::This, sp);
  if (w == "sender") return make(ExprKind::Sender, sp);
  if (w == "value") return make(ExprKind::Value, sp);
  if (w == "last_reverted") return make(ExprKind::LastReverted, sp);
  if (w == "msg") {
    ts_.expect(".");
    const Token & m = ts_.expect_ident("'sender' or 'value'");
    if (m.text == "sender") return make(ExprKind::Sender, sp);
    if (m.text == "value") return make(ExprKind::Value, sp);
    throw FrontendError(m.span, "unknown member msg." + m.text);
  }
  if (w == "block") {
    ts_.expect(".");
    const Token & m = ts_.expect_ident("'number'");
    if (m.text != "number")
      throw FrontendError(m.span, "unknown member block." + m.text);
    return make(ExprKind::BlockNumber, sp);
  }
  if (w == "balance") {
    Expr e = make(ExprKind::Balance, sp);
    if (ts_.accept("[")) {
      e.kids.push_back(parse_expr());
      ts_.expect("]");
    }
    return e;
  }
  if (w == "old") {
    ts_.expect("(");
    Expr e = make(ExprKind::Old, sp);
    e.kids.push_back(parse_expr());
    ts_.expect(")");
    return e;
  }
  if (w == "address" && ts_.is("(")) {
    ts_.next();
    Expr inner = parse_expr();
    ts_.expect(")");
    if (inner.kind == ExprKind::IntLit && inner.num == 0)
      return make(ExprKind::Null, sp);
    return inner;
  }
  Expr e = make(ExprKind::Name, sp);
  e.name = w;
  return e;
}

namespace {

class ContractParser
{
 public:
  explicit ContractParser(TokenStream & ts) : ts_(ts), ep_(ts) {}

  ContractDecl parse_contract()
  {
    ContractDecl c;
    c.span = ts_.expect("contract").span;
    c.name = ts_.expect_ident("contract name").text;
    ts_.expect("{");
    std::set<std::string> seen;
    while (!ts_.accept("}")) {
      if (ts_.at_end()) ts_.fail("expected '}'");
      if (is_type_start()) {
        c.fields.push_back(parse_field());
      } else {
        Procedure p = parse_procedure();
        if (!seen.insert(p.name).second)
          throw FrontendError(p.span, "duplicate procedure '" + p.name + "'");
        c.procedures.push_back(std::move(p));
      }
    }
    return c;
  }

 private:
  bool is_type_start() const
  {
    if (!ts_.is_ident()) return false;
    const std::string & w = ts_.peek().text;
    return w == "bool" || w == "int" || w == "uint" || w == "address"
           || w == "mapping" || w == "int256" || w == "uint256";
  }

  ContractType parse_scalar_type()
  {
    const Token & t = ts_.expect_ident("type");
    ContractType ty;
    if (t.text == "bool") {
      ty.scalar = Sort::Bool;
    } else if (t.text == "int" || t.text == "int256") {
      ty.scalar = Sort::Int;
    } else if (t.text == "uint" || t.text == "uint256") {
      ty.scalar = Sort::Int;
      ty.nonneg = true;
    } else if (t.text == "address") {
      ty.scalar = Sort::Address;
      ts_.accept("payable");
    } else {
      throw FrontendError(t.span, "unknown type '" + t.text + "'");
    }
    return ty;
  }

  ContractType parse_type()
  {
    if (ts_.is("mapping")) {
      ts_.next();
      ts_.expect("(");
      const Token & k = ts_.expect_ident("key type");
      if (k.text != "address")
        throw FrontendError(k.span, "map keys must be addresses");
      ts_.expect("=>");
      ContractType ty = parse_scalar_type();
      ts_.expect(")");
      ty.is_map = true;
      return ty;
    }
    return parse_scalar_type();
  }

  FieldDecl parse_field()
  {
    FieldDecl f;
    f.span = ts_.peek().span;
    f.type = parse_type();
    while (ts_.is("public") || ts_.is("private")) ts_.next();
    f.name = ts_.expect_ident("field name").text;
    ts_.expect(";");
    return f;
  }

  Procedure parse_procedure()
  {
    Procedure p;
    p.span = ts_.peek().span;
    ts_.accept("function");
    p.name = ts_.expect_ident("procedure name").text;
    ts_.expect("(");
    if (!ts_.is(")")) {
      do {
        Param prm;
        prm.span = ts_.peek().span;
        prm.type = parse_scalar_type();
        prm.name = ts_.expect_ident("parameter name").text;
        p.params.push_back(std::move(prm));
      } while (ts_.accept(","));
    }
    ts_.expect(")");
    for (;;) {
      if (ts_.accept("payable")) {
        p.payable = true;
      } else if (ts_.is("public") || ts_.is("external")) {
        ts_.next();
      } else {
        break;
      }
    }
    p.body = parse_block();
    return p;
  }

  Stmt parse_block()
  {
    Stmt s;
    s.kind = StmtKind::Seq;
    s.span = ts_.expect("{").span;
    while (!ts_.accept("}")) {
      if (ts_.at_end()) ts_.fail("expected '}'");
      s.body.push_back(parse_stmt());
    }
    return s;
  }

  Stmt parse_branch()
  {
    if (ts_.is("{")) return parse_block();
    Stmt s;
    s.kind = StmtKind::Seq;
    s.span = ts_.peek().span;
    s.body.push_back(parse_stmt());
    return s;
  }

  Stmt parse_stmt()
  {
    Stmt s;
    s.span = ts_.peek().span;
    if (ts_.is("{")) return parse_block();
    if (ts_.accept("skip")) {
      ts_.expect(";");
      s.kind = StmtKind::Skip;
      return s;
    }
    if (ts_.accept("require")) {
      s.kind = StmtKind::Require;
      ts_.expect("(");
      s.exprs.push_back(ep_.parse_expr());
      ts_.expect(")");
      ts_.expect(";");
      return s;
    }
    if (ts_.accept("if")) {
      s.kind = StmtKind::If;
      ts_.expect("(");
      s.exprs.push_back(ep_.parse_expr());
      ts_.expect(")");
      s.body.push_back(parse_branch());
      if (ts_.accept("else")) {
        s.body.push_back(parse_branch());
      } else {
        Stmt empty;
        empty.kind = StmtKind::Seq;
        empty.span = s.span;
        s.body.push_back(std::move(empty));
      }
      return s;
    }
    // call: C.f(args) [value e];
    if (ts_.is_ident() && ts_.is(".", 1) && ts_.is_ident(2) && ts_.is("(", 3)
        && ts_.peek(2).text != "transfer") {
      s.kind = StmtKind::Call;
      s.target = ts_.next().text;
      ts_.next();
      s.proc = ts_.next().text;
      ts_.expect("(");
      if (!ts_.is(")")) {
        do {
          s.exprs.push_back(ep_.parse_expr());
        } while (ts_.accept(","));
      }
      ts_.expect(")");
      if (ts_.accept("value")) {
        s.exprs.push_back(ep_.parse_expr());
      } else {
        Expr zero;
        zero.kind = ExprKind::IntLit;
        zero.span = s.span;
        s.exprs.push_back(zero);
      }
      ts_.expect(";");
      return s;
    }
    Expr lhs = ep_.parse_postfix();
    if (ts_.is(".") && ts_.is("transfer", 1)) {
      ts_.next();
      ts_.next();
      s.kind = StmtKind::Transfer;
      ts_.expect("(");
      s.exprs.push_back(std::move(lhs));
      s.exprs.push_back(ep_.parse_expr());
      ts_.expect(")");
      ts_.expect(";");
      return s;
    }
    if (ts_.is("=") || ts_.is("+=") || ts_.is("-=")) {
      const Token & opt = ts_.next();
      std::string op = opt.text;
      Expr rhs = ep_.parse_expr();
      ts_.expect(";");
      if (op != "=") {
        Expr copy = lhs;
        rhs = make_binary(op == "+=" ? Op::Add : Op::Sub, std::move(copy),
                          std::move(rhs), opt.span);
      }
      if (lhs.kind == ExprKind::Balance)
        throw FrontendError(lhs.span, "assignment to balance");
      if (lhs.kind == ExprKind::Name) {
        s.kind = StmtKind::Assign;
        s.target = lhs.name;
        s.exprs.push_back(std::move(rhs));
        return s;
      }
      if (lhs.kind == ExprKind::Index && lhs.kids[0].kind == ExprKind::Name) {
        s.kind = StmtKind::MapAssign;
        s.target = lhs.kids[0].name;
        s.exprs.push_back(std::move(lhs.kids[1]));
        s.exprs.push_back(std::move(rhs));
        return s;
      }
      throw FrontendError(lhs.span, "invalid assignment target");
    }
    ts_.fail("expected statement");
  }

  TokenStream & ts_;
  ExprParser ep_;
};

}  // namespace

std::vector<ContractDecl> parse_contracts(std::string_view src)
{
  TokenStream ts(tokenize(src));
  std::vector<ContractDecl> out;
  ContractParser cp(ts);
  while (!ts.at_end()) {
    out.push_back(cp.parse_contract());
  }
  if (out.empty()) ts.fail("expected 'contract'");
  return out;
}

ContractDecl parse_contract(std::string_view src)
{
  auto all = parse_contracts(src);
  if (all.size() != 1)
    throw FrontendError(all[1].span, "expected exactly one contract");
  return std::move(all[0]);
}

// ---------------------------------------------------------------------------
// printing

namespace {

int prec(const Expr & e)
{
  if (e.kind != ExprKind::Binary) return 10;
  switch (e.op) {
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::Eq:
    case Op::Ne: return 3;
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge: return 4;
    case Op::Add:
    case Op::Sub: return 5;
    case Op::Mul: return 6;
    default: return 10;
  }
}

std::string wrap(const Expr & e, int min_prec)
{
  std::string s = print_expr(e);
  if (prec(e) < min_prec) return "(" + s + ")";
  return s;
}

}  // namespace

std::string print_expr(const Expr & e)
{
  switch (e.kind) {
    case ExprKind::Null: return "null";
    case ExprKind::BoolLit: return e.num ? "true" : "false";
    case ExprKind::IntLit: return std::to_string(e.num);
    case ExprKind::Name:
    case ExprKind::AddrConst:
    case ExprKind::Param:
    case ExprKind::ProcConst:
    case ExprKind::BoundVar: return e.name;
    case ExprKind::Member: return e.owner + "." + e.name;
    case ExprKind::Field:
      return e.owner.empty() ? e.name : e.owner + "." + e.name;
    case ExprKind::Index:
      return print_expr(e.kids[0]) + "[" + print_expr(e.kids[1]) + "]";
    case ExprKind::MapLookup:
      return (e.owner.empty() ? e.name : e.owner + "." + e.name) + "["
             + print_expr(e.kids[0]) + "]";
    case ExprKind::Sender: return "sender";
    case ExprKind::Value: return "value";
    case ExprKind::This: return "this";
    case ExprKind::BlockNumber: return "block.number";
    case ExprKind::Balance:
      if (e.kids.empty()) return "balance";
      return "balance[" + print_expr(e.kids[0]) + "]";
    case ExprKind::Unary: {
      std::string inner = print_expr(e.kids[0]);
      if (e.kids[0].kind == ExprKind::Binary) inner = "(" + inner + ")";
      return std::string(op_text(e.op)) + inner;
    }
    case ExprKind::Binary: {
      int p = prec(e);
      return wrap(e.kids[0], p) + " " + op_text(e.op) + " "
             + wrap(e.kids[1], p + 1);
    }
    case ExprKind::Old: return "old(" + print_expr(e.kids[0]) + ")";
    case ExprKind::LastReverted: return "last_reverted";
  }
  return "?";
}

std::string print_stmt(const Stmt & s, int indent)
{
  std::string pad(indent, ' ');
  switch (s.kind) {
    case StmtKind::Skip: return pad + "skip;\n";
    case StmtKind::Require:
      return pad + "require(" + print_expr(s.exprs[0]) + ");\n";
    case StmtKind::Assign:
      return pad + s.target + " = " + print_expr(s.exprs[0]) + ";\n";
    case StmtKind::MapAssign:
      return pad + s.target + "[" + print_expr(s.exprs[0])
             + "] = " + print_expr(s.exprs[1]) + ";\n";
    case StmtKind::Transfer: {
      std::string r = print_expr(s.exprs[0]);
      if (s.exprs[0].kind == ExprKind::Binary) r = "(" + r + ")";
      return pad + r + ".transfer(" + print_expr(s.exprs[1]) + ");\n";
    }
    case StmtKind::Seq: {
      std::string out = pad + "{\n";
      for (const auto & k : s.body) out += print_stmt(k, indent + 2);
      return out + pad + "}\n";
    }
    case StmtKind::If: {
      std::string out = pad + "if (" + print_expr(s.exprs[0]) + ")\n";
      out += print_stmt(s.body[0], indent);
      out += pad + "else\n";
      out += print_stmt(s.body[1], indent);
      return out;
    }
    case StmtKind::Call: {
      std::string out = pad + s.target + "." + s.proc + "(";
      for (size_t i = 0; i + 1 < s.exprs.size(); ++i) {
        if (i) out += ", ";
        out += print_expr(s.exprs[i]);
      }
      return out + ") value " + print_expr(s.exprs.back()) + ";\n";
    }
  }
  return "";
}

std::string print_contract(const ContractDecl & c)
{
  std::string out = "contract " + c.name + " {\n";
  for (const auto & f : c.fields)
    out += "  " + type_name(f.type) + " " + f.name + ";\n";
  for (const auto & p : c.procedures) {
    if (p.synthesized) continue;
    out += "  function " + p.name + "(";
    for (size_t i = 0; i < p.params.size(); ++i) {
      if (i) out += ", ";
      out += type_name(p.params[i].type) + " " + p.params[i].name;
    }
    out += ")";
    if (p.payable) out += " payable";
    out += "\n";
    Stmt body = p.body;
    std::erase_if(body.body, [](const Stmt & s) { return s.implicit; });
    out += print_stmt(body, 2);
  }
  return out + "}\n";
}

}  // namespace chmc
