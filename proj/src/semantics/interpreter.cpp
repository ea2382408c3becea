#include "chmc/semantics/interpreter.hpp"

namespace chmc {

namespace {

constexpr int kMaxCallDepth = 16;

std::optional<Value> arith(Op op, std::int64_t a, std::int64_t b)
{
  std::int64_t r = 0;
  bool ovf = false;
  switch (op) {
    case Op::Add: ovf = __builtin_add_overflow(a, b, &r); break;
    case Op::Sub: ovf = __builtin_sub_overflow(a, b, &r); break;
    case Op::Mul: ovf = __builtin_mul_overflow(a, b, &r); break;
    default: return std::nullopt;
  }
  if (ovf) return std::nullopt;
  return Value::of_int(r);
}

}  // namespace

std::optional<Value> eval_expr(const System & sys, const Env & env, const ChainState & s,
                               const Expr & e)
{
  switch (e.kind) {
    case ExprKind::Null: return Value::of_addr(0);
    case ExprKind::BoolLit: return Value::of_bool(e.num != 0);
    case ExprKind::IntLit: return Value::of_int(e.num);
    case ExprKind::AddrConst: return Value::of_addr(e.index);
    case ExprKind::Param:
      if (!env.args || e.index >= static_cast<int>(env.args->size())) return std::nullopt;
      return (*env.args)[e.index];
    case ExprKind::Field: return read_field(sys, s, e.owner_index, e.index);
    case ExprKind::MapLookup: {
      auto key = eval_expr(sys, env, s, e.kids[0]);
      if (!key) return std::nullopt;
      return read_field(sys, s, e.owner_index, e.index, static_cast<int>(key->v));
    }
    case ExprKind::Sender: return Value::of_addr(env.sender);
    case ExprKind::Value: return Value::of_int(env.value);
    case ExprKind::This: return Value::of_addr(env.self);
    case ExprKind::BlockNumber: return Value::of_int(s.block_number);
    case ExprKind::Balance: {
      auto a = eval_expr(sys, env, s, e.kids[0]);
      if (!a) return std::nullopt;
      return Value::of_int(s.balance[a->v]);
    }
    case ExprKind::Unary: {
      auto v = eval_expr(sys, env, s, e.kids[0]);
      if (!v) return std::nullopt;
      if (e.op == Op::Not) return Value::of_bool(v->v == 0);
      return arith(Op::Sub, 0, v->v);
    }
    case ExprKind::Binary: {
      auto l = eval_expr(sys, env, s, e.kids[0]);
      if (!l) return std::nullopt;
      if (e.op == Op::And && !l->v) return Value::of_bool(false);
      if (e.op == Op::Or && l->v) return Value::of_bool(true);
      auto r = eval_expr(sys, env, s, e.kids[1]);
      if (!r) return std::nullopt;
      switch (e.op) {
        case Op::Add:
        case Op::Sub:
        case Op::Mul: return arith(e.op, l->v, r->v);
        case Op::Eq: return Value::of_bool(l->v == r->v);
        case Op::Ne: return Value::of_bool(l->v != r->v);
        case Op::Lt: return Value::of_bool(l->v < r->v);
        case Op::Le: return Value::of_bool(l->v <= r->v);
        case Op::Gt: return Value::of_bool(l->v > r->v);
        case Op::Ge: return Value::of_bool(l->v >= r->v);
        case Op::And:
        case Op::Or: return Value::of_bool(r->v != 0);
        default: return std::nullopt;
      }
    }
    default: return std::nullopt;
  }
}

bool exec_stmt_inplace(const System & sys, const Env & env, ChainState & s, const Stmt & st)
{
  switch (st.kind) {
    case StmtKind::Skip: return true;
    case StmtKind::Seq:
      for (const auto & k : st.body)
        if (!exec_stmt_inplace(sys, env, s, k)) return false;
      return true;
    case StmtKind::Require: {
      auto c = eval_expr(sys, env, s, st.exprs[0]);
      return c && c->v;
    }
    case StmtKind::If: {
      auto c = eval_expr(sys, env, s, st.exprs[0]);
      if (!c) return false;
      return exec_stmt_inplace(sys, env, s, st.body[c->v ? 0 : 1]);
    }
    case StmtKind::Assign: {
      auto v = eval_expr(sys, env, s, st.exprs[0]);
      if (!v) return false;
      const FieldDecl & f = sys.decl(env.contract).fields[st.field_index];
      if (f.type.nonneg && v->v < 0) return false;
      s.storage[env.contract][sys.slot_of(env.contract, st.field_index, 0)] = v->v;
      return true;
    }
    case StmtKind::MapAssign: {
      auto k = eval_expr(sys, env, s, st.exprs[0]);
      auto v = eval_expr(sys, env, s, st.exprs[1]);
      if (!k || !v) return false;
      const FieldDecl & f = sys.decl(env.contract).fields[st.field_index];
      if (f.type.nonneg && v->v < 0) return false;
      if (k->v == 0) return true;
      s.storage[env.contract][sys.slot_of(env.contract, st.field_index,
                                          static_cast<int>(k->v))] = v->v;
      return true;
    }
    case StmtKind::Transfer: {
      auto r = eval_expr(sys, env, s, st.exprs[0]);
      auto n = eval_expr(sys, env, s, st.exprs[1]);
      if (!r || !n) return false;
      if (n->v < 0 || r->v == 0 || r->v == env.self || s.balance[env.self] < n->v)
        return false;
      s.balance[env.self] -= n->v;
      s.balance[r->v] += n->v;
      return true;
    }
    case StmtKind::Call: {
      if (env.call_depth >= kMaxCallDepth) return false;
      std::vector<Value> args;
      for (size_t i = 0; i + 1 < st.exprs.size(); ++i) {
        auto a = eval_expr(sys, env, s, st.exprs[i]);
        if (!a) return false;
        args.push_back(*a);
      }
      auto v = eval_expr(sys, env, s, st.exprs.back());
      if (!v) return false;
      int d = st.contract_index;
      int daddr = sys.roster.contract_address(d);
      if (!s.constructed[d]) return false;
      if (v->v < 0 || s.balance[env.self] < v->v || daddr == env.self) return false;
      const Procedure & callee = sys.decl(d).procedures[st.proc_index];
      for (size_t i = 0; i < callee.params.size(); ++i)
        if (callee.params[i].type.nonneg && args[i].v < 0) return false;
      s.balance[env.self] -= v->v;
      s.balance[daddr] += v->v;
      Env inner{ d, daddr, env.self, v->v, &args, env.call_depth + 1 };
      return exec_stmt_inplace(sys, inner, s, callee.body);
    }
  }
  return false;
}

std::optional<ChainState> exec_stmt(const System & sys, const Env & env, const ChainState & s,
                                    const Stmt & st)
{
  ChainState out = s;
  if (!exec_stmt_inplace(sys, env, out, st)) return std::nullopt;
  return out;
}

std::optional<ChainState> apply_tx(const System & sys, const ChainState & s,
                                   const Transaction & tx)
{
  if (tx.proc_id < 0 || tx.proc_id >= static_cast<int>(sys.procs.size())) return std::nullopt;
  const ProcRef & ref = sys.procs[tx.proc_id];
  if (sys.roster.contract_address(ref.contract) != tx.contract) return std::nullopt;
  if (!sys.roster.is_user(tx.sender)) return std::nullopt;
  if (tx.value < 0 || tx.block_delta < 0) return std::nullopt;
  const Procedure & p = sys.proc(tx.proc_id);
  bool constructed = s.constructed[ref.contract] != 0;
  if (p.is_constructor() == constructed) return std::nullopt;
  if (tx.args.size() != p.params.size()) return std::nullopt;
  for (size_t i = 0; i < p.params.size(); ++i) {
    const Value & a = tx.args[i];
    if (a.sort != p.params[i].type.scalar) return std::nullopt;
    if (p.params[i].type.nonneg && a.v < 0) return std::nullopt;
    if (a.sort == Sort::Address && (a.v < 0 || a.v >= sys.roster.num_values()))
      return std::nullopt;
    if (a.sort == Sort::Bool && a.v != 0 && a.v != 1) return std::nullopt;
  }
  if (s.balance[tx.sender] < tx.value) return std::nullopt;
  ChainState out = s;
  if (__builtin_add_overflow(out.block_number, tx.block_delta, &out.block_number))
    return std::nullopt;
  out.balance[tx.sender] -= tx.value;
  out.balance[tx.contract] += tx.value;
  Env env{ ref.contract, tx.contract, tx.sender, tx.value, &tx.args, 0 };
  if (!exec_stmt_inplace(sys, env, out, p.body)) return std::nullopt;
  if (p.is_constructor()) out.constructed[ref.contract] = 1;
  return out;
}

FlaggedState step_flagged(const System & sys, const FlaggedState & s, const Transaction & tx)
{
  auto next = apply_tx(sys, s.state, tx);
  if (!next) return { s.state, true };
  return { std::move(*next), false };
}

}  // namespace chmc
