#include "chmc/fol/encoder.hpp"

#include <cctype>

namespace chmc::fol {

namespace {

std::string sanitize(const std::string & s)
{
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  return out;
}

}  // namespace

std::string TransitionSystem::copy_name(const std::string & base, const std::string & suffix)
{
  return suffix.empty() ? base : base + "__" + suffix;
}

TransitionSystem::TransitionSystem(TermManager & tm, const System & sys, std::int64_t user_balance)
  : tm_(tm), sys_(sys), user_balance_(user_balance)
{
  for (const auto & c : sys.contracts)
    if (c.uses_calls) throw EncodeError("contract " + c.decl.name + " uses procedure calls, which the encoder does not support");

  const Roster & r = sys.roster;
  sl_.balance.assign(r.num_values(), -1);
  for (int id = 1; id < r.num_values(); ++id) {
    sl_.balance[id] = static_cast<int>(sl_.vars.size());
    sl_.vars.push_back({ "bal_" + sanitize(r.name_of(id)), Sort::Int });
  }
  for (std::size_t c = 0; c < sys.contracts.size(); ++c) {
    const ContractDecl & d = sys.decl(static_cast<int>(c));
    sl_.constructed.push_back(static_cast<int>(sl_.vars.size()));
    sl_.vars.push_back({ "ctor_" + sanitize(d.name), Sort::Bool });
    sl_.slot.emplace_back(sys.slot_count[c], -1);
    for (std::size_t f = 0; f < d.fields.size(); ++f) {
      const FieldDecl & fd = d.fields[f];
      std::string base = "fld_" + sanitize(d.name) + "_" + sanitize(fd.name);
      if (!fd.type.is_map) {
        sl_.slot[c][sys.slot_of(static_cast<int>(c), static_cast<int>(f), 0)] = static_cast<int>(sl_.vars.size());
        sl_.vars.push_back({ base, fd.type.scalar });
      } else {
        for (int id = 1; id < r.num_values(); ++id) {
          sl_.slot[c][sys.slot_of(static_cast<int>(c), static_cast<int>(f), id)] = static_cast<int>(sl_.vars.size());
          sl_.vars.push_back({ base + "_" + sanitize(r.name_of(id)), fd.type.scalar });
        }
      }
    }
  }
  sl_.block = static_cast<int>(sl_.vars.size());
  sl_.vars.push_back({ "block_number", Sort::Int });
  sl_.reverted = static_cast<int>(sl_.vars.size());
  sl_.vars.push_back({ "reverted", Sort::Bool });

  auto add_tx = [&](const std::string & n, Sort s) {
    tl_.vars.push_back({ n, s });
    return static_cast<int>(tl_.vars.size()) - 1;
  };
  tl_.sender = add_tx("tx_sender", Sort::Address);
  tl_.value = add_tx("tx_value", Sort::Int);
  tl_.contract = add_tx("tx_contract", Sort::Address);
  tl_.proc = add_tx("tx_proc", Sort::Proc);
  tl_.delta = add_tx("tx_delta", Sort::Int);
  for (std::size_t p = 0; p < sys.procs.size(); ++p) {
    const ProcRef & ref = sys.procs[p];
    const Procedure & proc = sys.proc(static_cast<int>(p));
    std::vector<int> idx;
    for (const auto & prm : proc.params)
      idx.push_back(add_tx("arg_" + sanitize(sys.decl(ref.contract).name) + "_" + sanitize(ref.name) + "_" + sanitize(prm.name),
                           prm.type.scalar));
    tl_.params.push_back(std::move(idx));
  }

  s_ = state_vars("");
  t_ = tx_vars("");
  nx_ = state_vars("next");

  init_ = init_on(s_);

  for (std::size_t p = 0; p < sys.procs.size(); ++p) {
    TxTerms tx{ t_[tl_.sender], t_[tl_.value], t_[tl_.delta], {} };
    for (int i : tl_.params[p]) tx.args.push_back(t_[i]);
    next_by_proc_.push_back(encode_procedure(static_cast<int>(p), s_, tx));
  }

  // switch over the callee address, then over the procedure
  StateTerms frame = invalid_step(s_);
  next_ = frame;
  for (int c = static_cast<int>(sys.contracts.size()) - 1; c >= 0; --c) {
    StateTerms inner = frame;
    for (int p = static_cast<int>(sys.procs.size()) - 1; p >= 0; --p) {
      if (sys.procs[p].contract != c) continue;
      Term g = tm_.mk_eq(t_[tl_.proc], tm_.mk_proc(p));
      for (std::size_t i = 0; i < inner.size(); ++i) inner[i] = tm_.mk_ite(g, next_by_proc_[p][i], inner[i]);
    }
    Term g = tm_.mk_eq(t_[tl_.contract], tm_.mk_addr(r.contract_address(c)));
    for (std::size_t i = 0; i < next_.size(); ++i) next_[i] = tm_.mk_ite(g, inner[i], next_[i]);
  }
  std::vector<Term> eqs;
  for (std::size_t i = 0; i < nx_.size(); ++i) eqs.push_back(tm_.mk_eq(nx_[i], next_[i]));
  trans_ = tm_.mk_and(eqs);
}

StateTerms TransitionSystem::state_vars(const std::string & suffix) const
{
  StateTerms out;
  for (const auto & v : sl_.vars) out.push_back(tm_.mk_var(copy_name(v.name, suffix), v.sort));
  return out;
}

std::vector<Term> TransitionSystem::tx_vars(const std::string & suffix) const
{
  std::vector<Term> out;
  for (const auto & v : tl_.vars) out.push_back(tm_.mk_var(copy_name(v.name, suffix), v.sort));
  return out;
}

Term TransitionSystem::domain_of(Term var) const
{
  int n = 0;
  if (var->sort == Sort::Address) n = sys_.roster.num_values();
  else if (var->sort == Sort::Proc) n = static_cast<int>(sys_.procs.size());
  else return tm_.mk_true();
  std::vector<Term> alts;
  for (int i = 0; i < n; ++i) alts.push_back(tm_.mk_eq(var, tm_.mk_const(var->sort, i)));
  return tm_.mk_or(alts);
}

Term TransitionSystem::state_domain(const StateTerms & s) const
{
  std::vector<Term> cs;
  for (Term v : s) cs.push_back(domain_of(v));
  return tm_.mk_and(cs);
}

Term TransitionSystem::tx_domain(const std::vector<Term> & t) const
{
  std::vector<Term> cs;
  for (Term v : t) cs.push_back(domain_of(v));
  return tm_.mk_and(cs);
}

Term TransitionSystem::init_on(const StateTerms & s) const
{
  std::vector<Term> cs;
  const Roster & r = sys_.roster;
  for (int id = 1; id < r.num_values(); ++id)
    cs.push_back(tm_.mk_eq(s[sl_.balance[id]], tm_.mk_int(r.is_user(id) ? user_balance_ : 0)));
  for (std::size_t c = 0; c < sys_.contracts.size(); ++c) {
    cs.push_back(tm_.mk_eq(s[sl_.constructed[c]], tm_.mk_bool(sys_.contracts[c].starts_constructed)));
    for (int i : sl_.slot[c]) cs.push_back(tm_.mk_eq(s[i], tm_.mk_const(s[i]->sort, 0)));
  }
  cs.push_back(tm_.mk_eq(s[sl_.block], tm_.mk_int(0)));
  cs.push_back(tm_.mk_not(s[sl_.reverted]));
  return tm_.mk_and(cs);
}

Term TransitionSystem::trans_on(const StateTerms & pre, const std::vector<Term> & tx, const StateTerms & post) const
{
  std::unordered_map<Term, Term> m;
  for (std::size_t i = 0; i < s_.size(); ++i) {
    m[s_[i]] = pre[i];
    m[nx_[i]] = post[i];
  }
  for (std::size_t i = 0; i < t_.size(); ++i) m[t_[i]] = tx[i];
  return tm_.subst(trans_, m);
}

StateTerms TransitionSystem::invalid_step(const StateTerms & state) const
{
  StateTerms out = state;
  out[sl_.reverted] = tm_.mk_true();
  return out;
}

StateTerms TransitionSystem::step(const StateTerms & state, int proc, const TxTerms & tx) const
{
  std::unordered_map<Term, Term> m;
  for (std::size_t i = 0; i < s_.size(); ++i) m[s_[i]] = state[i];
  m[t_[tl_.sender]] = tx.sender;
  m[t_[tl_.value]] = tx.value;
  m[t_[tl_.delta]] = tx.delta;
  const auto & params = tl_.params[proc];
  if (tx.args.size() != params.size()) return invalid_step(state);
  for (std::size_t i = 0; i < params.size(); ++i) m[t_[params[i]]] = tx.args[i];
  return tm_.subst(next_by_proc_[proc], m);
}

Term TransitionSystem::addr_is_user(Term a) const
{
  std::vector<Term> alts;
  for (int id = 1; id < sys_.roster.num_values(); ++id)
    if (sys_.roster.is_user(id)) alts.push_back(tm_.mk_eq(a, tm_.mk_addr(id)));
  return tm_.mk_or(alts);
}

Term TransitionSystem::read_map(int contract, int field, Term key, const StateTerms & state) const
{
  Sort s = sys_.decl(contract).fields[field].type.scalar;
  Term dflt = tm_.mk_const(s, 0);
  if (key->op == Op::Const) {
    if (key->value == 0) return dflt;
    return state[sl_.slot[contract][sys_.slot_of(contract, field, static_cast<int>(key->value))]];
  }
  Term out = dflt;
  for (int id = sys_.roster.num_values() - 1; id >= 1; --id)
    out = tm_.mk_ite(tm_.mk_eq(key, tm_.mk_addr(id)), state[sl_.slot[contract][sys_.slot_of(contract, field, id)]], out);
  return out;
}

Term TransitionSystem::read_balance(Term addr, const StateTerms & state) const
{
  if (addr->op == Op::Const) return addr->value == 0 ? tm_.mk_int(0) : state[sl_.balance[addr->value]];
  Term out = tm_.mk_int(0);
  for (int id = sys_.roster.num_values() - 1; id >= 1; --id)
    out = tm_.mk_ite(tm_.mk_eq(addr, tm_.mk_addr(id)), state[sl_.balance[id]], out);
  return out;
}

Term TransitionSystem::encode_expr(const Expr & e, int contract, const StateTerms & st, const TxTerms & tx) const
{
  auto rec = [&](const Expr & k) { return encode_expr(k, contract, st, tx); };
  switch (e.kind) {
    case ExprKind::Null: return tm_.mk_addr(0);
    case ExprKind::BoolLit: return tm_.mk_bool(e.num != 0);
    case ExprKind::IntLit: return tm_.mk_int(e.num);
    case ExprKind::AddrConst: return tm_.mk_addr(e.index);
    case ExprKind::ProcConst: return tm_.mk_proc(e.index);
    case ExprKind::Param:
      if (e.index < 0 || e.index >= static_cast<int>(tx.args.size())) throw EncodeError("parameter out of range");
      return tx.args[e.index];
    case ExprKind::Field:
      return st[sl_.slot[e.owner_index][sys_.slot_of(e.owner_index, e.index, 0)]];
    case ExprKind::MapLookup: return read_map(e.owner_index, e.index, rec(e.kids[0]), st);
    case ExprKind::Sender: return tx.sender;
    case ExprKind::Value: return tx.value;
    case ExprKind::This: return tm_.mk_addr(sys_.roster.contract_address(contract));
    case ExprKind::BlockNumber: return st[sl_.block];
    case ExprKind::Balance: return read_balance(rec(e.kids[0]), st);
    case ExprKind::Unary: {
      Term v = rec(e.kids[0]);
      return e.op == chmc::Op::Not ? tm_.mk_not(v) : tm_.mk_neg(v);
    }
    case ExprKind::Binary: {
      Term l = rec(e.kids[0]);
      Term r = rec(e.kids[1]);
      switch (e.op) {
        case chmc::Op::Add: return tm_.mk_add(l, r);
        case chmc::Op::Sub: return tm_.mk_sub(l, r);
        case chmc::Op::Mul: return tm_.mk_mul(l, r);
        case chmc::Op::Eq: return tm_.mk_eq(l, r);
        case chmc::Op::Ne: return tm_.mk_not(tm_.mk_eq(l, r));
        case chmc::Op::Lt: return tm_.mk_lt(l, r);
        case chmc::Op::Le: return tm_.mk_le(l, r);
        case chmc::Op::Gt: return tm_.mk_gt(l, r);
        case chmc::Op::Ge: return tm_.mk_ge(l, r);
        case chmc::Op::And: return tm_.mk_and(l, r);
        case chmc::Op::Or: return tm_.mk_or(l, r);
        default: break;
      }
      break;
    }
    default: break;
  }
  throw EncodeError("unsupported expression in contract code");
}

StmtEnc TransitionSystem::encode_statement(const Stmt & st, int contract, const StateTerms & state, const TxTerms & tx) const
{
  StmtEnc r{ state, tm_.mk_false() };
  const ContractDecl & d = sys_.decl(contract);
  switch (st.kind) {
    case StmtKind::Skip: return r;
    case StmtKind::Seq: {
      std::vector<Term> fails;
      for (const auto & k : st.body) {
        StmtEnc e = encode_statement(k, contract, r.out, tx);
        r.out = std::move(e.out);
        fails.push_back(e.fail);
      }
      r.fail = tm_.mk_or(fails);
      return r;
    }
    case StmtKind::Require:
      r.fail = tm_.mk_not(encode_expr(st.exprs[0], contract, state, tx));
      return r;
    case StmtKind::If: {
      Term c = encode_expr(st.exprs[0], contract, state, tx);
      StmtEnc a = encode_statement(st.body[0], contract, state, tx);
      StmtEnc b = encode_statement(st.body[1], contract, state, tx);
      for (std::size_t i = 0; i < state.size(); ++i) r.out[i] = tm_.mk_ite(c, a.out[i], b.out[i]);
      r.fail = tm_.mk_ite(c, a.fail, b.fail);
      return r;
    }
    case StmtKind::Assign: {
      Term v = encode_expr(st.exprs[0], contract, state, tx);
      const FieldDecl & f = d.fields[st.field_index];
      if (f.type.nonneg) r.fail = tm_.mk_lt(v, tm_.mk_int(0));
      r.out[sl_.slot[contract][sys_.slot_of(contract, st.field_index, 0)]] = v;
      return r;
    }
    case StmtKind::MapAssign: {
      Term k = encode_expr(st.exprs[0], contract, state, tx);
      Term v = encode_expr(st.exprs[1], contract, state, tx);
      const FieldDecl & f = d.fields[st.field_index];
      if (f.type.nonneg) r.fail = tm_.mk_lt(v, tm_.mk_int(0));
      for (int id = 1; id < sys_.roster.num_values(); ++id) {
        int i = sl_.slot[contract][sys_.slot_of(contract, st.field_index, id)];
        r.out[i] = tm_.mk_ite(tm_.mk_eq(k, tm_.mk_addr(id)), v, state[i]);
      }
      return r;
    }
    case StmtKind::Transfer: {
      Term to = encode_expr(st.exprs[0], contract, state, tx);
      Term n = encode_expr(st.exprs[1], contract, state, tx);
      int self = sys_.roster.contract_address(contract);
      Term self_t = tm_.mk_addr(self);
      Term sb = state[sl_.balance[self]];
      Term enabled = tm_.mk_and({ tm_.mk_le(tm_.mk_int(0), n), tm_.mk_not(tm_.mk_eq(to, tm_.mk_addr(0))),
                                  tm_.mk_not(tm_.mk_eq(to, self_t)), tm_.mk_le(n, sb) });
      r.fail = tm_.mk_not(enabled);
      r.out[sl_.balance[self]] = tm_.mk_sub(sb, n);
      for (int id = 1; id < sys_.roster.num_values(); ++id) {
        if (id == self) continue;
        int i = sl_.balance[id];
        r.out[i] = tm_.mk_ite(tm_.mk_eq(to, tm_.mk_addr(id)), tm_.mk_add(state[i], n), state[i]);
      }
      return r;
    }
    case StmtKind::Call: throw EncodeError("procedure calls are not supported by the encoder");
  }
  return r;
}

Term TransitionSystem::statement_relation(const Stmt & st, int contract, const StateTerms & pre, const TxTerms & tx,
                                          const StateTerms & post) const
{
  StmtEnc e = encode_statement(st, contract, pre, tx);
  std::vector<Term> cs{ tm_.mk_not(e.fail) };
  for (std::size_t i = 0; i < post.size(); ++i)
    if (static_cast<int>(i) != sl_.reverted) cs.push_back(tm_.mk_eq(post[i], e.out[i]));
  return tm_.mk_and(cs);
}

StateTerms TransitionSystem::encode_procedure(int proc, const StateTerms & s, const TxTerms & tx) const
{
  const ProcRef & ref = sys_.procs[proc];
  const Procedure & p = sys_.proc(proc);
  int self = sys_.roster.contract_address(ref.contract);
  Term zero = tm_.mk_int(0);

  std::vector<Term> valid{ addr_is_user(tx.sender), tm_.mk_le(zero, tx.value), tm_.mk_le(zero, tx.delta) };
  Term ctor = s[sl_.constructed[ref.contract]];
  valid.push_back(p.is_constructor() ? tm_.mk_not(ctor) : ctor);
  for (std::size_t i = 0; i < p.params.size(); ++i)
    if (p.params[i].type.nonneg) valid.push_back(tm_.mk_le(zero, tx.args[i]));
  valid.push_back(tm_.mk_le(tx.value, read_balance(tx.sender, s)));

  StateTerms s0 = s;
  s0[sl_.block] = tm_.mk_add(s[sl_.block], tx.delta);
  for (int id = 1; id < sys_.roster.num_values(); ++id)
    if (sys_.roster.is_user(id)) {
      int i = sl_.balance[id];
      s0[i] = tm_.mk_ite(tm_.mk_eq(tx.sender, tm_.mk_addr(id)), tm_.mk_sub(s[i], tx.value), s[i]);
    }
  s0[sl_.balance[self]] = tm_.mk_add(s[sl_.balance[self]], tx.value);

  StmtEnc body = encode_statement(p.body, ref.contract, s0, tx);
  if (p.is_constructor()) body.out[sl_.constructed[ref.contract]] = tm_.mk_true();
  Term reverted = tm_.mk_or(tm_.mk_not(tm_.mk_and(valid)), body.fail);

  StateTerms out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = tm_.mk_ite(reverted, s[i], body.out[i]);
  out[sl_.reverted] = reverted;
  return out;
}

std::vector<std::int64_t> TransitionSystem::encode_state(const FlaggedState & fs) const
{
  const ChainState & st = fs.state;
  std::vector<std::int64_t> v(sl_.vars.size(), 0);
  for (int id = 1; id < sys_.roster.num_values(); ++id) v[sl_.balance[id]] = st.balance[id];
  for (std::size_t c = 0; c < sys_.contracts.size(); ++c) {
    v[sl_.constructed[c]] = st.constructed[c];
    for (std::size_t k = 0; k < sl_.slot[c].size(); ++k) v[sl_.slot[c][k]] = st.storage[c][k];
  }
  v[sl_.block] = st.block_number;
  v[sl_.reverted] = fs.reverted;
  return v;
}

FlaggedState TransitionSystem::decode_state(const std::vector<std::int64_t> & v) const
{
  FlaggedState fs;
  ChainState & s = fs.state;
  s.balance.assign(sys_.roster.num_values(), 0);
  for (int id = 1; id < sys_.roster.num_values(); ++id) s.balance[id] = v[sl_.balance[id]];
  for (std::size_t c = 0; c < sys_.contracts.size(); ++c) {
    s.constructed.push_back(v[sl_.constructed[c]] != 0);
    s.storage.emplace_back();
    for (int i : sl_.slot[c]) s.storage.back().push_back(v[i]);
  }
  s.block_number = v[sl_.block];
  fs.reverted = v[sl_.reverted] != 0;
  return fs;
}

std::vector<std::int64_t> TransitionSystem::encode_tx(const Transaction & tx) const
{
  std::vector<std::int64_t> v(tl_.vars.size(), 0);
  v[tl_.sender] = tx.sender;
  v[tl_.value] = tx.value;
  v[tl_.contract] = tx.contract;
  v[tl_.delta] = tx.block_delta;
  int p = tx.proc_id;
  if (p < 0 || p >= static_cast<int>(sys_.procs.size()) ||
      tx.args.size() != tl_.params[p].size()) {
    // unrepresentable call: any invalid transaction has the same effect
    p = 0;
    v[tl_.sender] = 0;
  } else {
    for (std::size_t i = 0; i < tx.args.size(); ++i) v[tl_.params[p][i]] = tx.args[i].v;
  }
  v[tl_.proc] = p;
  return v;
}

Transaction TransitionSystem::decode_tx(const std::vector<std::int64_t> & v) const
{
  Transaction tx;
  tx.sender = static_cast<int>(v[tl_.sender]);
  tx.value = v[tl_.value];
  tx.contract = static_cast<int>(v[tl_.contract]);
  tx.block_delta = v[tl_.delta];
  int p = static_cast<int>(v[tl_.proc]);
  const ProcRef & ref = sys_.procs[p];
  const Procedure & proc = sys_.proc(p);
  tx.proc = ref.name;
  tx.proc_id = p;
  if (sys_.roster.contract_address(ref.contract) != tx.contract) {
    tx.proc = sys_.decl(ref.contract).name + "." + ref.name;
    tx.proc_id = -1;
  }
  for (std::size_t i = 0; i < proc.params.size(); ++i)
    tx.args.push_back(Value{ proc.params[i].type.scalar, v[tl_.params[p][i]] });
  return tx;
}

}  // namespace chmc::fol
