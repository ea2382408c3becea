#include "chmc/fol/property.hpp"

#include <algorithm>
#include <map>

namespace chmc::fol {

int ModalTree::max_depth() const
{
  int d = 0;
  for (const auto & n : nodes) d = std::max(d, n.depth);
  return d;
}

namespace {

struct Ctx
{
  StateTerms state;
  const Ctx * parent = nullptr;
  int node = 0;
};

class PropertyEncoder
{
 public:
  PropertyEncoder(const TransitionSystem & ts, const TypedFormula & f, const PropertyOptions & opt)
    : ts_(ts), tm_(ts.tm()), sys_(ts.sys()), tf_(f), opt_(opt), vars_(f.var_sorts.size(), nullptr),
      args_(f.var_sorts.size())
  {
  }

  PropertyEncoding run(const StateTerms & root)
  {
    tree_.nodes.push_back({});
    Ctx c{ root, nullptr, 0 };
    Term t = formula(tf_.root, c);
    return { t, tree_ };
  }

 private:
  std::vector<std::int64_t> values_of(Sort s) const
  {
    std::vector<std::int64_t> out;
    switch (s) {
      case Sort::Bool: return { 0, 1 };
      case Sort::Address:
        for (int i = 0; i < sys_.roster.num_values(); ++i) out.push_back(i);
        return out;
      case Sort::Proc:
        for (std::size_t i = 0; i < sys_.procs.size(); ++i) out.push_back(static_cast<std::int64_t>(i));
        return out;
      default: return *opt_.int_domain;
    }
  }

  bool expand(Sort s) const { return s != Sort::Int || opt_.int_domain.has_value(); }

  // Universal closure of `body` over `v`, expanded when the sort is finite.
  Term close(Term v, Term body)
  {
    if (!expand(v->sort)) return tm_.mk_forall({ v }, body);
    std::vector<Term> parts;
    for (auto x : values_of(v->sort)) parts.push_back(tm_.subst(body, { { v, tm_.mk_const(v->sort, x) } }));
    return tm_.mk_and(parts);
  }

  void collect_procs(const Formula & f, int var, std::vector<bool> & use)
  {
    if (f.kind == FormulaKind::Modal && f.label.args_var && f.label.args[0].index == var) {
      const Expr & p = f.label.proc;
      if (p.kind == ExprKind::ProcConst) {
        use[p.index] = true;
      } else if (vars_[p.index]) {
        use[vars_[p.index]->value] = true;
      } else {
        for (std::size_t q = 0; q < sys_.procs.size(); ++q)
          if (sys_.procs[q].contract == f.label.contract_index) use[q] = true;
      }
    }
    for (const auto & k : f.kids) collect_procs(k, var, use);
  }

  Term formula(const Formula & f, const Ctx & c)
  {
    switch (f.kind) {
      case FormulaKind::Expr: return expr(f.expr, c);
      case FormulaKind::Not: return tm_.mk_not(formula(f.kids[0], c));
      case FormulaKind::And: {
        std::vector<Term> ks;
        for (const auto & k : f.kids) {
          ks.push_back(formula(k, c));
          if (ks.back() == tm_.mk_false()) break;
        }
        return tm_.mk_and(ks);
      }
      case FormulaKind::Forall: {
        int id = f.var_id;
        Sort s = tf_.var_sorts[id];
        const Formula & body = f.kids[0];
        if (s == Sort::Args) {
          std::vector<bool> use(sys_.procs.size(), false);
          collect_procs(body, id, use);
          std::vector<std::vector<Term>> slots(sys_.procs.size());
          std::vector<Term> fresh;
          for (std::size_t p = 0; p < sys_.procs.size(); ++p) {
            if (!use[p]) continue;
            const Procedure & proc = sys_.proc(static_cast<int>(p));
            for (const auto & prm : proc.params) {
              Term v = tm_.fresh_var("q_" + tf_.var_names[id] + "_" + sys_.procs[p].name + "_" + prm.name,
                                     prm.type.scalar);
              slots[p].push_back(v);
              fresh.push_back(v);
            }
          }
          auto saved = std::move(args_[id]);
          args_[id] = std::move(slots);
          Term t = formula(body, c);
          args_[id] = std::move(saved);
          for (auto it = fresh.rbegin(); it != fresh.rend(); ++it) t = close(*it, t);
          return t;
        }
        if (expand(s)) {
          std::vector<Term> parts;
          for (auto x : values_of(s)) {
            vars_[id] = tm_.mk_const(s, x);
            parts.push_back(formula(body, c));
            if (parts.back() == tm_.mk_false()) break;
          }
          vars_[id] = nullptr;
          return tm_.mk_and(parts);
        }
        Term v = tm_.fresh_var("q_" + tf_.var_names[id], s);
        vars_[id] = v;
        Term t = formula(body, c);
        vars_[id] = nullptr;
        return tm_.mk_forall({ v }, t);
      }
      case FormulaKind::Modal: return modal(f, c);
    }
    return tm_.mk_true();
  }

  Term modal(const Formula & f, const Ctx & c)
  {
    const ModalLabel & l = f.label;
    int p = l.proc.kind == ExprKind::ProcConst ? l.proc.index : static_cast<int>(vars_[l.proc.index]->value);
    TxTerms tx;
    tx.sender = expr(l.sender, c);
    tx.value = expr(l.value, c);
    tx.delta = l.has_delta ? expr(l.delta, c) : tm_.mk_int(0);
    bool ok = sys_.procs[p].contract == l.contract_index;
    if (ok) {
      if (l.args_var) {
        tx.args = args_[l.args[0].index][p];
      } else {
        for (const auto & a : l.args) tx.args.push_back(expr(a, c));
      }
      ok = tx.args.size() == sys_.proc(p).params.size();
    }
    Ctx child;
    child.parent = &c;
    child.state = ok ? ts_.step(c.state, p, tx) : ts_.invalid_step(c.state);
    child.node = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({ c.node, tree_.nodes[c.node].depth + 1, p });
    return formula(f.kids[0], child);
  }

  Term expr(const Expr & e, const Ctx & c)
  {
    const StateLayout & sl = ts_.state_layout();
    auto rec = [&](const Expr & k) { return expr(k, c); };
    switch (e.kind) {
      case ExprKind::Null: return tm_.mk_addr(0);
      case ExprKind::BoolLit: return tm_.mk_bool(e.num != 0);
      case ExprKind::IntLit: return tm_.mk_int(e.num);
      case ExprKind::AddrConst: return tm_.mk_addr(e.index);
      case ExprKind::ProcConst: return tm_.mk_proc(e.index);
      case ExprKind::BoundVar: return vars_[e.index];
      case ExprKind::Field: return c.state[sl.slot[e.owner_index][sys_.slot_of(e.owner_index, e.index, 0)]];
      case ExprKind::MapLookup: return ts_.read_map(e.owner_index, e.index, rec(e.kids[0]), c.state);
      case ExprKind::Balance: return ts_.read_balance(rec(e.kids[0]), c.state);
      case ExprKind::BlockNumber: return c.state[sl.block];
      case ExprKind::LastReverted: return c.state[sl.reverted];
      case ExprKind::Old:
        if (!c.parent) throw EncodeError("old() outside every modal operator");
        return expr(e.kids[0], *c.parent);
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
    throw EncodeError("unsupported expression in property");
  }

  const TransitionSystem & ts_;
  TermManager & tm_;
  const System & sys_;
  const TypedFormula & tf_;
  const PropertyOptions & opt_;
  std::vector<Term> vars_;
  std::vector<std::vector<std::vector<Term>>> args_;
  ModalTree tree_;
};

class Normalizer
{
 public:
  explicit Normalizer(TermManager & tm) : tm_(tm) {}

  Term nnf(Term t, bool neg)
  {
    auto key = std::make_pair(t, neg);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    Term r;
    switch (t->op) {
      case Op::Not: r = nnf(t->kids[0], !neg); break;
      case Op::And:
      case Op::Or: {
        std::vector<Term> ks;
        for (Term k : t->kids) ks.push_back(nnf(k, neg));
        bool conj = (t->op == Op::And) != neg;
        r = conj ? tm_.mk_and(ks) : tm_.mk_or(ks);
        break;
      }
      case Op::Forall:
      case Op::Exists: {
        std::vector<Term> vars(t->kids.begin(), t->kids.end() - 1);
        Term body = nnf(t->kids.back(), neg);
        Op q = (t->op == Op::Forall) != neg ? Op::Forall : Op::Exists;
        r = quant(q, vars, body);
        break;
      }
      default: r = neg ? tm_.mk_not(t) : t;
    }
    memo_[key] = r;
    return r;
  }

 private:
  bool mentions_any(const std::vector<Term> & vars, Term t)
  {
    for (Term v : vars)
      if (tm_.occurs(v, t)) return true;
    return false;
  }

  std::vector<Term> used(const std::vector<Term> & vars, Term t)
  {
    std::vector<Term> out;
    for (Term v : vars)
      if (tm_.occurs(v, t)) out.push_back(v);
    return out;
  }

  // Body is already normalized.
  Term quant(Op q, std::vector<Term> vars, Term body)
  {
    vars = used(vars, body);
    if (vars.empty()) return body;
    bool all = q == Op::Forall;
    Op same = all ? Op::And : Op::Or;   // distributes
    Op other = all ? Op::Or : Op::And;  // partitions
    if (body->op == same) {
      std::vector<Term> ks;
      for (Term k : body->kids) ks.push_back(quant(q, vars, k));
      return all ? tm_.mk_and(ks) : tm_.mk_or(ks);
    }
    if (body->op == other) {
      // one-point rule
      for (Term k : body->kids) {
        Term eq = nullptr;
        if (!all && k->op == Op::Eq) eq = k;
        if (all && k->op == Op::Not && k->kids[0]->op == Op::Eq) eq = k->kids[0];
        if (!eq) continue;
        for (int side = 0; side < 2; ++side) {
          Term v = eq->kids[side];
          Term rhs = eq->kids[1 - side];
          if (v->op != Op::Var || std::find(vars.begin(), vars.end(), v) == vars.end() || tm_.occurs(v, rhs))
            continue;
          Term nb = tm_.subst(body, { { v, rhs } });
          std::vector<Term> rest;
          for (Term w : vars)
            if (w != v) rest.push_back(w);
          return quant(q, rest, renormalize(nb));
        }
      }
      std::vector<Term> outside, inside;
      for (Term k : body->kids) (mentions_any(vars, k) ? inside : outside).push_back(k);
      if (!outside.empty()) {
        Term in = all ? tm_.mk_or(inside) : tm_.mk_and(inside);
        outside.push_back(quant(q, vars, in));
        return all ? tm_.mk_or(outside) : tm_.mk_and(outside);
      }
    }
    if (body->op == Op::Eq && !all) {
      for (int side = 0; side < 2; ++side) {
        Term v = body->kids[side];
        if (v->op == Op::Var && std::find(vars.begin(), vars.end(), v) != vars.end() &&
            !tm_.occurs(v, body->kids[1 - side]))
          return tm_.mk_true();
      }
    }
    return tm_.mk_quant(q, vars, body);
  }

  Term renormalize(Term t) { return nnf(t, false); }

  TermManager & tm_;
  std::map<std::pair<Term, bool>, Term> memo_;
};

}  // namespace

Term normalize(TermManager & tm, Term t)
{
  Normalizer n(tm);
  return n.nnf(t, false);
}

PropertyEncoding encode_property(const TransitionSystem & ts, const TypedFormula & f, const StateTerms & root,
                                 const PropertyOptions & opt)
{
  PropertyEncoder enc(ts, f, opt);
  PropertyEncoding r = enc.run(root);
  if (opt.normalize) r.formula = normalize(ts.tm(), r.formula);
  return r;
}

}  // namespace chmc::fol
