#include "chmc/oracle/oracle.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <unordered_set>
#include <unordered_map>

#include "chmc/semantics/interpreter.hpp"

namespace chmc {

FiniteDomains make_domains(const System & sys, const std::vector<const Formula *> & formulas,
                           std::int64_t lo, std::int64_t hi)
{
  FiniteDomains d;
  std::set<std::int64_t> ints;
  for (std::int64_t v = lo; v <= hi; ++v) ints.insert(v);
  std::vector<std::int64_t> lits = sys.int_literals();
  bool block = sys.uses_block_number();
  for (const Formula * f : formulas) {
    auto more = formula_int_literals(*f);
    lits.insert(lits.end(), more.begin(), more.end());
    block = block || formula_uses_block_number(*f);
  }
  for (auto k : lits) {
    ints.insert(k - 1);
    ints.insert(k);
    ints.insert(k + 1);
  }
  d.ints.assign(ints.begin(), ints.end());
  d.deltas = block ? std::vector<std::int64_t>{ 0, 1 } : std::vector<std::int64_t>{ 0 };
  return d;
}

StateSeq seq_singleton(FlaggedState s)
{
  return std::make_shared<const SeqNode>(SeqNode{ std::move(s), nullptr });
}

StateSeq seq_push(const StateSeq & seq, FlaggedState s)
{
  return std::make_shared<const SeqNode>(SeqNode{ std::move(s), seq });
}

const char * oracle_status_name(OracleStatus s)
{
  switch (s) {
    case OracleStatus::Holds: return "holds";
    case OracleStatus::Fails: return "fails";
    case OracleStatus::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

// Negation normal form of a typed formula. Negation is pushed through the
// modal operator too, since every label has exactly one successor.
enum class NKind
{
  Atom,
  And,
  Or,
  Forall,
  Exists,
  Modal
};

struct NNode
{
  NKind kind = NKind::Atom;
  bool positive = true;
  const Expr * expr = nullptr;
  const ModalLabel * label = nullptr;
  std::vector<int> kids;
  int var = -1;
  Sort sort = Sort::Int;
  std::vector<int> fv;  // sorted free variable ids
  int lookback = 0;     // tail states read beyond the head
};

void expr_vars(const Expr & e, std::vector<int> & out)
{
  if (e.kind == ExprKind::BoundVar) out.push_back(e.index);
  for (const auto & k : e.kids) expr_vars(k, out);
}

int expr_lookback(const Expr & e)
{
  int m = 0;
  for (const auto & k : e.kids) m = std::max(m, expr_lookback(k));
  return e.kind == ExprKind::Old ? m + 1 : m;
}

std::vector<int> label_vars(const ModalLabel & l)
{
  std::vector<int> v;
  expr_vars(l.sender, v);
  expr_vars(l.proc, v);
  for (const auto & a : l.args) expr_vars(a, v);
  expr_vars(l.value, v);
  if (l.has_delta) expr_vars(l.delta, v);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

int label_lookback(const ModalLabel & l)
{
  int m = std::max(expr_lookback(l.sender), expr_lookback(l.value));
  for (const auto & a : l.args) m = std::max(m, expr_lookback(a));
  if (l.has_delta) m = std::max(m, expr_lookback(l.delta));
  return m;
}

bool has(const std::vector<int> & v, int x)
{
  return std::binary_search(v.begin(), v.end(), x);
}

class NForm
{
 public:
  std::vector<NNode> nodes;
  int root = -1;

  explicit NForm(const Formula & f) { root = build(f, false); }

 private:
  int add(NNode n)
  {
    std::vector<int> fv;
    int lb = 0;
    switch (n.kind) {
      case NKind::Atom:
        expr_vars(*n.expr, fv);
        lb = expr_lookback(*n.expr);
        break;
      case NKind::And:
      case NKind::Or:
        for (int k : n.kids) {
          fv.insert(fv.end(), nodes[k].fv.begin(), nodes[k].fv.end());
          lb = std::max(lb, nodes[k].lookback);
        }
        break;
      case NKind::Forall:
      case NKind::Exists:
        for (int v : nodes[n.kids[0]].fv)
          if (v != n.var) fv.push_back(v);
        lb = nodes[n.kids[0]].lookback;
        break;
      case NKind::Modal: {
        fv = label_vars(*n.label);
        fv.insert(fv.end(), nodes[n.kids[0]].fv.begin(), nodes[n.kids[0]].fv.end());
        lb = std::max(label_lookback(*n.label), nodes[n.kids[0]].lookback - 1);
        break;
      }
    }
    std::sort(fv.begin(), fv.end());
    fv.erase(std::unique(fv.begin(), fv.end()), fv.end());
    n.fv = std::move(fv);
    n.lookback = std::max(lb, 0);
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  int junction(NKind k, std::vector<int> kids)
  {
    std::vector<int> flat;
    for (int c : kids) {
      if (nodes[c].kind == k) {
        flat.insert(flat.end(), nodes[c].kids.begin(), nodes[c].kids.end());
      } else {
        flat.push_back(c);
      }
    }
    if (flat.size() == 1) return flat[0];
    NNode n;
    n.kind = k;
    n.kids = std::move(flat);
    return add(std::move(n));
  }

  int quant(NKind q, int var, Sort sort, int body)
  {
    NNode n;
    n.kind = q;
    n.var = var;
    n.sort = sort;
    n.kids = { body };
    return add(std::move(n));
  }

  int modal(const ModalLabel * l, int body)
  {
    NNode n;
    n.kind = NKind::Modal;
    n.label = l;
    n.kids = { body };
    return add(std::move(n));
  }

  // Pushes the quantifier as deep as it goes.
  int scope(NKind q, int var, Sort sort, int body)
  {
    const NNode b = nodes[body];
    if (!has(b.fv, var)) return body;
    NKind same = q == NKind::Forall ? NKind::And : NKind::Or;
    if (b.kind == same) {
      std::vector<int> kids;
      for (int k : b.kids) kids.push_back(has(nodes[k].fv, var) ? scope(q, var, sort, k) : k);
      return junction(same, kids);
    }
    if (b.kind == NKind::And || b.kind == NKind::Or) {
      std::vector<int> with, without;
      for (int k : b.kids) (has(nodes[k].fv, var) ? with : without).push_back(k);
      if (without.empty()) return quant(q, var, sort, body);
      int inner = with.size() == 1 ? with[0] : junction(b.kind, with);
      without.push_back(scope(q, var, sort, inner));
      return junction(b.kind, without);
    }
    if (b.kind == NKind::Modal && !has(label_vars(*b.label), var))
      return modal(b.label, scope(q, var, sort, b.kids[0]));
    if (b.kind == q) {
      int r = scope(q, var, sort, b.kids[0]);
      const NNode & rn = nodes[r];
      if (rn.kind == q && rn.var == var && rn.kids[0] == b.kids[0])
        return quant(q, var, sort, body);
      return quant(q, b.var, b.sort, r);
    }
    return quant(q, var, sort, body);
  }

  int build(const Formula & f, bool neg)
  {
    switch (f.kind) {
      case FormulaKind::Expr: {
        NNode n;
        n.kind = NKind::Atom;
        n.expr = &f.expr;
        n.positive = !neg;
        return add(std::move(n));
      }
      case FormulaKind::Not: return build(f.kids[0], !neg);
      case FormulaKind::And: {
        int a = build(f.kids[0], neg);
        int b = build(f.kids[1], neg);
        return junction(neg ? NKind::Or : NKind::And, { a, b });
      }
      case FormulaKind::Forall: {
        int body = build(f.kids[0], neg);
        return scope(neg ? NKind::Exists : NKind::Forall, f.var_id, f.var_sort, body);
      }
      case FormulaKind::Modal: return modal(&f.label, build(f.kids[0], neg));
    }
    return -1;
  }
};

struct KeyHash
{
  size_t operator()(const std::vector<std::int64_t> & k) const
  {
    size_t h = 0xcbf29ce484222325ull;
    for (auto v : k) h = (h ^ static_cast<size_t>(v)) * 0x100000001b3ull + (h >> 29);
    return h;
  }
};

class Evaluator
{
 public:
  Evaluator(const System & sys, const TypedFormula & tf, const FiniteDomains & dom)
      : sys_(sys), tf_(tf), dom_(dom), nf_(tf.root)
  {
    size_t n = tf.var_sorts.size();
    vars_.assign(n, Value{});
    assigned_.assign(n, false);
    args_.assign(n, {});
    forced_.assign(nf_.nodes.size(), nullptr);
    plans_.assign(nf_.nodes.size(), std::nullopt);
    planned_.assign(nf_.nodes.size(), false);
    sorted_ints_ = dom.ints;
    std::sort(sorted_ints_.begin(), sorted_ints_.end());
  }

  bool run(const StateSeq & seq)
  {
    memo_.clear();
    count_ = 0;
    return eval(seq, nf_.root);
  }

 private:
  void tick()
  {
    if (++count_ > dom_.eval_limit)
      throw DomainExhausted("quantifier instantiation limit exceeded");
  }

  std::vector<std::int64_t> values_of(Sort s) const
  {
    switch (s) {
      case Sort::Bool: return { 0, 1 };
      case Sort::Address: {
        std::vector<std::int64_t> out;
        for (int i = 0; i < sys_.roster.num_values(); ++i) out.push_back(i);
        return out;
      }
      case Sort::Proc: {
        std::vector<std::int64_t> out;
        for (size_t i = 0; i < sys_.procs.size(); ++i) out.push_back(static_cast<int64_t>(i));
        return out;
      }
      default: return dom_.ints;
    }
  }

  bool eval(const StateSeq & seq, int id)
  {
    const NNode & n = nf_.nodes[id];
    switch (n.kind) {
      case NKind::Atom: return (value(seq, *n.expr).v != 0) == n.positive;
      case NKind::And:
        for (int k : n.kids)
          if (!eval(seq, k)) return false;
        return true;
      case NKind::Or:
        for (int k : n.kids)
          if (eval(seq, k)) return true;
        return false;
      case NKind::Forall:
      case NKind::Exists:
        if (const Plan * plan = plan_of(id)) return eval_fused(seq, n, *plan);
        return eval_quant(seq, n);
      case NKind::Modal: return eval_modal(seq, id);
    }
    return false;
  }

  bool eval_modal(const StateSeq & seq, int id)
  {
    const NNode & n = nf_.nodes[id];
    StateSeq child;
    if (forced_[id]) {
      child = seq_push(seq, *forced_[id]);
    } else {
      Transaction tx = make_tx(seq, *n.label);
      child = seq_push(seq, step_flagged(sys_, seq->state, tx));
    }
    const NNode & body = nf_.nodes[n.kids[0]];
    if (body.kind == NKind::Atom) return eval(child, n.kids[0]);
    std::vector<std::int64_t> key;
    key.push_back(n.kids[0]);
    for (int v : body.fv) {
      if (tf_.var_sorts[v] == Sort::Args) {
        for (const auto & slice : args_[v]) {
          key.push_back(static_cast<std::int64_t>(slice.size()));
          for (const auto & a : slice) key.push_back(a.v);
        }
      } else {
        key.push_back(vars_[v].v);
      }
    }
    StateSeq cur = child;
    for (int i = 0; i <= body.lookback && cur; ++i, cur = cur->tail) {
      const FlaggedState & fs = cur->state;
      key.push_back(fs.reverted);
      key.push_back(fs.state.block_number);
      key.insert(key.end(), fs.state.balance.begin(), fs.state.balance.end());
      key.insert(key.end(), fs.state.constructed.begin(), fs.state.constructed.end());
      for (const auto & st : fs.state.storage) key.insert(key.end(), st.begin(), st.end());
    }
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    bool r = eval(child, n.kids[0]);
    memo_.emplace(std::move(key), r);
    return r;
  }

  bool evaluable(const Expr & e) const
  {
    if (e.kind == ExprKind::BoundVar && !assigned_[e.index]) return false;
    for (const auto & k : e.kids)
      if (!evaluable(k)) return false;
    return true;
  }

  bool label_evaluable(const ModalLabel & l) const
  {
    for (int v : label_vars(l))
      if (!assigned_[v]) return false;
    return true;
  }

  // Superset of the values of `var` that can make node `id` evaluate to
  // `want`, read off equalities on the variable. nullopt when unknown.
  std::optional<std::vector<std::int64_t>> candidates(const StateSeq & seq, int id, int var,
                                                      bool want)
  {
    const NNode & n = nf_.nodes[id];
    if (!has(n.fv, var)) return std::nullopt;
    switch (n.kind) {
      case NKind::Atom: {
        const Expr & e = *n.expr;
        // true iff var == other (eq) or var != other (!eq)
        bool eq;
        const Expr * other = nullptr;
        if (e.kind == ExprKind::BoundVar && e.index == var) {
          return std::vector<std::int64_t>{ n.positive == want ? 1 : 0 };
        }
        if (e.kind != ExprKind::Binary || (e.op != Op::Eq && e.op != Op::Ne)) return std::nullopt;
        eq = (e.op == Op::Eq) == n.positive;
        if (eq != want) return std::nullopt;
        const Expr & l = e.kids[0];
        const Expr & r = e.kids[1];
        if (l.kind == ExprKind::BoundVar && l.index == var) {
          other = &r;
        } else if (r.kind == ExprKind::BoundVar && r.index == var) {
          other = &l;
        } else {
          return std::nullopt;
        }
        if (!evaluable(*other)) return std::nullopt;
        return std::vector<std::int64_t>{ value(seq, *other).v };
      }
      case NKind::And:
      case NKind::Or: {
        bool any = (n.kind == NKind::And) == want;  // one kid suffices
        if (any) {
          for (int k : n.kids)
            if (auto c = candidates(seq, k, var, want)) return c;
          return std::nullopt;
        }
        std::vector<std::int64_t> out;
        for (int k : n.kids) {
          if (!has(nf_.nodes[k].fv, var)) return std::nullopt;
          auto c = candidates(seq, k, var, want);
          if (!c) return std::nullopt;
          out.insert(out.end(), c->begin(), c->end());
        }
        return out;
      }
      case NKind::Modal: {
        if (has(label_vars(*n.label), var) || !label_evaluable(*n.label)) return std::nullopt;
        Transaction tx = make_tx(seq, *n.label);
        StateSeq child = seq_push(seq, step_flagged(sys_, seq->state, tx));
        return candidates(child, n.kids[0], var, want);
      }
      default: return std::nullopt;
    }
  }

  // A run of same-kind quantifiers whose variables occur only as whole
  // components of one modal label. Such a run ranges over the successors of
  // that modal, so it is evaluated once per distinct successor state.
  struct Plan
  {
    std::vector<int> vars;
    int modal = -1;
    int body = -1;
  };

  int count_var(int id, int var) const
  {
    const NNode & n = nf_.nodes[id];
    if (!has(n.fv, var)) return 0;
    int c = 0;
    if (n.kind == NKind::Atom) {
      std::vector<int> vs;
      expr_vars(*n.expr, vs);
      return static_cast<int>(std::count(vs.begin(), vs.end(), var));
    }
    if (n.kind == NKind::Modal) c += label_count(*n.label, var);
    for (int k : n.kids) c += count_var(k, var);
    return c;
  }

  static int label_count(const ModalLabel & l, int var)
  {
    std::vector<int> vs;
    expr_vars(l.sender, vs);
    expr_vars(l.proc, vs);
    for (const auto & a : l.args) expr_vars(a, vs);
    expr_vars(l.value, vs);
    if (l.has_delta) expr_vars(l.delta, vs);
    return static_cast<int>(std::count(vs.begin(), vs.end(), var));
  }

  static bool whole_or_free(const Expr & e, int var)
  {
    if (e.kind == ExprKind::BoundVar) return true;
    std::vector<int> vs;
    expr_vars(e, vs);
    return std::find(vs.begin(), vs.end(), var) == vs.end();
  }

  // Modal nodes reachable from `id` without crossing another modal.
  void direct_modals(int id, std::vector<int> & out) const
  {
    const NNode & n = nf_.nodes[id];
    if (n.kind == NKind::Modal) {
      out.push_back(id);
      return;
    }
    for (int k : n.kids) direct_modals(k, out);
  }

  int modal_for(int qid, int var) const
  {
    std::vector<int> ms;
    direct_modals(nf_.nodes[qid].kids[0], ms);
    int found = -1;
    for (int m : ms) {
      const NNode & mn = nf_.nodes[m];
      int c = label_count(*mn.label, var);
      if (!c) continue;
      if (found >= 0) return -1;
      found = m;
    }
    if (found < 0) return -1;
    const ModalLabel & l = *nf_.nodes[found].label;
    if (l.has_delta && !whole_or_free(l.delta, var)) return -1;
    if (!whole_or_free(l.sender, var) || !whole_or_free(l.value, var)) return -1;
    for (const auto & a : l.args)
      if (!whole_or_free(a, var)) return -1;
    // the variable must not occur anywhere else
    if (count_var(nf_.nodes[qid].kids[0], var) != label_count(l, var)) return -1;
    return found;
  }

  const Plan * plan_of(int qid)
  {
    if (planned_[qid]) return plans_[qid] ? &*plans_[qid] : nullptr;
    planned_[qid] = true;
    const NNode & q = nf_.nodes[qid];
    int m = modal_for(qid, q.var);
    if (m < 0) return nullptr;
    Plan plan;
    plan.modal = m;
    plan.vars.push_back(q.var);
    int cur = q.kids[0];
    while (nf_.nodes[cur].kind == q.kind && modal_for(cur, nf_.nodes[cur].var) == m) {
      plan.vars.push_back(nf_.nodes[cur].var);
      cur = nf_.nodes[cur].kids[0];
    }
    plan.body = cur;
    // everything else in the label must be bound outside the run
    std::vector<int> ms;
    direct_modals(cur, ms);
    if (std::find(ms.begin(), ms.end(), m) == ms.end()) return nullptr;
    for (int v : label_vars(*nf_.nodes[m].label)) {
      bool in_run = std::find(plan.vars.begin(), plan.vars.end(), v) != plan.vars.end();
      if (!in_run && !outer_bound(qid, v)) return nullptr;
    }
    plans_[qid] = std::move(plan);
    return &*plans_[qid];
  }

  // True if `var` is bound by an ancestor of node `id`.
  bool outer_bound(int id, int var) const { return has(nf_.nodes[id].fv, var); }

  bool is_run_var(const Plan & p, const Expr & e) const
  {
    return e.kind == ExprKind::BoundVar &&
           std::find(p.vars.begin(), p.vars.end(), e.index) != p.vars.end();
  }

  std::vector<std::int64_t> choices(const StateSeq & seq, const Plan & p, const Expr & e)
  {
    if (is_run_var(p, e)) return values_of(tf_.var_sorts[e.index]);
    return { value(seq, e).v };
  }

  bool eval_fused(const StateSeq & seq, const NNode & q, const Plan & plan)
  {
    bool universal = q.kind == NKind::Forall;
    const NNode & m = nf_.nodes[plan.modal];
    const ModalLabel & l = *m.label;
    const ChainState & s = seq->state.state;
    std::vector<FlaggedState> succ;
    std::unordered_set<FlaggedState, FlaggedStateHash> seen;
    bool invalid = false;
    auto push = [&](FlaggedState fs) {
      if (fs.reverted && fs.state == s) {
        invalid = true;
        return;
      }
      if (seen.insert(fs).second) succ.push_back(std::move(fs));
    };
    int caddr = sys_.roster.contract_address(l.contract_index);
    std::vector<std::int64_t> procs;
    if (is_run_var(plan, l.proc)) {
      procs = values_of(Sort::Proc);
    } else {
      procs = { l.proc.kind == ExprKind::ProcConst ? l.proc.index : vars_[l.proc.index].v };
    }
    for (auto sender : choices(seq, plan, l.sender)) {
      for (auto pid : procs) {
        tick();
        const ProcRef & ref = sys_.procs[pid];
        const Procedure & proc = sys_.proc(static_cast<int>(pid));
        if (!sys_.roster.is_user(static_cast<int>(sender)) || ref.contract != l.contract_index ||
            proc.is_constructor() == (s.constructed[ref.contract] != 0)) {
          invalid = true;
          continue;
        }
        std::vector<std::int64_t> values;
        for (auto v : choices(seq, plan, l.value)) {
          if (v < 0 || v > s.balance[sender] || (!proc.payable && v != 0)) {
            invalid = true;
          } else {
            values.push_back(v);
          }
        }
        if (values.empty()) continue;
        std::vector<std::int64_t> deltas =
            l.has_delta ? choices(seq, plan, l.delta) : std::vector<std::int64_t>{ 0 };
        // argument choices
        std::vector<std::vector<Value>> arg_choices;
        if (l.args_var) {
          const Expr & av = l.args[0];
          if (is_run_var(plan, av)) {
            for (const auto & prm : proc.params) {
              std::vector<Value> vs;
              for (auto v : values_of(prm.type.scalar)) vs.push_back(Value{ prm.type.scalar, v });
              arg_choices.push_back(std::move(vs));
            }
          } else {
            const auto & binding = args_[av.index];
            for (const auto & v : binding[pid]) arg_choices.push_back({ v });
          }
        } else {
          if (l.args.size() != proc.params.size()) {
            invalid = true;
            continue;
          }
          for (size_t i = 0; i < l.args.size(); ++i) {
            std::vector<Value> vs;
            Sort so = is_run_var(plan, l.args[i]) ? tf_.var_sorts[l.args[i].index]
                                                  : l.args[i].type;
            for (auto v : choices(seq, plan, l.args[i])) vs.push_back(Value{ so, v });
            arg_choices.push_back(std::move(vs));
          }
        }
        Transaction tx;
        tx.sender = static_cast<int>(sender);
        tx.contract = caddr;
        tx.proc = ref.name;
        tx.proc_id = static_cast<int>(pid);
        tx.args.assign(arg_choices.size(), Value{});
        std::function<void(size_t)> rec = [&](size_t k) {
          if (k == arg_choices.size()) {
            for (auto v : values)
              for (auto d : deltas) {
                tick();
                tx.value = v;
                tx.block_delta = d;
                push(step_flagged(sys_, seq->state, tx));
              }
            return;
          }
          for (const auto & a : arg_choices[k]) {
            tx.args[k] = a;
            rec(k + 1);
          }
        };
        rec(0);
      }
    }
    if (invalid) succ.push_back({ s, true });
    const FlaggedState * saved = forced_[plan.modal];
    bool result = universal;
    for (const auto & fs : succ) {
      forced_[plan.modal] = &fs;
      if (eval(seq, plan.body) != universal) {
        result = !universal;
        break;
      }
    }
    forced_[plan.modal] = saved;
    return result;
  }

  bool eval_quant(const StateSeq & seq, const NNode & n)
  {
    if (n.sort == Sort::Args) return eval_args(seq, n);
    bool universal = n.kind == NKind::Forall;
    std::vector<std::int64_t> vals;
    std::optional<std::vector<std::int64_t>> cand;
    if (n.sort == Sort::Int || n.sort == Sort::Bool || n.sort == Sort::Address)
      cand = candidates(seq, n.kids[0], n.var, !universal);
    if (cand) {
      std::sort(cand->begin(), cand->end());
      cand->erase(std::unique(cand->begin(), cand->end()), cand->end());
      for (auto v : *cand) {
        if (n.sort == Sort::Bool && v != 0 && v != 1) continue;
        if (n.sort == Sort::Address && (v < 0 || v >= sys_.roster.num_values())) continue;
        if (n.sort == Sort::Int && !std::binary_search(sorted_ints_.begin(), sorted_ints_.end(), v))
          continue;
        vals.push_back(v);
      }
    } else {
      vals = values_of(n.sort);
    }
    bool result = universal;
    assigned_[n.var] = true;
    for (auto v : vals) {
      tick();
      vars_[n.var] = Value{ n.sort, v };
      if (eval(seq, n.kids[0]) != universal) {
        result = !universal;
        break;
      }
    }
    assigned_[n.var] = false;
    return result;
  }

  // Procedures whose parameter slice of args variable `id` is read below.
  void collect_procs(int nid, int id, std::set<int> & out, bool & all)
  {
    const NNode & g = nf_.nodes[nid];
    if (!has(g.fv, id)) return;
    if (g.kind == NKind::Modal && g.label->args_var && g.label->args[0].index == id) {
      const Expr & p = g.label->proc;
      if (p.kind == ExprKind::ProcConst) {
        out.insert(p.index);
      } else if (assigned_[p.index]) {
        out.insert(static_cast<int>(vars_[p.index].v));
      } else {
        all = true;
      }
    }
    for (int k : g.kids) collect_procs(k, id, out, all);
  }

  bool eval_args(const StateSeq & seq, const NNode & n)
  {
    bool universal = n.kind == NKind::Forall;
    std::set<int> procs;
    bool all = false;
    collect_procs(n.kids[0], n.var, procs, all);
    if (all)
      for (size_t i = 0; i < sys_.procs.size(); ++i) procs.insert(static_cast<int>(i));
    std::vector<std::pair<int, int>> slots;
    auto & binding = args_[n.var];
    binding.assign(sys_.procs.size(), {});
    for (int p : procs) {
      binding[p].assign(sys_.proc(p).params.size(), Value{});
      for (size_t i = 0; i < sys_.proc(p).params.size(); ++i)
        slots.emplace_back(p, static_cast<int>(i));
    }
    assigned_[n.var] = true;
    std::function<bool(size_t)> rec = [&](size_t k) -> bool {
      if (k == slots.size()) {
        tick();
        return eval(seq, n.kids[0]) == universal;
      }
      auto [p, i] = slots[k];
      const Param & prm = sys_.proc(p).params[i];
      for (auto v : values_of(prm.type.scalar)) {
        binding[p][i] = Value{ prm.type.scalar, v };
        if (!rec(k + 1)) return false;
      }
      return true;
    };
    bool all_agree = rec(0);
    assigned_[n.var] = false;
    return universal ? all_agree : !all_agree;
  }

  Transaction make_tx(const StateSeq & seq, const ModalLabel & l)
  {
    Transaction tx;
    tx.sender = static_cast<int>(value(seq, l.sender).v);
    tx.contract = sys_.roster.contract_address(l.contract_index);
    tx.proc_id = l.proc.kind == ExprKind::ProcConst ? l.proc.index
                                                     : static_cast<int>(vars_[l.proc.index].v);
    const ProcRef & ref = sys_.procs[tx.proc_id];
    tx.proc = ref.contract == l.contract_index ? ref.name
                                               : sys_.decl(ref.contract).name + "." + ref.name;
    if (ref.contract != l.contract_index) tx.proc_id = -1;
    if (l.args_var) {
      const auto & binding = args_[l.args[0].index];
      int p = l.proc.kind == ExprKind::ProcConst ? l.proc.index
                                                  : static_cast<int>(vars_[l.proc.index].v);
      if (p < static_cast<int>(binding.size())) tx.args = binding[p];
    } else {
      for (const auto & a : l.args) tx.args.push_back(value(seq, a));
    }
    tx.value = value(seq, l.value).v;
    tx.block_delta = l.has_delta ? value(seq, l.delta).v : 0;
    return tx;
  }

  Value value(const StateSeq & seq, const Expr & e)
  {
    const ChainState & s = seq->state.state;
    switch (e.kind) {
      case ExprKind::Null: return Value::of_addr(0);
      case ExprKind::BoolLit: return Value::of_bool(e.num != 0);
      case ExprKind::IntLit: return Value::of_int(e.num);
      case ExprKind::AddrConst: return Value::of_addr(e.index);
      case ExprKind::ProcConst: return Value::of_proc(e.index);
      case ExprKind::BoundVar: return vars_[e.index];
      case ExprKind::Field: return read_field(sys_, s, e.owner_index, e.index);
      case ExprKind::MapLookup: {
        Value k = value(seq, e.kids[0]);
        return read_field(sys_, s, e.owner_index, e.index, static_cast<int>(k.v));
      }
      case ExprKind::Balance: return Value::of_int(s.balance[value(seq, e.kids[0]).v]);
      case ExprKind::BlockNumber: return Value::of_int(s.block_number);
      case ExprKind::LastReverted: return Value::of_bool(seq->state.reverted);
      case ExprKind::Old:
        if (!seq->tail) throw std::logic_error("old() evaluated on a singleton sequence");
        return value(seq->tail, e.kids[0]);
      case ExprKind::Unary: {
        Value v = value(seq, e.kids[0]);
        if (e.op == Op::Not) return Value::of_bool(v.v == 0);
        return Value::of_int(-v.v);
      }
      case ExprKind::Binary: {
        Value l = value(seq, e.kids[0]);
        if (e.op == Op::And && !l.v) return Value::of_bool(false);
        if (e.op == Op::Or && l.v) return Value::of_bool(true);
        Value r = value(seq, e.kids[1]);
        switch (e.op) {
          case Op::Add: return Value::of_int(l.v + r.v);
          case Op::Sub: return Value::of_int(l.v - r.v);
          case Op::Mul: return Value::of_int(l.v * r.v);
          case Op::Eq: return Value::of_bool(l.v == r.v);
          case Op::Ne: return Value::of_bool(l.v != r.v);
          case Op::Lt: return Value::of_bool(l.v < r.v);
          case Op::Le: return Value::of_bool(l.v <= r.v);
          case Op::Gt: return Value::of_bool(l.v > r.v);
          case Op::Ge: return Value::of_bool(l.v >= r.v);
          case Op::And:
          case Op::Or: return Value::of_bool(r.v != 0);
          default: break;
        }
        break;
      }
      default: break;
    }
    throw std::logic_error("unexpected expression in property: " + std::to_string(static_cast<int>(e.kind)));
  }

  const System & sys_;
  const TypedFormula & tf_;
  const FiniteDomains & dom_;
  NForm nf_;
  std::vector<Value> vars_;
  std::vector<bool> assigned_;
  std::vector<std::vector<std::vector<Value>>> args_;
  std::unordered_map<std::vector<std::int64_t>, bool, KeyHash> memo_;
  std::vector<const FlaggedState *> forced_;
  std::vector<std::int64_t> sorted_ints_;
  std::vector<std::optional<Plan>> plans_;
  std::vector<bool> planned_;
  std::uint64_t count_ = 0;
};

Transaction invalid_representative(const System & sys)
{
  Transaction tx;
  tx.sender = 0;
  tx.contract = sys.roster.contract_address(0);
  tx.proc = sys.procs[0].name;
  tx.proc_id = 0;
  return tx;
}

}  // namespace

bool eval_formula(const System & sys, const StateSeq & seq, const TypedFormula & f,
                  const FiniteDomains & dom)
{
  Evaluator ev(sys, f, dom);
  return ev.run(seq);
}

std::vector<Transaction> enumerate_transactions(const System & sys, const ChainState & s,
                                                const FiniteDomains & dom)
{
  std::vector<Transaction> out;
  out.push_back(invalid_representative(sys));
  std::vector<std::int64_t> nonneg;
  for (auto v : dom.ints)
    if (v >= 0) nonneg.push_back(v);
  for (size_t gid = 0; gid < sys.procs.size(); ++gid) {
    const ProcRef & ref = sys.procs[gid];
    const Procedure & p = sys.proc(static_cast<int>(gid));
    if (p.is_constructor() == (s.constructed[ref.contract] != 0)) continue;
    std::vector<std::vector<Value>> arg_domain;
    for (const auto & prm : p.params) {
      std::vector<Value> vals;
      switch (prm.type.scalar) {
        case Sort::Bool:
          vals = { Value::of_bool(false), Value::of_bool(true) };
          break;
        case Sort::Address:
          for (int a = 0; a < sys.roster.num_values(); ++a) vals.push_back(Value::of_addr(a));
          break;
        default:
          for (auto v : prm.type.nonneg ? nonneg : dom.ints) vals.push_back(Value::of_int(v));
      }
      arg_domain.push_back(std::move(vals));
    }
    int caddr = sys.roster.contract_address(ref.contract);
    for (int sender = 1; sender < sys.roster.num_values(); ++sender) {
      if (!sys.roster.is_user(sender)) continue;
      std::vector<std::int64_t> values;
      if (p.payable) {
        for (auto v : nonneg)
          if (v <= s.balance[sender]) values.push_back(v);
      } else {
        values = { 0 };
      }
      std::vector<Value> args(p.params.size());
      std::function<void(size_t)> rec = [&](size_t k) {
        if (k == args.size()) {
          for (auto v : values)
            for (auto d : dom.deltas) {
              Transaction tx;
              tx.sender = sender;
              tx.contract = caddr;
              tx.proc = ref.name;
              tx.proc_id = static_cast<int>(gid);
              tx.args = args;
              tx.value = v;
              tx.block_delta = d;
              out.push_back(std::move(tx));
            }
          return;
        }
        for (const auto & v : arg_domain[k]) {
          args[k] = v;
          rec(k + 1);
        }
      };
      rec(0);
    }
  }
  return out;
}

namespace {

struct Node
{
  FlaggedState state;
  int parent;
  Transaction tx;
  int depth;
};

template <class Visit>
OracleVerdict explore(const System & sys, int depth, const FiniteDomains & dom, Visit visit)
{
  OracleVerdict v;
  std::vector<Node> nodes;
  std::unordered_map<FlaggedState, int, FlaggedStateHash> seen;
  nodes.push_back({ { initial_state(sys, dom.user_balance), false }, -1, {}, 0 });
  seen.emplace(nodes[0].state, 0);
  auto witness = [&](int idx) {
    std::vector<Transaction> w;
    for (int i = idx; nodes[i].parent >= 0; i = nodes[i].parent) w.push_back(nodes[i].tx);
    std::reverse(w.begin(), w.end());
    return w;
  };
  try {
    if (!visit(nodes[0].state)) {
      v.status = OracleStatus::Fails;
      v.states = 1;
      return v;
    }
    size_t head = 0;
    while (head < nodes.size()) {
      if (nodes[head].depth >= depth) {
        ++head;
        continue;
      }
      const int cur = static_cast<int>(head++);
      const ChainState base = nodes[cur].state.state;
      for (auto & tx : enumerate_transactions(sys, base, dom)) {
        FlaggedState next = step_flagged(sys, nodes[cur].state, tx);
        if (seen.count(next)) continue;
        if (nodes.size() >= dom.node_limit) {
          v.status = OracleStatus::Inconclusive;
          v.reason = "state limit reached";
          v.states = nodes.size();
          return v;
        }
        int idx = static_cast<int>(nodes.size());
        seen.emplace(next, idx);
        nodes.push_back({ next, cur, tx, nodes[cur].depth + 1 });
        if (!visit(nodes[idx].state)) {
          v.status = OracleStatus::Fails;
          v.witness = witness(idx);
          v.states = nodes.size();
          return v;
        }
      }
    }
  } catch (const DomainExhausted & e) {
    v.status = OracleStatus::Inconclusive;
    v.reason = e.what();
  }
  v.states = nodes.size();
  return v;
}

}  // namespace

OracleVerdict check_reachable(const System & sys, const TypedFormula & f, int depth,
                              const FiniteDomains & dom)
{
  Evaluator ev(sys, f, dom);
  return explore(sys, depth, dom, [&](const FlaggedState & s) {
    return ev.run(seq_singleton(s));
  });
}

std::vector<FlaggedState> reachable_states(const System & sys, int depth,
                                           const FiniteDomains & dom)
{
  std::vector<FlaggedState> out;
  explore(sys, depth, dom, [&](const FlaggedState & s) {
    out.push_back(s);
    return true;
  });
  return out;
}

}  // namespace chmc
