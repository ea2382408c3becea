#include "chmc/fol/term.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace chmc::fol {

namespace {

std::size_t combine(std::size_t h, std::size_t v)
{
  return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

std::int64_t checked_add(std::int64_t a, std::int64_t b)
{
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("integer overflow in constant folding");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b)
{
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("integer overflow in constant folding");
  return r;
}

bool is_quant(Op op) { return op == Op::Forall || op == Op::Exists; }

}  // namespace

std::size_t TermVecHash::operator()(const std::vector<Term> & v) const
{
  std::size_t h = v.size();
  for (Term t : v) h = combine(h, t->id);
  return h;
}

bool TermManager::NodeEq::operator()(const Node * a, const Node * b) const
{
  return a->op == b->op && a->sort == b->sort && a->value == b->value && a->name == b->name && a->kids == b->kids;
}

bool is_const(Term t) { return t->op == Op::Const || t->op == Op::True || t->op == Op::False; }
bool is_bool_const(Term t) { return t->op == Op::True || t->op == Op::False; }

TermManager::TermManager()
{
  Node t;
  t.op = Op::True;
  true_ = intern(t);
  Node f;
  f.op = Op::False;
  false_ = intern(f);
}

Term TermManager::intern(Node n)
{
  std::size_t h = combine(static_cast<std::size_t>(n.op), static_cast<std::size_t>(n.sort));
  h = combine(h, std::hash<std::int64_t>()(n.value));
  h = combine(h, std::hash<std::string>()(n.name));
  for (Term k : n.kids) h = combine(h, k->id);
  n.hash = h;
  auto it = table_.find(&n);
  if (it != table_.end()) return *it;
  n.id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(std::move(n));
  const Node * p = &nodes_.back();
  table_.insert(p);
  return p;
}

Term TermManager::mk_const(Sort s, std::int64_t v)
{
  if (s == Sort::Bool) return mk_bool(v != 0);
  Node n;
  n.op = Op::Const;
  n.sort = s;
  n.value = v;
  return intern(n);
}

Term TermManager::mk_int(std::int64_t v) { return mk_const(Sort::Int, v); }
Term TermManager::mk_addr(int id) { return mk_const(Sort::Address, id); }
Term TermManager::mk_proc(int id) { return mk_const(Sort::Proc, id); }

Term TermManager::mk_var(const std::string & name, Sort s)
{
  Node n;
  n.op = Op::Var;
  n.sort = s;
  n.name = name;
  return intern(n);
}

Term TermManager::fresh_var(const std::string & base, Sort s)
{
  int & k = fresh_[base];
  return mk_var(base + "!" + std::to_string(k++), s);
}

Term TermManager::mk_not(Term a)
{
  switch (a->op) {
    case Op::True: return false_;
    case Op::False: return true_;
    case Op::Not: return a->kids[0];
    case Op::Lt: return mk_le(a->kids[1], a->kids[0]);
    case Op::Le: return mk_lt(a->kids[1], a->kids[0]);
    default: break;
  }
  Node n;
  n.op = Op::Not;
  n.kids = { a };
  return intern(n);
}

Term TermManager::mk_and(std::vector<Term> kids)
{
  std::vector<Term> out;
  std::unordered_set<Term> seen;
  std::vector<Term> stack(kids.rbegin(), kids.rend());
  while (!stack.empty()) {
    Term k = stack.back();
    stack.pop_back();
    if (k->op == Op::True) continue;
    if (k->op == Op::False) return false_;
    if (k->op == Op::And) {
      for (auto it = k->kids.rbegin(); it != k->kids.rend(); ++it) stack.push_back(*it);
      continue;
    }
    if (seen.insert(k).second) out.push_back(k);
  }
  for (Term k : out)
    if (k->op == Op::Not && seen.count(k->kids[0])) return false_;
  if (out.empty()) return true_;
  if (out.size() == 1) return out[0];
  Node n;
  n.op = Op::And;
  n.kids = std::move(out);
  return intern(n);
}

Term TermManager::mk_or(std::vector<Term> kids)
{
  std::vector<Term> out;
  std::unordered_set<Term> seen;
  std::vector<Term> stack(kids.rbegin(), kids.rend());
  while (!stack.empty()) {
    Term k = stack.back();
    stack.pop_back();
    if (k->op == Op::False) continue;
    if (k->op == Op::True) return true_;
    if (k->op == Op::Or) {
      for (auto it = k->kids.rbegin(); it != k->kids.rend(); ++it) stack.push_back(*it);
      continue;
    }
    if (seen.insert(k).second) out.push_back(k);
  }
  for (Term k : out)
    if (k->op == Op::Not && seen.count(k->kids[0])) return true_;
  if (out.empty()) return false_;
  if (out.size() == 1) return out[0];
  Node n;
  n.op = Op::Or;
  n.kids = std::move(out);
  return intern(n);
}

Term TermManager::mk_ite(Term c, Term a, Term b)
{
  if (c->op == Op::True) return a;
  if (c->op == Op::False) return b;
  if (a == b) return a;
  if (c->op == Op::Not) return mk_ite(c->kids[0], b, a);
  if (a->op == Op::Ite && a->kids[0] == c) return mk_ite(c, a->kids[1], b);
  if (b->op == Op::Ite && b->kids[0] == c) return mk_ite(c, a, b->kids[2]);
  if (a->sort == Sort::Bool) {
    if (a->op == Op::True) return mk_or(c, b);
    if (a->op == Op::False) return mk_and(mk_not(c), b);
    if (b->op == Op::True) return mk_or(mk_not(c), a);
    if (b->op == Op::False) return mk_and(c, a);
  }
  Node n;
  n.op = Op::Ite;
  n.sort = a->sort;
  n.kids = { c, a, b };
  return intern(n);
}

Term TermManager::mk_eq(Term a, Term b)
{
  if (a == b) return true_;
  if (is_const(a) && is_const(b)) return false_;  // interned, so distinct constants differ
  if (a->sort == Sort::Bool) {
    if (a->op == Op::True) return b;
    if (b->op == Op::True) return a;
    if (a->op == Op::False) return mk_not(b);
    if (b->op == Op::False) return mk_not(a);
  }
  if (is_const(a) && !is_const(b)) std::swap(a, b);
  if (is_const(b) && a->op == Op::Ite && is_const(a->kids[1]) && is_const(a->kids[2]))
    return mk_ite(a->kids[0], mk_eq(a->kids[1], b), mk_eq(a->kids[2], b));
  if (!is_const(b) && b->id < a->id) std::swap(a, b);
  Node n;
  n.op = Op::Eq;
  n.kids = { a, b };
  return intern(n);
}

Term TermManager::mk_le(Term a, Term b)
{
  if (a == b) return true_;
  if (a->op == Op::Const && b->op == Op::Const) return mk_bool(a->value <= b->value);
  Node n;
  n.op = Op::Le;
  n.kids = { a, b };
  return intern(n);
}

Term TermManager::mk_lt(Term a, Term b)
{
  if (a == b) return false_;
  if (a->op == Op::Const && b->op == Op::Const) return mk_bool(a->value < b->value);
  Node n;
  n.op = Op::Lt;
  n.kids = { a, b };
  return intern(n);
}

Term TermManager::mk_add(std::vector<Term> kids)
{
  // linear combination over atoms, in order of first appearance
  std::vector<Term> atoms;
  std::unordered_map<Term, std::int64_t> coef;
  std::int64_t k0 = 0;
  auto add_atom = [&](Term t, std::int64_t c) {
    auto it = coef.find(t);
    if (it == coef.end()) {
      atoms.push_back(t);
      coef[t] = c;
    } else {
      it->second = checked_add(it->second, c);
    }
  };
  std::vector<std::pair<Term, std::int64_t>> stack;
  for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({ *it, 1 });
  while (!stack.empty()) {
    auto [t, c] = stack.back();
    stack.pop_back();
    if (t->op == Op::Const) {
      k0 = checked_add(k0, checked_mul(c, t->value));
    } else if (t->op == Op::Add) {
      for (auto it = t->kids.rbegin(); it != t->kids.rend(); ++it) stack.push_back({ *it, c });
    } else if (t->op == Op::Mul && t->kids[0]->op == Op::Const) {
      stack.push_back({ t->kids[1], checked_mul(c, t->kids[0]->value) });
    } else {
      add_atom(t, c);
    }
  }
  std::vector<Term> out;
  for (Term a : atoms) {
    std::int64_t c = coef[a];
    if (c == 0) continue;
    if (c == 1) {
      out.push_back(a);
    } else {
      Node m;
      m.op = Op::Mul;
      m.sort = Sort::Int;
      m.kids = { mk_int(c), a };
      out.push_back(intern(m));
    }
  }
  if (k0 != 0 || out.empty()) out.push_back(mk_int(k0));
  if (out.size() == 1) return out[0];
  Node n;
  n.op = Op::Add;
  n.sort = Sort::Int;
  n.kids = std::move(out);
  return intern(n);
}

Term TermManager::scale(Term t, std::int64_t k)
{
  if (k == 1) return t;
  if (k == 0) return mk_int(0);
  if (t->op == Op::Const) return mk_int(checked_mul(k, t->value));
  Node m;
  m.op = Op::Mul;
  m.sort = Sort::Int;
  m.kids = { mk_int(k), t };
  // mk_add distributes and merges nested scalings
  return mk_add(std::vector<Term>{ intern(m) });
}

Term TermManager::mk_sub(Term a, Term b) { return mk_add(a, scale(b, -1)); }
Term TermManager::mk_neg(Term a) { return scale(a, -1); }

Term TermManager::mk_mul(Term a, Term b)
{
  if (a->op == Op::Const) return scale(b, a->value);
  if (b->op == Op::Const) return scale(a, b->value);
  if (b->id < a->id) std::swap(a, b);
  Node n;
  n.op = Op::Mul;
  n.sort = Sort::Int;
  n.kids = { a, b };
  return intern(n);
}

Term TermManager::mk_quant(Op q, std::vector<Term> vars, Term body)
{
  std::vector<Term> keep;
  std::unordered_set<Term> seen;
  for (Term v : vars)
    if (occurs(v, body) && seen.insert(v).second) keep.push_back(v);
  if (keep.empty()) return body;
  if (body->op == q) {
    for (std::size_t i = 0; i + 1 < body->kids.size(); ++i)
      if (seen.insert(body->kids[i]).second) keep.push_back(body->kids[i]);
    body = body->kids.back();
  }
  std::sort(keep.begin(), keep.end(), [](Term x, Term y) { return x->id < y->id; });
  Node n;
  n.op = q;
  n.kids = std::move(keep);
  n.kids.push_back(body);
  return intern(n);
}

Term TermManager::mk_forall(std::vector<Term> vars, Term body) { return mk_quant(Op::Forall, std::move(vars), body); }
Term TermManager::mk_exists(std::vector<Term> vars, Term body) { return mk_quant(Op::Exists, std::move(vars), body); }

const std::vector<Term> & TermManager::free_vars(Term t)
{
  auto it = fv_cache_.find(t);
  if (it != fv_cache_.end()) return it->second;
  // iterative post-order to stay off the stack on deep terms
  std::vector<std::pair<Term, bool>> stack{ { t, false } };
  while (!stack.empty()) {
    auto [n, done] = stack.back();
    stack.pop_back();
    if (fv_cache_.count(n)) continue;
    if (!done) {
      stack.push_back({ n, true });
      for (Term k : n->kids)
        if (!fv_cache_.count(k)) stack.push_back({ k, false });
      continue;
    }
    std::vector<Term> out;
    if (n->op == Op::Var) {
      out.push_back(n);
    } else if (is_quant(n->op)) {
      const auto & b = fv_cache_.at(n->kids.back());
      for (Term v : b)
        if (std::find(n->kids.begin(), n->kids.end() - 1, v) == n->kids.end() - 1) out.push_back(v);
    } else {
      for (Term k : n->kids) {
        const auto & f = fv_cache_.at(k);
        std::vector<Term> merged;
        std::set_union(out.begin(), out.end(), f.begin(), f.end(), std::back_inserter(merged),
                       [](Term x, Term y) { return x->id < y->id; });
        out = std::move(merged);
      }
    }
    fv_cache_[n] = std::move(out);
  }
  return fv_cache_.at(t);
}

bool TermManager::occurs(Term var, Term t)
{
  const auto & f = free_vars(t);
  return std::binary_search(f.begin(), f.end(), var, [](Term x, Term y) { return x->id < y->id; });
}

Term TermManager::subst(Term t, const std::unordered_map<Term, Term> & map)
{
  return subst(std::vector<Term>{ t }, map)[0];
}

std::vector<Term> TermManager::subst(const std::vector<Term> & ts, const std::unordered_map<Term, Term> & map)
{
  std::unordered_map<Term, Term> memo;
  auto rec = [&](auto & self, Term n) -> Term {
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    Term r = n;
    if (n->op == Op::Var) {
      auto m = map.find(n);
      if (m != map.end()) r = m->second;
    } else if (!n->kids.empty()) {
      bool touched = false;
      for (Term v : free_vars(n))
        if (map.count(v)) {
          touched = true;
          break;
        }
      if (touched) {
        if (is_quant(n->op)) {
          // bound variables are never substitution targets
          std::unordered_map<Term, Term> inner = map;
          for (std::size_t i = 0; i + 1 < n->kids.size(); ++i) inner.erase(n->kids[i]);
          std::vector<Term> vars(n->kids.begin(), n->kids.end() - 1);
          r = mk_quant(n->op, vars, subst(n->kids.back(), inner));
        } else {
          std::vector<Term> k;
          k.reserve(n->kids.size());
          for (Term c : n->kids) k.push_back(self(self, c));
          switch (n->op) {
            case Op::Not: r = mk_not(k[0]); break;
            case Op::And: r = mk_and(k); break;
            case Op::Or: r = mk_or(k); break;
            case Op::Ite: r = mk_ite(k[0], k[1], k[2]); break;
            case Op::Eq: r = mk_eq(k[0], k[1]); break;
            case Op::Le: r = mk_le(k[0], k[1]); break;
            case Op::Lt: r = mk_lt(k[0], k[1]); break;
            case Op::Add: r = mk_add(k); break;
            case Op::Mul: r = mk_mul(k[0], k[1]); break;
            default: throw std::logic_error("subst: unexpected node");
          }
        }
      }
    }
    memo[n] = r;
    return r;
  };
  std::vector<Term> out;
  out.reserve(ts.size());
  for (Term t : ts) out.push_back(rec(rec, t));
  return out;
}

std::size_t TermManager::dag_size(Term t) const
{
  std::unordered_set<Term> seen;
  std::vector<Term> stack{ t };
  while (!stack.empty()) {
    Term n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    for (Term k : n->kids) stack.push_back(k);
  }
  return seen.size();
}

std::int64_t Evaluator::eval(Term t) { return eval_rec(t, memo_); }

std::int64_t Evaluator::eval_rec(Term t, std::unordered_map<Term, std::int64_t> & memo)
{
  auto it = memo.find(t);
  if (it != memo.end()) return it->second;
  auto ev = [&](Term k) { return eval_rec(k, memo); };
  std::int64_t r = 0;
  switch (t->op) {
    case Op::True: r = 1; break;
    case Op::False: r = 0; break;
    case Op::Const: r = t->value; break;
    case Op::Var: {
      auto e = env_.find(t);
      if (e == env_.end()) throw std::runtime_error("unassigned variable " + t->name);
      r = e->second;
      break;
    }
    case Op::Not: r = !ev(t->kids[0]); break;
    case Op::And:
      r = 1;
      for (Term k : t->kids)
        if (!ev(k)) {
          r = 0;
          break;
        }
      break;
    case Op::Or:
      r = 0;
      for (Term k : t->kids)
        if (ev(k)) {
          r = 1;
          break;
        }
      break;
    case Op::Ite: r = ev(t->kids[0]) ? ev(t->kids[1]) : ev(t->kids[2]); break;
    case Op::Eq: r = ev(t->kids[0]) == ev(t->kids[1]); break;
    case Op::Le: r = ev(t->kids[0]) <= ev(t->kids[1]); break;
    case Op::Lt: r = ev(t->kids[0]) < ev(t->kids[1]); break;
    case Op::Add:
      for (Term k : t->kids) r = checked_add(r, ev(k));
      break;
    case Op::Mul: r = checked_mul(ev(t->kids[0]), ev(t->kids[1])); break;
    case Op::Forall:
    case Op::Exists: {
      bool is_all = t->op == Op::Forall;
      std::vector<Term> vars(t->kids.begin(), t->kids.end() - 1);
      Term body = t->kids.back();
      std::vector<std::vector<std::int64_t>> doms;
      for (Term v : vars) {
        std::vector<std::int64_t> d;
        switch (v->sort) {
          case Sort::Bool: d = { 0, 1 }; break;
          case Sort::Address:
            for (int i = 0; i < dom_.num_addresses; ++i) d.push_back(i);
            break;
          case Sort::Proc:
            for (int i = 0; i < dom_.num_procs; ++i) d.push_back(i);
            break;
          default:
            if (!dom_.ints) throw std::runtime_error("int quantifier without a domain");
            d = *dom_.ints;
        }
        doms.push_back(std::move(d));
      }
      std::vector<std::size_t> idx(vars.size(), 0);
      bool result = is_all;
      bool empty = false;
      for (auto & d : doms)
        if (d.empty()) empty = true;
      while (!empty) {
        for (std::size_t i = 0; i < vars.size(); ++i) env_[vars[i]] = doms[i][idx[i]];
        std::unordered_map<Term, std::int64_t> inner;
        bool b = eval_rec(body, inner) != 0;
        if (b != is_all) {
          result = b;
          break;
        }
        std::size_t i = 0;
        while (i < idx.size() && ++idx[i] == doms[i].size()) idx[i++] = 0;
        if (i == idx.size()) break;
      }
      for (std::size_t i = 0; i < vars.size(); ++i) env_.erase(vars[i]);
      r = result;
      break;
    }
  }
  memo[t] = r;
  return r;
}

std::string sort_smt(Sort s)
{
  switch (s) {
    case Sort::Bool: return "Bool";
    case Sort::Int: return "Int";
    case Sort::Address: return "Addr";
    case Sort::Proc: return "Proc";
    default: return "Args";
  }
}

namespace {

const char * op_smt(Op op)
{
  switch (op) {
    case Op::Not: return "not";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Ite: return "ite";
    case Op::Eq: return "=";
    case Op::Le: return "<=";
    case Op::Lt: return "<";
    case Op::Add: return "+";
    case Op::Mul: return "*";
    case Op::Forall: return "forall";
    case Op::Exists: return "exists";
    default: return "?";
  }
}

bool atomic(Term t) { return t->kids.empty(); }

class Printer
{
 public:
  Printer(TermManager & tm, bool share, bool lower) : tm_(tm), share_(share), lower_(lower) {}

  void scope(std::ostream & os, Term t, const std::vector<Term> & bound)
  {
    // nodes to bind here: shared inside this scope, not under a nested binder,
    // and mentioning one of `bound` (or anything at the outermost scope)
    std::vector<Term> bind;
    if (share_) {
      std::unordered_map<Term, int> refs;
      std::vector<Term> order;
      std::vector<std::pair<Term, bool>> stack{ { t, false } };
      std::unordered_set<Term> visited;
      while (!stack.empty()) {
        auto [n, done] = stack.back();
        stack.pop_back();
        if (done) {
          order.push_back(n);
          continue;
        }
        if (!visited.insert(n).second) continue;
        stack.push_back({ n, true });
        if (atomic(n) || names_.count(n) || n->op == Op::Forall || n->op == Op::Exists) continue;
        for (auto it = n->kids.rbegin(); it != n->kids.rend(); ++it) {
          ++refs[*it];
          stack.push_back({ *it, false });
        }
      }
      for (Term n : order)
        if (n != t && refs[n] > 1 && !atomic(n) && !names_.count(n) && n->op != Op::Forall && n->op != Op::Exists &&
            mentions(n, bound))
          bind.push_back(n);
    }
    if (bind.empty()) {
      expr(os, t);
      return;
    }
    // group into parallel let levels
    std::unordered_map<Term, int> level;
    std::unordered_set<Term> bset(bind.begin(), bind.end());
    int max_level = 0;
    for (Term n : bind) {
      int l = 0;
      std::vector<Term> stack(n->kids.begin(), n->kids.end());
      std::unordered_set<Term> seen;
      while (!stack.empty()) {
        Term k = stack.back();
        stack.pop_back();
        if (!seen.insert(k).second) continue;
        if (bset.count(k)) {
          l = std::max(l, level.at(k) + 1);
          continue;
        }
        if (atomic(k) || names_.count(k) || k->op == Op::Forall || k->op == Op::Exists) continue;
        for (Term c : k->kids) stack.push_back(c);
      }
      level[n] = l;
      max_level = std::max(max_level, l);
    }
    std::vector<std::vector<Term>> levels(max_level + 1);
    for (Term n : bind) levels[level[n]].push_back(n);
    for (auto & lv : levels) {
      os << "(let (";
      bool first = true;
      for (Term n : lv) {
        std::string name = "_l" + std::to_string(counter_++);
        if (!first) os << ' ';
        first = false;
        os << '(' << name << ' ';
        expr(os, n);
        os << ')';
        names_[n] = name;
      }
      os << ") ";
    }
    expr(os, t);
    for (std::size_t i = 0; i < levels.size(); ++i) os << ')';
    for (Term n : bind) names_.erase(n);
  }

 private:
  bool mentions(Term n, const std::vector<Term> & bound)
  {
    if (bound.empty()) return true;
    for (Term v : bound)
      if (tm_.occurs(v, n)) return true;
    return false;
  }

  void expr(std::ostream & os, Term t)
  {
    auto nm = names_.find(t);
    if (nm != names_.end()) {
      os << nm->second;
      return;
    }
    switch (t->op) {
      case Op::True: os << "true"; return;
      case Op::False: os << "false"; return;
      case Op::Const:
        if (t->value < 0)
          os << "(- " << -t->value << ')';
        else
          os << t->value;
        return;
      case Op::Var: os << t->name; return;
      case Op::Forall:
      case Op::Exists: {
        os << '(' << op_smt(t->op) << " (";
        std::vector<Term> vars(t->kids.begin(), t->kids.end() - 1);
        for (std::size_t i = 0; i < vars.size(); ++i) {
          if (i) os << ' ';
          Sort s = vars[i]->sort;
          if (lower_ && (s == Sort::Address || s == Sort::Proc))
            throw std::logic_error("finite-sort binder left in a lowered term");
          os << '(' << vars[i]->name << ' ' << sort_smt(s) << ')';
        }
        os << ") ";
        scope(os, t->kids.back(), vars);
        os << ')';
        return;
      }
      default: break;
    }
    os << '(' << op_smt(t->op);
    for (Term k : t->kids) {
      os << ' ';
      expr(os, k);
    }
    os << ')';
  }

  TermManager & tm_;
  bool share_;
  bool lower_;
  std::unordered_map<Term, std::string> names_;
  int counter_ = 0;
};

}  // namespace

std::string to_sexpr(TermManager & tm, Term t, bool share, bool lower)
{
  std::ostringstream os;
  Printer p(tm, share, lower);
  p.scope(os, t, {});
  return os.str();
}

}  // namespace chmc::fol
