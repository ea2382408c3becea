#include "chmc/smt/engines.hpp"

#include <filesystem>
#include <fstream>
#include <algorithm>
#include <mutex>
#include <iomanip>
#include <sstream>
#include <thread>

#include "chmc/semantics/interpreter.hpp"
#include "chmc/smt/emit.hpp"
#include "chmc/smt/solver.hpp"

namespace chmc::smt {

using fol::Term;
using Clock = std::chrono::steady_clock;

const char * verdict_name(VerdictKind k)
{
  switch (k) {
    case VerdictKind::Valid: return "valid";
    case VerdictKind::Invalid: return "invalid";
    case VerdictKind::Unknown: return "unknown";
  }
  return "?";
}

namespace {

// A solver session that also keeps the live command text so every query
// can be dumped as a standalone script.
class Script
{
 public:
  Script(const EngineConfig & cfg, const std::atomic<bool> * cancel, std::string tag, bool quantifier_free = false)
    : cfg_(cfg),
      session_(cfg.solver.empty() ? default_solver_command() : cfg.solver, cancel),
      tag_(std::move(tag)),
      incremental_(cfg.incremental || quantifier_free)
  {
    frames_.push_back("");
  }

  void send(const std::string & s)
  {
    if (incremental_) session_.send(s);
    frames_.back() += s;
    if (s.empty() || s.back() != '\n') frames_.back() += '\n';
  }
  void push()
  {
    if (incremental_) session_.push();
    frames_.push_back("");
  }
  void pop()
  {
    if (incremental_) session_.pop();
    frames_.pop_back();
  }

  CheckResult check(Clock::time_point deadline)
  {
    if (!cfg_.emit_dir.empty()) {
      std::filesystem::create_directories(cfg_.emit_dir);
      std::ostringstream name;
      name << cfg_.emit_prefix << "_" << tag_ << "_" << std::setw(4) << std::setfill('0') << count_++ << ".smt2";
      std::ofstream out(std::filesystem::path(cfg_.emit_dir) / name.str());
      for (const auto & f : frames_) out << f;
      out << "(check-sat)\n";
    }
    if (!incremental_) {
      session_.reset();
      for (const auto & f : frames_)
        if (!f.empty()) session_.send(f);
    }
    return session_.check_sat(deadline);
  }

  SolverSession & session() { return session_; }

 private:
  const EngineConfig & cfg_;
  SolverSession session_;
  std::string tag_;
  bool incremental_;
  std::vector<std::string> frames_;
  int count_ = 0;
};

struct Unroller
{
  const PreparedTask & task;
  Emitter em;
  int states = 0;  // declared state copies
  int edges = 0;

  explicit Unroller(const PreparedTask & t) : task(t), em(*t.ts) {}

  // Declares up to state copy k (and the edges between).
  void extend(Script & sc, int k, bool constrain_states)
  {
    while (states <= k) {
      if (states > 0) {
        int e = states - 1;
        sc.send(em.declare_tx(e));
        sc.send("(assert " + em.apply_tx("tx_ok", e) + ")");
      }
      sc.send(em.declare_state(states));
      if (constrain_states) sc.send("(assert " + em.apply_state("state_ok", states) + ")");
      if (states > 0) sc.send("(assert " + em.apply_trans(states - 1) + ")");
      ++states;
    }
  }
};

Verdict unknown(const std::string & engine, int depth, const std::string & reason)
{
  Verdict v;
  v.engine = engine;
  v.depth = depth;
  v.reason = reason;
  return v;
}

std::string reason_of(CheckResult r)
{
  switch (r) {
    case CheckResult::Timeout: return "timeout";
    case CheckResult::Cancelled: return "cancelled";
    case CheckResult::Unknown: return "inconclusive";
    default: return "solver-error";
  }
}

// Reads the transactions of a depth-k model and replays them.
Verdict extract_trace(Script & sc, const Unroller & u, int k, const std::string & engine)
{
  const fol::TransitionSystem & ts = *u.task.ts;
  const System & sys = ts.sys();
  Verdict v;
  v.engine = engine;
  v.kind = VerdictKind::Invalid;
  v.depth = k;
  std::vector<std::vector<std::int64_t>> states;
  for (int i = 0; i <= k; ++i) states.push_back(sc.session().get_values(u.em.state_names(i)));
  FlaggedState cur = ts.decode_state(states[0]);
  if (!(cur == FlaggedState{ initial_state(sys), false }))
    return unknown(engine, k, "solver-error: model does not start in the initial state");
  for (int i = 0; i < k; ++i) {
    Transaction tx = ts.decode_tx(sc.session().get_values(u.em.tx_names(i)));
    cur = step_flagged(sys, cur, tx);
    if (!(cur == ts.decode_state(states[i + 1])))
      return unknown(engine, k, "solver-error: trace replay mismatch at step " + std::to_string(i + 1));
    v.trace.push_back(std::move(tx));
  }
  return v;
}

}  // namespace

std::vector<std::pair<std::string, Term>> invariant_candidates(const fol::TransitionSystem & ts)
{
  fol::TermManager & tm = ts.tm();
  const System & sys = ts.sys();
  const auto & sl = ts.state_layout();
  const auto & s = ts.s();
  std::vector<Term> atoms;
  std::vector<Term> guards{ tm.mk_true() };
  Term zero = tm.mk_int(0);

  std::vector<std::int64_t> lits = sys.int_literals();
  auto owner_balance = [&](int var) -> int {
    for (std::size_t c = 0; c < sl.slot.size(); ++c)
      for (int i : sl.slot[c])
        if (i == var) return sl.balance[sys.roster.contract_address(static_cast<int>(c))];
    return -1;
  };

  for (std::size_t i = 0; i < s.size(); ++i) {
    if (static_cast<int>(i) == sl.reverted) continue;
    Term v = s[i];
    if (v->sort == Sort::Int) {
      atoms.push_back(tm.mk_le(zero, v));
      atoms.push_back(tm.mk_eq(v, zero));
      int b = owner_balance(static_cast<int>(i));
      if (b >= 0) atoms.push_back(tm.mk_le(v, s[b]));
    } else if (v->sort == Sort::Bool) {
      atoms.push_back(v);
      atoms.push_back(tm.mk_not(v));
    } else if (v->sort == Sort::Address) {
      for (int a = 0; a < sys.roster.num_values(); ++a) {
        atoms.push_back(tm.mk_not(tm.mk_eq(v, tm.mk_addr(a))));
        atoms.push_back(tm.mk_eq(v, tm.mk_addr(a)));
      }
    }
  }
  // contract balance against the sum of its int maps
  for (std::size_t c = 0; c < sys.contracts.size(); ++c) {
    const ContractDecl & d = sys.decl(static_cast<int>(c));
    Term bal = s[sl.balance[sys.roster.contract_address(static_cast<int>(c))]];
    guards.push_back(s[sl.constructed[c]]);
    guards.push_back(tm.mk_not(s[sl.constructed[c]]));
    for (std::size_t f = 0; f < d.fields.size(); ++f) {
      const FieldDecl & fd = d.fields[f];
      if (fd.type.is_map && fd.type.scalar == Sort::Int) {
        std::vector<Term> parts;
        for (int a = 1; a < sys.roster.num_values(); ++a)
          parts.push_back(s[sl.slot[c][sys.slot_of(static_cast<int>(c), static_cast<int>(f), a)]]);
        Term sum = tm.mk_add(parts);
        atoms.push_back(tm.mk_eq(bal, sum));
        atoms.push_back(tm.mk_le(sum, bal));
      }
      if (fd.type.is_map) continue;
      Term x = s[sl.slot[c][sys.slot_of(static_cast<int>(c), static_cast<int>(f), 0)]];
      if (fd.type.scalar == Sort::Int) {
        for (auto k : lits) {
          guards.push_back(tm.mk_eq(x, tm.mk_int(k)));
          atoms.push_back(tm.mk_le(x, tm.mk_int(k)));
          atoms.push_back(tm.mk_le(tm.mk_int(k), x));
        }
      } else if (fd.type.scalar == Sort::Bool) {
        guards.push_back(x);
        guards.push_back(tm.mk_not(x));
      }
    }
  }
  // conservation of the total supply
  {
    std::vector<Term> bals;
    for (int a = 1; a < sys.roster.num_values(); ++a) bals.push_back(s[sl.balance[a]]);
    Term total = tm.mk_add(bals);
    std::vector<std::int64_t> init_vals = ts.encode_state({ initial_state(sys), false });
    std::int64_t t0 = 0;
    for (int a = 1; a < sys.roster.num_values(); ++a) t0 += init_vals[sl.balance[a]];
    atoms.push_back(tm.mk_eq(total, tm.mk_int(t0)));
  }

  fol::EvalDomains dom{ sys.roster.num_values(), static_cast<int>(sys.procs.size()), std::nullopt };
  fol::Evaluator ev(dom);
  auto init = ts.encode_state({ initial_state(sys), false });
  for (std::size_t i = 0; i < s.size(); ++i) ev.set(s[i], init[i]);

  std::vector<std::pair<std::string, Term>> out;
  std::unordered_set<Term> seen;
  for (Term g : guards)
    for (Term a : atoms) {
      Term c = tm.mk_implies(g, a);
      if (c->op == fol::Op::True || !seen.insert(c).second) continue;
      if (!ev.eval(c)) continue;
      out.push_back({ "inv_" + std::to_string(out.size()), c });
    }
  return out;
}

PreparedTask prepare_task(const fol::TransitionSystem & ts, Term prop, bool invariants)
{
  PreparedTask t;
  t.ts = &ts;
  Emitter em(ts);
  t.definitions = em.preamble() + em.system_definitions() + em.define_state_predicate("prop", prop);
  t.num_state_vars = ts.s().size();
  if (invariants) {
    for (auto & [name, c] : invariant_candidates(ts)) {
      t.candidate_names.push_back(name);
      t.candidate_defs.push_back(em.define_state_predicate(name, c));
    }
  }
  return t;
}

Verdict bmc(const PreparedTask & task, const EngineConfig & cfg, const std::atomic<bool> * cancel)
{
  auto start = Clock::now();
  auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.timeout));
  int reached = -1;
  Verdict v;
  try {
    Script sc(cfg, cancel, "bmc");
    Unroller u(task);
    sc.send(task.definitions);
    u.extend(sc, 0, false);
    sc.send("(assert " + u.em.apply_state("init", 0) + ")");
    for (int k = 0; k <= cfg.max_depth; ++k) {
      u.extend(sc, k, false);
      sc.push();
      sc.send("(assert (not " + u.em.apply_state("prop", k) + "))");
      CheckResult r = sc.check(deadline);
      if (r == CheckResult::Sat) {
        v = extract_trace(sc, u, k, "bmc");
        v.solver_seconds = sc.session().solver_seconds();
        break;
      }
      if (r != CheckResult::Unsat) {
        v = unknown("bmc", reached, reason_of(r));
        v.solver_seconds = sc.session().solver_seconds();
        break;
      }
      sc.pop();
      reached = k;
      if (k == cfg.max_depth) {
        v = unknown("bmc", reached, "inconclusive: no counterexample up to depth " + std::to_string(k));
        v.solver_seconds = sc.session().solver_seconds();
      }
    }
  } catch (const SolverError & e) {
    v = unknown("bmc", reached, std::string("solver-error: ") + e.what());
  }
  v.bounded = cfg.bounded;
  v.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return v;
}

std::vector<std::string> houdini(const PreparedTask & task, const EngineConfig & cfg, const std::atomic<bool> * cancel)
{
  std::vector<std::string> active = task.candidate_names;
  if (active.empty()) return active;
  auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.timeout));
  Script sc(cfg, cancel, "houdini", true);
  Unroller u(task);
  sc.send(task.definitions);
  for (const auto & d : task.candidate_defs) sc.send(d);
  u.extend(sc, 1, true);
  for (;;) {
    sc.push();
    std::string pre = "(and", post = "(and";
    std::vector<std::string> at1;
    for (const auto & n : active) {
      pre += " " + u.em.apply_state(n, 0);
      at1.push_back(u.em.apply_state(n, 1));
      post += " " + at1.back();
    }
    sc.send("(assert " + pre + "))");
    sc.send("(assert (not " + post + ")))");
    CheckResult r = sc.check(deadline);
    if (r == CheckResult::Unsat) return active;
    if (r != CheckResult::Sat) return {};
    auto vals = sc.session().get_values(at1);
    std::vector<std::string> keep;
    for (std::size_t i = 0; i < active.size(); ++i)
      if (vals[i]) keep.push_back(active[i]);
    sc.pop();
    active = std::move(keep);
    if (active.empty()) return active;
  }
}

Verdict kinduction(const PreparedTask & task, const EngineConfig & cfg, const std::atomic<bool> * cancel)
{
  auto start = Clock::now();
  auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.timeout));
  Verdict v = unknown("kind", 0, "inconclusive: max k reached");
  double solver = 0;
  try {
    std::vector<std::string> inv = cfg.invariants ? houdini(task, cfg, cancel) : std::vector<std::string>{};
    Script base(cfg, cancel, "base");
    Unroller ub(task);
    base.send(task.definitions);
    ub.extend(base, 0, false);
    base.send("(assert " + ub.em.apply_state("init", 0) + ")");

    Script step(cfg, cancel, "step");
    Unroller us(task);
    step.send(task.definitions);
    for (std::size_t i = 0; i < task.candidate_names.size(); ++i)
      if (std::find(inv.begin(), inv.end(), task.candidate_names[i]) != inv.end()) step.send(task.candidate_defs[i]);
    auto assume_inv = [&](int k) {
      for (const auto & n : inv) step.send("(assert " + us.em.apply_state(n, k) + ")");
    };
    us.extend(step, 0, true);
    assume_inv(0);

    bool last_unknown = false;
    for (int k = 1; k <= cfg.max_k; ++k) {
      // base: no violation at depth k-1
      ub.extend(base, k - 1, false);
      base.push();
      base.send("(assert (not " + ub.em.apply_state("prop", k - 1) + "))");
      CheckResult rb = base.check(deadline);
      if (rb == CheckResult::Sat) {
        v = extract_trace(base, ub, k - 1, "kind");
        break;
      }
      if (rb != CheckResult::Unsat) {
        v = unknown("kind", k - 1, reason_of(rb));
        break;
      }
      base.pop();

      if (k == 1 && !inv.empty()) {
        // the invariants alone may already imply the property
        step.push();
        step.send("(assert (not " + us.em.apply_state("prop", 0) + "))");
        CheckResult r0 = step.check(deadline);
        step.pop();
        if (r0 == CheckResult::Unsat) {
          v = Verdict{ VerdictKind::Valid, 1, {}, "", "kind" };
          break;
        }
        if (r0 == CheckResult::Timeout || r0 == CheckResult::Cancelled) {
          v = unknown("kind", 0, reason_of(r0));
          break;
        }
      }

      // step: P at states 0..k-1 implies P at state k
      us.extend(step, k, true);
      assume_inv(k);
      step.send("(assert " + us.em.apply_state("prop", k - 1) + ")");
      step.push();
      step.send("(assert (not " + us.em.apply_state("prop", k) + "))");
      CheckResult rs = step.check(deadline);
      if (rs == CheckResult::Unsat) {
        v = Verdict{ VerdictKind::Valid, k, {}, "", "kind" };
        break;
      }
      if (rs == CheckResult::Timeout || rs == CheckResult::Cancelled) {
        v = unknown("kind", k - 1, reason_of(rs));
        break;
      }
      last_unknown = rs == CheckResult::Unknown;
      step.pop();
    }
    if (v.kind == VerdictKind::Unknown && v.reason.rfind("inconclusive", 0) == 0 && last_unknown)
      v.reason = "inconclusive: solver returned unknown on the step case";
    solver = base.session().solver_seconds() + step.session().solver_seconds();
  } catch (const SolverError & e) {
    v = unknown("kind", 0, std::string("solver-error: ") + e.what());
  }
  v.solver_seconds = solver;
  v.bounded = cfg.bounded;
  v.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return v;
}

Verdict run_engines(const PreparedTask & task, const EngineConfig & cfg, bool use_bmc, bool use_kind)
{
  if (use_bmc && !use_kind) return bmc(task, cfg);
  if (use_kind && !use_bmc) return kinduction(task, cfg);
  std::atomic<bool> cancel_bmc{ false }, cancel_kind{ false };
  std::mutex m;
  Verdict vb, vk;
  auto run = [&](bool is_bmc) {
    Verdict v = is_bmc ? bmc(task, cfg, &cancel_bmc) : kinduction(task, cfg, &cancel_kind);
    std::lock_guard<std::mutex> lk(m);
    (is_bmc ? vb : vk) = v;
    if (v.conclusive()) (is_bmc ? cancel_kind : cancel_bmc) = true;
  };
  std::thread tb(run, true), tk(run, false);
  tb.join();
  tk.join();
  if (vb.kind == VerdictKind::Invalid && vk.kind == VerdictKind::Valid)
    throw std::logic_error("engines disagree: bmc found a counterexample but k-induction proved the property");
  if (vk.kind == VerdictKind::Valid) return vk;
  if (vb.kind == VerdictKind::Invalid) return vb;
  if (vk.kind == VerdictKind::Invalid) return vk;
  // no conclusion: report the more informative one
  return vb.reason.rfind("cancelled", 0) == 0 ? vk : vb;
}

}  // namespace chmc::smt
