// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance [criterion...]   runs all criteria when none are named
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "chmc/driver/driver.hpp"
#include "chmc/fol/property.hpp"
#include "chmc/oracle/oracle.hpp"
#include "chmc/semantics/interpreter.hpp"
#include "chmc/semantics/trace.hpp"
#include "chmc/smt/emit.hpp"
#include "chmc/smt/solver.hpp"
#include "fixtures.hpp"
#include "../support/gen.hpp"

using namespace chmc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// pinned tolerances
constexpr double kTaskBudget = 1000;        // seconds per v1 task
constexpr int kMaxInductionDepth = 8;
constexpr double kRefutationSolverBudget = 10;  // solver seconds per mutation
constexpr int kTransPairs = 10'000;         // per contract
constexpr int kTransSolverPairs = 300;      // of those, also pushed through the solver
constexpr int kReachDepth = 3;
constexpr std::int64_t kReachIntsHi = 2;    // formula differential: ints [0,2] plus literals
constexpr int kInvariantTrials = 10'000;
constexpr std::size_t kFormulaBatch = 50;

const std::vector<std::string> kContracts = { "bank/v1", "bank/v2", "bank/v3", "bank/v4", "bet/v1",
                                              "bet/v2",  "bet/v3",  "vault/v1", "vault/v2", "vault/v3" };

std::string corpus_file(const std::string & rel) { return std::string(CHMC_CORPUS_DIR) + "/" + rel; }

std::string usecase_of(const std::string & c) { return c.substr(0, c.find('/')); }

struct Outcome
{
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void fail(const std::string & why)
  {
    pass = false;
    if (failures.size() < 8) failures.push_back(why);
  }
};

std::string smt_value(Sort s, std::int64_t v)
{
  if (s == Sort::Bool) return v ? "true" : "false";
  return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v);
}

std::string pin(const std::vector<std::string> & names, const std::vector<fol::VarInfo> & vars,
                const std::vector<std::int64_t> & vals)
{
  std::string out = "(and";
  for (std::size_t i = 0; i < names.size(); ++i) out += " (= " + names[i] + " " + smt_value(vars[i].sort, vals[i]) + ")";
  return out + ")";
}

fol::EvalDomains eval_domains(const System & sys)
{
  return { sys.roster.num_values(), static_cast<int>(sys.procs.size()), std::nullopt };
}

std::chrono::steady_clock::time_point in(double secs)
{
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(secs));
}

// ---------------------------------------------------------------------------

Outcome v1_valid()
{
  Outcome o;
  int n = 0;
  for (const char * uc : { "bank", "bet", "vault" }) {
    driver::TaskConfig cfg;
    cfg.contract_path = corpus_file(std::string(uc) + "/v1/contract.sol");
    cfg.props_path = corpus_file(std::string(uc) + "/properties.hml");
    cfg.timeout = kTaskBudget;
    cfg.max_k = kMaxInductionDepth;
    driver::Report r = driver::verify(cfg);
    for (const auto & e : r.errors) o.fail(std::string(uc) + ": " + e);
    for (const auto & p : r.results) {
      ++n;
      std::ostringstream d;
      d << uc << "/" << p.name << "=" << p.verdict << "(k=" << p.depth << "," << std::fixed << std::setprecision(1)
        << p.seconds << "s)";
      if (p.verdict != "valid" || p.depth > kMaxInductionDepth || p.seconds > kTaskBudget) o.fail(d.str());
      o.detail += (o.detail.empty() ? "" : " ") + d.str();
    }
  }
  if (n != 9) o.fail("expected 9 v1 tasks, got " + std::to_string(n));
  return o;
}

Outcome refutation_depths()
{
  Outcome o;
  int n = 0;
  double worst = 0;
  for (const char * uc : { "bank", "bet", "vault" }) {
    auto gt = nlohmann::json::parse(test::read_file(corpus_file(std::string(uc) + "/ground_truth.json")));
    auto ints = gt.at("oracle").at("ints").get<std::vector<std::int64_t>>();
    int depth = gt.at("oracle").at("depth").get<int>();
    for (auto v = gt.at("labels").begin(); v != gt.at("labels").end(); ++v) {
      std::string contract = corpus_file(std::string(uc) + "/" + v.key() + "/contract.sol");
      System sys = load_system(test::read_file(contract));
      auto props = load_properties(test::read_file(corpus_file(std::string(uc) + "/properties.hml")), sys);
      for (auto p = v.value().begin(); p != v.value().end(); ++p) {
        if (p.value().at("status") != "invalid") continue;
        ++n;
        std::string tag = std::string(uc) + "/" + v.key() + "/" + p.key();
        // the label must still be what the oracle says
        const TypedProperty & tp = test::find_property(props, p.key());
        FiniteDomains dom = make_domains(sys, { &tp.formula.root }, ints[0], ints[1]);
        OracleVerdict ov = check_reachable(sys, tp.formula, depth, dom);
        int want = p.value().at("witness_length").get<int>();
        if (ov.status != OracleStatus::Fails || static_cast<int>(ov.witness.size()) != want) {
          o.fail(tag + ": stale label");
          continue;
        }
        driver::TaskConfig cfg;
        cfg.contract_path = contract;
        cfg.props_path = corpus_file(std::string(uc) + "/properties.hml");
        cfg.only_property = p.key();
        cfg.engine = driver::Engine::Bmc;
        cfg.timeout = 120;
        driver::Report r = driver::verify(cfg);
        if (r.results.size() != 1) {
          o.fail(tag + ": no result");
          continue;
        }
        const auto & res = r.results[0];
        worst = std::max(worst, res.solver_seconds);
        std::ostringstream d;
        d << tag << " bmc=" << res.verdict << "@" << res.depth << " oracle@" << want << " " << std::fixed
          << std::setprecision(2) << res.solver_seconds << "s";
        if (res.verdict != "invalid" || res.depth != want || res.solver_seconds > kRefutationSolverBudget ||
            res.oracle_check != "confirmed")
          o.fail(d.str() + " check=" + res.oracle_check);
      }
    }
  }
  std::ostringstream d;
  d << n << " mutations, max solver time " << std::fixed << std::setprecision(2) << worst << " s";
  o.detail = d.str();
  if (n == 0) o.fail("no invalid labels");
  return o;
}

Outcome bet_trace()
{
  Outcome o;
  auto check = [&](const std::string & tag, const std::string & src) {
    System sys = load_system(src);
    auto j = nlohmann::json::parse(test::read_file(std::string(CHMC_TEST_DATA) + "/bet_trace.json"));
    auto states = run_trace(sys, trace_from_json(sys, j));
    if (states.size() != 5) return o.fail(tag + ": trace length");
    for (std::size_t i = 1; i < states.size(); ++i)
      if (states[i].reverted) o.fail(tag + ": step " + std::to_string(i) + " reverted");
    const ChainState & s = states.back().state;
    const Roster & r = sys.roster;
    int bet = sys.find_contract("Bet");
    const ContractDecl & d = sys.decl(bet);
    std::int64_t rate = read_field(sys, s, bet, d.find_field("rate")).v;
    std::int64_t player = read_field(sys, s, bet, d.find_field("player")).v;
    bool ok = s.balance[r.id_of("A")] == 0 && s.balance[r.id_of("B")] == 20 && s.balance[r.id_of("M")] == 10 &&
              s.balance[r.id_of("Bet")] == 0 && rate == 150 && player == r.id_of("B");
    if (!ok) o.fail(tag + ": " + format_state(sys, states.back()));
  };
  check("listing", test::bet_listing);
  check("corpus", test::read_file(corpus_file("bet/v1/contract.sol")));
  o.detail = "A=0 B=20 M=10 Bet=0 rate=150 player=B";
  return o;
}

Outcome property_flips()
{
  Outcome o;
  const std::string props = R"(
property win_exists {
  (Bet.rate > 100 && Bet.player != null) ->
    exists a: address, f: proc, x: args . <a, Bet.f(x), 0> (balance[a] == old(balance[a] + balance[Bet]))
}
property win_forall {
  (Bet.rate > 100 && Bet.player != null) ->
    forall a: address . exists f: proc, x: args . <a, Bet.f(x), 0> (balance[a] == old(balance[a] + balance[Bet]))
}
property front_any {
  forall a: address . exists b: address, f: proc, x: args . <b, Bet.f(x), 0> <a, Bet.win(), 0> last_reverted
}
property front_not_oracle {
  forall a: address . exists b: address, f: proc, x: args .
    b != Bet.oracle && <b, Bet.f(x), 0> <a, Bet.win(), 0> last_reverted
}
)";
  const std::map<std::string, bool> want = {
    { "win_exists", true }, { "win_forall", false }, { "front_any", true }, { "front_not_oracle", false }
  };
  fs::path tmp = fs::temp_directory_path() / "chmc_acceptance_flips.hml";
  std::ofstream(tmp) << props;
  std::string contract = corpus_file("bet/v1/contract.sol");
  System sys = load_system(test::read_file(contract));
  auto typed = load_properties(props, sys);

  driver::TaskConfig cfg;
  cfg.contract_path = contract;
  cfg.props_path = tmp.string();
  cfg.timeout = 300;
  driver::Report r = driver::verify(cfg);
  fs::remove(tmp);
  for (const auto & e : r.errors) o.fail(e);
  for (const auto & p : typed) {
    FiniteDomains dom = make_domains(sys, { &p.formula.root });
    OracleVerdict ov = check_reachable(sys, p.formula, 2, dom);
    bool oracle_holds = ov.status == OracleStatus::Holds;
    std::string smt = "missing";
    for (const auto & res : r.results)
      if (res.name == p.name) smt = res.verdict;
    bool expect = want.at(p.name);
    o.detail += (o.detail.empty() ? "" : " ") + p.name + "=" + (oracle_holds ? "holds" : "fails") + "/" + smt;
    if (ov.status == OracleStatus::Inconclusive) o.fail(p.name + ": oracle inconclusive");
    if (oracle_holds != expect) o.fail(p.name + ": oracle disagrees");
    if (smt != (expect ? "valid" : "invalid")) o.fail(p.name + ": smt says " + smt);
  }
  return o;
}

Outcome trans_differential()
{
  Outcome o;
  std::size_t total = 0, solver_total = 0;
  for (const auto & c : kContracts) {
    System sys = load_system(test::read_file(corpus_file(c + "/contract.sol")));
    fol::TermManager tm;
    fol::TransitionSystem ts(tm, sys);
    test::Gen gen(sys, 2024, 0, 10);
    fol::Evaluator ev(eval_domains(sys));
    smt::Emitter em(ts);
    smt::SolverSession solver(smt::default_solver_command(), nullptr);
    solver.send(em.preamble() + em.system_definitions() + em.declare_state(0) + em.declare_tx(0) + em.declare_state(1) +
                "(assert " + em.apply_trans(0) + ")\n");
    auto set = [&](const std::vector<fol::Term> & vars, const std::vector<std::int64_t> & vals) {
      for (std::size_t i = 0; i < vars.size(); ++i) ev.set(vars[i], vals[i]);
    };
    int mismatches = 0;
    for (int i = 0; i < kTransPairs; ++i) {
      FlaggedState s = gen.flagged();
      Transaction tx = gen.tx();
      FlaggedState want = step_flagged(sys, s, tx);
      auto sv = ts.encode_state(s);
      auto tv = ts.encode_tx(tx);
      auto wv = ts.encode_state(want);
      set(ts.s(), sv);
      set(ts.t(), tv);
      set(ts.nx(), wv);
      bool bad = ev.eval(ts.trans()) != 1;
      // every single-slot perturbation of the successor is rejected
      for (std::size_t k = 0; k < wv.size() && !bad; ++k) {
        auto other = wv;
        other[k] = ts.nx()[k]->sort == Sort::Bool ? 1 - other[k] : other[k] + 1 + static_cast<std::int64_t>(gen.num());
        ev.set(ts.nx()[k], other[k]);
        if (ev.eval(ts.trans()) != 0) bad = true;
        ev.set(ts.nx()[k], wv[k]);
      }
      if (!bad && i < kTransSolverPairs) {
        // the solver finds a successor, it is the interpreter's, and no other exists
        solver.push();
        solver.send("(assert " + pin(em.state_names(0), ts.state_layout().vars, sv) + ")");
        solver.send("(assert " + pin(em.tx_names(0), ts.tx_layout().vars, tv) + ")");
        if (solver.check_sat(in(60)) != smt::CheckResult::Sat || solver.get_values(em.state_names(1)) != wv)
          bad = true;
        solver.send("(assert (not " + pin(em.state_names(1), ts.state_layout().vars, wv) + "))");
        if (!bad && solver.check_sat(in(60)) != smt::CheckResult::Unsat) bad = true;
        solver.pop();
        ++solver_total;
      }
      if (bad) {
        ++mismatches;
        o.fail(c + ": " + format_tx(sys, tx));
      }
      ++total;
    }
    if (mismatches) o.fail(c + ": " + std::to_string(mismatches) + " mismatches");
  }
  o.detail = std::to_string(total) + " pairs over " + std::to_string(kContracts.size()) + " contracts (" +
             std::to_string(solver_total) + " through the solver)";
  return o;
}

Outcome formula_differential()
{
  Outcome o;
  std::size_t checks = 0, states_total = 0, false_count = 0;
  for (const auto & c : kContracts) {
    System sys = load_system(test::read_file(corpus_file(c + "/contract.sol")));
    auto props = load_properties(test::read_file(corpus_file(usecase_of(c) + "/properties.hml")), sys);
    std::vector<const Formula *> fs;
    for (const auto & p : props) fs.push_back(&p.formula.root);
    FiniteDomains dom = make_domains(sys, fs, 0, kReachIntsHi);
    auto states = reachable_states(sys, kReachDepth, dom);
    states_total += states.size();
    fol::TermManager tm;
    fol::TransitionSystem ts(tm, sys);
    smt::Emitter em(ts);
    for (const auto & p : props) {
      fol::PropertyOptions po;
      po.int_domain = dom.ints;
      fol::Term f = fol::encode_property(ts, p.formula, ts.s(), po).formula;
      smt::SolverSession solver(smt::default_solver_command(), nullptr);
      solver.send(em.preamble() + em.define_state_predicate("prop", f));
      int mismatches = 0;
      // r_i is pinned to prop(state_i); one check-sat settles a whole batch
      for (std::size_t b0 = 0; b0 < states.size(); b0 += kFormulaBatch) {
        std::size_t b1 = std::min(states.size(), b0 + kFormulaBatch);
        solver.push();
        std::vector<std::string> outs;
        for (std::size_t i = b0; i < b1; ++i) {
          auto v = ts.encode_state(states[i]);
          std::string call = "(prop";
          for (std::size_t k = 0; k < v.size(); ++k) call += " " + smt_value(ts.state_layout().vars[k].sort, v[k]);
          outs.push_back("r" + std::to_string(i));
          solver.send("(declare-const " + outs.back() + " Bool)(assert (= " + outs.back() + " " + call + ")))");
        }
        auto r = solver.check_sat(in(600));
        if (r != smt::CheckResult::Sat) {
          o.fail(c + "/" + p.name + ": solver " + smt::check_result_name(r));
          solver.pop();
          break;
        }
        auto got = solver.get_values(outs);
        solver.pop();
        for (std::size_t i = b0; i < b1; ++i) {
          bool want = eval_formula(sys, seq_singleton(states[i]), p.formula, dom);
          false_count += !want;
          if ((got[i - b0] != 0) != want) {
            ++mismatches;
            o.fail(c + "/" + p.name + ": oracle " + (want ? "true" : "false") + ", solver disagrees on\n" +
                   format_state(sys, states[i]));
          }
          ++checks;
        }
      }
      if (mismatches) o.fail(c + "/" + p.name + ": " + std::to_string(mismatches) + " mismatches");
    }
  }
  o.detail = std::to_string(checks) + " (state, property) checks, " + std::to_string(false_count) + " false, over " + std::to_string(states_total) +
             " reachable states, depth " + std::to_string(kReachDepth) + ", ints [0," + std::to_string(kReachIntsHi) +
             "] plus literals";
  if (false_count == 0 || false_count == checks) o.fail("degenerate sample: one outcome only");
  return o;
}

Outcome semantic_invariants()
{
  Outcome o;
  std::map<std::string, int> violations = {
    { "conservation", 0 }, { "atomicity", 0 }, { "non-negative", 0 }, { "left-total", 0 }, { "determinism", 0 }
  };
  auto total = [](const ChainState & s) { return std::accumulate(s.balance.begin(), s.balance.end(), std::int64_t{ 0 }); };
  int trials = 0;
  for (const auto & c : kContracts) {
    System sys = load_system(test::read_file(corpus_file(c + "/contract.sol")));
    test::Gen gen(sys, 99, 0, 10);
    for (int i = 0; i < kInvariantTrials; ++i, ++trials) {
      FlaggedState s = gen.flagged();
      Transaction tx = gen.tx();
      if (gen.coin(0.05)) tx.value = -gen.num() - 1;
      if (gen.coin(0.05)) tx.block_delta = -1;
      FlaggedState a, b;
      try {
        a = step_flagged(sys, s, tx);
        b = step_flagged(sys, s, tx);
      } catch (const std::exception &) {
        ++violations["left-total"];
        continue;
      }
      if (a.state.balance.size() != s.state.balance.size() || a.state.storage.size() != s.state.storage.size())
        ++violations["left-total"];
      if (!(a == b)) ++violations["determinism"];
      if (total(a.state) != total(s.state)) ++violations["conservation"];
      for (auto v : a.state.balance)
        if (v < 0) {
          ++violations["non-negative"];
          break;
        }
      auto next = apply_tx(sys, s.state, tx);
      if (next ? (a.reverted || !(a.state == *next)) : (!a.reverted || !(a.state == s.state)))
        ++violations["atomicity"];
    }
  }
  for (const auto & [name, n] : violations) {
    o.detail += (o.detail.empty() ? "" : " ") + name + "=" + std::to_string(n);
    if (n) o.fail(name + " violated " + std::to_string(n) + " times");
  }
  o.detail = std::to_string(trials) + " trials; violations: " + o.detail;
  if (trials < kInvariantTrials) o.fail("too few trials");
  return o;
}

std::string bet_query(int depth)
{
  System sys = load_system(test::read_file(corpus_file("bet/v1/contract.sol")));
  auto props = load_properties(test::read_file(corpus_file("bet/properties.hml")), sys);
  fol::TermManager tm;
  fol::TransitionSystem ts(tm, sys);
  auto enc = fol::encode_property(ts, test::find_property(props, "liquidity").formula, ts.s());
  return smt::emit_bmc_query(ts, enc.formula, depth);
}

Outcome emission_stability()
{
  Outcome o;
  for (int d = 0; d <= 2; ++d) {
    std::string name = "bet_liquidity_d" + std::to_string(d) + ".smt2";
    std::string path = std::string(CHMC_GOLDEN_DIR) + "/" + name;
    if (!fs::exists(path)) {
      o.fail(name + " missing");
      continue;
    }
    std::string a = bet_query(d), b = bet_query(d);
    if (a != b) o.fail(name + ": two emissions differ");
    if (a != test::read_file(path)) o.fail(name + ": differs from the golden file");
    o.detail += (o.detail.empty() ? "" : " ") + name + "(" + std::to_string(a.size()) + " bytes)";
  }
  return o;
}

}  // namespace

int main(int argc, char ** argv)
{
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
    { "v1-valid", v1_valid },
    { "refutation-depth", refutation_depths },
    { "bet-trace-replay", bet_trace },
    { "property-flips", property_flips },
    { "trans-differential", trans_differential },
    { "formula-differential", formula_differential },
    { "semantic-invariants", semantic_invariants },
    { "emission-stability", emission_stability },
  };
  std::vector<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto & [name, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception & e) {
      o.fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("%s %-22s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    for (const auto & f : o.failures) std::printf("     - %s\n", f.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
