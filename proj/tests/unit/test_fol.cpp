#include <gtest/gtest.h>

#include "chmc/fol/property.hpp"
#include "chmc/oracle/oracle.hpp"
#include "chmc/semantics/interpreter.hpp"
#include "fixtures.hpp"
#include "../support/gen.hpp"

using namespace chmc;
using namespace chmc::fol;

namespace {

const char * kContracts[] = { "bank/v1/contract.sol", "bank/v2/contract.sol", "bank/v3/contract.sol",
                              "bank/v4/contract.sol", "bet/v1/contract.sol",  "bet/v2/contract.sol",
                              "bet/v3/contract.sol",  "vault/v1/contract.sol", "vault/v2/contract.sol",
                              "vault/v3/contract.sol" };

void assign(Evaluator & ev, const std::vector<Term> & vars, const std::vector<std::int64_t> & vals)
{
  for (std::size_t i = 0; i < vars.size(); ++i) ev.set(vars[i], vals[i]);
}

EvalDomains domains_of(const System & sys)
{
  return { sys.roster.num_values(), static_cast<int>(sys.procs.size()), std::nullopt };
}

}  // namespace

TEST(Terms, HashConsingGivesPointerIdentity)
{
  TermManager tm;
  Term x = tm.mk_var("x", Sort::Int);
  Term y = tm.mk_var("y", Sort::Int);
  EXPECT_EQ(tm.mk_add(x, y), tm.mk_add(x, y));
  EXPECT_EQ(tm.mk_var("x", Sort::Int), x);
  EXPECT_NE(tm.mk_var("x", Sort::Bool), x);
  EXPECT_EQ(tm.mk_eq(x, y), tm.mk_eq(y, x));
}

TEST(Terms, SimplifierFolds)
{
  TermManager tm;
  Term x = tm.mk_var("x", Sort::Int);
  Term b = tm.mk_var("b", Sort::Bool);
  EXPECT_EQ(tm.mk_eq(tm.mk_int(1), tm.mk_int(1)), tm.mk_true());
  EXPECT_EQ(tm.mk_and(b, tm.mk_not(b)), tm.mk_false());
  EXPECT_EQ(tm.mk_or(b, tm.mk_not(b)), tm.mk_true());
  EXPECT_EQ(tm.mk_not(tm.mk_not(b)), b);
  EXPECT_EQ(tm.mk_sub(tm.mk_add(x, tm.mk_int(3)), tm.mk_int(3)), x);
  EXPECT_EQ(tm.mk_sub(x, x), tm.mk_int(0));
  EXPECT_EQ(tm.mk_ite(b, x, x), x);
  EXPECT_EQ(tm.mk_ite(tm.mk_true(), x, tm.mk_int(0)), x);
  EXPECT_EQ(tm.mk_ite(b, tm.mk_true(), tm.mk_false()), b);
  EXPECT_EQ(tm.mk_eq(tm.mk_ite(b, tm.mk_int(1), tm.mk_int(2)), tm.mk_int(2)), tm.mk_not(b));
  EXPECT_EQ(tm.mk_forall({ x }, b), b);
  EXPECT_EQ(tm.mk_le(tm.mk_int(2), tm.mk_int(1)), tm.mk_false());
  EXPECT_EQ(tm.mk_not(tm.mk_lt(x, tm.mk_int(0))), tm.mk_le(tm.mk_int(0), x));
}

TEST(Terms, SubstitutionAndFreeVars)
{
  TermManager tm;
  Term x = tm.mk_var("x", Sort::Int);
  Term y = tm.mk_var("y", Sort::Int);
  Term q = tm.mk_exists({ y }, tm.mk_eq(tm.mk_add(x, y), tm.mk_int(3)));
  ASSERT_EQ(tm.free_vars(q).size(), 1u);
  EXPECT_EQ(tm.free_vars(q)[0], x);
  // bound y is untouched, free x is replaced
  Term r = tm.subst(q, { { x, tm.mk_int(1) }, { y, tm.mk_int(0) } });
  EXPECT_EQ(r, tm.mk_exists({ y }, tm.mk_eq(tm.mk_add(tm.mk_int(1), y), tm.mk_int(3))));
  Term e = tm.subst(tm.mk_le(tm.mk_mul(tm.mk_int(2), x), y), { { x, tm.mk_int(2) }, { y, tm.mk_int(4) } });
  EXPECT_EQ(e, tm.mk_true());
}

TEST(Terms, EvaluatorExpandsFiniteQuantifiers)
{
  TermManager tm;
  Term a = tm.mk_var("a", Sort::Address);
  Term x = tm.mk_var("x", Sort::Int);
  EvalDomains dom{ 4, 2, std::vector<std::int64_t>{ 0, 1, 2 } };
  Evaluator ev(dom);
  EXPECT_EQ(ev.eval(tm.mk_exists({ a }, tm.mk_eq(a, tm.mk_addr(3)))), 1);
  EXPECT_EQ(ev.eval(tm.mk_exists({ a }, tm.mk_eq(a, tm.mk_addr(4)))), 0);
  EXPECT_EQ(ev.eval(tm.mk_forall({ x }, tm.mk_le(x, tm.mk_int(2)))), 1);
  EXPECT_EQ(ev.eval(tm.mk_forall({ x }, tm.mk_lt(x, tm.mk_int(2)))), 0);
}

TEST(Terms, SharedPrinterIsValidAndStable)
{
  TermManager tm;
  Term x = tm.mk_var("x", Sort::Int);
  Term y = tm.mk_var("y", Sort::Int);
  Term s = tm.mk_add(x, y);
  Term t = tm.mk_and(tm.mk_le(s, tm.mk_int(3)), tm.mk_exists({ y }, tm.mk_eq(tm.mk_mul(s, s), y)));
  EXPECT_EQ(to_sexpr(tm, t, false),
            "(and (<= (+ x y) 3) (exists ((y Int)) (= y (* (+ x y) (+ x y)))))");
  // every let sits under the binder of the variable it mentions
  EXPECT_EQ(to_sexpr(tm, t), "(and (<= (+ x y) 3) (exists ((y Int)) (let ((_l0 (+ x y))) (= y (* _l0 _l0)))))");
  EXPECT_EQ(to_sexpr(tm, t), to_sexpr(tm, t));
}

TEST(Encoder, LayoutCoversTheFlattenedState)
{
  System sys = load_system(test::corpus("bank/v1/contract.sol"));
  TermManager tm;
  TransitionSystem ts(tm, sys);
  const auto & sl = ts.state_layout();
  // 4 balances, ctor flag, 4 credit slots, block, reverted
  EXPECT_EQ(sl.vars.size(), 11u);
  EXPECT_EQ(sl.balance[0], -1);
  EXPECT_EQ(ts.tx_layout().vars.size(), 6u);
  FlaggedState init{ initial_state(sys), false };
  Evaluator ev(domains_of(sys));
  assign(ev, ts.s(), ts.encode_state(init));
  EXPECT_EQ(ev.eval(ts.init()), 1);
  EXPECT_EQ(ts.decode_state(ts.encode_state(init)), init);
}

TEST(Encoder, RejectsCalls)
{
  System sys = load_system(R"(
contract C { int x; function f() { x = 1; } }
contract D { function g() { C.f(); } }
)");
  TermManager tm;
  EXPECT_THROW(TransitionSystem(tm, sys), EncodeError);
}

// The next-state terms agree with the interpreter on random pairs, and Trans
// admits the interpreter's successor and rejects any single-slot change.
TEST(Encoder, StepSoundnessAgainstInterpreter)
{
  for (const char * path : kContracts) {
    SCOPED_TRACE(path);
    System sys = load_system(test::corpus(path));
    TermManager tm;
    TransitionSystem ts(tm, sys);
    test::Gen gen(sys, 17);
    EvalDomains dom = domains_of(sys);
    int changed = 0;
    for (int i = 0; i < 2000; ++i) {
      FlaggedState s = gen.flagged();
      Transaction tx = gen.tx();
      if (gen.coin(0.1)) tx.value = -1;
      FlaggedState want = step_flagged(sys, s, tx);
      auto sv = ts.encode_state(s);
      auto tv = ts.encode_tx(tx);
      auto wv = ts.encode_state(want);
      Evaluator ev(dom);
      assign(ev, ts.s(), sv);
      assign(ev, ts.t(), tv);
      std::vector<std::int64_t> got;
      for (Term n : ts.next()) got.push_back(ev.eval(n));
      ASSERT_EQ(got, wv) << format_state(sys, s) << "\n" << format_tx(sys, tx);
      assign(ev, ts.nx(), wv);
      ASSERT_EQ(ev.eval(ts.trans()), 1);
      std::size_t k = gen.rng()() % wv.size();
      auto bad = wv;
      bad[k] = ts.nx()[k]->sort == Sort::Bool ? 1 - bad[k] : bad[k] + 1;
      assign(ev, ts.nx(), bad);
      ASSERT_EQ(ev.eval(ts.trans()), 0);
      if (!want.reverted) ++changed;
    }
    // the sample exercises valid transactions too
    EXPECT_GT(changed, 20);
  }
}

TEST(Encoder, StatementRelationMatchesExecution)
{
  for (const char * path : kContracts) {
    SCOPED_TRACE(path);
    System sys = load_system(test::corpus(path));
    TermManager tm;
    TransitionSystem ts(tm, sys);
    test::Gen gen(sys, 5);
    EvalDomains dom = domains_of(sys);
    StateTerms post = ts.state_vars("post");
    for (int i = 0; i < 1000; ++i) {
      Transaction tx = gen.tx();
      const ProcRef & ref = sys.procs[tx.proc_id];
      const Procedure & p = sys.proc(tx.proc_id);
      ChainState s = gen.state();
      int self = sys.roster.contract_address(ref.contract);
      Env env{ ref.contract, self, tx.sender, tx.value, &tx.args, 0 };
      const Stmt & st = p.body.body.empty() ? p.body : p.body.body[gen.rng()() % p.body.body.size()];
      auto out = exec_stmt(sys, env, s, st);
      TxTerms tt{ tm.mk_addr(tx.sender), tm.mk_int(tx.value), tm.mk_int(0), {} };
      for (const auto & a : tx.args) tt.args.push_back(tm.mk_const(a.sort, a.v));
      Term rel = ts.statement_relation(st, ref.contract, ts.s(), tt, post);
      Evaluator ev(dom);
      assign(ev, ts.s(), ts.encode_state({ s, false }));
      if (out) {
        assign(ev, post, ts.encode_state({ *out, false }));
        ASSERT_EQ(ev.eval(rel), 1);
      } else {
        // no post state satisfies the relation: the failure condition holds
        StmtEnc e = ts.encode_statement(st, ref.contract, ts.s(), tt);
        ASSERT_EQ(ev.eval(e.fail), 1);
      }
    }
  }
}

TEST(Encoder, TxRoundTrip)
{
  System sys = load_system(test::corpus("vault/v1/contract.sol"));
  TermManager tm;
  TransitionSystem ts(tm, sys);
  test::Gen gen(sys, 3);
  for (int i = 0; i < 200; ++i) {
    Transaction tx = gen.tx();
    EXPECT_EQ(ts.decode_tx(ts.encode_tx(tx)), tx);
  }
}

namespace {

struct UseCase
{
  const char * contract;
  const char * props;
};

const UseCase kCases[] = { { "bank/v1/contract.sol", "bank/properties.hml" },
                           { "bank/v3/contract.sol", "bank/properties.hml" },
                           { "bet/v1/contract.sol", "bet/properties.hml" },
                           { "bet/v3/contract.sol", "bet/properties.hml" },
                           { "vault/v1/contract.sol", "vault/properties.hml" },
                           { "vault/v3/contract.sol", "vault/properties.hml" } };

}  // namespace

TEST(Property, TrivialPropertyHasEmptyTree)
{
  System sys = load_system(test::corpus("bet/v1/contract.sol"));
  TermManager tm;
  TransitionSystem ts(tm, sys);
  auto ps = load_properties("property t { 1 == 1 }", sys);
  PropertyEncoding e = encode_property(ts, ps[0].formula, ts.s());
  EXPECT_EQ(e.formula, tm.mk_true());
  EXPECT_EQ(e.tree.nodes.size(), 1u);
}

TEST(Property, ModalTreeFollowsLabels)
{
  System sys = load_system(test::corpus("bet/v1/contract.sol"));
  TermManager tm;
  TransitionSystem ts(tm, sys);
  auto ps = load_properties("property t { <M, Bet.set(7), 0> <A, Bet.win(), 0> old(Bet.rate) == 7 }", sys);
  PropertyEncoding e = encode_property(ts, ps[0].formula, ts.s());
  ASSERT_EQ(e.tree.nodes.size(), 3u);
  EXPECT_EQ(e.tree.max_depth(), 2);
  EXPECT_EQ(e.tree.nodes[2].parent, 1);
  EXPECT_EQ(e.tree.nodes[1].proc, sys.find_proc(0, "set"));
}

// Encoded properties evaluate like the oracle on arbitrary states when ints
// are expanded over the oracle domain. The unbounded form is only checked
// to be well formed: its witnesses may leave the finite domain.
TEST(Property, AgreesWithOracleOnRandomStates)
{
  for (const auto & uc : kCases) {
    SCOPED_TRACE(uc.contract);
    System sys = load_system(test::corpus(uc.contract));
    auto props = load_properties(test::corpus(uc.props), sys);
    std::vector<const Formula *> fs;
    for (const auto & p : props) fs.push_back(&p.formula.root);
    FiniteDomains dom = make_domains(sys, fs, 0, 3);
    TermManager tm;
    TransitionSystem ts(tm, sys);
    EvalDomains edom = domains_of(sys);
    edom.ints = dom.ints;
    for (const auto & p : props) {
      SCOPED_TRACE(p.name);
      PropertyOptions bounded;
      bounded.int_domain = dom.ints;
      Term fb = encode_property(ts, p.formula, ts.s(), bounded).formula;
      Term fu = encode_property(ts, p.formula, ts.s()).formula;
      test::Gen gen(sys, 11, 0, 3);
      for (int i = 0; i < 60; ++i) {
        FlaggedState s = i < 10 ? FlaggedState{ initial_state(sys), false } : gen.flagged();
        if (i > 0 && i < 10) s = step_flagged(sys, s, gen.tx());
        bool want = eval_formula(sys, seq_singleton(s), p.formula, dom);
        Evaluator ev(edom);
        assign(ev, ts.s(), ts.encode_state(s));
        ASSERT_EQ(ev.eval(fb) != 0, want) << format_state(sys, s);
      }
      EXPECT_TRUE(tm.free_vars(fu).size() <= ts.s().size());
    }
  }
}
