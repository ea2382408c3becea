#include <gtest/gtest.h>

#include <numeric>

#include "chmc/semantics/interpreter.hpp"
#include "chmc/semantics/trace.hpp"
#include "fixtures.hpp"
#include "../support/gen.hpp"

using namespace chmc;
using chmc::test::bet_listing;

namespace {

struct BetWorld
{
  System sys = load_system(bet_listing);
  int A = sys.roster.id_of("A");
  int B = sys.roster.id_of("B");
  int M = sys.roster.id_of("M");
  int bet = sys.roster.id_of("Bet");
  int f_oracle = sys.decl(0).find_field("oracle");
  int f_rate = sys.decl(0).find_field("rate");
  int f_player = sys.decl(0).find_field("player");

  Transaction tx(int sender, const std::string & proc, std::vector<Value> args, std::int64_t value)
  {
    Transaction t{ sender, bet, proc, -1, std::move(args), value, 0 };
    resolve_tx(sys, t);
    return t;
  }

  std::vector<Transaction> trace()
  {
    return { tx(A, "constructor", { Value::of_addr(M), Value::of_int(1) }, 10),
             tx(B, "join", {}, 10), tx(M, "set", { Value::of_int(150) }, 0),
             tx(B, "win", {}, 0) };
  }

  std::int64_t field(const ChainState & s, int f) { return read_field(sys, s, 0, f).v; }

  const Stmt & stmt(const std::string & proc, size_t i)
  {
    const ContractDecl & d = sys.decl(0);
    return d.procedures[d.find_proc(proc)].body.body[i];
  }
};

std::int64_t total(const ChainState & s)
{
  return std::accumulate(s.balance.begin(), s.balance.end(), std::int64_t{ 0 });
}

}  // namespace

TEST(BetTrace, ReplaysToTheListedStates)
{
  BetWorld w;
  auto states = run_trace(w.sys, w.trace());
  ASSERT_EQ(states.size(), 5u);
  for (const auto & s : states) EXPECT_FALSE(s.reverted);

  const ChainState & s1 = states[1].state;
  EXPECT_EQ(s1.balance[w.A], 0);
  EXPECT_EQ(s1.balance[w.bet], 10);
  EXPECT_EQ(w.field(s1, w.f_oracle), w.M);
  EXPECT_EQ(w.field(s1, w.f_rate), 1);

  const ChainState & s2 = states[2].state;
  EXPECT_EQ(s2.balance[w.B], 0);
  EXPECT_EQ(s2.balance[w.bet], 20);
  EXPECT_EQ(w.field(s2, w.f_player), w.B);

  EXPECT_EQ(w.field(states[3].state, w.f_rate), 150);

  const ChainState & s4 = states[4].state;
  EXPECT_EQ(s4.balance[w.A], 0);
  EXPECT_EQ(s4.balance[w.B], 20);
  EXPECT_EQ(s4.balance[w.M], 10);
  EXPECT_EQ(s4.balance[w.bet], 0);
  EXPECT_EQ(w.field(s4, w.f_rate), 150);
  EXPECT_EQ(w.field(s4, w.f_player), w.B);
}

TEST(BetTrace, JsonFileMatchesHandTrace)
{
  BetWorld w;
  auto j = nlohmann::json::parse(chmc::test::read_file(std::string(CHMC_CORPUS_DIR) +
                                                      "/../tests/data/bet_trace.json"));
  auto trace = trace_from_json(w.sys, j);
  EXPECT_EQ(trace, w.trace());
  EXPECT_EQ(trace_from_json(w.sys, trace_to_json(w.sys, trace)), trace);
}

TEST(EvalExpr, Examples)
{
  BetWorld w;
  auto states = run_trace(w.sys, w.trace());
  Env env{ 0, w.bet, w.A, 0, nullptr, 0 };
  Expr rate;
  rate.kind = ExprKind::Field;
  rate.owner_index = 0;
  rate.index = w.f_rate;
  rate.type = Sort::Int;
  EXPECT_EQ(eval_expr(w.sys, env, states[2].state, rate)->v, 1);

  Expr self;
  self.kind = ExprKind::This;
  self.type = Sort::Address;
  self.index = w.bet;
  EXPECT_EQ(eval_expr(w.sys, env, states[0].state, self)->v, w.bet);

  System bank = load_system(chmc::test::bank_listing);
  ChainState fresh = initial_state(bank);
  EXPECT_EQ(read_field(bank, fresh, 0, 0, bank.roster.id_of("A")).v, 0);
}

TEST(ExecStmt, Examples)
{
  BetWorld w;
  auto states = run_trace(w.sys, w.trace());
  Env env{ 0, w.bet, w.B, 0, nullptr, 0 };
  Stmt skip;
  EXPECT_EQ(*exec_stmt(w.sys, env, states[2].state, skip), states[2].state);

  const Stmt & guard = w.stmt("win", 1);
  ASSERT_EQ(guard.kind, StmtKind::Require);
  EXPECT_FALSE(exec_stmt(w.sys, env, states[2].state, guard));
  EXPECT_TRUE(exec_stmt(w.sys, env, states[3].state, guard));

  const Stmt & pay = w.stmt("win", 2);
  auto s4 = exec_stmt(w.sys, env, states[3].state, pay);
  ASSERT_TRUE(s4);
  EXPECT_EQ(s4->balance[w.B], 20);
  EXPECT_EQ(s4->balance[w.bet], 0);
}

TEST(ApplyTx, InvalidWinLeavesStateUnchanged)
{
  BetWorld w;
  auto states = run_trace(w.sys, w.trace());
  Transaction win = w.tx(w.B, "win", {}, 0);
  EXPECT_FALSE(apply_tx(w.sys, states[2].state, win));
  FlaggedState f = step_flagged(w.sys, states[2], win);
  EXPECT_TRUE(f.reverted);
  EXPECT_EQ(f.state, states[2].state);
  FlaggedState g = step_flagged(w.sys, f, win);
  EXPECT_EQ(g, f);
  EXPECT_FALSE(step_flagged(w.sys, states[1], w.tx(w.B, "join", {}, 10)).reverted);
}

TEST(ApplyTx, ConstructionDiscipline)
{
  BetWorld w;
  ChainState s0 = initial_state(w.sys);
  EXPECT_FALSE(apply_tx(w.sys, s0, w.tx(w.B, "join", {}, 0)));
  auto ctor = w.tx(w.A, "constructor", { Value::of_addr(w.M), Value::of_int(1) }, 0);
  auto s1 = apply_tx(w.sys, s0, ctor);
  ASSERT_TRUE(s1);
  EXPECT_EQ(s1->constructed[0], 1);
  EXPECT_FALSE(apply_tx(w.sys, *s1, ctor));
}

TEST(ApplyTx, ValidityConditions)
{
  BetWorld w;
  auto states = run_trace(w.sys, w.trace());
  const ChainState & s1 = states[1].state;
  // underfunded sender
  EXPECT_FALSE(apply_tx(w.sys, s1, w.tx(w.A, "join", {}, 5)));
  // contract as sender, null sender
  EXPECT_FALSE(apply_tx(w.sys, s1, w.tx(w.bet, "join", {}, 0)));
  EXPECT_FALSE(apply_tx(w.sys, s1, w.tx(0, "join", {}, 0)));
  // arity and sort mismatches, unknown procedure
  EXPECT_FALSE(apply_tx(w.sys, s1, w.tx(w.M, "set", {}, 0)));
  EXPECT_FALSE(apply_tx(w.sys, s1, w.tx(w.M, "set", { Value::of_addr(w.A) }, 0)));
  EXPECT_FALSE(apply_tx(w.sys, s1, w.tx(w.M, "nope", {}, 0)));
  // negative value and block advance
  EXPECT_FALSE(apply_tx(w.sys, s1, w.tx(w.B, "join", {}, -1)));
  Transaction back = w.tx(w.M, "set", { Value::of_int(3) }, 0);
  back.block_delta = -1;
  EXPECT_FALSE(apply_tx(w.sys, s1, back));
  back.block_delta = 4;
  auto moved = apply_tx(w.sys, s1, back);
  ASSERT_TRUE(moved);
  EXPECT_EQ(moved->block_number, s1.block_number + 4);
}

TEST(ExecStmt, TransferEdgeCases)
{
  System sys = load_system(R"(
contract T {
  address to;
  constructor() payable {}
  function give(address r, int n) { r.transfer(n); }
}
)");
  int A = sys.roster.id_of("A"), t = sys.roster.id_of("T");
  ChainState s = initial_state(sys);
  Transaction c{ A, t, "constructor", -1, {}, 5, 0 };
  resolve_tx(sys, c);
  s = *apply_tx(sys, s, c);
  auto give = [&](int r, std::int64_t n) {
    Transaction g{ A, t, "give", -1, { Value::of_addr(r), Value::of_int(n) }, 0, 0 };
    resolve_tx(sys, g);
    return apply_tx(sys, s, g);
  };
  EXPECT_TRUE(give(A, 5));
  EXPECT_TRUE(give(A, 0));
  EXPECT_FALSE(give(A, 6));   // underfunded contract
  EXPECT_FALSE(give(A, -1));  // negative amount
  EXPECT_FALSE(give(t, 1));   // self transfer
  EXPECT_FALSE(give(0, 1));   // to null
}

TEST(ExecStmt, UintUnderflowReverts)
{
  System sys = load_system(chmc::test::bank_listing);
  int A = sys.roster.id_of("A"), bank = sys.roster.id_of("Bank");
  ChainState s = initial_state(sys);
  Transaction dep{ A, bank, "deposit", -1, {}, 3, 0 };
  resolve_tx(sys, dep);
  s = *apply_tx(sys, s, dep);
  Transaction wd{ A, bank, "withdraw", -1, { Value::of_int(4) }, 0, 0 };
  resolve_tx(sys, wd);
  EXPECT_FALSE(apply_tx(sys, s, wd));
  wd.args[0] = Value::of_int(3);
  auto s2 = apply_tx(sys, s, wd);
  ASSERT_TRUE(s2);
  EXPECT_EQ(s2->balance[A], 10);
  EXPECT_EQ(read_field(sys, *s2, 0, 0, A).v, 0);
}

TEST(ExecStmt, NestedCallMovesValueBetweenContracts)
{
  System sys = load_system(R"(
contract Proxy {
  constructor() payable {}
  function forward(int n) { Bank.deposit() value n; }
}
contract Bank {
  mapping(address => int) credits;
  function deposit() payable { credits[sender] += value; }
}
)");
  ASSERT_TRUE(sys.contracts[0].uses_calls);
  int A = sys.roster.id_of("A"), proxy = sys.roster.id_of("Proxy"), bank = sys.roster.id_of("Bank");
  ChainState s = initial_state(sys);
  Transaction c{ A, proxy, "constructor", -1, {}, 4, 0 };
  resolve_tx(sys, c);
  s = *apply_tx(sys, s, c);
  Transaction f{ A, proxy, "forward", -1, { Value::of_int(3) }, 0, 0 };
  resolve_tx(sys, f);
  auto s2 = apply_tx(sys, s, f);
  ASSERT_TRUE(s2);
  EXPECT_EQ(s2->balance[proxy], 1);
  EXPECT_EQ(s2->balance[bank], 3);
  EXPECT_EQ(read_field(sys, *s2, 1, 0, proxy).v, 3);
  f.args[0] = Value::of_int(5);
  EXPECT_FALSE(apply_tx(sys, s, f));
}

// Randomized semantic invariants over every corpus contract.
class Invariants : public ::testing::TestWithParam<const char *>
{
};

TEST_P(Invariants, HoldOnRandomPairs)
{
  System sys = load_system(chmc::test::corpus(GetParam()));
  chmc::test::Gen gen(sys, 11);
  for (int i = 0; i < 2000; ++i) {
    FlaggedState s = gen.flagged();
    Transaction tx = gen.tx();
    auto next = apply_tx(sys, s.state, tx);
    FlaggedState f = step_flagged(sys, s, tx);
    EXPECT_EQ(f, step_flagged(sys, s, tx));  // determinism
    if (next) {
      EXPECT_EQ(total(*next), total(s.state));
      for (auto b : next->balance) EXPECT_GE(b, 0);
      EXPECT_FALSE(f.reverted);
      EXPECT_EQ(f.state, *next);
    } else {
      EXPECT_TRUE(f.reverted);
      EXPECT_EQ(f.state, s.state);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Corpus, Invariants,
                         ::testing::Values("bank/v1/contract.sol", "bet/v1/contract.sol",
                                           "vault/v1/contract.sol"));
