#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "chmc/fol/property.hpp"
#include "chmc/smt/emit.hpp"
#include "chmc/smt/solver.hpp"
#include "fixtures.hpp"

using namespace chmc;

namespace {

std::string golden_path(const std::string & name)
{
  return std::string(CHMC_GOLDEN_DIR) + "/" + name;
}

// Emits the query from scratch: a fresh term manager every time.
std::string bet_query(const std::string & prop, int depth)
{
  System sys = load_system(test::corpus("bet/v1/contract.sol"));
  auto props = load_properties(test::corpus("bet/properties.hml"), sys);
  fol::TermManager tm;
  fol::TransitionSystem ts(tm, sys);
  auto enc = fol::encode_property(ts, test::find_property(props, prop).formula, ts.s());
  return smt::emit_bmc_query(ts, enc.formula, depth);
}

}  // namespace

TEST(Emit, StableAcrossTermManagers)
{
  for (int d = 0; d <= 2; ++d) EXPECT_EQ(bet_query("liquidity", d), bet_query("liquidity", d)) << "depth " << d;
}

TEST(Emit, IndependentOfEarlierEncodings)
{
  System sys = load_system(test::corpus("bet/v1/contract.sol"));
  auto props = load_properties(test::corpus("bet/properties.hml"), sys);
  fol::TermManager tm;
  fol::TransitionSystem ts(tm, sys);
  // pollute the term manager first
  for (const auto & p : props)
    if (p.name != "liquidity") fol::encode_property(ts, p.formula, ts.s());
  auto enc = fol::encode_property(ts, test::find_property(props, "liquidity").formula, ts.s());
  std::string polluted = smt::emit_bmc_query(ts, enc.formula, 1);
  std::string fresh = bet_query("liquidity", 1);
  EXPECT_EQ(polluted, fresh);
}

TEST(Emit, MatchesGoldenFiles)
{
  bool update = std::getenv("CHMC_UPDATE_GOLDEN") != nullptr;
  for (int d = 0; d <= 2; ++d) {
    std::string name = "bet_liquidity_d" + std::to_string(d) + ".smt2";
    std::string got = bet_query("liquidity", d);
    if (update) {
      std::ofstream(golden_path(name), std::ios::binary) << got;
      continue;
    }
    ASSERT_TRUE(std::filesystem::exists(golden_path(name))) << name << " missing; rerun with CHMC_UPDATE_GOLDEN=1";
    EXPECT_EQ(got, test::read_file(golden_path(name))) << name;
  }
}

TEST(Emit, GoldenQueriesAreUnsatForTheHoldingProperty)
{
  // liquidity holds on Bet v1, so no bounded violation exists
  for (int d = 0; d <= 2; ++d) {
    smt::SolverSession s(smt::default_solver_command(), nullptr);
    std::string q = bet_query("liquidity", d);
    q = q.substr(0, q.rfind("(check-sat)"));
    s.send(q);
    auto r = s.check_sat(std::chrono::steady_clock::now() + std::chrono::seconds(60));
    EXPECT_EQ(r, smt::CheckResult::Unsat) << "depth " << d;
  }
}

TEST(Solver, SessionBasics)
{
  smt::SolverSession s(smt::default_solver_command(), nullptr);
  s.send("(declare-const x Int)(declare-const b Bool)");
  s.send("(assert (and (< 3 x) (< x 5) b))");
  auto dl = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  ASSERT_EQ(s.check_sat(dl), smt::CheckResult::Sat);
  auto v = s.get_values({ "x", "b", "(- x)" });
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v, (std::vector<std::int64_t>{ 4, 1, -4 }));
  s.push();
  s.send("(assert (> x 10))");
  EXPECT_EQ(s.check_sat(dl), smt::CheckResult::Unsat);
  s.pop();
  EXPECT_EQ(s.check_sat(dl), smt::CheckResult::Sat);
  s.reset();
  EXPECT_EQ(s.depth(), 0);
  s.send("(declare-const y Int)(assert (= y 2))");
  EXPECT_EQ(s.check_sat(dl), smt::CheckResult::Sat);
  EXPECT_EQ(s.get_values({ "y" }), std::vector<std::int64_t>{ 2 });
  EXPECT_THROW(s.pop(), smt::SolverError);
}

TEST(Solver, TimeoutKillsTheProcess)
{
  // sleeps instead of answering
  smt::SolverSession s("sleep 100", nullptr);
  s.send("(check-sat)");
  auto t0 = std::chrono::steady_clock::now();
  auto r = s.check_sat(t0 + std::chrono::milliseconds(300));
  EXPECT_EQ(r, smt::CheckResult::Timeout);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(5));
  EXPECT_FALSE(s.alive());
}

TEST(Solver, MissingBinaryIsAnError)
{
  EXPECT_THROW(
      {
        smt::SolverSession s("/nonexistent/solver -in", nullptr);
        s.send("(check-sat)");
        s.check_sat(std::chrono::steady_clock::now() + std::chrono::seconds(2));
      },
      smt::SolverError);
}

TEST(Solver, ParseValues)
{
  auto v = smt::parse_values("((x 3) (y (- 2)) ((+ a b) true))", 3);
  EXPECT_EQ(v, (std::vector<std::int64_t>{ 3, -2, 1 }));
  EXPECT_THROW(smt::parse_values("((x 3)", 1), smt::SolverError);
  EXPECT_THROW(smt::parse_values("((x 3))", 2), smt::SolverError);
  EXPECT_THROW(smt::parse_values("((x (/ 1 2)))", 1), smt::SolverError);
}
