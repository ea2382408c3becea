#pragma once

#include <random>

#include "chmc/semantics/state.hpp"

namespace chmc::test {

// Random states and transactions over small domains: ints in [lo, hi],
// every roster address, block advance in {0, 1}.
class Gen
{
 public:
  Gen(const System & sys, std::uint64_t seed, std::int64_t lo = 0, std::int64_t hi = 10)
      : sys_(sys), rng_(seed), lo_(lo), hi_(hi)
  {
  }

  std::int64_t num() { return std::uniform_int_distribution<std::int64_t>(lo_, hi_)(rng_); }
  int addr() { return std::uniform_int_distribution<int>(0, sys_.roster.size())(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  int user()
  {
    return std::uniform_int_distribution<int>(1, static_cast<int>(sys_.roster.users().size()))(rng_);
  }

  Value value_of(Sort s)
  {
    switch (s) {
      case Sort::Bool: return Value::of_bool(coin());
      case Sort::Address: return Value::of_addr(addr());
      default: return Value::of_int(num());
    }
  }

  // Arbitrary state: not necessarily reachable.
  ChainState state()
  {
    ChainState s = initial_state(sys_);
    for (int id = 1; id < sys_.roster.num_values(); ++id) s.balance[id] = num();
    for (size_t c = 0; c < sys_.contracts.size(); ++c) {
      s.constructed[c] = coin(0.8);
      const ContractDecl & d = sys_.decl(static_cast<int>(c));
      for (size_t f = 0; f < d.fields.size(); ++f) {
        int width = d.fields[f].type.is_map ? sys_.roster.size() : 1;
        for (int k = 0; k < width; ++k)
          s.storage[c][sys_.field_slot[c][f] + k] = value_of(d.fields[f].type.scalar).v;
      }
    }
    s.block_number = num();
    return s;
  }

  FlaggedState flagged() { return { state(), coin(0.3) }; }

  Transaction tx()
  {
    Transaction t;
    t.sender = coin(0.85) ? user() : addr();
    t.proc_id = std::uniform_int_distribution<int>(0, static_cast<int>(sys_.procs.size()) - 1)(rng_);
    const ProcRef & ref = sys_.procs[t.proc_id];
    t.contract = sys_.roster.contract_address(ref.contract);
    t.proc = ref.name;
    for (const auto & prm : sys_.proc(t.proc_id).params) t.args.push_back(value_of(prm.type.scalar));
    t.value = coin(0.5) ? 0 : num();
    t.block_delta = coin() ? 1 : 0;
    return t;
  }

  std::mt19937_64 & rng() { return rng_; }

 private:
  const System & sys_;
  std::mt19937_64 rng_;
  std::int64_t lo_, hi_;
};

}  // namespace chmc::test
