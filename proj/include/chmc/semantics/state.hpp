#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chmc/contract/system.hpp"

namespace chmc {

struct Value
{
  Sort sort = Sort::Int;
  std::int64_t v = 0;

  static Value of_int(std::int64_t x) { return { Sort::Int, x }; }
  static Value of_bool(bool b) { return { Sort::Bool, b ? 1 : 0 }; }
  static Value of_addr(int id) { return { Sort::Address, id }; }
  static Value of_proc(int id) { return { Sort::Proc, id }; }

  bool operator==(const Value &) const = default;
};

std::string format_value(const Roster & roster, const Value & v);

// Flattened blockchain state. Storage slots follow System::field_slot; map
// entries are stored per non-null roster address. balance[0] (null) is
// always 0.
struct ChainState
{
  std::vector<std::int64_t> balance;
  std::vector<std::uint8_t> constructed;
  std::vector<std::vector<std::int64_t>> storage;
  std::int64_t block_number = 0;

  bool operator==(const ChainState &) const = default;
};

struct ChainStateHash
{
  size_t operator()(const ChainState & s) const;
};

struct FlaggedState
{
  ChainState state;
  bool reverted = false;

  bool operator==(const FlaggedState &) const = default;
};

struct FlaggedStateHash
{
  size_t operator()(const FlaggedState & s) const;
};

struct Transaction
{
  int sender = 0;
  int contract = 0;  // address id of the callee
  std::string proc;
  int proc_id = -1;  // global procedure id, -1 if unknown
  std::vector<Value> args;
  std::int64_t value = 0;
  std::int64_t block_delta = 0;

  bool operator==(const Transaction &) const = default;
};

std::int64_t default_of(Sort s);

ChainState initial_state(const System & sys, std::int64_t user_balance = 10);

Value read_field(const System & sys, const ChainState & s, int contract, int field,
                 int key_address = 0);

std::string format_state(const System & sys, const FlaggedState & s);
std::string format_tx(const System & sys, const Transaction & tx);

// Resolves tx.proc against tx.contract and fills proc_id.
void resolve_tx(const System & sys, Transaction & tx);

}  // namespace chmc
