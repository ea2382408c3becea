#pragma once

#include <string>
#include <vector>

#include "chmc/contract/ast.hpp"

namespace chmc {

// Address ids: 0 is null, users occupy 1..U, contracts U+1..U+C.
class Roster
{
 public:
  Roster() = default;
  Roster(std::vector<std::string> users, std::vector<std::string> contracts);

  const std::vector<std::string> & users() const { return users_; }
  const std::vector<std::string> & contracts() const { return contracts_; }

  int size() const { return static_cast<int>(users_.size() + contracts_.size()); }
  int num_values() const { return size() + 1; }
  int id_of(const std::string & name) const;  // -1 if unknown; "null" -> 0
  std::string name_of(int id) const;
  bool is_user(int id) const;
  bool is_contract(int id) const;
  int contract_address(int contract_index) const;
  int contract_index(int id) const;  // -1 if id is not a contract

 private:
  std::vector<std::string> users_;
  std::vector<std::string> contracts_;
};

const std::vector<std::string> & default_users();

// A contract accepted by the type checker: every expression is resolved and
// annotated, non-payable procedures carry the zero-value prologue, and a
// constructor exists.
struct TypedContract
{
  ContractDecl decl;
  bool starts_constructed = false;  // no constructor in the source
  bool uses_calls = false;
};

struct ProcRef
{
  int contract = -1;
  int proc = -1;
  std::string name;
};

// A closed world: roster plus type-checked contracts with a global procedure
// numbering and the flattened storage layout shared by the interpreter and
// the encoder.
class System
{
 public:
  Roster roster;
  std::vector<TypedContract> contracts;
  std::vector<ProcRef> procs;
  std::vector<std::vector<int>> field_slot;  // [contract][field] -> first slot
  std::vector<int> slot_count;               // per contract

  int find_contract(const std::string & name) const;
  int find_proc(int contract, const std::string & name) const;  // global id
  const Procedure & proc(int global_id) const;
  const ContractDecl & decl(int contract) const { return contracts[contract].decl; }
  int slot_of(int contract, int field, int key_address) const;
  bool uses_block_number() const;
  std::vector<std::int64_t> int_literals() const;
};

}  // namespace chmc
