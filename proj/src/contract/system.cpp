#include "chmc/contract/system.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

namespace chmc {

Roster::Roster(std::vector<std::string> users, std::vector<std::string> contracts)
    : users_(std::move(users)), contracts_(std::move(contracts))
{
}

int Roster::id_of(const std::string & name) const
{
  if (name == "null") return 0;
  for (size_t i = 0; i < users_.size(); ++i)
    if (users_[i] == name) return static_cast<int>(i) + 1;
  for (size_t i = 0; i < contracts_.size(); ++i)
    if (contracts_[i] == name) return static_cast<int>(users_.size() + i) + 1;
  return -1;
}

std::string Roster::name_of(int id) const
{
  if (id == 0) return "null";
  if (id >= 1 && id <= static_cast<int>(users_.size())) return users_[id - 1];
  int c = id - 1 - static_cast<int>(users_.size());
  if (c >= 0 && c < static_cast<int>(contracts_.size())) return contracts_[c];
  throw std::out_of_range("address id " + std::to_string(id));
}

bool Roster::is_user(int id) const
{
  return id >= 1 && id <= static_cast<int>(users_.size());
}

bool Roster::is_contract(int id) const { return contract_index(id) >= 0; }

int Roster::contract_address(int contract_index) const
{
  return static_cast<int>(users_.size()) + contract_index + 1;
}

int Roster::contract_index(int id) const
{
  int c = id - 1 - static_cast<int>(users_.size());
  if (c >= 0 && c < static_cast<int>(contracts_.size())) return c;
  return -1;
}

const std::vector<std::string> & default_users()
{
  static const std::vector<std::string> users = { "A", "B", "M" };
  return users;
}

int System::find_contract(const std::string & name) const
{
  for (size_t i = 0; i < contracts.size(); ++i)
    if (contracts[i].decl.name == name) return static_cast<int>(i);
  return -1;
}

int System::find_proc(int contract, const std::string & name) const
{
  for (size_t i = 0; i < procs.size(); ++i)
    if (procs[i].contract == contract && procs[i].name == name)
      return static_cast<int>(i);
  return -1;
}

const Procedure & System::proc(int global_id) const
{
  const ProcRef & r = procs.at(global_id);
  return contracts[r.contract].decl.procedures[r.proc];
}

int System::slot_of(int contract, int field, int key_address) const
{
  int base = field_slot[contract][field];
  if (!contracts[contract].decl.fields[field].type.is_map) return base;
  return base + key_address - 1;
}

namespace {

void walk_exprs(const Stmt & s, const std::function<void(const Expr &)> & f)
{
  std::function<void(const Expr &)> rec = [&](const Expr & e) {
    f(e);
    for (const auto & k : e.kids) rec(k);
  };
  for (const auto & e : s.exprs) rec(e);
  for (const auto & b : s.body) walk_exprs(b, f);
}

}  // namespace

bool System::uses_block_number() const
{
  bool found = false;
  for (const auto & c : contracts)
    for (const auto & p : c.decl.procedures)
      walk_exprs(p.body, [&](const Expr & e) {
        if (e.kind == ExprKind::BlockNumber) found = true;
      });
  return found;
}

std::vector<std::int64_t> System::int_literals() const
{
  std::set<std::int64_t> lits;
  for (const auto & c : contracts)
    for (const auto & p : c.decl.procedures)
      walk_exprs(p.body, [&](const Expr & e) {
        if (e.kind == ExprKind::IntLit) lits.insert(e.num);
      });
  return { lits.begin(), lits.end() };
}

}  // namespace chmc
