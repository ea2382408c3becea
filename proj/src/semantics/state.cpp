#include "chmc/semantics/state.hpp"

#include <sstream>

namespace chmc {

namespace {

inline void mix(size_t & h, std::uint64_t v)
{
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}

}  // namespace

std::string format_value(const Roster & roster, const Value & v)
{
  switch (v.sort) {
    case Sort::Bool: return v.v ? "true" : "false";
    case Sort::Address: return roster.name_of(static_cast<int>(v.v));
    default: return std::to_string(v.v);
  }
}

size_t ChainStateHash::operator()(const ChainState & s) const
{
  size_t h = 0;
  for (auto b : s.balance) mix(h, static_cast<std::uint64_t>(b));
  for (auto c : s.constructed) mix(h, c);
  for (const auto & st : s.storage)
    for (auto v : st) mix(h, static_cast<std::uint64_t>(v));
  mix(h, static_cast<std::uint64_t>(s.block_number));
  return h;
}

size_t FlaggedStateHash::operator()(const FlaggedState & s) const
{
  size_t h = ChainStateHash{}(s.state);
  mix(h, s.reverted ? 1 : 0);
  return h;
}

std::int64_t default_of(Sort) { return 0; }

ChainState initial_state(const System & sys, std::int64_t user_balance)
{
  ChainState s;
  s.balance.assign(sys.roster.num_values(), 0);
  for (int id = 1; id < sys.roster.num_values(); ++id)
    if (sys.roster.is_user(id)) s.balance[id] = user_balance;
  for (size_t c = 0; c < sys.contracts.size(); ++c) {
    s.constructed.push_back(sys.contracts[c].starts_constructed ? 1 : 0);
    s.storage.emplace_back(sys.slot_count[c], 0);
  }
  return s;
}

Value read_field(const System & sys, const ChainState & s, int contract, int field,
                 int key_address)
{
  const FieldDecl & f = sys.decl(contract).fields[field];
  if (f.type.is_map && key_address == 0) return { f.type.scalar, default_of(f.type.scalar) };
  return { f.type.scalar, s.storage[contract][sys.slot_of(contract, field, key_address)] };
}

std::string format_state(const System & sys, const FlaggedState & fs)
{
  const ChainState & s = fs.state;
  std::ostringstream out;
  out << "balances:";
  for (int id = 1; id < sys.roster.num_values(); ++id)
    out << " " << sys.roster.name_of(id) << "=" << s.balance[id];
  out << "\n";
  for (size_t c = 0; c < sys.contracts.size(); ++c) {
    const ContractDecl & d = sys.decl(static_cast<int>(c));
    out << d.name << (s.constructed[c] ? "" : " (not constructed)") << ":";
    for (size_t f = 0; f < d.fields.size(); ++f) {
      const FieldDecl & fd = d.fields[f];
      if (!fd.type.is_map) {
        out << " " << fd.name << "="
            << format_value(sys.roster, read_field(sys, s, static_cast<int>(c),
                                                   static_cast<int>(f)));
        continue;
      }
      out << " " << fd.name << "={";
      for (int id = 1; id < sys.roster.num_values(); ++id) {
        if (id > 1) out << ", ";
        out << sys.roster.name_of(id) << ": "
            << format_value(sys.roster, read_field(sys, s, static_cast<int>(c),
                                                   static_cast<int>(f), id));
      }
      out << "}";
    }
    out << "\n";
  }
  out << "block.number=" << s.block_number << " last_reverted="
      << (fs.reverted ? "true" : "false") << "\n";
  return out.str();
}

std::string format_tx(const System & sys, const Transaction & tx)
{
  std::ostringstream out;
  out << sys.roster.name_of(tx.sender) << " -> " << sys.roster.name_of(tx.contract) << "."
      << tx.proc << "(";
  for (size_t i = 0; i < tx.args.size(); ++i) {
    if (i) out << ", ";
    out << format_value(sys.roster, tx.args[i]);
  }
  out << ") value " << tx.value;
  if (tx.block_delta != 0) out << " delta " << tx.block_delta;
  return out.str();
}

void resolve_tx(const System & sys, Transaction & tx)
{
  tx.proc_id = -1;
  int c = sys.roster.contract_index(tx.contract);
  if (c >= 0) tx.proc_id = sys.find_proc(c, tx.proc);
}

}  // namespace chmc
