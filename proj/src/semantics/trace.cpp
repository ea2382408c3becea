#include "chmc/semantics/trace.hpp"

#include <stdexcept>

#include "chmc/semantics/interpreter.hpp"

namespace chmc {

using nlohmann::json;

namespace {

json value_to_json(const Roster & roster, const Value & v)
{
  switch (v.sort) {
    case Sort::Bool: return json(v.v != 0);
    case Sort::Address: return json(roster.name_of(static_cast<int>(v.v)));
    default: return json(v.v);
  }
}

int address_from_json(const Roster & roster, const json & j)
{
  if (j.is_null()) return 0;
  if (!j.is_string()) throw std::runtime_error("address must be a string: " + j.dump());
  int id = roster.id_of(j.get<std::string>());
  if (id < 0) throw std::runtime_error("unknown address '" + j.get<std::string>() + "'");
  return id;
}

Value value_from_json(const Roster & roster, const json & j, Sort hint)
{
  if (j.is_boolean()) return Value::of_bool(j.get<bool>());
  if (j.is_number_integer()) return Value::of_int(j.get<std::int64_t>());
  if (j.is_string() || j.is_null()) {
    (void)hint;
    return Value::of_addr(address_from_json(roster, j));
  }
  throw std::runtime_error("unsupported argument value " + j.dump());
}

}  // namespace

json tx_to_json(const System & sys, const Transaction & tx)
{
  json args = json::array();
  for (const auto & a : tx.args) args.push_back(value_to_json(sys.roster, a));
  return json{ { "sender", sys.roster.name_of(tx.sender) },
               { "contract", sys.roster.name_of(tx.contract) },
               { "proc", tx.proc },
               { "args", args },
               { "value", tx.value },
               { "blockDelta", tx.block_delta } };
}

Transaction tx_from_json(const System & sys, const json & j)
{
  Transaction tx;
  tx.sender = address_from_json(sys.roster, j.at("sender"));
  tx.contract = address_from_json(sys.roster, j.at("contract"));
  tx.proc = j.at("proc").get<std::string>();
  resolve_tx(sys, tx);
  const Procedure * p = tx.proc_id >= 0 ? &sys.proc(tx.proc_id) : nullptr;
  const json & args = j.contains("args") ? j.at("args") : json::array();
  for (size_t i = 0; i < args.size(); ++i) {
    Sort hint = p && i < p->params.size() ? p->params[i].type.scalar : Sort::Int;
    tx.args.push_back(value_from_json(sys.roster, args[i], hint));
  }
  tx.value = j.value("value", static_cast<std::int64_t>(0));
  tx.block_delta = j.value("blockDelta", static_cast<std::int64_t>(0));
  return tx;
}

json trace_to_json(const System & sys, const std::vector<Transaction> & trace)
{
  json out = json::array();
  for (const auto & tx : trace) out.push_back(tx_to_json(sys, tx));
  return out;
}

std::vector<Transaction> trace_from_json(const System & sys, const json & j)
{
  if (!j.is_array()) throw std::runtime_error("trace must be a JSON array");
  std::vector<Transaction> out;
  for (const auto & t : j) out.push_back(tx_from_json(sys, t));
  return out;
}

json state_to_json(const System & sys, const FlaggedState & fs)
{
  const ChainState & s = fs.state;
  json bal = json::object();
  for (int id = 1; id < sys.roster.num_values(); ++id)
    bal[sys.roster.name_of(id)] = s.balance[id];
  json contracts = json::object();
  for (size_t c = 0; c < sys.contracts.size(); ++c) {
    const ContractDecl & d = sys.decl(static_cast<int>(c));
    json fields = json::object();
    for (size_t f = 0; f < d.fields.size(); ++f) {
      const FieldDecl & fd = d.fields[f];
      if (!fd.type.is_map) {
        fields[fd.name] = value_to_json(
            sys.roster, read_field(sys, s, static_cast<int>(c), static_cast<int>(f)));
        continue;
      }
      json m = json::object();
      for (int id = 1; id < sys.roster.num_values(); ++id)
        m[sys.roster.name_of(id)] = value_to_json(
            sys.roster, read_field(sys, s, static_cast<int>(c), static_cast<int>(f), id));
      fields[fd.name] = m;
    }
    contracts[d.name] = json{ { "constructed", s.constructed[c] != 0 }, { "fields", fields } };
  }
  return json{ { "balances", bal },
               { "contracts", contracts },
               { "blockNumber", s.block_number },
               { "reverted", fs.reverted } };
}

std::vector<FlaggedState> run_trace(const System & sys, const std::vector<Transaction> & trace,
                                    std::int64_t user_balance)
{
  std::vector<FlaggedState> out;
  out.push_back({ initial_state(sys, user_balance), false });
  for (const auto & tx : trace) out.push_back(step_flagged(sys, out.back(), tx));
  return out;
}

}  // namespace chmc
