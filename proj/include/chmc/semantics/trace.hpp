#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "chmc/semantics/state.hpp"

namespace chmc {

nlohmann::json tx_to_json(const System & sys, const Transaction & tx);
Transaction tx_from_json(const System & sys, const nlohmann::json & j);

nlohmann::json trace_to_json(const System & sys, const std::vector<Transaction> & trace);
std::vector<Transaction> trace_from_json(const System & sys, const nlohmann::json & j);

nlohmann::json state_to_json(const System & sys, const FlaggedState & s);

// Runs a trace from the initial state and returns every visited state,
// starting with the initial one.
std::vector<FlaggedState> run_trace(const System & sys, const std::vector<Transaction> & trace,
                                    std::int64_t user_balance = 10);

}  // namespace chmc
