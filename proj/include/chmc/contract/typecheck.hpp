#pragma once

#include <string>
#include <vector>

#include "chmc/contract/system.hpp"

namespace chmc {

// Type-checks a set of contracts against a user roster. Throws
// FrontendError listing every type error found.
System typecheck_system(std::vector<ContractDecl> decls,
                        std::vector<std::string> users = default_users());

// Single-contract convenience wrapper.
TypedContract typecheck_contract(const ContractDecl & decl,
                                 std::vector<std::string> users = default_users());

// Types a Binary node whose operands are already typed. Shared with the
// property checker.
bool infer_binary_type(Expr & e, std::vector<Diagnostic> & errors);

// Parses and type-checks a contract file.
System load_system(const std::string & source,
                   std::vector<std::string> users = default_users());

}  // namespace chmc
