#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chmc/contract/ast.hpp"
#include "chmc/lexer.hpp"

namespace chmc {

// Parses every contract in a source file. Throws FrontendError.
std::vector<ContractDecl> parse_contracts(std::string_view src);

// Parses a file that must contain exactly one contract.
ContractDecl parse_contract(std::string_view src);

// Expression parser shared with the property frontend.
class ExprParser
{
 public:
  explicit ExprParser(TokenStream & ts) : ts_(ts) {}

  Expr parse_expr();
  // Stops below the relational operators; used inside modal labels where
  // '>' closes the label.
  Expr parse_additive();
  Expr parse_postfix();
  // Everything above && and ||; the property parser owns those.
  Expr parse_comparison() { return parse_equality(); }

 private:
  Expr parse_or();
  Expr parse_and();
  Expr parse_equality();
  Expr parse_relational();
  Expr parse_mul();
  Expr parse_unary();
  Expr parse_primary();

  TokenStream & ts_;
};

std::string print_expr(const Expr & e);
std::string print_stmt(const Stmt & s, int indent = 0);
std::string print_contract(const ContractDecl & c);

}  // namespace chmc
