#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "chmc/diagnostics.hpp"

namespace chmc {

enum class TokKind
{
  Ident,
  Number,
  Punct,
  End
};

struct Token
{
  TokKind kind = TokKind::End;
  std::string text;
  std::int64_t number = 0;
  Span span;
};

// Shared tokenizer for contract and property files. Handles // and /* */
// comments. Throws FrontendError on an unknown character.
std::vector<Token> tokenize(std::string_view src);

// Cursor over a token vector with the usual peek/accept/expect helpers.
class TokenStream
{
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token & peek(size_t ahead = 0) const;
  const Token & next();
  bool at_end() const { return peek().kind == TokKind::End; }
  bool is(std::string_view text, size_t ahead = 0) const;
  bool is_ident(size_t ahead = 0) const;
  bool accept(std::string_view text);
  const Token & expect(std::string_view text);
  const Token & expect_ident(const char * what);
  [[noreturn]] void fail(const std::string & msg) const;

  size_t pos() const { return pos_; }
  void reset(size_t p) { pos_ = p; }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace chmc
