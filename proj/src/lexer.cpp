#include "chmc/lexer.hpp"

#include <array>
#include <cctype>

namespace chmc {

std::string Diagnostic::str() const
{
  return std::to_string(span.line) + ":" + std::to_string(span.column) + ": "
         + message;
}

static std::string join_diags(const std::vector<Diagnostic> & diags)
{
  std::string out;
  for (const auto & d : diags) {
    if (!out.empty()) out += "\n";
    out += d.str();
  }
  return out;
}

FrontendError::FrontendError(std::vector<Diagnostic> diags)
    : std::runtime_error(join_diags(diags)), diags_(std::move(diags))
{
}

FrontendError::FrontendError(Span span, const std::string & message)
    : FrontendError(std::vector<Diagnostic>{ Diagnostic{ span, message } })
{
}

namespace {

constexpr std::array<std::string_view, 13> kTwoChar = {
  "==", "!=", "<=", ">=", "&&", "||", "->", "=>", "+=", "-=", "<<", ">>", "::"
};

}  // namespace

std::vector<Token> tokenize(std::string_view src)
{
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      Span start{ line, col, static_cast<int>(i), 2 };
      advance(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/'))
        advance(1);
      if (i + 1 >= src.size())
        throw FrontendError(start, "unterminated block comment");
      advance(2);
      continue;
    }
    Token t;
    t.span = Span{ line, col, static_cast<int>(i), 1 };
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size()
             && (std::isalnum(static_cast<unsigned char>(src[j]))
                 || src[j] == '_'))
        ++j;
      t.kind = TokKind::Ident;
      t.text = std::string(src.substr(i, j - i));
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
        ++j;
      t.kind = TokKind::Number;
      t.text = std::string(src.substr(i, j - i));
      if (t.text.size() > 18)
        throw FrontendError(t.span, "integer literal too large");
      t.number = std::stoll(t.text);
    } else {
      t.kind = TokKind::Punct;
      std::string_view two = src.substr(i, 2);
      bool matched = false;
      for (auto op : kTwoChar) {
        if (two == op) {
          t.text = std::string(op);
          matched = true;
          break;
        }
      }
      if (!matched) {
        static const std::string_view singles = "{}()[];,.:=<>+-*!?%/";
        if (singles.find(c) == std::string_view::npos)
          throw FrontendError(t.span,
                              std::string("unexpected character '") + c + "'");
        t.text = std::string(1, c);
      }
    }
    t.span.length = static_cast<int>(t.text.size());
    advance(t.text.size());
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = TokKind::End;
  end.span = Span{ line, col, static_cast<int>(src.size()), 0 };
  out.push_back(end);
  return out;
}

const Token & TokenStream::peek(size_t ahead) const
{
  size_t p = pos_ + ahead;
  if (p >= toks_.size()) return toks_.back();
  return toks_[p];
}

const Token & TokenStream::next()
{
  const Token & t = peek();
  if (pos_ + 1 < toks_.size()) ++pos_;
  return t;
}

bool TokenStream::is(std::string_view text, size_t ahead) const
{
  const Token & t = peek(ahead);
  return t.kind != TokKind::End && t.kind != TokKind::Number && t.text == text;
}

bool TokenStream::is_ident(size_t ahead) const
{
  return peek(ahead).kind == TokKind::Ident;
}

bool TokenStream::accept(std::string_view text)
{
  if (!is(text)) return false;
  next();
  return true;
}

const Token & TokenStream::expect(std::string_view text)
{
  if (!is(text)) fail("expected '" + std::string(text) + "'");
  return next();
}

const Token & TokenStream::expect_ident(const char * what)
{
  if (!is_ident()) fail(std::string("expected ") + what);
  return next();
}

void TokenStream::fail(const std::string & msg) const
{
  const Token & t = peek();
  std::string found = t.kind == TokKind::End ? "end of input" : "'" + t.text + "'";
  throw FrontendError(t.span, msg + ", found " + found);
}

}  // namespace chmc
