#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace chmc {

struct Span
{
  int line = 0;
  int column = 0;
  int offset = 0;
  int length = 0;
};

struct Diagnostic
{
  Span span;
  std::string message;

  std::string str() const;
};

// Raised by the frontends; carries every diagnostic collected so far.
class FrontendError : public std::runtime_error
{
 public:
  explicit FrontendError(std::vector<Diagnostic> diags);
  FrontendError(Span span, const std::string & message);

  const std::vector<Diagnostic> & diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

}  // namespace chmc
