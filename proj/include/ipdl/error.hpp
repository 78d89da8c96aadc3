#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace ipdl {

struct SourceSpan {
  int line = 0;
  int column = 0;
};

/// Every failure carries a stable dotted identifier, e.g. "FOLD-BIND.single-read".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message,
        std::optional<SourceSpan> span = std::nullopt)
      : std::runtime_error(message), code_(std::move(code)), span_(span) {}

  const std::string& code() const { return code_; }
  const std::optional<SourceSpan>& span() const { return span_; }
  void set_span(SourceSpan s) {
    if (!span_) span_ = s;
  }

 private:
  std::string code_;
  std::optional<SourceSpan> span_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace ipdl
