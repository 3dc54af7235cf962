#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace transferscope {

// Malformed or inconsistent ledger input. `line` is 1-based, 0 when the
// problem is not tied to a particular input line.
class LedgerError : public std::runtime_error {
 public:
  LedgerError(const std::string& what, std::string source = {}, std::size_t line = 0)
      : std::runtime_error(format(what, source, line)), source_(std::move(source)), line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& what, const std::string& source, std::size_t line) {
    if (source.empty()) return what;
    if (line == 0) return source + ": " + what;
    return source + ":" + std::to_string(line) + ": " + what;
  }

  std::string source_;
  std::size_t line_;
};

// A metric is undefined for the requested selection (missing baseline,
// zero baseline, empty axis, ...).
class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller asked for something that cannot be produced (e.g. svg for a
// table-only report).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace transferscope
