#pragma once

#include <stdexcept>
#include <string>

namespace race {

enum class ErrorKind {
  Domain,      // argument outside the operation's domain
  Parse,       // malformed input text
  Validation,  // well-formed input violating an invariant
  Guard,       // request exceeds a cost guard
  Numeric,     // singular matrix, failed factorization
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_domain(const std::string& what) {
  throw Error(ErrorKind::Domain, what);
}
[[noreturn]] inline void throw_parse(const std::string& what) {
  throw Error(ErrorKind::Parse, what);
}
[[noreturn]] inline void throw_validation(const std::string& what) {
  throw Error(ErrorKind::Validation, what);
}
[[noreturn]] inline void throw_guard(const std::string& what) {
  throw Error(ErrorKind::Guard, what);
}
[[noreturn]] inline void throw_numeric(const std::string& what) {
  throw Error(ErrorKind::Numeric, what);
}

// True when RACE_GUARD_OVERRIDE=1 is set in the environment.
bool guards_lifted();

}  // namespace race
