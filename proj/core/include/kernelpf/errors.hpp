#pragma once

#include <stdexcept>
#include <string>

namespace kernelpf {

/// Base for all library errors. `code()` is a stable machine-readable tag
/// used by the CLI to emit structured error lines.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

/// Violated preconditions, invalid inputs, unsupported variants. CLI exit 2.
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// Results that cannot be certified within truncation/tail bounds. CLI exit 3.
class InconclusiveError : public Error {
public:
  using Error::Error;
};

inline PreconditionError dimension_mismatch(const std::string& what) {
  return PreconditionError("dimension-mismatch", what);
}

inline PreconditionError unsupported_variant(const std::string& what) {
  return PreconditionError("unsupported-variant", what);
}

inline PreconditionError invalid_atom(const std::string& what) {
  return PreconditionError("invalid-atom", what);
}

}  // namespace kernelpf
