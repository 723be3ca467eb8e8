#pragma once

#include <stdexcept>
#include <string>

namespace dnsveil {

/// Base of every error thrown by the library. `code()` names the failure
/// kind in a stable, machine-readable way (e.g. "BadMagic").
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

template <typename Kind>
class KindedError : public Error {
 public:
  KindedError(Kind kind, std::string code, const std::string& message)
      : Error(std::move(code), message), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace dnsveil
