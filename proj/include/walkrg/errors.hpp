#pragma once

#include <stdexcept>
#include <string>

namespace walkrg {

/// Base of every error raised by the library. Carries the name of the
/// module that raised it so the CLI can surface it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Invalid or inconsistent parameters.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// A numeric argument outside the operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Coarsening past the largest scale of the hierarchy.
class ScaleOverflowError : public Error {
 public:
  using Error::Error;
};

/// Work would exceed a configured complexity cap (degree, node count...).
class ComplexityError : public Error {
 public:
  using Error::Error;
};

/// A numerical self-check failed (quadrature, differentiation, PSD...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Markov chain did not mix (acceptance too low).
class MixingFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace walkrg
