#ifndef MRCA_ERRORS_HPP
#define MRCA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mrca {

// Argument outside the domain of a function (negative time, λ < 0, ...).
class DomainError : public std::domain_error {
public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Operation not available for the given mechanism kind (e.g. exact
// samplers outside the quadratic case).
class CapabilityError : public std::logic_error {
public:
  explicit CapabilityError(const std::string& what) : std::logic_error(what) {}
};

// Iterative numerics failed to converge.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed configuration or command line.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mrca

#endif  // MRCA_ERRORS_HPP
