#ifndef KMATCH_ERRORS_HPP
#define KMATCH_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kmatch {

/// Invalid algorithm parameters (k out of range, empty universe, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A key, vertex or weight outside the domain an object was built for.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An operation the stream model does not allow (a deletion fed to the
/// insert-only matcher).
class ModelError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace kmatch

#endif  // KMATCH_ERRORS_HPP
