#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lehmann {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (u not in (0,1),
// lambda <= 0, observation outside the support, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure did not reach its tolerance. Carries the best
// estimate reached so callers may still inspect it.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double best_estimate,
                   double error_estimate)
      : Error(what),
        best_estimate_(best_estimate),
        error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

// Sample for which the likelihood has no interior maximizer.
class DegenerateSample : public Error {
 public:
  using Error::Error;
};

// Descriptor / config text that does not follow its grammar.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::vector<std::string> expected,
             const std::string& found)
      : Error(format(position, expected, found)),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept {
    return expected_;
  }

 private:
  static std::string format(std::size_t position,
                            const std::vector<std::string>& expected,
                            const std::string& found) {
    std::string msg = "parse error at position " + std::to_string(position) +
                      ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i > 0) msg += (i + 1 == expected.size()) ? " or " : ", ";
      msg += expected[i];
    }
    msg += ", found " + (found.empty() ? std::string("end of input")
                                       : "'" + found + "'");
    return msg;
  }

  std::size_t position_;
  std::vector<std::string> expected_;
};

}  // namespace lehmann
