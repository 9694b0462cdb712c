#pragma once

#include <stdexcept>
#include <string>

namespace bsrmm {

// Invalid user input: bad files, bad config values, infeasible scenarios.
struct input_error : std::runtime_error {
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical breakdown: failed Cholesky, non-finite state, singular factors.
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace bsrmm
