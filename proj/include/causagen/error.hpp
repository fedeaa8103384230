#pragma once

#include <stdexcept>
#include <string>

namespace causagen {

// Invalid input data or a violated precondition on user-supplied content.
// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace causagen
