#pragma once

#include <stdexcept>
#include <string>

namespace iontrap {

// Malformed user input: bad geometry files, missing units, invalid
// dimensions.  The CLI maps this to exit status 1.
class input_error : public std::invalid_argument {
 public:
  explicit input_error(const std::string& what) : std::invalid_argument(what) {}
};

// A well-formed request whose physics failed: no trap minimum, solver
// non-convergence, unresolvable spectrum.  The CLI maps this to exit
// status 2.
class physics_error : public std::runtime_error {
 public:
  explicit physics_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace iontrap
