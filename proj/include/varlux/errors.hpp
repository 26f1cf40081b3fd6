#pragma once

#include <stdexcept>
#include <string>

namespace varlux {

// Base for everything this library throws on purpose.
struct error : std::runtime_error {
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// A precondition or input contract was violated (bad exponent range,
// ball center outside the box, hypothesis violations, ...).
struct invalid_input : error {
  explicit invalid_input(const std::string& what) : error(what) {}
};

// The computation itself failed: empty balls, overflow in a modular,
// zero mass where positive mass is required.
struct numeric_error : error {
  explicit numeric_error(const std::string& what) : error(what) {}
};

}  // namespace varlux
