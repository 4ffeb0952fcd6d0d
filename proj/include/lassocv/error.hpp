#pragma once

#include <stdexcept>
#include <string>

namespace lassocv {

// Invalid arguments or violated type invariants. The CLI maps this to exit code 1.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A selector could not produce a choice (e.g. every GCV grid point saturated).
class SelectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lassocv
