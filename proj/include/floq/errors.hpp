#pragma once

#include <stdexcept>

namespace floq {

/// A measured quantity broke an asserted invariant (maps to CLI exit code 2).
struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace floq
