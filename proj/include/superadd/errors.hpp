#pragma once

#include <stdexcept>
#include <string>

namespace superadd {

/// Base for every rejected-input condition raised by the library.
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class dimension_mismatch : public invalid_input {
 public:
  using invalid_input::invalid_input;
};

/// Operator failed Hermiticity, trace or positivity checks.
class not_a_state : public invalid_input {
 public:
  using invalid_input::invalid_input;
};

class prime_dimension_required : public invalid_input {
 public:
  explicit prime_dimension_required(int d)
      : invalid_input("prime dimension required (got d=" + std::to_string(d) + ")") {}
};

/// Weyl parameters violate p <= r <= (1 - d(d-1)p)/d, so the channel is not a
/// mixture of the depolarizing and q-c channels.
class outside_mixture_regime : public invalid_input {
 public:
  using invalid_input::invalid_input;
};

}  // namespace superadd
