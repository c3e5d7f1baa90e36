#pragma once

#include <stdexcept>
#include <string>

namespace lipsum {

// Dimension or partition mismatch between tensors, points and operators.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A precondition on an argument that is not about shapes (empty configuration,
// exponent out of range, non-l2 norm where one is required, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed JSON document or a document that violates the file schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lipsum
