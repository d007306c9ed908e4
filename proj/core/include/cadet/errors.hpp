#pragma once

#include <stdexcept>
#include <string>

namespace cadet {

// Dimension / shape disagreement between operands or parameters.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Semantically invalid data: out-of-range labels, malformed boxes, bad config values.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or malformed files; message carries path and, where known, byte position.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cadet
