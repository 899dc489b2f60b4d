#pragma once

#include <stdexcept>
#include <string>

namespace multiframe {

/// Dimension or signature mismatch between operands.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Logarithm requested at or beyond the principal-branch cut (angle near pi).
class BranchError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative numeric routine failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dynamics specification violates its structural constraints.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Innovation covariance could not be factored.
class RankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad scenario configuration (file, schema or value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace multiframe
