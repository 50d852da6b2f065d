#pragma once

#include <stdexcept>
#include <string>

namespace treednf {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad documents, bad flags, inconsistent arguments.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class RepeatedSplitOnPath : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class UnknownFeatureIndex : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class DimensionMismatch : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class EmptyDataset : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class MissingGroupMap : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class EmptyDistribution : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class BcfMissing : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class IllegalAction : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

/// The exact minimizer refuses functions over more variables than the cap.
class VariableCapExceeded : public Error {
 public:
  VariableCapExceeded(std::size_t variables, std::size_t cap)
      : Error("expression has " + std::to_string(variables) +
              " variables, cap is " + std::to_string(cap)),
        variables_(variables),
        cap_(cap) {}

  std::size_t variables() const { return variables_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t variables_;
  std::size_t cap_;
};

/// A broken internal guarantee (complementarity, policy termination).
class InternalError : public Error {
 public:
  using Error::Error;
};

class NonTerminatingPolicy : public InternalError {
 public:
  using InternalError::InternalError;
};

}  // namespace treednf
