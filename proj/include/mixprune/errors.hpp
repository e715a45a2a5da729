#pragma once

#include <stdexcept>
#include <string>

namespace mixprune {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Tensor or layer shapes that do not line up. Carries the offending layer id
// (0 when the mismatch is not tied to a layer).
class ShapeError : public Error {
  public:
    ShapeError(int layer_id, const std::string& what) : Error(what), layer_id_(layer_id) {}
    int layer_id() const noexcept { return layer_id_; }

  private:
    int layer_id_;
};

// Bad user input: labels out of range, malformed rows, invalid arguments.
class InputError : public Error {
  public:
    using Error::Error;
};

// Inconsistent configuration: out-of-bounds fractions, illegal overrides,
// models without prunable layers.
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Non-finite values surfaced during training.
class NumericError : public Error {
  public:
    NumericError(int layer_id, const std::string& what) : Error(what), layer_id_(layer_id) {}
    int layer_id() const noexcept { return layer_id_; }

  private:
    int layer_id_;
};

// Broken internal invariant. Reaching one of these is a bug.
class InvariantError : public Error {
  public:
    using Error::Error;
};

}  // namespace mixprune
