#pragma once

#include <stdexcept>
#include <string>

namespace drnet {

/// Matrix/vector dimension mismatches.
struct ShapeError : std::invalid_argument {
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid argument values (bad ranges, fractions, empty inputs).
struct ArgumentError : std::invalid_argument {
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// Requested dataset size exceeds the distinct pair population.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// File read/write failures.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite loss encountered during training.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// API usage violations, e.g. backward called before forward.
struct ContractError : std::logic_error {
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace drnet
