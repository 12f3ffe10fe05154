#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qhydro {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a precondition (non-finite values, mismatched grids, bad sizes).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A density that cannot be normalized: all zero, or with negative entries.
class DegenerateDensity : public Error {
 public:
  using Error::Error;
};

/// The density drops below the node floor inside its support.
class NodeError : public Error {
 public:
  NodeError(std::size_t index, const std::string& what)
      : Error(what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// The phase of a wave field (or an action field) winds around the periodic
/// domain where zero winding is required, or is inconsistent between snapshots.
class WindingError : public Error {
 public:
  using Error::Error;
};

}  // namespace qhydro
