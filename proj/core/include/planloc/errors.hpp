#pragma once

#include <stdexcept>
#include <string>

namespace planloc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition (zero normal, bad dimension, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Not enough independent data to determine a quantity (coincident points, < 2 pairs).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// A file could not be parsed. The message carries the line or the JSON field path.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A floor plan or scenario is well formed but violates a semantic invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The factor graph has no prior and no fixed variable, so its optimum is not unique.
class GaugeFreedomError : public Error {
 public:
  using Error::Error;
};

/// Graph topology does not have the shape an operation requires.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// merge() was asked to fuse graphs whose match is not unambiguous.
class MergeRefused : public Error {
 public:
  using Error::Error;
};

/// A random plan could not be generated within the retry budget.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace planloc
