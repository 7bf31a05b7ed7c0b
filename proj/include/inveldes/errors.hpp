#pragma once

#include <stdexcept>
#include <string>

namespace inveldes {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (mesh or config syntax).
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_ = 0;
};

/// Structurally inconsistent mesh (dangling indices, untagged boundary, ...).
class TopologyError : public Error {
public:
  using Error::Error;
};

/// Element volume below the degeneracy threshold.
class DegenerateElement : public Error {
public:
  using Error::Error;
};

/// Boundary tag not present in the mesh.
class UnknownTag : public Error {
public:
  using Error::Error;
};

/// A deformation gradient with non-positive determinant was encountered.
/// During Newton iterations this signals that a trial step went too far.
class InvertedElement : public Error {
public:
  using Error::Error;
};

/// Pre-deformation tensor is not symmetric positive definite.
class NonSPDPredeformation : public Error {
public:
  using Error::Error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Filesystem-level failure while reading or writing results.
class IoError : public Error {
public:
  using Error::Error;
};

/// Direct sparse factorization failed or produced an unusable solution.
class LinearSolveFailure : public Error {
public:
  using Error::Error;
};

}  // namespace inveldes
