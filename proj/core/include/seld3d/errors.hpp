#pragma once

#include <stdexcept>
#include <string>

namespace seld3d {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public Error {
public:
  using Error::Error;
};

/// A file exists but is not in the expected format (bad magic, truncated,
/// inconsistent header, unparsable row).
class FormatError : public Error {
public:
  using Error::Error;
};

/// Array dimensions do not agree with the operation's contract.
class ShapeMismatchError : public Error {
public:
  using Error::Error;
};

/// A direction was requested from a (near-)zero vector; no DOA is decodable.
class ZeroVectorError : public Error {
public:
  using Error::Error;
};

/// Index outside the valid grid or range.
class OutOfBoundsError : public Error {
public:
  using Error::Error;
};

/// Two events of the same class share a frame in a class-wise label set.
class DuplicateClassError : public Error {
public:
  using Error::Error;
};

/// Training loss became NaN or infinite; the run must abort.
class NonFiniteLossError : public Error {
public:
  using Error::Error;
};

/// Score aggregation requested on an empty evaluation set.
class EmptyEvalError : public Error {
public:
  using Error::Error;
};

/// Audio clip has no samples.
class EmptyClipError : public Error {
public:
  using Error::Error;
};

/// Equirectangular operation on an image whose width is not twice its height.
class BadAspectError : public Error {
public:
  using Error::Error;
};

/// Backward pass invoked with a cache whose shapes do not match the
/// parameters it was recorded with.
class StaleCacheError : public Error {
public:
  using Error::Error;
};

/// Configuration file or command-line value is missing or malformed.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace seld3d
