#pragma once

#include <stdexcept>
#include <string>

namespace groundline {

// Base for every error the engine raises on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Network or HTTP failure that survived the retry policy.
class TransportError : public Error {
 public:
  using Error::Error;
};

// The provider answered, but the body is not what the wire protocol promises.
class ProviderError : public Error {
 public:
  using Error::Error;
};

// A stored cache record failed its checksum or cannot be decoded.
class CacheCorruption : public Error {
 public:
  using Error::Error;
};

// A model response could not be parsed into the expected structure.
class ParseError : public Error {
 public:
  using Error::Error;
};

// An input file violates its declared schema. Carries the offending line
// when the format is line-oriented (0 = not line-addressable).
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

// A referenced frame file is absent or unreadable.
class MissingFrame : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroVector : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace groundline
