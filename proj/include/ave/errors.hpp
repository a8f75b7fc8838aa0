#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ave {

// Shapes of operands do not fit together.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A precondition of an operation was violated (empty input, non-scalar loss...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Run configuration is inconsistent or incompatible with the data.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ParseErrorKind {
  kIo,
  kBadMagic,
  kBadVersion,
  kTruncated,
  kLabelOutOfRange,
  kBadChecksum,
  kMalformed,
};

const char* to_string(ParseErrorKind kind);

// Failure to read or write one of the binary containers. `offset` is the byte
// offset of the first inconsistency.
class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, std::uint64_t offset, const std::string& what);

  ParseErrorKind kind() const { return kind_; }
  std::uint64_t offset() const { return offset_; }

 private:
  ParseErrorKind kind_;
  std::uint64_t offset_;
};

}  // namespace ave
