#pragma once

#include <stdexcept>
#include <string>

namespace autost {

/// Base of every error raised by the library. `kind()` is a short stable tag
/// that the CLI prints as the first field of its one-line error message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define AUTOST_DEFINE_ERROR(Name, tag)                               \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(tag, what) {}     \
  }

AUTOST_DEFINE_ERROR(ShapeError, "shape");
AUTOST_DEFINE_ERROR(ConfigError, "config");
AUTOST_DEFINE_ERROR(ParseError, "parse");
AUTOST_DEFINE_ERROR(ValidationError, "validation");
AUTOST_DEFINE_ERROR(ContractError, "contract");
AUTOST_DEFINE_ERROR(DegenerateBatchError, "degenerate-batch");
AUTOST_DEFINE_ERROR(UnsupportedTaskError, "unsupported-task");
AUTOST_DEFINE_ERROR(TrainingAborted, "training-aborted");
AUTOST_DEFINE_ERROR(IoError, "io");
AUTOST_DEFINE_ERROR(ChecksumError, "checksum");

#undef AUTOST_DEFINE_ERROR

}  // namespace autost
