#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace humancorpus {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kSchema,
  kDuplicateId,
  kGrammar,
  kDegenerateInput,
  kDimensionMismatch,
  kLlmFailure,
  kShortfall,
  kParse,
  kConfig,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for all library failures. Callers switch on code(); the
/// message is meant for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed manifest line. Carries the 1-based line number and the offending
/// field so operators can fix inputs without bisecting the file.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, std::string field, const std::string& detail)
      : Error(ErrorCode::kSchema, "line " + std::to_string(line) + ": field '" +
                                      field + "': " + detail),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace humancorpus
