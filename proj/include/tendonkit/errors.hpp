// Copyright 2026 The tendonkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TENDONKIT_ERRORS_HPP_
#define TENDONKIT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace tendonkit {

// Every library error carries a stable machine-readable code. The CLI maps
// `kind()` onto exit codes: validation-class errors exit 1, everything else 2.
class Error : public std::runtime_error {
 public:
  enum class Kind { kValidation, kRuntime };

  Error(std::string code, const std::string& message, Kind kind)
      : std::runtime_error(message), code_(std::move(code)), kind_(kind) {}

  const std::string& code() const noexcept { return code_; }
  Kind kind() const noexcept { return kind_; }

 private:
  std::string code_;
  Kind kind_;
};

#define TENDONKIT_DEFINE_ERROR(Name, KindValue)                     \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& message)                       \
        : Error(#Name, message, Error::Kind::KindValue) {}          \
  };

// Malformed model/scenario text. Message carries "line L, column C".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error("ParseError",
              "line " + std::to_string(line) + ", column " +
                  std::to_string(column) + ": " + message,
              Error::Kind::kValidation),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

TENDONKIT_DEFINE_ERROR(ValidationError, kValidation)
TENDONKIT_DEFINE_ERROR(SchemaError, kValidation)
TENDONKIT_DEFINE_ERROR(InvalidArgument, kValidation)
TENDONKIT_DEFINE_ERROR(DimensionMismatch, kRuntime)
TENDONKIT_DEFINE_ERROR(JointLimitViolation, kRuntime)
TENDONKIT_DEFINE_ERROR(UnknownLink, kRuntime)
TENDONKIT_DEFINE_ERROR(DegenerateSpan, kRuntime)
TENDONKIT_DEFINE_ERROR(SingularInertia, kRuntime)
TENDONKIT_DEFINE_ERROR(SingularConfiguration, kRuntime)
TENDONKIT_DEFINE_ERROR(NumericalBlowup, kRuntime)
TENDONKIT_DEFINE_ERROR(IoError, kRuntime)

#undef TENDONKIT_DEFINE_ERROR

inline void require_size(long actual, long expected, const char* what) {
  if (actual != expected) {
    throw DimensionMismatch(std::string(what) + ": expected size " +
                            std::to_string(expected) + ", got " +
                            std::to_string(actual));
  }
}

}  // namespace tendonkit

#endif  // TENDONKIT_ERRORS_HPP_
