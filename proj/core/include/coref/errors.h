// Copyright 2026 The s2e-coref Authors.
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

#ifndef COREF_ERRORS_H_
#define COREF_ERRORS_H_

#include <stdexcept>
#include <string>

namespace coref {

// Input data that cannot be interpreted: malformed CoNLL, bad jsonlines,
// corrupt binary files, missing files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text-format parse failure; line is 1-based, 0 when unknown.
class ParseError : public DataError {
 public:
  ParseError(const std::string &message, int line)
      : DataError(line > 0 ? "line " + std::to_string(line) + ": " + message
                           : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// A jsonlines object that does not match the document schema.
class SchemaError : public DataError {
 public:
  SchemaError(const std::string &field, int line, const std::string &message)
      : DataError("line " + std::to_string(line) + ": field '" + field +
                  "': " + message),
        field_(field),
        line_(line) {}
  const std::string &field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

// Binary container (docemb, checkpoints) failures.
class FormatError : public DataError {
 public:
  enum class Kind { kBadMagic, kUnsupportedVersion, kChecksum, kTruncated,
                    kInvalid, kIo };
  FormatError(Kind kind, const std::string &message)
      : DataError(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Shape or dimension mismatch between tensors.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Violated operation precondition (e.g. span outside the length mask).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values or failed numeric checks.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coref

#endif  // COREF_ERRORS_H_
