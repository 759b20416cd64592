// Copyright 2026 The sskl Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace sskl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SSKL_DEFINE_ERROR(Name)            \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

SSKL_DEFINE_ERROR(DimensionMismatch);
SSKL_DEFINE_ERROR(NotSquare);
SSKL_DEFINE_ERROR(NotSymmetric);
SSKL_DEFINE_ERROR(NotPositiveDefinite);
SSKL_DEFINE_ERROR(NonFinite);
SSKL_DEFINE_ERROR(NegativeVariance);
SSKL_DEFINE_ERROR(SplitOutOfRange);
SSKL_DEFINE_ERROR(EmptyTrainingSet);
SSKL_DEFINE_ERROR(EmptyLabeledSet);
SSKL_DEFINE_ERROR(TrainingDiverged);
SSKL_DEFINE_ERROR(FileNotFound);
SSKL_DEFINE_ERROR(NoNumericColumns);
SSKL_DEFINE_ERROR(EmptyAfterCleaning);
SSKL_DEFINE_ERROR(InsufficientData);
SSKL_DEFINE_ERROR(EmptyVectors);
SSKL_DEFINE_ERROR(ZeroBaseline);
SSKL_DEFINE_ERROR(FormatError);
SSKL_DEFINE_ERROR(UnknownMethod);

#undef SSKL_DEFINE_ERROR

/// Configuration-file error carrying the offending line (0 when not tied to a line).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace sskl
