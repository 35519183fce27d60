// Copyright 2026 The kxfer Authors
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

#ifndef KXFER_ERROR_HPP_
#define KXFER_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace kxfer {

enum class ErrorKind {
  kUsage,
  kIo,
  kFormat,
  kCorruption,
  kDimension,
  kEmptyLibrary,
  kLookup,
  kCoverage,
  kParameter,
  kUnsupportedWindow,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage error";
    case ErrorKind::kIo: return "I/O error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kCorruption: return "corruption error";
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kEmptyLibrary: return "empty-library error";
    case ErrorKind::kLookup: return "lookup error";
    case ErrorKind::kCoverage: return "coverage error";
    case ErrorKind::kParameter: return "parameter error";
    case ErrorKind::kUnsupportedWindow: return "unsupported-window error";
  }
  return "error";
}

/// Process exit code for a given error kind (0 is reserved for success).
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
    case ErrorKind::kParameter:
    case ErrorKind::kUnsupportedWindow:
    case ErrorKind::kLookup:
      return 1;
    case ErrorKind::kIo:
      return 2;
    case ErrorKind::kFormat:
    case ErrorKind::kCorruption:
    case ErrorKind::kEmptyLibrary:
      return 3;
    case ErrorKind::kDimension:
    case ErrorKind::kCoverage:
      return 4;
  }
  return 1;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace kxfer

#endif  // KXFER_ERROR_HPP_
