// Copyright 2026 The kggan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace kggan {

/// Failure categories. Each maps onto one process exit code of the CLI.
enum class ErrorKind {
  kConfig,     // bad configuration or usage
  kContract,   // precondition / invariant violated by the caller
  kDimension,  // tensor shapes do not conform
  kNumerical,  // NaN or Inf produced during training
  kIo,         // filesystem or format failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return 2;
    case ErrorKind::kContract:
    case ErrorKind::kDimension:
      return 3;
    case ErrorKind::kNumerical:
      return 4;
    case ErrorKind::kIo:
      return 5;
  }
  return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace kggan
