// Copyright 2026 The mmtot Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mmtot {

enum class ErrorKind {
  kArgument,        // bad index, shape mismatch, malformed input
  kDegenerateSlice, // a marginal entry the algorithm divides by is zero
  kDomain,          // value outside the mathematical domain (negative mass, ...)
  kContract,        // caller broke a documented precondition
  kNonConvergence,  // iteration cap reached
  kCapExceeded,     // problem too large for the dense oracle
  kFormat,          // unreadable or malformed file
  kInternal,        // should not happen
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every library failure. `module()` names the component
/// whose contract was violated ("tensor-core", "scaling", ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what),
        kind_(kind),
        module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

[[noreturn]] inline void fail(ErrorKind kind, const char* module,
                              const std::string& what) {
  throw Error(kind, module, what);
}

}  // namespace mmtot
