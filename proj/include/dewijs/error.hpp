// Copyright 2026 The dewijs Authors
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
#include <string_view>

namespace dewijs {

enum class ErrorCode {
  InvalidArgument,
  NonzeroMass,
  MixedSupport,
  IncompatibleKernel,
  PoleAtOrigin,
  QuadratureFailure,
  SingularSystem,
  NotInterior,
  IOFailure,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonzeroMass: return "NonzeroMass";
    case ErrorCode::MixedSupport: return "MixedSupport";
    case ErrorCode::IncompatibleKernel: return "IncompatibleKernel";
    case ErrorCode::PoleAtOrigin: return "PoleAtOrigin";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NotInterior: return "NotInterior";
    case ErrorCode::IOFailure: return "IOFailure";
  }
  return "Unknown";
}

/// Library-wide exception carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dewijs
