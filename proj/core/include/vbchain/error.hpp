// core/include/vbchain/error.hpp

// Copyright 2026  The vbchain Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef VBCHAIN_ERROR_HPP_
#define VBCHAIN_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace vbchain {

enum class Errc {
  kInvalidArgument,
  kOutOfRange,
  kNotFound,
  kParse,
  kBadMagic,
  kVersionMismatch,
  kTruncated,
  kNonFinite,
  kSchemaMismatch,
  kConfigMismatch,
  kNumeric,
  kIo,
};

std::string_view ErrcName(Errc code);

/// Every recoverable failure in the library is reported as an Error carrying
/// a machine-checkable code next to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void Fail(Errc code, const std::string &what);

inline void Require(bool cond, Errc code, const std::string &what) {
  if (!cond) Fail(code, what);
}

}  // namespace vbchain

#endif  // VBCHAIN_ERROR_HPP_
