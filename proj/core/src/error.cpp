// core/src/error.cpp

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

#include "vbchain/error.hpp"

namespace vbchain {

std::string_view ErrcName(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument: return "invalid argument";
    case Errc::kOutOfRange: return "out of range";
    case Errc::kNotFound: return "not found";
    case Errc::kParse: return "parse error";
    case Errc::kBadMagic: return "bad magic";
    case Errc::kVersionMismatch: return "version mismatch";
    case Errc::kTruncated: return "truncated";
    case Errc::kNonFinite: return "non-finite value";
    case Errc::kSchemaMismatch: return "schema mismatch";
    case Errc::kConfigMismatch: return "config mismatch";
    case Errc::kNumeric: return "numeric failure";
    case Errc::kIo: return "i/o error";
  }
  return "unknown";
}

void Fail(Errc code, const std::string &what) { throw Error(code, what); }

}  // namespace vbchain
