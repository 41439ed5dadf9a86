// core/include/vbchain/stats.hpp

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

#ifndef VBCHAIN_STATS_HPP_
#define VBCHAIN_STATS_HPP_

#include <string>
#include <vector>

#include "vbchain/autograd.hpp"

namespace vbchain {

/// N x N Pearson correlation matrix of the columns of an M x N matrix.
/// Exactly symmetric with an exact unit diagonal. Requires M >= 3; a
/// constant column is an error naming the column (from `names` if given).
Matrix PearsonMatrix(const Matrix &columns, const std::vector<std::string> *names = nullptr);

}  // namespace vbchain

#endif  // VBCHAIN_STATS_HPP_
