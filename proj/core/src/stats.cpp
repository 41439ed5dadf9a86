// core/src/stats.cpp

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

#include "vbchain/stats.hpp"

#include <algorithm>
#include <cmath>

#include "vbchain/error.hpp"

namespace vbchain {

Matrix PearsonMatrix(const Matrix &columns, const std::vector<std::string> *names) {
  const std::size_t m = columns.rows, n = columns.cols;
  Require(m >= 3, Errc::kInvalidArgument, "correlation analysis needs at least 3 samples");
  Require(names == nullptr || names->size() == n, Errc::kInvalidArgument,
          "label name count does not match column count");
  std::vector<double> mean(n, 0.0), norm(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    double lo = columns(0, c), hi = columns(0, c);
    for (std::size_t r = 0; r < m; ++r) {
      Require(std::isfinite(columns(r, c)), Errc::kNonFinite, "label matrix holds a non-finite value");
      mean[c] += columns(r, c);
      lo = std::min(lo, columns(r, c));
      hi = std::max(hi, columns(r, c));
    }
    Require(lo != hi, Errc::kInvalidArgument,
            "label column " + (names ? "'" + (*names)[c] + "'" : std::to_string(c)) +
                " is constant; its correlations are undefined");
    mean[c] /= static_cast<double>(m);
    for (std::size_t r = 0; r < m; ++r) {
      const double d = columns(r, c) - mean[c];
      norm[c] += d * d;
    }
    norm[c] = std::sqrt(norm[c]);
  }
  Matrix R(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    R(a, a) = 1.0;
    for (std::size_t b = a + 1; b < n; ++b) {
      double s = 0.0;
      for (std::size_t r = 0; r < m; ++r)
        s += (columns(r, a) - mean[a]) * (columns(r, b) - mean[b]);
      const double v = std::clamp(s / (norm[a] * norm[b]), -1.0, 1.0);
      R(a, b) = v;
      R(b, a) = v;
    }
  }
  return R;
}

}  // namespace vbchain
