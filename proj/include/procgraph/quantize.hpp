// Copyright 2026 The procgraph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>

#include "procgraph/core.hpp"

namespace procgraph {

/// Number of classes for every continuous attribute.
inline constexpr int kBins = 128;

/// min(floor(v * 128), 127); values outside [0, 1] clamp.
inline int quantize(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return kBins - 1;
  return std::min(static_cast<int>(std::floor(v * kBins)), kBins - 1);
}

/// Bin center (bin + 0.5) / 128.
inline double dequantize(int bin) {
  if (bin < 0 || bin >= kBins) {
    throw Error(ErrorCode::kOutOfRange, "bin " + std::to_string(bin) + " outside [0,128)");
  }
  return (bin + 0.5) / kBins;
}

}  // namespace procgraph
