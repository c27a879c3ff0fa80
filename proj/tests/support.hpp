// SPDX-License-Identifier: Apache-2.0
// Helpers shared by the unit tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ctcf/rng.hpp"
#include "ctcf/tensor.hpp"
#include "ctcf/volume.hpp"

namespace ctcf::test {

/// Largest elementwise |a - b| / max(|a|, 1e-8).
inline double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(a[i]), 1e-8));
  }
  return worst;
}

inline Tensor random_tensor(Shape shape, SplitMix64& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> data(shape_numel(shape));
  for (double& v : data) v = rng.uniform(lo, hi);
  return Tensor(std::move(shape), std::move(data));
}

inline Volume random_volume(std::size_t d, std::size_t h, std::size_t w, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Volume v(d, h, w);
  for (double& x : v.voxels) x = rng.uniform();
  return v;
}

}  // namespace ctcf::test
