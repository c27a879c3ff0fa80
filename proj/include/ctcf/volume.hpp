// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctcf/tensor.hpp"

namespace ctcf {

/// D x H x W voxel grid, row-major slice by slice. Intensities live in [0,1].
struct Volume {
  std::size_t depth = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> voxels;

  Volume() = default;
  Volume(std::size_t d, std::size_t h, std::size_t w, double fill = 0.0);
  Volume(std::size_t d, std::size_t h, std::size_t w, std::vector<double> values);

  std::size_t slice_size() const noexcept { return height * width; }
  std::size_t size() const noexcept { return voxels.size(); }
  std::size_t index(std::size_t d, std::size_t h, std::size_t w) const noexcept {
    return (d * height + h) * width + w;
  }
  double& at(std::size_t d, std::size_t h, std::size_t w) { return voxels[index(d, h, w)]; }
  double at(std::size_t d, std::size_t h, std::size_t w) const { return voxels[index(d, h, w)]; }

  std::span<const double> slice(std::size_t d) const;
  std::span<double> slice(std::size_t d);

  bool same_shape(const Volume& other) const noexcept {
    return depth == other.depth && height == other.height && width == other.width;
  }

  /// [D, H, W] constant tensor.
  Tensor to_tensor() const;
  static Volume from_tensor(const Tensor& t);

  friend bool operator==(const Volume&, const Volume&) = default;
};

void require_same_shape(const Volume& a, const Volume& b, const char* context);

/// One latent code per slice, z_i = E(slice_i).
struct LatentStack {
  std::size_t dim = 0;
  std::vector<std::vector<double>> codes;

  std::size_t depth() const noexcept { return codes.size(); }

  static LatentStack zeros(std::size_t depth, std::size_t dim);
  bool all_zero() const noexcept;

  friend bool operator==(const LatentStack&, const LatentStack&) = default;
};

/// Contiguous slice range [start, start + length) whose latents receive
/// gradient. Every other slice is gradient-blocked.
struct ChunkSpec {
  std::size_t start = 0;
  std::size_t length = 1;

  std::size_t end() const noexcept { return start + length; }
  bool contains(std::size_t slice) const noexcept { return slice >= start && slice < end(); }
  /// Throws InvalidArgument unless length >= 1 and end() <= depth.
  void validate(std::size_t depth) const;

  static ChunkSpec full(std::size_t depth) { return {0, depth}; }

  friend bool operator==(const ChunkSpec&, const ChunkSpec&) = default;
};

}  // namespace ctcf
