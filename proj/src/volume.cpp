// SPDX-License-Identifier: Apache-2.0
#include "ctcf/volume.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "ctcf/error.hpp"

namespace ctcf {

namespace {

std::string dims(const Volume& v) {
  return std::to_string(v.depth) + "x" + std::to_string(v.height) + "x" + std::to_string(v.width);
}

}  // namespace

Volume::Volume(std::size_t d, std::size_t h, std::size_t w, double fill)
    : depth(d), height(h), width(w), voxels(d * h * w, fill) {}

Volume::Volume(std::size_t d, std::size_t h, std::size_t w, std::vector<double> values)
    : depth(d), height(h), width(w), voxels(std::move(values)) {
  if (voxels.size() != d * h * w) {
    fail(ErrorKind::ShapeMismatch, "volume " + dims(*this) + " given " + std::to_string(voxels.size()) + " voxels");
  }
}

std::span<const double> Volume::slice(std::size_t d) const {
  return std::span<const double>(voxels).subspan(d * slice_size(), slice_size());
}

std::span<double> Volume::slice(std::size_t d) {
  return std::span<double>(voxels).subspan(d * slice_size(), slice_size());
}

Tensor Volume::to_tensor() const { return Tensor({depth, height, width}, voxels); }

Volume Volume::from_tensor(const Tensor& t) {
  if (t.rank() != 3) fail(ErrorKind::ShapeMismatch, "expected a [D,H,W] tensor, got " + shape_to_string(t.shape()));
  return Volume(t.shape()[0], t.shape()[1], t.shape()[2], t.data());
}

void require_same_shape(const Volume& a, const Volume& b, const char* context) {
  if (!a.same_shape(b)) {
    fail(ErrorKind::ShapeMismatch, std::string(context) + ": volume shapes differ, " + dims(a) + " vs " + dims(b));
  }
}

LatentStack LatentStack::zeros(std::size_t depth, std::size_t dim) {
  return LatentStack{dim, std::vector<std::vector<double>>(depth, std::vector<double>(dim, 0.0))};
}

bool LatentStack::all_zero() const noexcept {
  return std::all_of(codes.begin(), codes.end(), [](const std::vector<double>& c) {
    return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
  });
}

void ChunkSpec::validate(std::size_t depth) const {
  if (length < 1) fail(ErrorKind::InvalidArgument, "chunk length must be >= 1");
  if (end() > depth) {
    fail(ErrorKind::InvalidArgument, "chunk [" + std::to_string(start) + "," + std::to_string(end()) +
                                         ") exceeds volume depth " + std::to_string(depth));
  }
}

}  // namespace ctcf
