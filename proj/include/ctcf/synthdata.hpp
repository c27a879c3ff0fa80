// SPDX-License-Identifier: Apache-2.0
//
// Seeded phantom volumes: a dark ellipsoid ("lung") on a uniform background,
// optionally with a bright rim along part of the ellipsoid's inner boundary
// ("effusion") over a slice range.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ctcf/volume.hpp"

namespace ctcf {

struct Vec3 {
  double z = 0.0, y = 0.0, x = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct RimSpec {
  std::size_t slice_begin = 12;
  std::size_t slice_end = 19;  // exclusive
  /// In-plane direction of the sector centre, radians, atan2(dy, dx).
  double angle_center = 0.0;
  /// Full angular width of the sector, radians.
  double angle_extent = 2.0;
  /// Rim thickness measured inward from the cross-section boundary, voxels.
  double thickness = 2.0;
  double intensity = 0.9;
  friend bool operator==(const RimSpec&, const RimSpec&) = default;
};

struct PhantomSpec {
  std::size_t depth = 32;
  std::size_t height = 16;
  std::size_t width = 16;
  Vec3 center{15.5, 7.5, 7.5};
  Vec3 semi_axes{11.0, 5.5, 5.5};
  double interior = 0.2;
  double background = 0.5;
  double noise = 0.02;
  std::optional<RimSpec> rim;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const PhantomSpec&, const PhantomSpec&) = default;
};

enum class Label : int { Negative = 0, Positive = 1 };

struct LabeledVolume {
  Volume volume;
  Label label = Label::Negative;
  /// 1 on voxels replaced by the rim feature; all zero for negatives.
  Volume truth_mask;
};

bool inside_ellipsoid(const PhantomSpec& spec, std::size_t d, std::size_t h, std::size_t w);
/// The rim predicate; false when the phantom has no rim.
bool inside_rim(const PhantomSpec& spec, std::size_t d, std::size_t h, std::size_t w);

LabeledVolume make_phantom(const PhantomSpec& spec);

/// Jitter applied by make_dataset around the base spec.
struct DatasetJitter {
  double center = 0.5;     // +- voxels in-plane
  double axis = 0.5;       // +- voxels on every semi-axis
  double angle = 0.35;     // +- radians on the rim direction
  std::size_t rim_min_len = 5;
  std::size_t rim_max_len = 8;
  std::size_t rim_margin = 8;  // rims start at least this far from either end
};

/// n_pos positives followed by n_neg negatives, each from its own derived
/// seed. Positives get a rim with a random slice range.
std::vector<LabeledVolume> make_dataset(std::size_t n_pos, std::size_t n_neg, const PhantomSpec& base,
                                        std::uint64_t seed, const DatasetJitter& jitter = {});

/// The per-item spec make_dataset uses for item `index`.
PhantomSpec dataset_item_spec(std::size_t index, bool positive, const PhantomSpec& base, std::uint64_t seed,
                              const DatasetJitter& jitter = {});

}  // namespace ctcf
