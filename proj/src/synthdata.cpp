// SPDX-License-Identifier: Apache-2.0
#include "ctcf/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ctcf/error.hpp"
#include "ctcf/rng.hpp"

namespace ctcf {

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

double wrap_angle(double a) {
  const double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace

void PhantomSpec::validate() const {
  if (depth == 0 || height == 0 || width == 0) fail(ErrorKind::InvalidArgument, "phantom dimensions must be positive");
  if (semi_axes.z < 1.0 || semi_axes.y < 1.0 || semi_axes.x < 1.0) {
    fail(ErrorKind::InvalidArgument, "phantom semi-axes must be >= 1");
  }
  if (!in_unit(interior) || !in_unit(background)) fail(ErrorKind::InvalidArgument, "intensities must lie in [0,1]");
  if (noise < 0.0 || noise > 1.0) fail(ErrorKind::InvalidArgument, "noise amplitude must lie in [0,1]");
  if (rim) {
    if (!in_unit(rim->intensity)) fail(ErrorKind::InvalidArgument, "rim intensity must lie in [0,1]");
    if (rim->intensity == interior) fail(ErrorKind::InvalidArgument, "rim intensity must differ from interior");
    if (rim->slice_begin >= rim->slice_end || rim->slice_end > depth) {
      fail(ErrorKind::InvalidArgument, "rim slice range [" + std::to_string(rim->slice_begin) + "," +
                                           std::to_string(rim->slice_end) + ") must be non-empty and within depth");
    }
    if (!(rim->thickness > 0.0)) fail(ErrorKind::InvalidArgument, "rim thickness must be positive");
    if (!(rim->angle_extent > 0.0)) fail(ErrorKind::InvalidArgument, "rim angular extent must be positive");
  }
}

bool inside_ellipsoid(const PhantomSpec& s, std::size_t d, std::size_t h, std::size_t w) {
  const double dz = (static_cast<double>(d) - s.center.z) / s.semi_axes.z;
  const double dy = (static_cast<double>(h) - s.center.y) / s.semi_axes.y;
  const double dx = (static_cast<double>(w) - s.center.x) / s.semi_axes.x;
  return dz * dz + dy * dy + dx * dx <= 1.0;
}

bool inside_rim(const PhantomSpec& s, std::size_t d, std::size_t h, std::size_t w) {
  if (!s.rim) return false;
  const RimSpec& rim = *s.rim;
  if (d < rim.slice_begin || d >= rim.slice_end) return false;
  if (!inside_ellipsoid(s, d, h, w)) return false;
  // In-plane cross-section of the ellipsoid at this slice.
  const double dz = (static_cast<double>(d) - s.center.z) / s.semi_axes.z;
  const double rho = std::sqrt(std::max(0.0, 1.0 - dz * dz));
  const double ay = s.semi_axes.y * rho - rim.thickness;
  const double ax = s.semi_axes.x * rho - rim.thickness;
  const double py = static_cast<double>(h) - s.center.y;
  const double px = static_cast<double>(w) - s.center.x;
  if (ay > 0.0 && ax > 0.0) {
    const double e = (py / ay) * (py / ay) + (px / ax) * (px / ax);
    if (e <= 1.0) return false;
  }
  const double angle = std::atan2(py, px);
  return std::abs(wrap_angle(angle - rim.angle_center)) <= 0.5 * rim.angle_extent;
}

LabeledVolume make_phantom(const PhantomSpec& spec) {
  spec.validate();
  LabeledVolume out;
  out.volume = Volume(spec.depth, spec.height, spec.width, spec.background);
  out.truth_mask = Volume(spec.depth, spec.height, spec.width, 0.0);
  for (std::size_t d = 0; d < spec.depth; ++d) {
    for (std::size_t h = 0; h < spec.height; ++h) {
      for (std::size_t w = 0; w < spec.width; ++w) {
        if (!inside_ellipsoid(spec, d, h, w)) continue;
        if (inside_rim(spec, d, h, w)) {
          out.volume.at(d, h, w) = spec.rim->intensity;
          out.truth_mask.at(d, h, w) = 1.0;
        } else {
          out.volume.at(d, h, w) = spec.interior;
        }
      }
    }
  }
  if (spec.noise > 0.0) {
    SplitMix64 rng(spec.seed);
    for (double& v : out.volume.voxels) v = std::clamp(v + rng.uniform(-spec.noise, spec.noise), 0.0, 1.0);
  }
  const bool any_rim = std::any_of(out.truth_mask.voxels.begin(), out.truth_mask.voxels.end(),
                                   [](double m) { return m != 0.0; });
  out.label = any_rim ? Label::Positive : Label::Negative;
  return out;
}

PhantomSpec dataset_item_spec(std::size_t index, bool positive, const PhantomSpec& base, std::uint64_t seed,
                              const DatasetJitter& jitter) {
  SplitMix64 rng(derive_seed(seed, index));
  PhantomSpec s = base;
  s.seed = rng.next();
  s.center.y += rng.uniform(-jitter.center, jitter.center);
  s.center.x += rng.uniform(-jitter.center, jitter.center);
  s.semi_axes.z = std::max(1.0, s.semi_axes.z + rng.uniform(-jitter.axis, jitter.axis));
  s.semi_axes.y = std::max(1.0, s.semi_axes.y + rng.uniform(-jitter.axis, jitter.axis));
  s.semi_axes.x = std::max(1.0, s.semi_axes.x + rng.uniform(-jitter.axis, jitter.axis));
  // Draw the rim parameters for every item so positives and negatives
  // consume the generator identically.
  RimSpec rim = base.rim.value_or(RimSpec{});
  const std::size_t len_span = jitter.rim_max_len - jitter.rim_min_len + 1;
  const std::size_t len = jitter.rim_min_len + static_cast<std::size_t>(rng.below(len_span));
  const std::size_t lo = std::min(jitter.rim_margin, base.depth - 1);
  const std::size_t hi = base.depth > jitter.rim_margin + len ? base.depth - jitter.rim_margin - len : lo;
  const std::size_t begin = hi > lo ? lo + static_cast<std::size_t>(rng.below(hi - lo + 1)) : lo;
  rim.slice_begin = begin;
  rim.slice_end = std::min(base.depth, begin + len);
  rim.angle_center += rng.uniform(-jitter.angle, jitter.angle);
  if (positive) {
    s.rim = rim;
  } else {
    s.rim.reset();
  }
  return s;
}

std::vector<LabeledVolume> make_dataset(std::size_t n_pos, std::size_t n_neg, const PhantomSpec& base,
                                        std::uint64_t seed, const DatasetJitter& jitter) {
  if (n_pos + n_neg == 0) fail(ErrorKind::InvalidArgument, "dataset must contain at least one volume");
  if (jitter.rim_min_len < 1 || jitter.rim_max_len < jitter.rim_min_len) {
    fail(ErrorKind::InvalidArgument, "invalid rim length range");
  }
  std::vector<LabeledVolume> items;
  items.reserve(n_pos + n_neg);
  for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
    items.push_back(make_phantom(dataset_item_spec(i, i < n_pos, base, seed, jitter)));
  }
  return items;
}

}  // namespace ctcf
