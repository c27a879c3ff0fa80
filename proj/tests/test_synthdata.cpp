// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "ctcf/error.hpp"
#include "ctcf/rng.hpp"
#include "ctcf/synthdata.hpp"

using namespace ctcf;

namespace {

// Rim membership recomputed from the geometry with different algebra: the
// sector test uses a dot product instead of an angle difference.
bool rim_recount(const PhantomSpec& s, double d, double h, double w) {
  const RimSpec& r = *s.rim;
  if (d < static_cast<double>(r.slice_begin) || d >= static_cast<double>(r.slice_end)) return false;
  const double nz = (d - s.center.z) / s.semi_axes.z;
  const double ny = (h - s.center.y) / s.semi_axes.y;
  const double nx = (w - s.center.x) / s.semi_axes.x;
  if (nz * nz + ny * ny + nx * nx > 1.0) return false;
  const double rho = std::sqrt(std::max(0.0, 1.0 - nz * nz));
  const double ay = s.semi_axes.y * rho - r.thickness;
  const double ax = s.semi_axes.x * rho - r.thickness;
  const double py = h - s.center.y, px = w - s.center.x;
  if (ay > 0.0 && ax > 0.0 && py * py * ax * ax + px * px * ay * ay <= ax * ax * ay * ay) return false;
  const double len = std::hypot(px, py);
  if (len == 0.0) return std::abs(r.angle_center) <= 0.5 * r.angle_extent;
  const double cosine = (px * std::cos(r.angle_center) + py * std::sin(r.angle_center)) / len;
  return cosine >= std::cos(0.5 * r.angle_extent);
}

double mask_sum(const Volume& m) {
  double t = 0.0;
  for (double x : m.voxels) t += x;
  return t;
}

}  // namespace

TEST_CASE("SplitMix64 reference outputs and helpers") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next() == 0x06C45D188009454FULL);
  SplitMix64 u(9);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(u.below(7) < 7);
  }
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  std::vector<int> items{1, 2, 3, 4, 5, 6};
  SplitMix64 s(4);
  s.shuffle(items);
  CHECK(std::multiset<int>(items.begin(), items.end()) == std::multiset<int>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("noise-free phantom without rim has two intensities") {
  PhantomSpec spec;
  spec.noise = 0.0;
  const LabeledVolume p = make_phantom(spec);
  const std::set<double> values(p.volume.voxels.begin(), p.volume.voxels.end());
  CHECK(values == std::set<double>{spec.interior, spec.background});
  CHECK(p.label == Label::Negative);
  CHECK(mask_sum(p.truth_mask) == 0.0);
}

TEST_CASE("phantoms are deterministic and stay in range") {
  PhantomSpec spec;
  spec.rim = RimSpec{};
  spec.noise = 0.2;
  const LabeledVolume a = make_phantom(spec);
  const LabeledVolume b = make_phantom(spec);
  CHECK(a.volume == b.volume);
  CHECK(a.truth_mask == b.truth_mask);
  for (double x : a.volume.voxels) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  spec.seed = 2;
  CHECK_FALSE(make_phantom(spec).volume == a.volume);
}

TEST_CASE("rim mask matches an independent geometric recount") {
  for (double angle : {0.0, 1.2, -2.8, 3.1}) {
    PhantomSpec spec;
    spec.noise = 0.0;
    spec.rim = RimSpec{};
    spec.rim->angle_center = angle;
    const LabeledVolume p = make_phantom(spec);
    double recount = 0.0;
    for (std::size_t d = 0; d < spec.depth; ++d)
      for (std::size_t h = 0; h < spec.height; ++h)
        for (std::size_t w = 0; w < spec.width; ++w) {
          const bool in = rim_recount(spec, static_cast<double>(d), static_cast<double>(h), static_cast<double>(w));
          recount += in;
          CHECK(p.truth_mask.at(d, h, w) == (in ? 1.0 : 0.0));
          CHECK(inside_rim(spec, d, h, w) == in);
          // Every mask voxel carries the rim intensity; nothing else does.
          CHECK((p.volume.at(d, h, w) == spec.rim->intensity) == in);
        }
    CHECK(recount > 0.0);
    CHECK(mask_sum(p.truth_mask) == recount);
    CHECK(p.label == Label::Positive);
  }
}

TEST_CASE("default rim lies in slices 12 to 18") {
  PhantomSpec spec;
  spec.rim = RimSpec{};
  const LabeledVolume p = make_phantom(spec);
  for (std::size_t d = 0; d < spec.depth; ++d) {
    double s = 0.0;
    for (double x : p.truth_mask.slice(d)) s += x;
    CHECK((s > 0.0) == (d >= 12 && d <= 18));
  }
}

TEST_CASE("spec validation") {
  const auto rejects = [](PhantomSpec s) {
    try {
      make_phantom(s);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::InvalidArgument;
    }
    return false;
  };
  PhantomSpec s;
  s.semi_axes.y = 0.5;
  CHECK(rejects(s));
  s = {};
  s.background = 1.5;
  CHECK(rejects(s));
  s = {};
  s.rim = RimSpec{};
  s.rim->slice_end = 40;
  CHECK(rejects(s));
  s.rim->slice_begin = 5;
  s.rim->slice_end = 5;
  CHECK(rejects(s));
  s = {};
  s.depth = 0;
  CHECK(rejects(s));
}

TEST_CASE("make_dataset") {
  const PhantomSpec base;
  SUBCASE("no positives") {
    for (const auto& item : make_dataset(0, 5, base, 3)) {
      CHECK(item.label == Label::Negative);
      CHECK(mask_sum(item.truth_mask) == 0.0);
    }
  }
  SUBCASE("class balance and label consistency") {
    const auto items = make_dataset(77, 322, base, 4);
    REQUIRE(items.size() == 399);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const bool positive = items[i].label == Label::Positive;
      pos += positive;
      CHECK(positive == (i < 77));
      CHECK(positive == (mask_sum(items[i].truth_mask) > 0.0));
    }
    CHECK(pos == 77);
  }
  SUBCASE("determinism and per-item specs") {
    const auto a = make_dataset(3, 3, base, 8);
    const auto b = make_dataset(3, 3, base, 8);
    const DatasetJitter jitter;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].volume == b[i].volume);
      const PhantomSpec spec = dataset_item_spec(i, i < 3, base, 8);
      CHECK(make_phantom(spec).volume == a[i].volume);
      if (i < 3) {
        REQUIRE(spec.rim.has_value());
        const std::size_t len = spec.rim->slice_end - spec.rim->slice_begin;
        CHECK(len >= jitter.rim_min_len);
        CHECK(len <= jitter.rim_max_len);
        CHECK(spec.rim->slice_begin >= jitter.rim_margin);
        CHECK(spec.rim->slice_end + jitter.rim_margin <= base.depth);
      } else {
        CHECK_FALSE(spec.rim.has_value());
      }
    }
    CHECK_FALSE(make_dataset(3, 3, base, 9)[0].volume == a[0].volume);
  }
  CHECK_THROWS_AS(make_dataset(0, 0, base, 1), Error);
}
