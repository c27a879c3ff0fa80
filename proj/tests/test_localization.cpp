// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "ctcf/error.hpp"
#include "ctcf/localization.hpp"
#include "ctcf/parallel.hpp"
#include "ctcf/synthdata.hpp"
#include "support.hpp"

using namespace ctcf;
using ctcf::test::max_rel_err;
using ctcf::test::random_volume;

TEST_CASE("scan windows") {
  const auto w = scan_windows(32, 5, 5);
  REQUIRE(w.size() == 7);
  CHECK(w.front() == ChunkSpec{0, 5});
  CHECK(w.back() == ChunkSpec{30, 2});
  const auto overlap = scan_windows(10, 4, 3);
  REQUIRE(overlap.size() == 4);
  CHECK(overlap[3] == ChunkSpec{9, 1});
  CHECK(scan_windows(5, 5, 5).size() == 1);
  CHECK_THROWS_AS(scan_windows(5, 6, 1), Error);
  CHECK_THROWS_AS(scan_windows(5, 0, 1), Error);
  CHECK_THROWS_AS(scan_windows(5, 2, 0), Error);
}

TEST_CASE("constant scorer scan has zero reductions and picks start 0") {
  const auto ae = SliceAutoencoder::make(3, 3, 2, 4, 1);
  const ScanReport r = scan_chunks(ae, VolumeScorer::constant(3, 3, 0.5), random_volume(12, 3, 3, 1), 5, 0, {});
  CHECK(r.stride == 5);
  REQUIRE(r.entries.size() == 3);
  for (const auto& e : r.entries) {
    CHECK(e.reduction == 0.0);
    CHECK(e.status == CFStatus::NoReduction);
  }
  CHECK(r.best_chunk() == 0);
}

TEST_CASE("best_entry breaks ties toward the earliest start") {
  std::vector<ScanEntry> entries(4);
  entries[0].reduction = 0.1;
  entries[1].reduction = 0.3;
  entries[2].reduction = 0.3;
  entries[3].reduction = 0.2;
  CHECK(best_entry(entries) == 1);
}

TEST_CASE("property: scan matches per-window generate_cf and a brute-force argmax") {
  SplitMix64 rng(404);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t d = 6 + rng.below(10);
    const auto ae = SliceAutoencoder::make(3, 3, 3, 6, rng.next());
    const VolumeScorer f = VolumeScorer::seg_sum(3, 3, {-3.0, 1.0});
    const Volume v = random_volume(d, 3, 3, rng.next());
    const std::size_t size = 1 + rng.below(d);
    const std::size_t stride = 1 + rng.below(size + 1);
    SearchConfig cfg;
    cfg.target_fraction = 0.0;
    const ScanReport r = scan_chunks(ae, f, v, size, stride, cfg);
    const auto windows = scan_windows(d, size, stride);
    REQUIRE(r.entries.size() == windows.size());
    std::size_t oracle = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      const CFResult cf = generate_cf(ae, f, v, windows[i], cfg);
      CHECK(r.runs[i] == cf);
      CHECK(r.entries[i].start == windows[i].start);
      CHECK(r.entries[i].end == windows[i].end());
      CHECK(r.entries[i].reduction == cf.baseline_prediction - cf.min_prediction());
      CHECK(r.entries[i].reduction >= 0.0);
      if (r.entries[i].reduction > best) {
        best = r.entries[i].reduction;
        oracle = i;
      }
    }
    CHECK(r.best_index == oracle);
  }
}

TEST_CASE("scan results do not depend on the thread count") {
  const auto ae = SliceAutoencoder::make(3, 3, 3, 6, 2);
  const VolumeScorer f = VolumeScorer::seg_sum(3, 3, {-3.0, 1.0});
  const Volume v = random_volume(20, 3, 3, 5);
  setenv("CTCF_THREADS", "1", 1);
  CHECK(thread_count() == 1);
  const ScanReport serial = scan_chunks(ae, f, v, 3, 2, {});
  setenv("CTCF_THREADS", "4", 1);
  CHECK(thread_count() == 4);
  const ScanReport parallel = scan_chunks(ae, f, v, 3, 2, {});
  unsetenv("CTCF_THREADS");
  CHECK(serial.entries == parallel.entries);
  CHECK(serial.runs == parallel.runs);
  CHECK(serial.best_index == parallel.best_index);
}

TEST_CASE("parallel_for rethrows the first failure by index") {
  setenv("CTCF_THREADS", "3", 1);
  std::vector<int> hits(10, 0);
  parallel_for(10, [&](std::size_t i) { hits[i] = 1; });
  CHECK(hits == std::vector<int>(10, 1));
  try {
    parallel_for(10, [](std::size_t i) {
      if (i == 7) fail(ErrorKind::NumericFailure, "seven");
      if (i == 3) fail(ErrorKind::InvalidArgument, "three");
    });
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
  unsetenv("CTCF_THREADS");
}

TEST_CASE("diff_heatmap") {
  const Volume a = random_volume(3, 3, 3, 1);
  for (double x : diff_heatmap(a, a).voxels) CHECK(x == 0.0);
  Volume b(3, 3, 3, 0.0);
  Volume c = b;
  c.at(1, 2, 0) = 0.3;
  const Volume h = diff_heatmap(b, c);
  std::size_t nonzero = 0;
  for (double x : h.voxels) nonzero += x != 0.0;
  CHECK(nonzero == 1);
  CHECK(h.at(1, 2, 0) == 0.3);
  CHECK_THROWS_AS(diff_heatmap(a, Volume(3, 3, 2)), Error);
}

TEST_CASE("chunked CF heatmaps are supported on chunk slices") {
  const auto ae = SliceAutoencoder::make(4, 4, 3, 8, 6);
  const Volume v = random_volume(9, 4, 4, 4);
  const ChunkSpec chunk{3, 3};
  const CFResult r = generate_cf(ae, VolumeScorer::seg_sum(4, 4, {-3.0, 1.0}), v, chunk, {});
  REQUIRE(r.status != CFStatus::NoReduction);
  const Volume h = diff_heatmap(r.reconstruction, r.cf_volume);
  double max_in = 0.0, max_out = 0.0;
  for (std::size_t d = 0; d < 9; ++d) {
    for (double x : h.slice(d)) {
      CHECK(x >= 0.0);
      (chunk.contains(d) ? max_in : max_out) = std::max(chunk.contains(d) ? max_in : max_out, x);
    }
  }
  CHECK(max_out == 0.0);
  CHECK(max_in > 0.0);
}

TEST_CASE("input_gradient") {
  SUBCASE("linear probe gives its weights exactly") {
    SplitMix64 rng(2);
    std::vector<double> w(2 * 3 * 4);
    for (double& x : w) x = rng.uniform(-1.0, 1.0);
    const VolumeScorer f = VolumeScorer::linear_probe(2, 3, 4, w, 0.25);
    CHECK(input_gradient(f, random_volume(2, 3, 4, 1)).voxels == w);
    CHECK(f.weight_volume(2).voxels == w);
  }
  SUBCASE("constant scorer gives zeros") {
    for (double x : input_gradient(VolumeScorer::constant(3, 3, 1.0), random_volume(2, 3, 3, 1)).voxels)
      CHECK(x == 0.0);
  }
  SUBCASE("seg_sum matches finite differences on 50 voxels") {
    const VolumeScorer f = VolumeScorer::seg_sum(16, 16);
    PhantomSpec spec;
    spec.rim = RimSpec{};
    const Volume v = make_phantom(spec).volume;
    const Volume g = input_gradient(f, v);
    SplitMix64 rng(50);
    for (int i = 0; i < 50; ++i) {
      const std::size_t idx = rng.below(v.size());
      Volume plus = v, minus = v;
      plus.voxels[idx] += 1e-5;
      minus.voxels[idx] -= 1e-5;
      const double fd = (f.score(plus) - f.score(minus)) / 2e-5;
      CHECK(max_rel_err({g.voxels[idx]}, {fd}) <= 1e-4);
    }
  }
  SUBCASE("rim detector gradient is its weight volume times the sigmoid slope") {
    SplitMix64 rng(3);
    RimDetector r;
    r.slice_weights.resize(9);
    for (double& x : r.slice_weights) x = rng.uniform(-2.0, 2.0);
    r.bias = -0.5;
    const VolumeScorer f(3, 3, r);
    const Volume v = random_volume(5, 3, 3, 8);
    const double s = f.score(v);
    const Volume wv = f.weight_volume(5);
    const Volume g = input_gradient(f, v);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(g.voxels[i] == wv.voxels[i] * (s * (1.0 - s)));
  }
}

TEST_CASE("localization_score") {
  PhantomSpec spec;
  spec.rim = RimSpec{};
  const Volume mask = make_phantom(spec).truth_mask;
  CHECK(localization_score(mask, mask) == 1.0);
  double k = 0.0;
  for (double m : mask.voxels) k += m;
  const Volume uniform(mask.depth, mask.height, mask.width, 0.7);
  CHECK(localization_score(uniform, mask) == doctest::Approx(k / static_cast<double>(mask.size())).epsilon(1e-12));
  Volume inverted = mask;
  for (double& x : inverted.voxels) x = 1.0 - x;
  CHECK(localization_score(inverted, mask) == 0.0);
  // Sign does not matter.
  Volume negated = mask;
  for (double& x : negated.voxels) x = -x;
  CHECK(localization_score(negated, mask) == 1.0);
  SUBCASE("partial tie credit") {
    // truth = {0, 1}; attribution puts voxel 0 on top and ties voxels 1..3.
    Volume truth(1, 1, 4, 0.0);
    truth.voxels[0] = truth.voxels[1] = 1.0;
    const Volume attr(1, 1, 4, std::vector<double>{0.9, 0.2, 0.2, 0.2});
    CHECK(localization_score(attr, truth) == doctest::Approx((1.0 + 1.0 / 3.0) / 2.0));
  }
  CHECK_THROWS_AS(localization_score(uniform, Volume(mask.depth, mask.height, mask.width, 0.0)), Error);
}
