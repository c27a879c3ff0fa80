// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ctcf/error.hpp"
#include "ctcf/evalharness.hpp"
#include "ctcf/localization.hpp"
#include "ctcf/report.hpp"

using namespace ctcf;

namespace {

std::vector<LabeledVolume> small_dataset(std::size_t pos, std::size_t neg, std::uint64_t seed) {
  PhantomSpec base;
  base.depth = 20;
  base.height = 8;
  base.width = 8;
  base.center = {9.5, 3.5, 3.5};
  base.semi_axes = {8.0, 3.0, 3.0};
  DatasetJitter jitter;
  jitter.rim_margin = 4;
  jitter.rim_min_len = 3;
  jitter.rim_max_len = 5;
  jitter.center = 0.3;
  jitter.axis = 0.3;
  auto items = make_dataset(pos, neg, base, seed, jitter);
  return items;
}

RimDetector bright_rim_weights(std::size_t h, std::size_t w) {
  RimDetector r;
  r.slice_weights.assign(h * w, 0.0);
  for (std::size_t y = 0; y < h; ++y) r.slice_weights[y * w + (w - 2)] = 40.0;
  r.bias = -6.0;
  return r;
}

}  // namespace

TEST_CASE("GroupStats") {
  const GroupStats s = GroupStats::of({1.0, 2.0, 3.0, 4.0});
  CHECK(s.count == 4);
  CHECK(s.mean == 2.5);
  CHECK(s.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-14));
  CHECK(GroupStats::of({7.0}).standard_error == 0.0);
  CHECK(GroupStats::of({}).count == 0);
}

TEST_CASE("timing model") {
  CHECK(timing_model(100, 10, 30) == 300.0);
  CHECK(timing_model(100, 100, 30) == 30.0);
  CHECK(timing_model(101, 10, 30) == 330.0);
  CHECK_THROWS_AS(timing_model(0, 10, 30), Error);
  CHECK_THROWS_AS(timing_model(10, 0, 30), Error);
  CHECK_THROWS_AS(timing_model(10, 5, 0), Error);
}

TEST_CASE("histograms") {
  const Histogram one = histogram({0.37}, 5);
  CHECK(std::count(one.mass.begin(), one.mass.end(), 1.0) == 1);
  CHECK(std::accumulate(one.mass.begin(), one.mass.end(), 0.0) == 1.0);
  const Histogram h = histogram({0.0, 0.1, 0.5, 0.99, 1.0, 1.5, -0.2}, 4);
  CHECK(std::accumulate(h.mass.begin(), h.mass.end(), 0.0) == doctest::Approx(1.0));
  CHECK(h.mass[0] == doctest::Approx(3.0 / 7.0));
  CHECK(h.mass[3] == doctest::Approx(3.0 / 7.0));
  CHECK_THROWS_AS(histogram({0.5}, 1), Error);
}

TEST_CASE("mass_below and median") {
  CHECK(mass_below({0.1, 0.2, 0.3, 0.4}, 0.3) == 0.5);
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("permutation test") {
  const std::vector<double> a{0.1, 0.4, 0.35, 0.8, 0.2, 0.6};
  CHECK(permutation_test(a, a, 2000, 1) >= 0.9);
  const std::vector<double> zeros(20, 0.0), ones(20, 1.0);
  CHECK(permutation_test(zeros, ones, 2000, 1) <= 0.001);
  CHECK(permutation_test(zeros, ones, 2000, 1) == 1.0 / 2001.0);
  CHECK(permutation_test(a, ones, 500, 3) == permutation_test(a, ones, 500, 3));
  CHECK_THROWS_AS(permutation_test({}, ones, 10, 1), Error);
}

TEST_CASE("evaluate_reduction") {
  const auto data = small_dataset(4, 4, 12);
  const auto ae = SliceAutoencoder::make(8, 8, 6, 16, 3);
  SUBCASE("constant scorer leaves the CF row equal to the positive row") {
    const ReductionTable t = evaluate_reduction(ae, VolumeScorer::constant(8, 8, 0.4), data, 5, {});
    CHECK(t.cf_positives.mean == t.positives.mean);
    CHECK(t.cf_positives == t.positives);
  }
  SUBCASE("rim scorer table invariants") {
    const VolumeScorer f(8, 8, bright_rim_weights(8, 8));
    const ReductionTable t = evaluate_reduction(ae, f, data, 5, {}, {true, 0});
    CHECK(t.chunk_size == 5);
    CHECK(t.positives.count == 4);
    CHECK(t.negatives.count == 4);
    CHECK(t.cf_positives.count == 4);
    REQUIRE(t.cf_negatives.has_value());
    CHECK(t.cf_negatives->count == 4);
    CHECK(t.cf_positives.mean <= t.positives.mean);
    for (const VolumeOutcome& v : t.per_volume) {
      REQUIRE(v.cf_prediction.has_value());
      CHECK(*v.cf_prediction <= v.input_prediction);
      CHECK(v.input_prediction == f.score(data[v.index].volume));
      // The CF is the best window of an independent scan.
      const ScanReport scan = scan_chunks(ae, f, data[v.index].volume, 5, 5, {});
      CHECK(*v.cf_prediction == std::min(v.input_prediction, scan.best().min_prediction));
    }
    // Standard errors recomputed from the per-volume rows.
    const auto cf = t.cf_predictions(Label::Positive);
    const double mean = std::accumulate(cf.begin(), cf.end(), 0.0) / static_cast<double>(cf.size());
    double ss = 0.0;
    for (double x : cf) ss += (x - mean) * (x - mean);
    CHECK(t.cf_positives.standard_error ==
          doctest::Approx(std::sqrt(ss / static_cast<double>(cf.size() - 1)) / std::sqrt(cf.size())).epsilon(1e-12));
    CHECK(reduction_csv(t) == reduction_csv(evaluate_reduction(ae, f, data, 5, {}, {true, 0})));
    const std::string per_volume = per_volume_csv(t);
    CHECK(per_volume.rfind("index,label,input_prediction,cf_prediction,best_start\n", 0) == 0);
    CHECK(std::count(per_volume.begin(), per_volume.end(), '\n') == 9);
  }
  SUBCASE("both classes are required") {
    const std::vector<LabeledVolume> positives(data.begin(), data.begin() + 4);
    CHECK_THROWS_AS(evaluate_reduction(ae, VolumeScorer::constant(8, 8, 0.4), positives, 5, {}), Error);
  }
}

TEST_CASE("chunk size sweep") {
  const auto data = small_dataset(3, 0, 5);
  const auto ae = SliceAutoencoder::make(8, 8, 6, 16, 3);
  const VolumeScorer f(8, 8, bright_rim_weights(8, 8));
  const SweepResult full = chunk_size_sweep(ae, f, data, {20}, {});
  REQUIRE(full.points.size() == 1);
  double expect = 0.0;
  for (const auto& item : data) {
    const CFResult r = generate_cf(ae, f, item.volume, ChunkSpec::full(20), {});
    expect += f.score(item.volume) - std::min(f.score(item.volume), r.min_prediction());
  }
  CHECK(full.points[0].mean_reduction == doctest::Approx(expect / 3.0).epsilon(1e-12));
  const SweepResult sweep = chunk_size_sweep(ae, f, data, {2, 4, 8}, {});
  CHECK(sweep.points.size() == 3);
  for (const auto& p : sweep.points) CHECK(p.mean_reduction >= 0.0);
  CHECK(sweep_csv(sweep).rfind("chunk_size,mean_reduction,standard_error,n\n", 0) == 0);
  CHECK_THROWS_AS(chunk_size_sweep(ae, f, data, {4, 2}, {}), Error);
  CHECK_THROWS_AS(chunk_size_sweep(ae, f, data, {4, 4}, {}), Error);
  CHECK_THROWS_AS(chunk_size_sweep(ae, f, data, {21}, {}), Error);
}

TEST_CASE("prediction histograms") {
  const auto data = small_dataset(3, 3, 2);
  const auto ae = SliceAutoencoder::make(8, 8, 6, 16, 3);
  const VolumeScorer f(8, 8, bright_rim_weights(8, 8));
  const PredictionHistograms h = prediction_histograms(ae, f, data, 5, 10, {});
  for (const Histogram* g : {&h.positives, &h.negatives, &h.cf_positives}) {
    CHECK(g->mass.size() == 10);
    CHECK(std::accumulate(g->mass.begin(), g->mass.end(), 0.0) == doctest::Approx(1.0));
  }
  const ReductionTable t = evaluate_reduction(ae, f, data, 5, {});
  CHECK(histograms_csv(prediction_histograms(t, 10)) == histograms_csv(h));
  CHECK_THROWS_AS(prediction_histograms(t, 1), Error);
}
