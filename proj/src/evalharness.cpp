// SPDX-License-Identifier: Apache-2.0
#include "ctcf/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctcf/error.hpp"
#include "ctcf/localization.hpp"
#include "ctcf/parallel.hpp"
#include "ctcf/rng.hpp"

namespace ctcf {

GroupStats GroupStats::of(const std::vector<double>& values) {
  GroupStats s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    s.standard_error = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return s;
}

std::vector<double> ReductionTable::predictions(Label label) const {
  std::vector<double> out;
  for (const auto& v : per_volume) {
    if (v.label == label) out.push_back(v.input_prediction);
  }
  return out;
}

std::vector<double> ReductionTable::cf_predictions(Label label) const {
  std::vector<double> out;
  for (const auto& v : per_volume) {
    if (v.label == label && v.cf_prediction) out.push_back(*v.cf_prediction);
  }
  return out;
}

namespace {

VolumeOutcome process_volume(const SliceAutoencoder& ae, const VolumeScorer& f, const LabeledVolume& item,
                             std::size_t index, bool counterfactual, std::size_t chunk_size, std::size_t stride,
                             const SearchConfig& cfg) {
  VolumeOutcome out;
  out.index = index;
  out.label = item.label;
  out.input_prediction = f.score(item.volume);
  if (!counterfactual) return out;
  const ScanReport scan = scan_chunks(ae, f, item.volume, chunk_size, stride, cfg);
  double best = out.input_prediction;
  for (const ScanEntry& e : scan.entries) {
    if (e.min_prediction < best) {
      best = e.min_prediction;
      out.best_start = e.start;
    }
  }
  out.cf_prediction = best;
  return out;
}

}  // namespace

ReductionTable evaluate_reduction(const SliceAutoencoder& ae, const VolumeScorer& f,
                                  const std::vector<LabeledVolume>& dataset, std::size_t chunk_size,
                                  const SearchConfig& cfg, const EvalOptions& options) {
  cfg.validate();
  const bool has_pos = std::any_of(dataset.begin(), dataset.end(), [](const auto& x) { return x.label == Label::Positive; });
  const bool has_neg = std::any_of(dataset.begin(), dataset.end(), [](const auto& x) { return x.label == Label::Negative; });
  if (!has_pos || !has_neg) fail(ErrorKind::InvalidArgument, "evaluate_reduction needs both positive and negative volumes");

  ReductionTable table;
  table.chunk_size = chunk_size;
  table.per_volume.resize(dataset.size());
  // Volumes run in sequence; each scan parallelises over its windows.
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const bool cf = dataset[i].label == Label::Positive || options.cf_negatives;
    table.per_volume[i] = process_volume(ae, f, dataset[i], i, cf, chunk_size, options.stride, cfg);
  }
  table.positives = GroupStats::of(table.predictions(Label::Positive));
  table.negatives = GroupStats::of(table.predictions(Label::Negative));
  table.cf_positives = GroupStats::of(table.cf_predictions(Label::Positive));
  if (options.cf_negatives) table.cf_negatives = GroupStats::of(table.cf_predictions(Label::Negative));
  return table;
}

SweepResult chunk_size_sweep(const SliceAutoencoder& ae, const VolumeScorer& f,
                             const std::vector<LabeledVolume>& positives, const std::vector<std::size_t>& sizes,
                             const SearchConfig& cfg) {
  cfg.validate();
  if (positives.empty()) fail(ErrorKind::InvalidArgument, "chunk_size_sweep: no volumes");
  SweepResult out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i > 0 && sizes[i] <= sizes[i - 1]) fail(ErrorKind::InvalidArgument, "sweep sizes must be strictly increasing");
    std::vector<double> reductions;
    for (std::size_t v = 0; v < positives.size(); ++v) {
      const VolumeOutcome o = process_volume(ae, f, positives[v], v, true, sizes[i], 0, cfg);
      reductions.push_back(o.input_prediction - *o.cf_prediction);
    }
    const GroupStats s = GroupStats::of(reductions);
    out.points.push_back({sizes[i], s.mean, s.standard_error, s.count});
  }
  return out;
}

Histogram histogram(const std::vector<double>& values, std::size_t bins, double lo, double hi) {
  if (bins < 2) fail(ErrorKind::InvalidArgument, "histogram needs at least 2 bins");
  if (!(hi > lo)) fail(ErrorKind::InvalidArgument, "histogram range must be non-empty");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.mass.assign(bins, 0.0);
  if (values.empty()) return h;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    const double t = std::floor((v - lo) / width);
    const std::size_t b = t < 0 ? 0 : std::min(bins - 1, static_cast<std::size_t>(t));
    h.mass[b] += 1.0;
  }
  for (double& m : h.mass) m /= static_cast<double>(values.size());
  return h;
}

PredictionHistograms prediction_histograms(const ReductionTable& table, std::size_t bins) {
  return {histogram(table.predictions(Label::Positive), bins), histogram(table.predictions(Label::Negative), bins),
          histogram(table.cf_predictions(Label::Positive), bins)};
}

PredictionHistograms prediction_histograms(const SliceAutoencoder& ae, const VolumeScorer& f,
                                           const std::vector<LabeledVolume>& dataset, std::size_t chunk_size,
                                           std::size_t bins, const SearchConfig& cfg) {
  if (bins < 2) fail(ErrorKind::InvalidArgument, "histogram needs at least 2 bins");
  ReductionTable table;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    table.per_volume.push_back(process_volume(ae, f, dataset[i], i, dataset[i].label == Label::Positive, chunk_size, 0, cfg));
  }
  return prediction_histograms(table, bins);
}

double mass_below(const std::vector<double>& values, double threshold) {
  if (values.empty()) return 0.0;
  const auto n = std::count_if(values.begin(), values.end(), [&](double v) { return v < threshold; });
  return static_cast<double>(n) / static_cast<double>(values.size());
}

double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorKind::InvalidArgument, "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double permutation_test(const std::vector<double>& group_a, const std::vector<double>& group_b,
                        std::size_t iterations, std::uint64_t seed) {
  if (group_a.empty() || group_b.empty()) fail(ErrorKind::InvalidArgument, "permutation_test: empty group");
  std::vector<double> pooled = group_a;
  pooled.insert(pooled.end(), group_b.begin(), group_b.end());
  const std::size_t na = group_a.size();
  const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
  const auto diff_of = [&](const std::vector<double>& xs) {
    const double sa = std::accumulate(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(na), 0.0);
    return sa / static_cast<double>(na) - (total - sa) / static_cast<double>(xs.size() - na);
  };
  const double observed = std::abs(diff_of(pooled));
  // Relative slack so permutations that reproduce the observed split are
  // not lost to summation-order rounding.
  const double slack = 1e-12 * std::max(1.0, observed);
  SplitMix64 rng(seed);
  std::size_t extreme = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    rng.shuffle(pooled);
    if (std::abs(diff_of(pooled)) >= observed - slack) ++extreme;
  }
  return static_cast<double>(1 + extreme) / static_cast<double>(1 + iterations);
}

double timing_model(std::size_t n_slices, std::size_t chunk_size, double per_chunk_seconds) {
  if (n_slices == 0 || chunk_size == 0 || !(per_chunk_seconds > 0.0)) {
    fail(ErrorKind::InvalidArgument, "timing_model inputs must be positive");
  }
  const std::size_t chunks = (n_slices + chunk_size - 1) / chunk_size;
  return static_cast<double>(chunks) * per_chunk_seconds;
}

}  // namespace ctcf
