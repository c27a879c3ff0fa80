// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctcf/latentshift.hpp"
#include "ctcf/synthdata.hpp"

namespace ctcf {

struct GroupStats {
  double mean = 0.0;
  /// Sample standard deviation / sqrt(N); 0 when N < 2.
  double standard_error = 0.0;
  std::size_t count = 0;

  static GroupStats of(const std::vector<double>& values);
  friend bool operator==(const GroupStats&, const GroupStats&) = default;
};

struct VolumeOutcome {
  std::size_t index = 0;
  Label label = Label::Negative;
  double input_prediction = 0.0;
  /// Present for every CF-processed volume.
  std::optional<double> cf_prediction;
  /// Window start of the minimum-prediction CF.
  std::size_t best_start = 0;

  friend bool operator==(const VolumeOutcome&, const VolumeOutcome&) = default;
};

struct ReductionTable {
  std::size_t chunk_size = 0;
  GroupStats positives;
  GroupStats negatives;
  GroupStats cf_positives;
  std::optional<GroupStats> cf_negatives;
  std::vector<VolumeOutcome> per_volume;

  std::vector<double> predictions(Label label) const;
  std::vector<double> cf_predictions(Label label) const;
};

struct EvalOptions {
  /// Also counterfactual the negatives (extra table row).
  bool cf_negatives = false;
  /// Window stride; 0 means non-overlapping windows.
  std::size_t stride = 0;
};

/// Per positive: chunk scan, CF prediction = minimum over windows, floored at
/// the input's own prediction (a window that cannot beat the input leaves it
/// unchanged). Requires both classes unless only positives are processed via
/// chunk_size_sweep.
ReductionTable evaluate_reduction(const SliceAutoencoder& ae, const VolumeScorer& f,
                                  const std::vector<LabeledVolume>& dataset, std::size_t chunk_size,
                                  const SearchConfig& cfg, const EvalOptions& options = {});

struct SweepPoint {
  std::size_t chunk_size = 0;
  double mean_reduction = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;
  friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

/// Mean of (input prediction - CF prediction) over the positives per chunk size.
SweepResult chunk_size_sweep(const SliceAutoencoder& ae, const VolumeScorer& f,
                             const std::vector<LabeledVolume>& positives, const std::vector<std::size_t>& sizes,
                             const SearchConfig& cfg);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  /// Normalised mass per bin; sums to 1 for a non-empty group.
  std::vector<double> mass;
};

struct PredictionHistograms {
  Histogram positives;
  Histogram negatives;
  Histogram cf_positives;
};

/// Equal-width bins over [lo, hi]; values outside are clamped to the edge bins.
Histogram histogram(const std::vector<double>& values, std::size_t bins, double lo = 0.0, double hi = 1.0);

PredictionHistograms prediction_histograms(const ReductionTable& table, std::size_t bins);
PredictionHistograms prediction_histograms(const SliceAutoencoder& ae, const VolumeScorer& f,
                                           const std::vector<LabeledVolume>& dataset, std::size_t chunk_size,
                                           std::size_t bins, const SearchConfig& cfg = {});

/// Fraction of `values` strictly below `threshold`.
double mass_below(const std::vector<double>& values, double threshold);
double median(std::vector<double> values);

/// Two-sided permutation test on the difference of means.
/// p = (1 + #{|perm diff| >= |observed diff|}) / (1 + iterations).
double permutation_test(const std::vector<double>& group_a, const std::vector<double>& group_b,
                        std::size_t iterations, std::uint64_t seed);

/// ceil(n_slices / chunk_size) * per_chunk_seconds.
double timing_model(std::size_t n_slices, std::size_t chunk_size, double per_chunk_seconds);

}  // namespace ctcf
