// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "ctcf/latentshift.hpp"

namespace ctcf {

struct ScanEntry {
  std::size_t start = 0;
  std::size_t end = 0;
  double baseline_prediction = 0.0;
  double min_prediction = 0.0;
  double reduction = 0.0;
  CFStatus status = CFStatus::NoReduction;

  friend bool operator==(const ScanEntry&, const ScanEntry&) = default;
};

struct ScanReport {
  std::size_t chunk_size = 0;
  std::size_t stride = 0;
  std::vector<ScanEntry> entries;
  /// Index into `entries` of the largest reduction; ties go to the smallest start.
  std::size_t best_index = 0;
  /// Per-window counterfactuals, parallel to `entries`.
  std::vector<CFResult> runs;

  const ScanEntry& best() const { return entries.at(best_index); }
  std::size_t best_chunk() const { return best().start; }
};

/// Window starts 0, stride, 2*stride, ... below depth; the last window is
/// clipped to the volume end.
std::vector<ChunkSpec> scan_windows(std::size_t depth, std::size_t chunk_size, std::size_t stride);

/// generate_cf for every window (in parallel), assembled in start order.
/// stride == 0 means stride = chunk_size.
ScanReport scan_chunks(const SliceAutoencoder& ae, const VolumeScorer& f, const Volume& v, std::size_t chunk_size,
                       std::size_t stride, const SearchConfig& cfg);

/// Argmax of reduction with ties broken toward the earliest entry.
std::size_t best_entry(const std::vector<ScanEntry>& entries);

/// |reference - cf| per voxel.
Volume diff_heatmap(const Volume& reference, const Volume& cf);

/// d f(v) / d v per voxel, no autoencoder involved.
Volume input_gradient(const VolumeScorer& f, const Volume& v);

/// Fraction of the |truth| highest-|attribution| voxels that lie inside the
/// truth mask. Ties at the cut-off are credited at their expected value under
/// uniformly random tie-breaking.
double localization_score(const Volume& attribution, const Volume& truth_mask);

}  // namespace ctcf
