// SPDX-License-Identifier: Apache-2.0
//
// Counterfactual generation by latent shift over a slice autoencoder.
//
// The volume is encoded slice by slice, decoded with only one chunk of
// latents on the tape, scored, and differentiated. The chunk latents are then
// moved against that gradient, z' = z - lambda * g, for a geometric sequence
// of lambda values until the score reaches the target, starts rising, or the
// decoded change exceeds the pixel budget.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ctcf/models.hpp"
#include "ctcf/volume.hpp"

namespace ctcf {

struct SearchConfig {
  double lambda0 = 1e-2;
  double growth = 2.0;
  std::size_t max_steps = 20;
  /// Maximum mean absolute voxel change against the lambda = 0 reconstruction.
  double pixel_budget = 0.05;
  /// Converged once prediction <= target_fraction * baseline.
  double target_fraction = 0.5;

  void validate() const;
};

enum class CFStatus { Converged, Plateaued, BudgetExceeded, NoReduction };

std::string to_string(CFStatus status);
CFStatus cf_status_from_string(const std::string& name);

struct TraceEntry {
  double lambda = 0.0;
  double prediction = 0.0;
  double pixel_change = 0.0;
  /// False only for a final probe that broke the pixel budget.
  bool within_budget = true;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct CFResult {
  Volume cf_volume;
  /// Decoded unshifted latents; the reference for pixel change and heatmaps.
  Volume reconstruction;
  double lambda_star = 0.0;
  std::vector<TraceEntry> trace;
  CFStatus status = CFStatus::NoReduction;
  double baseline_prediction = 0.0;

  /// Minimum prediction among budget-respecting trace entries.
  double min_prediction() const;

  friend bool operator==(const CFResult&, const CFResult&) = default;
};

/// g_i = d f(decode_chunked(z, chunk)) / d z_i for i in the chunk, exactly
/// zero elsewhere.
LatentStack shift_direction(const SliceAutoencoder& ae, const VolumeScorer& f, const LatentStack& z,
                            const ChunkSpec& chunk);
LatentStack shift_direction(const SliceAutoencoder& ae, const VolumeScorer& f, const Volume& v,
                            const ChunkSpec& chunk);

/// z_i - lambda * g_i inside the chunk; other latents copied unchanged.
LatentStack apply_shift(const LatentStack& z, const LatentStack& g, double lambda, const ChunkSpec& chunk);

/// mean |candidate - reference| over voxels (dynamic range 1).
double pixel_change_fraction(const Volume& reference, const Volume& candidate);

/// Lambda search along a fixed direction `g` from latents `z`. The chunk only
/// limits which slices are re-decoded; `g` must be zero outside it.
CFResult search_lambda(const SliceAutoencoder& ae, const VolumeScorer& f, const LatentStack& z, const LatentStack& g,
                       const ChunkSpec& chunk, const SearchConfig& cfg);

CFResult generate_cf(const SliceAutoencoder& ae, const VolumeScorer& f, const Volume& v, const ChunkSpec& chunk,
                     const SearchConfig& cfg);

/// (lambda, prediction, pixel change) for each lambda along the single
/// gradient computed at z = E(v).
std::vector<TraceEntry> lambda_sweep(const SliceAutoencoder& ae, const VolumeScorer& f, const Volume& v,
                                     const ChunkSpec& chunk, const std::vector<double>& lambdas);

}  // namespace ctcf
