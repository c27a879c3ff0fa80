// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. A run is described by a JSON RunConfig; every
// field has a default and unknown keys are rejected. Flags override the file.
// The effective config is written as effective_config.json in the output
// directory of every command.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctcf/latentshift.hpp"
#include "ctcf/models.hpp"
#include "ctcf/synthdata.hpp"

namespace ctcf {

struct AutoencoderConfig {
  std::size_t latent_dim = 16;
  std::size_t hidden = 64;
  std::uint64_t init_seed = 3;
};

struct ScorerConfig {
  /// rim_detector, seg_sum or constant.
  std::string kind = "rim_detector";
  double constant_value = 0.5;
  double seg_weight = -20.0;
  double seg_bias = 7.0;
  /// Held-out set used to report AUC after training.
  std::size_t heldout_pos = 50;
  std::size_t heldout_neg = 50;
  std::uint64_t heldout_seed = 909;
};

struct DatasetConfig {
  std::size_t n_pos = 40;
  std::size_t n_neg = 40;
  std::uint64_t seed = 101;
  DatasetJitter jitter;
};

struct ChunkConfig {
  /// Window used by gen-cf; length 0 means the whole volume.
  std::size_t start = 0;
  std::size_t length = 0;
  /// Window size and stride used by scan; stride 0 means chunk_size.
  std::size_t scan_size = 5;
  std::size_t scan_stride = 0;
};

struct EvaluateConfig {
  std::size_t chunk_size = 12;
  std::vector<std::size_t> sweep_sizes{2, 4, 8, 12};
  std::size_t bins = 10;
  std::size_t permutation_iterations = 2000;
  std::uint64_t permutation_seed = 5;
  bool cf_negatives = false;
};

struct RunConfig {
  std::filesystem::path output_dir = "out";
  PhantomSpec phantom = default_demo_phantom();
  DatasetConfig dataset;
  AutoencoderConfig autoencoder;
  TrainConfig train_ae;
  TrainConfig train_scorer = TrainConfig::scorer_defaults();
  ScorerConfig scorer;
  SearchConfig search;
  /// Search settings for scan; target 0 keeps lambda growing until the
  /// budget or a plateau, so windows are ranked by their largest reduction.
  SearchConfig scan_search = scan_search_defaults();
  ChunkConfig chunk;
  EvaluateConfig evaluate;

  static PhantomSpec default_demo_phantom();
  static SearchConfig scan_search_defaults();
  void validate() const;
};

nlohmann::ordered_json to_json(const RunConfig& cfg);
/// Overlays `patch` on the defaults. Unknown keys and wrong types raise
/// InvalidArgument naming the offending path.
RunConfig run_config_from_json(const nlohmann::json& patch);
RunConfig load_run_config(const std::filesystem::path& path);

/// Entry point used by the ctcf binary. Returns the process exit code.
/// Errors are reported on `err` as one line:
///   error code=<n> kind=<kind> message="<text>"
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ctcf
