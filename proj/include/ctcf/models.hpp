// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ctcf/tensor.hpp"
#include "ctcf/volume.hpp"

namespace ctcf {

struct LabeledVolume;

enum class Activation : std::uint8_t { Identity = 0, Relu = 1, Sigmoid = 2 };

/// y = act(x . W + b) with W stored row-major [in x out].
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weight;
  std::vector<double> bias;
  Activation activation = Activation::Identity;

  /// Weights uniform in [-1/sqrt(in), 1/sqrt(in)], bias zero.
  static DenseLayer random(std::size_t in, std::size_t out, Activation act, std::uint64_t seed);
  static DenseLayer identity(std::size_t n);

  /// `x` is [rows x in]; parameters enter as constants.
  Tensor forward(const Tensor& x) const;
  /// Same computation with caller-supplied (possibly on-tape) parameters.
  Tensor forward(const Tensor& x, const Tensor& w, const Tensor& b) const;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// 2-D autoencoder applied independently to every slice of a volume.
class SliceAutoencoder {
 public:
  SliceAutoencoder() = default;
  SliceAutoencoder(std::size_t height, std::size_t width, std::vector<DenseLayer> encoder,
                   std::vector<DenseLayer> decoder);

  /// Default architecture: H*W -> hidden (relu) -> L, L -> hidden (relu) -> H*W (sigmoid).
  static SliceAutoencoder make(std::size_t height, std::size_t width, std::size_t latent_dim,
                               std::size_t hidden, std::uint64_t seed);
  /// Single identity layer each way; L = H*W.
  static SliceAutoencoder identity(std::size_t height, std::size_t width);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t latent_dim() const noexcept { return latent_dim_; }
  const std::vector<DenseLayer>& encoder() const noexcept { return encoder_; }
  const std::vector<DenseLayer>& decoder() const noexcept { return decoder_; }
  std::vector<DenseLayer>& encoder() noexcept { return encoder_; }
  std::vector<DenseLayer>& decoder() noexcept { return decoder_; }

  /// [rows x H*W] -> [rows x L]
  Tensor encode_rows(const Tensor& x) const;
  /// [rows x L] -> [rows x H*W]
  Tensor decode_rows(const Tensor& z) const;

  /// Decodes one latent code to an [H x W] slice. On-tape if `z` is.
  Tensor decode_slice(const Tensor& z) const;

  friend bool operator==(const SliceAutoencoder&, const SliceAutoencoder&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t latent_dim_ = 0;
  std::vector<DenseLayer> encoder_;
  std::vector<DenseLayer> decoder_;
};

/// z_i = E(slice_i), computed off-tape.
LatentStack encode_volume(const SliceAutoencoder& ae, const Volume& v);

/// Plain decode of every slice, off-tape.
Volume decode_volume(const SliceAutoencoder& ae, const LatentStack& z);

struct ChunkedDecode {
  /// [D, H, W], on `tape` (gradients reach only the chunk latents).
  Tensor volume;
  /// Leaf variables for latents start..end-1 of the chunk, in order.
  std::vector<Tensor> chunk_latents;
};

/// Decodes all slices and concatenates them. Latents inside `chunk` become
/// leaves on `tape`; every other latent passes through block_gradient first,
/// so its decode records nothing. Forward values do not depend on `chunk`.
ChunkedDecode decode_chunked(const SliceAutoencoder& ae, const LatentStack& z, const ChunkSpec& chunk, Tape& tape);

// ---------------------------------------------------------------------------
// Volume scorers

/// Per-voxel logistic segmentation head; score = sum_v sigmoid(weight * x_v + bias).
struct SegSumHead {
  double weight = -20.0;
  double bias = 7.0;
  friend bool operator==(const SegSumHead&, const SegSumHead&) = default;
};

/// sigmoid(bias + (1/D) * sum_d <slice_weights, slice_d>). The same H x W
/// weight map is applied to every slice, so any depth is accepted.
struct RimDetector {
  std::vector<double> slice_weights;
  double bias = 0.0;
  friend bool operator==(const RimDetector&, const RimDetector&) = default;
};

struct ConstantScore {
  double value = 0.0;
  friend bool operator==(const ConstantScore&, const ConstantScore&) = default;
};

/// w . flatten(v) + b over a fixed depth.
struct LinearProbe {
  std::size_t depth = 0;
  std::vector<double> weights;
  double bias = 0.0;
  friend bool operator==(const LinearProbe&, const LinearProbe&) = default;
};

enum class ScorerKind : std::uint8_t { SegSum = 1, RimDetector = 2, Constant = 3, LinearProbe = 4 };

std::string to_string(ScorerKind kind);
ScorerKind scorer_kind_from_string(const std::string& name);

class VolumeScorer {
 public:
  using Params = std::variant<SegSumHead, RimDetector, ConstantScore, LinearProbe>;

  VolumeScorer() = default;
  VolumeScorer(std::size_t height, std::size_t width, Params params);

  static VolumeScorer seg_sum(std::size_t height, std::size_t width, SegSumHead head = {});
  /// Zero-initialised rim detector.
  static VolumeScorer rim_detector(std::size_t height, std::size_t width);
  static VolumeScorer constant(std::size_t height, std::size_t width, double value);
  static VolumeScorer linear_probe(std::size_t depth, std::size_t height, std::size_t width,
                                   std::vector<double> weights, double bias);

  ScorerKind kind() const noexcept;
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  const Params& params() const noexcept { return params_; }
  Params& params() noexcept { return params_; }

  /// Differentiable score of a [D, H, W] tensor; returns a scalar tensor.
  Tensor forward(const Tensor& volume) const;
  double score(const Volume& v) const;

  /// Per-voxel coefficient volume of a linear functional (rim detector or
  /// linear probe) for the given depth.
  Volume weight_volume(std::size_t depth) const;

  friend bool operator==(const VolumeScorer&, const VolumeScorer&) = default;

 private:
  void require_shape(const Shape& shape) const;

  std::size_t height_ = 0;
  std::size_t width_ = 0;
  Params params_;
};

/// 1 where the seg_sum head's per-voxel probability is >= threshold.
Volume seg_mask(const VolumeScorer& f, const Volume& v, double threshold);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 16;
  double learning_rate = 3.0;
  std::uint64_t seed = 7;

  /// Defaults for logistic training of the rim detector.
  static TrainConfig scorer_defaults() { return {300, 16, 0.1, 7}; }
  /// Zero epochs is allowed and leaves the model untouched.
  void validate() const;
};

struct AutoencoderTraining {
  SliceAutoencoder model;
  /// Mean per-voxel squared error per epoch; entry 0 is the loss before training.
  std::vector<double> loss_history;
};

/// SGD on mean squared slice reconstruction error over slices sampled
/// (shuffled) from all volumes.
AutoencoderTraining train_autoencoder(SliceAutoencoder ae, const std::vector<Volume>& dataset,
                                      const TrainConfig& cfg);

/// Mean per-voxel squared reconstruction error over all slices.
double reconstruction_mse(const SliceAutoencoder& ae, const std::vector<Volume>& dataset);

struct ScorerTraining {
  VolumeScorer model;
  /// Mean logistic loss per epoch; entry 0 is before training.
  std::vector<double> loss_history;
  double train_accuracy = 0.0;
  double train_auc = 0.0;
};

/// Logistic regression of the rim detector on labelled volumes.
ScorerTraining train_scorer(VolumeScorer f, const std::vector<LabeledVolume>& dataset, const TrainConfig& cfg);

/// Mann-Whitney AUC, ties counted half.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace ctcf
