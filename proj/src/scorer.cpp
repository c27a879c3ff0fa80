// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "ctcf/error.hpp"
#include "ctcf/models.hpp"
#include "ctcf/rng.hpp"
#include "ctcf/synthdata.hpp"

namespace ctcf {

std::string to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::SegSum: return "seg_sum";
    case ScorerKind::RimDetector: return "rim_detector";
    case ScorerKind::Constant: return "constant";
    case ScorerKind::LinearProbe: return "linear_probe";
  }
  return "unknown";
}

ScorerKind scorer_kind_from_string(const std::string& name) {
  if (name == "seg_sum") return ScorerKind::SegSum;
  if (name == "rim_detector") return ScorerKind::RimDetector;
  if (name == "constant") return ScorerKind::Constant;
  if (name == "linear_probe") return ScorerKind::LinearProbe;
  fail(ErrorKind::InvalidArgument, "unknown scorer kind '" + name + "'");
}

VolumeScorer::VolumeScorer(std::size_t height, std::size_t width, Params params)
    : height_(height), width_(width), params_(std::move(params)) {
  if (height == 0 || width == 0) fail(ErrorKind::InvalidArgument, "scorer slice dimensions must be positive");
  if (const auto* rim = std::get_if<RimDetector>(&params_); rim && rim->slice_weights.size() != height * width) {
    fail(ErrorKind::ShapeMismatch, "rim detector needs one weight per slice pixel");
  }
  if (const auto* probe = std::get_if<LinearProbe>(&params_);
      probe && probe->weights.size() != probe->depth * height * width) {
    fail(ErrorKind::ShapeMismatch, "linear probe needs one weight per voxel");
  }
}

VolumeScorer VolumeScorer::seg_sum(std::size_t height, std::size_t width, SegSumHead head) {
  return VolumeScorer(height, width, head);
}

VolumeScorer VolumeScorer::rim_detector(std::size_t height, std::size_t width) {
  return VolumeScorer(height, width, RimDetector{std::vector<double>(height * width, 0.0), 0.0});
}

VolumeScorer VolumeScorer::constant(std::size_t height, std::size_t width, double value) {
  return VolumeScorer(height, width, ConstantScore{value});
}

VolumeScorer VolumeScorer::linear_probe(std::size_t depth, std::size_t height, std::size_t width,
                                        std::vector<double> weights, double bias) {
  return VolumeScorer(height, width, LinearProbe{depth, std::move(weights), bias});
}

ScorerKind VolumeScorer::kind() const noexcept {
  switch (params_.index()) {
    case 0: return ScorerKind::SegSum;
    case 1: return ScorerKind::RimDetector;
    case 2: return ScorerKind::Constant;
    default: return ScorerKind::LinearProbe;
  }
}

void VolumeScorer::require_shape(const Shape& shape) const {
  if (shape.size() != 3 || shape[1] != height_ || shape[2] != width_) {
    fail(ErrorKind::ShapeMismatch, "scorer expects [D," + std::to_string(height_) + "," + std::to_string(width_) +
                                       "], got " + shape_to_string(shape));
  }
  if (const auto* probe = std::get_if<LinearProbe>(&params_); probe && shape[0] != probe->depth) {
    fail(ErrorKind::ShapeMismatch, "linear probe expects depth " + std::to_string(probe->depth) + ", got " +
                                       std::to_string(shape[0]));
  }
}

Volume VolumeScorer::weight_volume(std::size_t depth) const {
  Volume w(depth, height_, width_);
  if (const auto* rim = std::get_if<RimDetector>(&params_)) {
    const double inv_depth = 1.0 / static_cast<double>(depth);
    for (std::size_t d = 0; d < depth; ++d) {
      auto s = w.slice(d);
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = rim->slice_weights[i] * inv_depth;
    }
  } else if (const auto* probe = std::get_if<LinearProbe>(&params_)) {
    if (depth != probe->depth) fail(ErrorKind::ShapeMismatch, "linear probe depth mismatch");
    w.voxels = probe->weights;
  } else {
    fail(ErrorKind::InvalidArgument, "weight_volume is defined only for linear scorers");
  }
  return w;
}

Tensor VolumeScorer::forward(const Tensor& volume) const {
  require_shape(volume.shape());
  const Shape& shape = volume.shape();
  return std::visit(
      [&](const auto& p) -> Tensor {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SegSumHead>) {
          Tensor logits = add(scale(volume, p.weight), Tensor::filled(shape, p.bias));
          return sum(sigmoid(logits));
        } else if constexpr (std::is_same_v<P, RimDetector>) {
          Tensor w = weight_volume(shape[0]).to_tensor();
          return sigmoid(add(sum(mul(volume, w)), Tensor::scalar(p.bias)));
        } else if constexpr (std::is_same_v<P, ConstantScore>) {
          return Tensor::scalar(p.value);
        } else {
          Tensor w(shape, p.weights);
          return add(sum(mul(volume, w)), Tensor::scalar(p.bias));
        }
      },
      params_);
}

double VolumeScorer::score(const Volume& v) const { return forward(v.to_tensor()).item(); }

Volume seg_mask(const VolumeScorer& f, const Volume& v, double threshold) {
  const auto* head = std::get_if<SegSumHead>(&f.params());
  if (!head) fail(ErrorKind::InvalidArgument, "seg_mask requires a seg_sum scorer");
  if (!(threshold > 0.0 && threshold < 1.0)) fail(ErrorKind::InvalidArgument, "threshold must lie in (0,1)");
  Volume mask(v.depth, v.height, v.width);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(v.voxels[i] * head->weight + head->bias)));
    mask.voxels[i] = p >= threshold ? 1.0 : 0.0;
  }
  return mask;
}

// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (batch_size == 0) fail(ErrorKind::InvalidArgument, "batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorKind::InvalidArgument, "learning_rate must be positive and finite");
  }
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) fail(ErrorKind::InvalidArgument, "auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Average ranks over ties.
  std::vector<double> rank(scores.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  double pos = 0, rank_sum = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      pos += 1;
      rank_sum += rank[i];
    }
  }
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0 || neg == 0) fail(ErrorKind::InvalidArgument, "auc needs both classes");
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

ScorerTraining train_scorer(VolumeScorer f, const std::vector<LabeledVolume>& dataset, const TrainConfig& cfg) {
  cfg.validate();
  auto* rim = std::get_if<RimDetector>(&f.params());
  if (!rim) fail(ErrorKind::InvalidArgument, "train_scorer supports the rim_detector kind only");
  if (dataset.empty()) fail(ErrorKind::InvalidArgument, "train_scorer: empty dataset");
  const bool has_pos = std::any_of(dataset.begin(), dataset.end(), [](const auto& x) { return x.label == Label::Positive; });
  const bool has_neg = std::any_of(dataset.begin(), dataset.end(), [](const auto& x) { return x.label == Label::Negative; });
  if (!has_pos || !has_neg) fail(ErrorKind::InvalidArgument, "train_scorer needs both positive and negative volumes");

  const std::size_t pixels = f.height() * f.width();
  // Slice-averaged features; the detector is logistic regression on them.
  std::vector<std::vector<double>> features;
  std::vector<double> targets;
  for (const LabeledVolume& item : dataset) {
    const Volume& v = item.volume;
    if (v.height != f.height() || v.width != f.width()) fail(ErrorKind::ShapeMismatch, "train_scorer: slice shape mismatch");
    std::vector<double> feat(pixels, 0.0);
    for (std::size_t d = 0; d < v.depth; ++d) {
      auto s = v.slice(d);
      for (std::size_t i = 0; i < pixels; ++i) feat[i] += s[i];
    }
    for (double& x : feat) x /= static_cast<double>(v.depth);
    features.push_back(std::move(feat));
    targets.push_back(item.label == Label::Positive ? 1.0 : 0.0);
  }

  auto logit_of = [&](std::size_t i) {
    double acc = rim->bias;
    for (std::size_t p = 0; p < pixels; ++p) acc += rim->slice_weights[p] * features[i][p];
    return acc;
  };
  auto loss_of = [&](double logit, double y) {
    return std::max(logit, 0.0) + std::log1p(std::exp(-std::abs(logit))) - y * logit;
  };
  auto mean_loss = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) acc += loss_of(logit_of(i), targets[i]);
    return acc / static_cast<double>(features.size());
  };

  ScorerTraining out;
  out.loss_history.push_back(mean_loss());
  SplitMix64 rng(cfg.seed);
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad_w(pixels);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::fill(grad_w.begin(), grad_w.end(), 0.0);
      double grad_b = 0.0;
      for (std::size_t j = begin; j < end; ++j) {
        const std::size_t i = order[j];
        const double logit = logit_of(i);
        epoch_loss += loss_of(logit, targets[i]);
        const double residual = 1.0 / (1.0 + std::exp(-logit)) - targets[i];
        for (std::size_t p = 0; p < pixels; ++p) grad_w[p] += residual * features[i][p];
        grad_b += residual;
      }
      const double step = cfg.learning_rate / static_cast<double>(end - begin);
      for (std::size_t p = 0; p < pixels; ++p) rim->slice_weights[p] -= step * grad_w[p];
      rim->bias -= step * grad_b;
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) {
      fail(ErrorKind::NumericFailure, "train_scorer: non-finite loss at epoch " + std::to_string(epoch + 1));
    }
    out.loss_history.push_back(epoch_loss);
  }

  std::vector<double> scores;
  std::vector<int> labels;
  std::size_t correct = 0;
  for (const LabeledVolume& item : dataset) {
    const double s = f.score(item.volume);
    const int y = item.label == Label::Positive ? 1 : 0;
    scores.push_back(s);
    labels.push_back(y);
    if ((s >= 0.5) == (y == 1)) ++correct;
  }
  out.train_accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
  out.train_auc = auc(scores, labels);
  out.model = std::move(f);
  return out;
}

// ---------------------------------------------------------------------------

double reconstruction_mse(const SliceAutoencoder& ae, const std::vector<Volume>& dataset) {
  double acc = 0.0;
  std::size_t count = 0;
  for (const Volume& v : dataset) {
    const Volume recon = decode_volume(ae, encode_volume(ae, v));
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double e = recon.voxels[i] - v.voxels[i];
      acc += e * e;
    }
    count += v.size();
  }
  return count ? acc / static_cast<double>(count) : 0.0;
}

AutoencoderTraining train_autoencoder(SliceAutoencoder ae, const std::vector<Volume>& dataset, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) fail(ErrorKind::InvalidArgument, "train_autoencoder: empty dataset");
  const std::size_t pixels = ae.height() * ae.width();
  struct SliceRef {
    std::size_t volume, slice;
  };
  std::vector<SliceRef> slices;
  for (std::size_t v = 0; v < dataset.size(); ++v) {
    if (dataset[v].height != ae.height() || dataset[v].width != ae.width()) {
      fail(ErrorKind::ShapeMismatch, "train_autoencoder: slice shape mismatch");
    }
    for (std::size_t d = 0; d < dataset[v].depth; ++d) slices.push_back({v, d});
  }
  if (slices.empty()) fail(ErrorKind::InvalidArgument, "train_autoencoder: dataset has no slices");

  AutoencoderTraining out;
  out.loss_history.push_back(reconstruction_mse(ae, dataset));
  SplitMix64 rng(cfg.seed);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(slices);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < slices.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(slices.size(), begin + cfg.batch_size);
      const std::size_t rows = end - begin;
      std::vector<double> batch;
      batch.reserve(rows * pixels);
      for (std::size_t j = begin; j < end; ++j) {
        auto s = dataset[slices[j].volume].slice(slices[j].slice);
        batch.insert(batch.end(), s.begin(), s.end());
      }
      const Tensor x({rows, pixels}, std::move(batch));

      Tape tape;
      std::vector<std::pair<Tensor, Tensor>> params;
      auto run = [&](std::vector<DenseLayer>& layers, Tensor h) {
        for (DenseLayer& l : layers) {
          Tensor w = tape.variable(Tensor({l.in, l.out}, l.weight));
          Tensor b = tape.variable(Tensor({1, l.out}, l.bias));
          params.emplace_back(w, b);
          h = l.forward(h, w, b);
        }
        return h;
      };
      const Tensor recon = run(ae.decoder(), run(ae.encoder(), x));
      const Tensor diff = sub(recon, x);
      const Tensor loss = scale(sum(mul(diff, diff)), 1.0 / static_cast<double>(rows * pixels));
      if (!std::isfinite(loss.item())) {
        fail(ErrorKind::NumericFailure, "train_autoencoder: non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      epoch_loss += loss.item();
      ++batches;

      const Gradients grads = tape.backward(loss);
      std::size_t p = 0;
      for (auto* layers : {&ae.encoder(), &ae.decoder()}) {
        for (DenseLayer& l : *layers) {
          const Tensor gw = grads.of(params[p].first);
          const Tensor gb = grads.of(params[p].second);
          for (std::size_t i = 0; i < l.weight.size(); ++i) l.weight[i] -= cfg.learning_rate * gw[i];
          for (std::size_t i = 0; i < l.bias.size(); ++i) l.bias[i] -= cfg.learning_rate * gb[i];
          ++p;
        }
      }
    }
    out.loss_history.push_back(epoch_loss / static_cast<double>(batches));
  }
  out.model = std::move(ae);
  return out;
}

}  // namespace ctcf
