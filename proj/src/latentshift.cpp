// SPDX-License-Identifier: Apache-2.0
#include "ctcf/latentshift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctcf/error.hpp"

namespace ctcf {

void SearchConfig::validate() const {
  if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) fail(ErrorKind::InvalidArgument, "lambda0 must be positive");
  if (!(growth > 1.0) || !std::isfinite(growth)) fail(ErrorKind::InvalidArgument, "growth must exceed 1");
  if (max_steps == 0) fail(ErrorKind::InvalidArgument, "max_steps must be positive");
  if (!(pixel_budget > 0.0 && pixel_budget <= 1.0)) fail(ErrorKind::InvalidArgument, "pixel_budget must lie in (0,1]");
  if (!(target_fraction >= 0.0 && target_fraction < 1.0)) {
    fail(ErrorKind::InvalidArgument, "target_fraction must lie in [0,1)");
  }
}

std::string to_string(CFStatus status) {
  switch (status) {
    case CFStatus::Converged: return "Converged";
    case CFStatus::Plateaued: return "Plateaued";
    case CFStatus::BudgetExceeded: return "BudgetExceeded";
    case CFStatus::NoReduction: return "NoReduction";
  }
  return "Unknown";
}

CFStatus cf_status_from_string(const std::string& name) {
  if (name == "Converged") return CFStatus::Converged;
  if (name == "Plateaued") return CFStatus::Plateaued;
  if (name == "BudgetExceeded") return CFStatus::BudgetExceeded;
  if (name == "NoReduction") return CFStatus::NoReduction;
  fail(ErrorKind::MalformedFile, "unknown CF status '" + name + "'");
}

double CFResult::min_prediction() const {
  double best = std::numeric_limits<double>::infinity();
  for (const TraceEntry& e : trace) {
    if (e.within_budget) best = std::min(best, e.prediction);
  }
  return best;
}

LatentStack shift_direction(const SliceAutoencoder& ae, const VolumeScorer& f, const LatentStack& z,
                            const ChunkSpec& chunk) {
  Tape tape;
  const ChunkedDecode decoded = decode_chunked(ae, z, chunk, tape);
  const Tensor score = f.forward(decoded.volume);
  const Gradients grads = tape.backward(score);
  LatentStack g = LatentStack::zeros(z.depth(), z.dim);
  for (std::size_t i = 0; i < decoded.chunk_latents.size(); ++i) {
    g.codes[chunk.start + i] = grads.of(decoded.chunk_latents[i]).data();
  }
  return g;
}

LatentStack shift_direction(const SliceAutoencoder& ae, const VolumeScorer& f, const Volume& v,
                            const ChunkSpec& chunk) {
  return shift_direction(ae, f, encode_volume(ae, v), chunk);
}

LatentStack apply_shift(const LatentStack& z, const LatentStack& g, double lambda, const ChunkSpec& chunk) {
  if (z.depth() != g.depth() || z.dim != g.dim) fail(ErrorKind::ShapeMismatch, "apply_shift: latent stacks differ in shape");
  chunk.validate(z.depth());
  LatentStack out = z;
  for (std::size_t d = chunk.start; d < chunk.end(); ++d) {
    for (std::size_t j = 0; j < z.dim; ++j) out.codes[d][j] = z.codes[d][j] - lambda * g.codes[d][j];
  }
  return out;
}

double pixel_change_fraction(const Volume& reference, const Volume& candidate) {
  require_same_shape(reference, candidate, "pixel_change_fraction");
  if (reference.size() == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) acc += std::abs(candidate.voxels[i] - reference.voxels[i]);
  return acc / static_cast<double>(reference.size());
}

namespace {

// Re-decodes only the chunk slices of `z` into a copy of `base`. Decoding is
// per-slice, so this equals decode_volume(ae, z) whenever z matches the
// latents of `base` outside the chunk.
Volume decode_into(const SliceAutoencoder& ae, const LatentStack& z, const ChunkSpec& chunk, const Volume& base) {
  Volume out = base;
  for (std::size_t d = chunk.start; d < chunk.end(); ++d) {
    const Tensor slice = ae.decode_slice(Tensor({1, z.dim}, z.codes[d]));
    std::copy(slice.data().begin(), slice.data().end(), out.slice(d).begin());
  }
  return out;
}

double checked_score(const VolumeScorer& f, const Volume& v, double lambda) {
  const double s = f.score(v);
  if (!std::isfinite(s)) {
    fail(ErrorKind::NumericFailure, "non-finite prediction at lambda " + std::to_string(lambda));
  }
  return s;
}

}  // namespace

CFResult search_lambda(const SliceAutoencoder& ae, const VolumeScorer& f, const LatentStack& z, const LatentStack& g,
                       const ChunkSpec& chunk, const SearchConfig& cfg) {
  cfg.validate();
  chunk.validate(z.depth());
  CFResult result;
  result.reconstruction = decode_volume(ae, z);
  result.baseline_prediction = checked_score(f, result.reconstruction, 0.0);
  result.trace.push_back({0.0, result.baseline_prediction, 0.0, true});
  result.cf_volume = result.reconstruction;
  result.lambda_star = 0.0;

  if (g.all_zero()) {
    result.status = CFStatus::NoReduction;
    return result;
  }

  double best = result.baseline_prediction;
  const double target = cfg.target_fraction * result.baseline_prediction;
  result.status = CFStatus::Plateaued;
  for (std::size_t step = 0; step < cfg.max_steps; ++step) {
    const double lambda = cfg.lambda0 * std::pow(cfg.growth, static_cast<double>(step));
    const Volume candidate = decode_into(ae, apply_shift(z, g, lambda, chunk), chunk, result.reconstruction);
    const double prediction = checked_score(f, candidate, lambda);
    const double change = pixel_change_fraction(result.reconstruction, candidate);
    if (change > cfg.pixel_budget) {
      result.trace.push_back({lambda, prediction, change, false});
      result.status = CFStatus::BudgetExceeded;
      break;
    }
    const double previous = result.trace.back().prediction;
    result.trace.push_back({lambda, prediction, change, true});
    if (prediction < best) {
      best = prediction;
      result.lambda_star = lambda;
      result.cf_volume = candidate;
    }
    if (prediction <= target) {
      result.status = CFStatus::Converged;
      break;
    }
    if (prediction > previous) {
      result.status = CFStatus::Plateaued;
      break;
    }
  }
  return result;
}

CFResult generate_cf(const SliceAutoencoder& ae, const VolumeScorer& f, const Volume& v, const ChunkSpec& chunk,
                     const SearchConfig& cfg) {
  cfg.validate();
  const LatentStack z = encode_volume(ae, v);
  chunk.validate(z.depth());
  const LatentStack g = shift_direction(ae, f, z, chunk);
  return search_lambda(ae, f, z, g, chunk, cfg);
}

std::vector<TraceEntry> lambda_sweep(const SliceAutoencoder& ae, const VolumeScorer& f, const Volume& v,
                                     const ChunkSpec& chunk, const std::vector<double>& lambdas) {
  const LatentStack z = encode_volume(ae, v);
  chunk.validate(z.depth());
  const LatentStack g = shift_direction(ae, f, z, chunk);
  const Volume reference = decode_volume(ae, z);
  std::vector<TraceEntry> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    if (!std::isfinite(lambda)) fail(ErrorKind::InvalidArgument, "lambda_sweep: non-finite lambda");
    const Volume candidate = decode_into(ae, apply_shift(z, g, lambda, chunk), chunk, reference);
    out.push_back({lambda, checked_score(f, candidate, lambda), pixel_change_fraction(reference, candidate), true});
  }
  return out;
}

}  // namespace ctcf
