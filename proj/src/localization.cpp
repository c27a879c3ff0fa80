// SPDX-License-Identifier: Apache-2.0
#include "ctcf/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ctcf/error.hpp"
#include "ctcf/parallel.hpp"

namespace ctcf {

std::vector<ChunkSpec> scan_windows(std::size_t depth, std::size_t chunk_size, std::size_t stride) {
  if (chunk_size < 1 || chunk_size > depth) {
    fail(ErrorKind::InvalidArgument, "chunk_size must lie in [1, depth]");
  }
  if (stride < 1) fail(ErrorKind::InvalidArgument, "stride must be >= 1");
  std::vector<ChunkSpec> windows;
  for (std::size_t start = 0; start < depth; start += stride) {
    windows.push_back({start, std::min(chunk_size, depth - start)});
  }
  return windows;
}

std::size_t best_entry(const std::vector<ScanEntry>& entries) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].reduction > entries[best].reduction) best = i;
  }
  return best;
}

ScanReport scan_chunks(const SliceAutoencoder& ae, const VolumeScorer& f, const Volume& v, std::size_t chunk_size,
                       std::size_t stride, const SearchConfig& cfg) {
  cfg.validate();
  if (stride == 0) stride = chunk_size;
  ScanReport report;
  report.chunk_size = chunk_size;
  report.stride = stride;
  const std::vector<ChunkSpec> windows = scan_windows(v.depth, chunk_size, stride);

  const LatentStack z = encode_volume(ae, v);
  report.runs.resize(windows.size());
  parallel_for(windows.size(), [&](std::size_t i) {
    const LatentStack g = shift_direction(ae, f, z, windows[i]);
    report.runs[i] = search_lambda(ae, f, z, g, windows[i], cfg);
  });

  for (std::size_t i = 0; i < windows.size(); ++i) {
    const CFResult& run = report.runs[i];
    ScanEntry e;
    e.start = windows[i].start;
    e.end = windows[i].end();
    e.baseline_prediction = run.baseline_prediction;
    e.min_prediction = run.min_prediction();
    e.reduction = e.baseline_prediction - e.min_prediction;
    e.status = run.status;
    report.entries.push_back(e);
  }
  report.best_index = best_entry(report.entries);
  return report;
}

Volume diff_heatmap(const Volume& reference, const Volume& cf) {
  require_same_shape(reference, cf, "diff_heatmap");
  Volume out(reference.depth, reference.height, reference.width);
  for (std::size_t i = 0; i < out.size(); ++i) out.voxels[i] = std::abs(reference.voxels[i] - cf.voxels[i]);
  return out;
}

Volume input_gradient(const VolumeScorer& f, const Volume& v) {
  Tape tape;
  const Tensor x = tape.variable(v.to_tensor());
  const Tensor score = f.forward(x);
  return Volume::from_tensor(tape.backward(score).of(x));
}

double localization_score(const Volume& attribution, const Volume& truth_mask) {
  require_same_shape(attribution, truth_mask, "localization_score");
  const std::size_t k = static_cast<std::size_t>(
      std::count_if(truth_mask.voxels.begin(), truth_mask.voxels.end(), [](double m) { return m != 0.0; }));
  if (k == 0) fail(ErrorKind::InvalidArgument, "localization_score: truth mask is empty");

  std::vector<double> mag(attribution.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(attribution.voxels[i]);
  std::vector<double> sorted = mag;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end(),
                   std::greater<double>());
  const double cutoff = sorted[k - 1];

  std::size_t above = 0, above_hit = 0, tied = 0, tied_hit = 0;
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const bool hit = truth_mask.voxels[i] != 0.0;
    if (mag[i] > cutoff) {
      ++above;
      above_hit += hit;
    } else if (mag[i] == cutoff) {
      ++tied;
      tied_hit += hit;
    }
  }
  const double from_ties =
      static_cast<double>(k - above) * static_cast<double>(tied_hit) / static_cast<double>(tied);
  return (static_cast<double>(above_hit) + from_ties) / static_cast<double>(k);
}

}  // namespace ctcf
