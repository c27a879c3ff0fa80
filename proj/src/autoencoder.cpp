// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "ctcf/error.hpp"
#include "ctcf/models.hpp"
#include "ctcf/rng.hpp"

namespace ctcf {

namespace {

Tensor activate(const Tensor& x, Activation act) {
  switch (act) {
    case Activation::Relu: return relu(x);
    case Activation::Sigmoid: return sigmoid(x);
    case Activation::Identity: break;
  }
  return x;
}

void check_chain(const std::vector<DenseLayer>& layers, std::size_t in, std::size_t out, const char* what) {
  if (layers.empty()) fail(ErrorKind::InvalidArgument, std::string(what) + " has no layers");
  std::size_t width = in;
  for (const DenseLayer& l : layers) {
    if (l.in != width || l.weight.size() != l.in * l.out || l.bias.size() != l.out) {
      fail(ErrorKind::ShapeMismatch, std::string(what) + " layer dimensions are inconsistent");
    }
    width = l.out;
  }
  if (width != out) fail(ErrorKind::ShapeMismatch, std::string(what) + " output width mismatch");
}

}  // namespace

DenseLayer DenseLayer::random(std::size_t in, std::size_t out, Activation act, std::uint64_t seed) {
  DenseLayer l;
  l.in = in;
  l.out = out;
  l.activation = act;
  l.weight.resize(in * out);
  l.bias.assign(out, 0.0);
  SplitMix64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& w : l.weight) w = rng.uniform(-bound, bound);
  return l;
}

DenseLayer DenseLayer::identity(std::size_t n) {
  DenseLayer l;
  l.in = n;
  l.out = n;
  l.weight.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) l.weight[i * n + i] = 1.0;
  l.bias.assign(n, 0.0);
  return l;
}

Tensor DenseLayer::forward(const Tensor& x) const {
  return forward(x, Tensor({in, out}, weight), Tensor({1, out}, bias));
}

Tensor DenseLayer::forward(const Tensor& x, const Tensor& w, const Tensor& b) const {
  if (x.rank() != 2 || x.shape()[1] != in) {
    fail(ErrorKind::ShapeMismatch, "dense layer expects [rows x " + std::to_string(in) + "], got " +
                                       shape_to_string(x.shape()));
  }
  const std::size_t rows = x.shape()[0];
  Tensor xw = matmul(x, w);
  // Bias broadcast over rows as ones[rows x 1] . b[1 x out].
  Tensor pre = rows == 1 ? add(xw, b) : add(xw, matmul(Tensor::ones({rows, 1}), b));
  return activate(pre, activation);
}

SliceAutoencoder::SliceAutoencoder(std::size_t height, std::size_t width, std::vector<DenseLayer> encoder,
                                   std::vector<DenseLayer> decoder)
    : height_(height), width_(width), encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
  if (height == 0 || width == 0) fail(ErrorKind::InvalidArgument, "autoencoder slice dimensions must be positive");
  if (encoder_.empty()) fail(ErrorKind::InvalidArgument, "encoder has no layers");
  latent_dim_ = encoder_.back().out;
  check_chain(encoder_, height * width, latent_dim_, "encoder");
  check_chain(decoder_, latent_dim_, height * width, "decoder");
}

SliceAutoencoder SliceAutoencoder::make(std::size_t height, std::size_t width, std::size_t latent_dim,
                                        std::size_t hidden, std::uint64_t seed) {
  const std::size_t pixels = height * width;
  if (latent_dim == 0 || latent_dim >= pixels) {
    fail(ErrorKind::InvalidArgument, "latent dimension must satisfy 1 <= L < H*W");
  }
  if (hidden == 0) fail(ErrorKind::InvalidArgument, "hidden width must be positive");
  std::vector<DenseLayer> enc{DenseLayer::random(pixels, hidden, Activation::Relu, derive_seed(seed, 1)),
                              DenseLayer::random(hidden, latent_dim, Activation::Identity, derive_seed(seed, 2))};
  std::vector<DenseLayer> dec{DenseLayer::random(latent_dim, hidden, Activation::Relu, derive_seed(seed, 3)),
                              DenseLayer::random(hidden, pixels, Activation::Sigmoid, derive_seed(seed, 4))};
  return SliceAutoencoder(height, width, std::move(enc), std::move(dec));
}

SliceAutoencoder SliceAutoencoder::identity(std::size_t height, std::size_t width) {
  const std::size_t pixels = height * width;
  return SliceAutoencoder(height, width, {DenseLayer::identity(pixels)}, {DenseLayer::identity(pixels)});
}

Tensor SliceAutoencoder::encode_rows(const Tensor& x) const {
  Tensor h = x;
  for (const DenseLayer& l : encoder_) h = l.forward(h);
  return h;
}

Tensor SliceAutoencoder::decode_rows(const Tensor& z) const {
  Tensor h = z;
  for (const DenseLayer& l : decoder_) h = l.forward(h);
  return h;
}

Tensor SliceAutoencoder::decode_slice(const Tensor& z) const {
  if (z.numel() != latent_dim_) {
    fail(ErrorKind::ShapeMismatch, "latent code has " + std::to_string(z.numel()) + " entries, expected " +
                                       std::to_string(latent_dim_));
  }
  Tensor row = z.rank() == 2 && z.shape()[0] == 1 ? z : reshape(z, {1, latent_dim_});
  return reshape(decode_rows(row), {height_, width_});
}

LatentStack encode_volume(const SliceAutoencoder& ae, const Volume& v) {
  if (v.height != ae.height() || v.width != ae.width()) {
    fail(ErrorKind::ShapeMismatch, "volume slices are " + std::to_string(v.height) + "x" + std::to_string(v.width) +
                                       ", autoencoder expects " + std::to_string(ae.height()) + "x" +
                                       std::to_string(ae.width()));
  }
  LatentStack z;
  z.dim = ae.latent_dim();
  z.codes.reserve(v.depth);
  for (std::size_t d = 0; d < v.depth; ++d) {
    std::span<const double> s = v.slice(d);
    Tensor row({1, v.slice_size()}, std::vector<double>(s.begin(), s.end()));
    z.codes.push_back(ae.encode_rows(row).data());
  }
  return z;
}

Volume decode_volume(const SliceAutoencoder& ae, const LatentStack& z) {
  if (z.dim != ae.latent_dim()) fail(ErrorKind::ShapeMismatch, "latent stack dimension does not match autoencoder");
  Volume out(z.depth(), ae.height(), ae.width());
  for (std::size_t d = 0; d < z.depth(); ++d) {
    Tensor slice = ae.decode_slice(Tensor({1, z.dim}, z.codes[d]));
    std::copy(slice.data().begin(), slice.data().end(), out.slice(d).begin());
  }
  return out;
}

ChunkedDecode decode_chunked(const SliceAutoencoder& ae, const LatentStack& z, const ChunkSpec& chunk, Tape& tape) {
  if (z.depth() == 0) fail(ErrorKind::InvalidArgument, "cannot decode an empty latent stack");
  chunk.validate(z.depth());
  if (z.dim != ae.latent_dim()) fail(ErrorKind::ShapeMismatch, "latent stack dimension does not match autoencoder");
  ChunkedDecode out;
  std::vector<Tensor> slices;
  slices.reserve(z.depth());
  for (std::size_t d = 0; d < z.depth(); ++d) {
    Tensor code({1, z.dim}, z.codes[d]);
    if (chunk.contains(d)) {
      Tensor leaf = tape.variable(std::move(code));
      out.chunk_latents.push_back(leaf);
      slices.push_back(ae.decode_slice(leaf));
    } else {
      slices.push_back(ae.decode_slice(block_gradient(code)));
    }
  }
  out.volume = concat_slices(slices);
  return out;
}

}  // namespace ctcf
