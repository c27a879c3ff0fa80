// SPDX-License-Identifier: Apache-2.0
#include "ctcf/checkpoint.hpp"

#include <string_view>

#include "ctcf/binary.hpp"
#include "ctcf/error.hpp"
#include "ctcf/io.hpp"

namespace ctcf {

namespace {

constexpr std::string_view kMagic{"CTCF-MDL\0", 9};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint16_t kAutoencoderTag = 0x0001;
constexpr std::uint16_t kScorerTagBase = 0x0100;

void write_header(binary::Writer& w, std::uint16_t kind, const std::vector<std::uint32_t>& dims) {
  w.bytes(kMagic);
  w.uint<std::uint16_t>(kVersion);
  w.uint<std::uint16_t>(kind);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(dims.size()));
  for (std::uint32_t d : dims) w.uint(d);
}

void write_params(binary::Writer& w, const std::vector<double>& params) {
  w.uint<std::uint64_t>(params.size());
  for (double p : params) w.f64(p);
}

struct Header {
  std::uint16_t kind = 0;
  std::vector<std::uint32_t> dims;
};

Header read_header(binary::Reader& r) {
  if (r.bytes(kMagic.size()) != kMagic) r.malformed("bad magic");
  if (r.uint<std::uint16_t>() != kVersion) r.malformed("unsupported version");
  Header h;
  h.kind = r.uint<std::uint16_t>();
  const auto n = r.uint<std::uint32_t>();
  if (n > r.remaining() / 4) r.malformed("shape header too long");
  for (std::uint32_t i = 0; i < n; ++i) h.dims.push_back(r.uint<std::uint32_t>());
  return h;
}

std::vector<double> read_params(binary::Reader& r) {
  const auto n = r.uint<std::uint64_t>();
  if (n != r.remaining() / 8 || r.remaining() % 8 != 0) r.malformed("parameter count does not match payload");
  std::vector<double> params(n);
  for (double& p : params) p = r.f64();
  r.expect_end();
  return params;
}

}  // namespace

std::string serialize_model(const SliceAutoencoder& ae) {
  std::vector<std::uint32_t> dims{static_cast<std::uint32_t>(ae.height()), static_cast<std::uint32_t>(ae.width()),
                                  static_cast<std::uint32_t>(ae.encoder().size()),
                                  static_cast<std::uint32_t>(ae.decoder().size())};
  std::vector<double> params;
  for (const auto* layers : {&ae.encoder(), &ae.decoder()}) {
    for (const DenseLayer& l : *layers) {
      dims.push_back(static_cast<std::uint32_t>(l.in));
      dims.push_back(static_cast<std::uint32_t>(l.out));
      dims.push_back(static_cast<std::uint32_t>(l.activation));
      params.insert(params.end(), l.weight.begin(), l.weight.end());
      params.insert(params.end(), l.bias.begin(), l.bias.end());
    }
  }
  binary::Writer w;
  write_header(w, kAutoencoderTag, dims);
  write_params(w, params);
  return w.take();
}

SliceAutoencoder deserialize_autoencoder(const std::string& bytes) {
  binary::Reader r(bytes, "autoencoder checkpoint");
  const Header h = read_header(r);
  if (h.kind != kAutoencoderTag) r.malformed("checkpoint does not hold an autoencoder");
  if (h.dims.size() < 4) r.malformed("short shape header");
  const std::size_t n_enc = h.dims[2], n_dec = h.dims[3];
  if (h.dims.size() != 4 + 3 * (n_enc + n_dec)) r.malformed("shape header does not match layer count");
  const std::vector<double> params = read_params(r);
  std::size_t cursor = 0, dim = 4;
  auto take_layers = [&](std::size_t count) {
    std::vector<DenseLayer> layers;
    for (std::size_t i = 0; i < count; ++i) {
      DenseLayer l;
      l.in = h.dims[dim];
      l.out = h.dims[dim + 1];
      if (h.dims[dim + 2] > 2) r.malformed("unknown activation");
      l.activation = static_cast<Activation>(h.dims[dim + 2]);
      dim += 3;
      const std::size_t need = l.in * l.out + l.out;
      if (params.size() - cursor < need) r.malformed("parameter payload too short");
      l.weight.assign(params.begin() + static_cast<std::ptrdiff_t>(cursor),
                      params.begin() + static_cast<std::ptrdiff_t>(cursor + l.in * l.out));
      cursor += l.in * l.out;
      l.bias.assign(params.begin() + static_cast<std::ptrdiff_t>(cursor),
                    params.begin() + static_cast<std::ptrdiff_t>(cursor + l.out));
      cursor += l.out;
      layers.push_back(std::move(l));
    }
    return layers;
  };
  auto enc = take_layers(n_enc);
  auto dec = take_layers(n_dec);
  if (cursor != params.size()) r.malformed("parameter payload too long");
  return SliceAutoencoder(h.dims[0], h.dims[1], std::move(enc), std::move(dec));
}

std::string serialize_model(const VolumeScorer& f) {
  std::vector<std::uint32_t> dims{static_cast<std::uint32_t>(f.height()), static_cast<std::uint32_t>(f.width())};
  std::vector<double> params;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SegSumHead>) {
          params = {p.weight, p.bias};
        } else if constexpr (std::is_same_v<P, RimDetector>) {
          params = p.slice_weights;
          params.push_back(p.bias);
        } else if constexpr (std::is_same_v<P, ConstantScore>) {
          params = {p.value};
        } else {
          dims.insert(dims.begin(), static_cast<std::uint32_t>(p.depth));
          params = p.weights;
          params.push_back(p.bias);
        }
      },
      f.params());
  binary::Writer w;
  write_header(w, static_cast<std::uint16_t>(kScorerTagBase + static_cast<std::uint16_t>(f.kind())), dims);
  write_params(w, params);
  return w.take();
}

VolumeScorer deserialize_scorer(const std::string& bytes) {
  binary::Reader r(bytes, "scorer checkpoint");
  const Header h = read_header(r);
  std::vector<double> params = read_params(r);
  const auto expect = [&](std::size_t ndims, std::size_t nparams) {
    if (h.dims.size() != ndims) r.malformed("unexpected shape header length");
    if (params.size() != nparams) r.malformed("unexpected parameter count");
  };
  switch (h.kind) {
    case kScorerTagBase + static_cast<std::uint16_t>(ScorerKind::SegSum):
      expect(2, 2);
      return VolumeScorer::seg_sum(h.dims[0], h.dims[1], SegSumHead{params[0], params[1]});
    case kScorerTagBase + static_cast<std::uint16_t>(ScorerKind::RimDetector): {
      if (h.dims.size() != 2) r.malformed("unexpected shape header length");
      expect(2, std::size_t{h.dims[0]} * h.dims[1] + 1);
      const double bias = params.back();
      params.pop_back();
      return VolumeScorer(h.dims[0], h.dims[1], RimDetector{std::move(params), bias});
    }
    case kScorerTagBase + static_cast<std::uint16_t>(ScorerKind::Constant):
      expect(2, 1);
      return VolumeScorer::constant(h.dims[0], h.dims[1], params[0]);
    case kScorerTagBase + static_cast<std::uint16_t>(ScorerKind::LinearProbe): {
      if (h.dims.size() != 3) r.malformed("unexpected shape header length");
      expect(3, std::size_t{h.dims[0]} * h.dims[1] * h.dims[2] + 1);
      const double bias = params.back();
      params.pop_back();
      return VolumeScorer::linear_probe(h.dims[0], h.dims[1], h.dims[2], std::move(params), bias);
    }
    default:
      r.malformed("checkpoint does not hold a scorer");
  }
}

void save_model(const std::filesystem::path& path, const SliceAutoencoder& ae) {
  write_file_atomic(path, serialize_model(ae));
}

void save_model(const std::filesystem::path& path, const VolumeScorer& f) { write_file_atomic(path, serialize_model(f)); }

SliceAutoencoder load_autoencoder(const std::filesystem::path& path) {
  return deserialize_autoencoder(read_file(path));
}

VolumeScorer load_scorer(const std::filesystem::path& path) { return deserialize_scorer(read_file(path)); }

}  // namespace ctcf
