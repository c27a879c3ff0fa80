// SPDX-License-Identifier: Apache-2.0
#include "ctcf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "ctcf/binary.hpp"
#include "ctcf/error.hpp"

namespace ctcf {

namespace {
constexpr std::string_view kCtvfMagic{"CTVF", 4};
constexpr std::uint16_t kCtvfVersion = 1;
}  // namespace

std::string encode_ctvf(const Volume& v) {
  binary::Writer w;
  w.bytes(kCtvfMagic);
  w.uint<std::uint16_t>(kCtvfVersion);
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(v.depth));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(v.height));
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(v.width));
  for (double x : v.voxels) w.f64(x);
  return w.take();
}

Volume decode_ctvf(const std::string& bytes, const std::string& context) {
  binary::Reader r(bytes, context);
  if (r.bytes(4) != kCtvfMagic) r.malformed("bad magic");
  if (r.uint<std::uint16_t>() != kCtvfVersion) r.malformed("unsupported version");
  const std::size_t d = r.uint<std::uint32_t>();
  const std::size_t h = r.uint<std::uint32_t>();
  const std::size_t w = r.uint<std::uint32_t>();
  if (d == 0 || h == 0 || w == 0) r.malformed("zero dimension");
  if (r.remaining() != 8 * d * h * w) r.malformed("payload length does not match dimensions");
  std::vector<double> voxels(d * h * w);
  for (double& x : voxels) x = r.f64();
  return Volume(d, h, w, std::move(voxels));
}

void write_ctvf(const std::filesystem::path& path, const Volume& v) { write_file_atomic(path, encode_ctvf(v)); }

Volume read_ctvf(const std::filesystem::path& path) { return decode_ctvf(read_file(path), path.string()); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::MissingFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::MissingFile, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorKind::MissingFile, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::MissingFile, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string encode_pgm(std::span<const double> pixels, std::size_t height, std::size_t width, double lo, double hi) {
  if (pixels.size() != height * width) fail(ErrorKind::ShapeMismatch, "pgm: pixel count does not match dimensions");
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  const double range = hi - lo;
  for (double p : pixels) {
    double t = range > 0.0 ? (p - lo) / range : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
  }
  return out;
}

PgmScale write_pgm_slices(const std::filesystem::path& dir, const std::string& prefix, const Volume& v,
                          std::size_t first, std::size_t last) {
  PgmScale scale;
  if (!v.voxels.empty()) {
    auto [mn, mx] = std::minmax_element(v.voxels.begin(), v.voxels.end());
    scale.min = *mn;
    scale.max = *mx;
  }
  last = std::min(last, v.depth);
  for (std::size_t d = first; d < last; ++d) {
    char name[32];
    std::snprintf(name, sizeof(name), "_%03zu.pgm", d);
    write_file_atomic(dir / (prefix + name), encode_pgm(v.slice(d), v.height, v.width, scale.min, scale.max));
  }
  nlohmann::ordered_json side;
  side["min"] = scale.min;
  side["max"] = scale.max;
  side["slices"] = {first, last};
  side["mapping"] = "pixel = round(255 * (value - min) / (max - min))";
  write_file_atomic(dir / (prefix + ".json"), side.dump(2) + "\n");
  return scale;
}

}  // namespace ctcf
