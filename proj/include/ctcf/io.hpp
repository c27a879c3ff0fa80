// SPDX-License-Identifier: Apache-2.0
//
// File formats and export helpers.
//
// CTVF volume file (little-endian):
//   magic "CTVF" | version u16 = 1 | D u32 | H u32 | W u32 | D*H*W f64 voxels,
//   row-major, slice by slice.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ctcf/volume.hpp"

namespace ctcf {

std::string encode_ctvf(const Volume& v);
Volume decode_ctvf(const std::string& bytes, const std::string& context = "ctvf");
void write_ctvf(const std::filesystem::path& path, const Volume& v);
Volume read_ctvf(const std::filesystem::path& path);

/// Reads a whole file; MissingFile if it does not exist.
std::string read_file(const std::filesystem::path& path);
/// Writes `path.tmp` then renames it over `path`. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Binary PGM (P5) of one slice, 8-bit, value = round(255 * (x - lo) / (hi - lo)).
std::string encode_pgm(std::span<const double> pixels, std::size_t height, std::size_t width, double lo, double hi);

struct PgmScale {
  double min = 0.0;
  double max = 0.0;
};

/// Writes prefix_<slice>.pgm for every slice in [first, last) plus
/// prefix.json recording the per-volume min/max used for normalisation.
PgmScale write_pgm_slices(const std::filesystem::path& dir, const std::string& prefix, const Volume& v,
                          std::size_t first, std::size_t last);

}  // namespace ctcf
