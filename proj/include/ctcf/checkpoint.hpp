// SPDX-License-Identifier: Apache-2.0
//
// Model checkpoint layout (all integers and floats little-endian):
//
//   magic    9 bytes  "CTCF-MDL\0"
//   version  u16      1
//   kind     u16      0x0001 autoencoder, 0x0100 + ScorerKind for scorers
//   ndims    u32      followed by ndims u32 shape-header words
//   nparams  u64      followed by nparams f64 parameters
//
// Autoencoder header: H, W, encoder layer count, decoder layer count, then
// (in, out, activation) per layer; parameters are each layer's weights then
// bias, encoder first. Scorer header: H, W (linear probe: D, H, W).

#pragma once

#include <filesystem>
#include <string>

#include "ctcf/models.hpp"

namespace ctcf {

std::string serialize_model(const SliceAutoencoder& ae);
std::string serialize_model(const VolumeScorer& f);
SliceAutoencoder deserialize_autoencoder(const std::string& bytes);
VolumeScorer deserialize_scorer(const std::string& bytes);

void save_model(const std::filesystem::path& path, const SliceAutoencoder& ae);
void save_model(const std::filesystem::path& path, const VolumeScorer& f);
SliceAutoencoder load_autoencoder(const std::filesystem::path& path);
VolumeScorer load_scorer(const std::filesystem::path& path);

}  // namespace ctcf
