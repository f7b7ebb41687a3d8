#pragma once

#include <filesystem>
#include <iosfwd>

#include "sym3d/model.hpp"

namespace sym3d {

// Binary formats, all little-endian:
//
//   plane    "STPL" u32 version=1, u32 N, u32 C, u8 axis, u8 axis ('X'/'Y'/'Z'),
//            then N*N*C f64 in (i, j, c) row-major order
//   kernels  "STVK" then 294 f64: xy, xz, yz kernels, each (row, col, channel)
//   decoder  "STMD" u32 version=1, u8 head, u32 input, u32 hidden, u32 output,
//            then w1 b1 w2 b2 w3 b3, matrices row-major
//   model    "STMF" u32 version=1, u8 use_vsa, u8 use_tex_sym, then geometry
//            planes (xy, xz, yz), kernels, sdf decoder, texture planes,
//            color decoder

inline constexpr std::uint32_t kFormatVersion = 1;

void write_plane(std::ostream& os, const FeaturePlane<double>& plane);
FeaturePlane<double> read_plane(std::istream& is);

void write_kernels(std::ostream& os, const VsaModule<double>& m);
VsaModule<double> read_kernels(std::istream& is);

void write_decoder(std::ostream& os, const MlpDecoder<double>& dec);
MlpDecoder<double> read_decoder(std::istream& is);

void write_model(std::ostream& os, const SceneModel<double>& m);
SceneModel<double> read_model(std::istream& is);

void save_model(const SceneModel<double>& m, const std::filesystem::path& path);
SceneModel<double> load_model(const std::filesystem::path& path);

}  // namespace sym3d
