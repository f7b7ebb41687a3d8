#include "sym3d/serialize.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace sym3d {

namespace {

void put_bytes(std::ostream& os, const void* data, std::size_t n) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!os) throw IoError("serialize: write failed");
}

void get_bytes(std::istream& is, void* data, std::size_t n) {
  is.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n)) throw FormatError("serialize: truncated input");
}

void put_u8(std::ostream& os, std::uint8_t v) { put_bytes(os, &v, 1); }

std::uint8_t get_u8(std::istream& is) {
  std::uint8_t v;
  get_bytes(is, &v, 1);
  return v;
}

void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<unsigned char, 4> b{};
  for (int k = 0; k < 4; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  put_bytes(os, b.data(), b.size());
}

std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  get_bytes(is, b.data(), b.size());
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
  return v;
}

void put_f64s(std::ostream& os, const double* data, Index n) {
  std::vector<unsigned char> buf(static_cast<std::size_t>(n) * 8);
  for (Index q = 0; q < n; ++q) {
    const auto bits = std::bit_cast<std::uint64_t>(data[q]);
    for (int k = 0; k < 8; ++k) buf[static_cast<std::size_t>(q) * 8 + k] = static_cast<unsigned char>(bits >> (8 * k));
  }
  put_bytes(os, buf.data(), buf.size());
}

void get_f64s(std::istream& is, double* data, Index n) {
  std::vector<unsigned char> buf(static_cast<std::size_t>(n) * 8);
  get_bytes(is, buf.data(), buf.size());
  for (Index q = 0; q < n; ++q) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(buf[static_cast<std::size_t>(q) * 8 + k]) << (8 * k);
    data[q] = std::bit_cast<double>(bits);
  }
}

void put_magic(std::ostream& os, const char (&magic)[5]) { put_bytes(os, magic, 4); }

void expect_magic(std::istream& is, const char (&magic)[5]) {
  char got[4];
  get_bytes(is, got, 4);
  if (std::memcmp(got, magic, 4) != 0) throw FormatError(std::string("serialize: expected magic ") + magic);
}

void expect_version(std::istream& is) {
  if (get_u32(is) != kFormatVersion) throw FormatError("serialize: unsupported format version");
}

Axis axis_from_label(std::uint8_t c) {
  if (c < 'X' || c > 'Z') throw FormatError("serialize: bad axis label");
  return static_cast<Axis>(c - 'X');
}

// Row-major write of a column-major Eigen matrix.
void put_matrix(std::ostream& os, const MatrixX<double>& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  put_f64s(os, rm.data(), rm.size());
}

MatrixX<double> get_matrix(std::istream& is, Index rows, Index cols) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  get_f64s(is, rm.data(), rm.size());
  return rm;
}

constexpr std::uint32_t kMaxDim = 1u << 16;

}  // namespace

void write_plane(std::ostream& os, const FeaturePlane<double>& plane) {
  put_magic(os, "STPL");
  put_u32(os, kFormatVersion);
  put_u32(os, static_cast<std::uint32_t>(plane.resolution()));
  put_u32(os, static_cast<std::uint32_t>(plane.channels()));
  put_u8(os, static_cast<std::uint8_t>(axis_label(plane.first_axis())));
  put_u8(os, static_cast<std::uint8_t>(axis_label(plane.second_axis())));
  put_f64s(os, plane.data().data(), plane.size());
}

FeaturePlane<double> read_plane(std::istream& is) {
  expect_magic(is, "STPL");
  expect_version(is);
  const std::uint32_t n = get_u32(is);
  const std::uint32_t c = get_u32(is);
  if (n < 2 || c < 1 || n > kMaxDim || c > kMaxDim) throw FormatError("read_plane: bad dimensions");
  const Axis a = axis_from_label(get_u8(is));
  const Axis b = axis_from_label(get_u8(is));
  VectorX<double> data(Index(n) * n * c);
  get_f64s(is, data.data(), data.size());
  return FeaturePlane<double>(n, c, a, b, std::move(data));
}

void write_kernels(std::ostream& os, const VsaModule<double>& m) {
  put_magic(os, "STVK");
  for (const auto* k : m.kernels()) put_f64s(os, k->weights.data(), k->weights.size());
}

VsaModule<double> read_kernels(std::istream& is) {
  expect_magic(is, "STVK");
  VsaModule<double> m;
  for (auto* k : m.kernels()) get_f64s(is, k->weights.data(), k->weights.size());
  return m;
}

void write_decoder(std::ostream& os, const MlpDecoder<double>& dec) {
  put_magic(os, "STMD");
  put_u32(os, kFormatVersion);
  put_u8(os, static_cast<std::uint8_t>(dec.head));
  put_u32(os, static_cast<std::uint32_t>(dec.input_width()));
  put_u32(os, static_cast<std::uint32_t>(dec.hidden_width()));
  put_u32(os, static_cast<std::uint32_t>(dec.output_width()));
  put_matrix(os, dec.w1);
  put_f64s(os, dec.b1.data(), dec.b1.size());
  put_matrix(os, dec.w2);
  put_f64s(os, dec.b2.data(), dec.b2.size());
  put_matrix(os, dec.w3);
  put_f64s(os, dec.b3.data(), dec.b3.size());
}

MlpDecoder<double> read_decoder(std::istream& is) {
  expect_magic(is, "STMD");
  expect_version(is);
  const std::uint8_t head = get_u8(is);
  if (head > 1) throw FormatError("read_decoder: bad head kind");
  const std::uint32_t in = get_u32(is), hidden = get_u32(is), out = get_u32(is);
  if (in < 1 || hidden < 1 || in > kMaxDim || hidden > kMaxDim) throw FormatError("read_decoder: bad widths");
  auto dec = MlpDecoder<double>::zeros(static_cast<HeadKind>(head), in, hidden);
  if (out != static_cast<std::uint32_t>(dec.output_width())) throw FormatError("read_decoder: head width mismatch");
  dec.w1 = get_matrix(is, hidden, in);
  get_f64s(is, dec.b1.data(), dec.b1.size());
  dec.w2 = get_matrix(is, hidden, hidden);
  get_f64s(is, dec.b2.data(), dec.b2.size());
  dec.w3 = get_matrix(is, out, hidden);
  get_f64s(is, dec.b3.data(), dec.b3.size());
  return dec;
}

void write_model(std::ostream& os, const SceneModel<double>& m) {
  put_magic(os, "STMF");
  put_u32(os, kFormatVersion);
  put_u8(os, m.use_vsa ? 1 : 0);
  put_u8(os, m.use_tex_sym ? 1 : 0);
  for (const auto* p : m.geometry.planes()) write_plane(os, *p);
  write_kernels(os, m.vsa);
  write_decoder(os, m.sdf_decoder);
  for (const auto* p : m.texture.planes()) write_plane(os, *p);
  write_decoder(os, m.color_decoder);
}

SceneModel<double> read_model(std::istream& is) {
  expect_magic(is, "STMF");
  expect_version(is);
  const bool use_vsa = get_u8(is) != 0;
  const bool use_tex_sym = get_u8(is) != 0;
  auto gxy = read_plane(is);
  auto gxz = read_plane(is);
  auto gyz = read_plane(is);
  GeometryTriplane<double> geometry(std::move(gxy), std::move(gxz), std::move(gyz));
  auto vsa = read_kernels(is);
  auto sdf_decoder = read_decoder(is);
  auto txy = read_plane(is);
  auto txz = read_plane(is);
  auto tyz = read_plane(is);
  TextureTriplane<double> texture(std::move(txy), std::move(txz), std::move(tyz));
  auto color_decoder = read_decoder(is);
  if (sdf_decoder.head != HeadKind::SdfDeform || color_decoder.head != HeadKind::Color) {
    throw FormatError("read_model: decoder heads out of order");
  }
  if (sdf_decoder.input_width() != geometry.channels() || color_decoder.input_width() != texture.channels()) {
    throw FormatError("read_model: decoder input width does not match plane channels");
  }
  SceneModel<double> m(geometry.resolution(), geometry.channels(), sdf_decoder.hidden_width());
  m.geometry = std::move(geometry);
  m.vsa = vsa;
  m.sdf_decoder = std::move(sdf_decoder);
  m.texture = std::move(texture);
  m.color_decoder = std::move(color_decoder);
  m.use_vsa = use_vsa;
  m.use_tex_sym = use_tex_sym;
  return m;
}

void save_model(const SceneModel<double>& m, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("save_model: cannot open " + path.string());
  write_model(os, m);
}

SceneModel<double> load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_model: cannot open " + path.string());
  return read_model(is);
}

}  // namespace sym3d
