#include "grading/hmap_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

namespace grading {

namespace {

constexpr std::uint8_t kMagic[4] = {0x48, 0x4D, 0x41, 0x50};
constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 4 + 4;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
  }
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

float get_f32(std::span<const std::uint8_t> b, std::size_t at) {
  return std::bit_cast<float>(get_u32(b, at));
}

}  // namespace

template <class Tag>
std::vector<std::uint8_t> encode_hmap(const Grid<Tag>& grid) {
  if (grid.rows() > UINT32_MAX || grid.cols() > UINT32_MAX) {
    throw Error(ErrorCode::invalid_dimension, "grid too large for HMAP1");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 4 * grid.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u16(out, kHmapVersion);
  put_u32(out, static_cast<std::uint32_t>(grid.rows()));
  put_u32(out, static_cast<std::uint32_t>(grid.cols()));
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(grid.cell_size())));
  for (double v : grid.values()) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

template <class Tag>
Grid<Tag> decode_hmap(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw Error(ErrorCode::parse_error, "not an HMAP1 stream");
  }
  const auto version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kHmapVersion) {
    throw Error(ErrorCode::parse_error, "unsupported HMAP version " + std::to_string(version));
  }
  const std::uint32_t rows = get_u32(bytes, 6);
  const std::uint32_t cols = get_u32(bytes, 10);
  const float cell = get_f32(bytes, 14);
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  if (bytes.size() != kHeaderSize + 4 * count) {
    throw Error(ErrorCode::parse_error, "HMAP1 payload size does not match its header");
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const float v = get_f32(bytes, kHeaderSize + 4 * i);
    if (!std::isfinite(v)) throw Error(ErrorCode::parse_error, "HMAP1 height is not finite");
    values[i] = v;
  }
  return Grid<Tag>(rows, cols, static_cast<double>(cell), std::move(values));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_failure, "short write to " + path.string());
}

template <class Tag>
void write_hmap(const std::filesystem::path& path, const Grid<Tag>& grid) {
  write_file_bytes(path, encode_hmap(grid));
}

template <class Tag>
Grid<Tag> read_hmap(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_hmap<Tag>(bytes);
}

template std::vector<std::uint8_t> encode_hmap(const HeightMap&);
template std::vector<std::uint8_t> encode_hmap(const DiffMap&);
template HeightMap decode_hmap<HeightTag>(std::span<const std::uint8_t>);
template DiffMap decode_hmap<DiffTag>(std::span<const std::uint8_t>);
template void write_hmap(const std::filesystem::path&, const HeightMap&);
template void write_hmap(const std::filesystem::path&, const DiffMap&);
template HeightMap read_hmap<HeightTag>(const std::filesystem::path&);
template DiffMap read_hmap<DiffTag>(const std::filesystem::path&);

}  // namespace grading
