#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "grading/heightmap.hpp"

namespace grading {

/// HMAP1 layout, all little-endian:
///   "HMAP" | u16 version = 1 | u32 rows | u32 cols | f32 cell_size |
///   rows * cols f32 heights, row-major.
inline constexpr std::uint16_t kHmapVersion = 1;

template <class Tag>
std::vector<std::uint8_t> encode_hmap(const Grid<Tag>& grid);

template <class Tag>
Grid<Tag> decode_hmap(std::span<const std::uint8_t> bytes);

template <class Tag>
void write_hmap(const std::filesystem::path& path, const Grid<Tag>& grid);

template <class Tag>
Grid<Tag> read_hmap(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace grading
