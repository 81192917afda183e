#pragma once

#include "sedge/io.hpp"
#include "sedge/tree.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sedge {

inline constexpr char kModelMagic[4] = {'S', 'E', 'D', 'F'};
inline constexpr std::uint32_t kModelVersion = 1;

/// Binary model layout, little-endian throughout:
///
///   "SEDF" | version u32 | ChannelParams | ForestParams | n_input_planes u32
///   | n_trees u32 | per tree: n_features u32, n_nodes u32, nodes
///   (is_leaf u8, feature u32, threshold f32, left u32, right u32),
///   n_leaves u32, leaves (d_out^2 u8 segment ids, ceil(d_out^2/8) byte edge
///   bitmask, count u32) | CRC32 of everything before it.
std::vector<std::uint8_t> serialize_forest(const Forest& forest);

/// Throws DataError on a bad magic, version, CRC or structure.
Forest deserialize_forest(const std::vector<std::uint8_t>& bytes);

void save_forest(const std::filesystem::path& path, const Forest& forest);
Forest load_forest(const std::filesystem::path& path);

}  // namespace sedge
