#pragma once

#include "sedge/image.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace sedge {

/// File-system or format failure (maps to the I/O exit code).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structurally invalid or mismatched model or data (maps to the
/// data/model mismatch exit code).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gray, gray+alpha, RGB and RGBA PNGs of 8 or 16 bits. Alpha is dropped;
/// values are scaled to [0,1].
Image read_png(const std::filesystem::path& path);

/// Integer PNG samples of a single-channel file (e.g. a segment-id map).
LabelMap read_png_labels(const std::filesystem::path& path);

/// 1 or 3 planes, values clamped to [0,1] and rounded to the bit depth.
void write_png(const std::filesystem::path& path, const Image& img, int bit_depth = 8);
void write_png(const std::filesystem::path& path, const FloatPlane& plane, int bit_depth = 8);

/// Single-channel 16-bit PNG of label values in [0, 65535].
void write_png_labels(const std::filesystem::path& path, const LabelMap& labels);

/// Raw plane: width u32, height u32 (little-endian), then row-major f32.
void write_raw_plane(const std::filesystem::path& path, const FloatPlane& plane);
FloatPlane read_raw_plane(const std::filesystem::path& path);

}  // namespace sedge
