#include "sedge/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace sedge {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  return f;
}

void on_png_error(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
  if (buf) *buf = msg;
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;  // after stripping nothing; alpha included
  int depth = 0;     // 8 or 16
  std::vector<std::uint16_t> samples;  // row-major interleaved
};

Decoded decode(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw IoError(path.string() + ": not a PNG file");
  std::string err;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialization failed");
  }
  Decoded out;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> raw;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": " + (err.empty() ? "PNG decode error" : err));
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_swap(png);  // host little-endian samples
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.depth = png_get_bit_depth(png, info);
  const size_t stride = png_get_rowbytes(png, info);
  raw.resize(stride * out.height);
  rows.resize(out.height);
  for (int r = 0; r < out.height; ++r) rows[r] = raw.data() + stride * r;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  out.samples.resize(static_cast<size_t>(out.width) * out.height * out.channels);
  if (out.depth == 16) {
    for (size_t i = 0; i < out.samples.size(); ++i) {
      std::uint16_t v;
      std::memcpy(&v, raw.data() + (i / (out.width * out.channels)) * stride + 2 * (i % (out.width * out.channels)),
                  2);
      out.samples[i] = v;
    }
  } else {
    for (size_t i = 0; i < out.samples.size(); ++i)
      out.samples[i] = raw[(i / (out.width * out.channels)) * stride + i % (out.width * out.channels)];
  }
  return out;
}

void encode(const std::filesystem::path& path, int width, int height, int channels, int depth,
            const std::vector<std::uint16_t>& samples) {
  if (depth != 8 && depth != 16) throw std::invalid_argument("PNG bit depth must be 8 or 16");
  FilePtr f = open_file(path, "wb");
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, on_png_error, on_png_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialization failed");
  }
  const size_t stride = static_cast<size_t>(width) * channels * (depth / 8);
  std::vector<unsigned char> raw(stride * height);
  for (size_t i = 0; i < samples.size(); ++i) {
    if (depth == 16) {
      raw[2 * i] = static_cast<unsigned char>(samples[i] >> 8);  // PNG is big-endian
      raw[2 * i + 1] = static_cast<unsigned char>(samples[i] & 0xff);
    } else {
      raw[i] = static_cast<unsigned char>(samples[i]);
    }
  }
  std::vector<png_bytep> rows(height);
  for (int r = 0; r < height; ++r) rows[r] = raw.data() + stride * r;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string() + ": " + (err.empty() ? "PNG encode error" : err));
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, depth, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(f.get()) != 0) throw IoError("write failed: " + path.string());
}

std::uint16_t quantize(float v, int depth) {
  const double maxv = depth == 16 ? 65535.0 : 255.0;
  return static_cast<std::uint16_t>(std::lround(std::clamp(static_cast<double>(v), 0.0, 1.0) * maxv));
}

}  // namespace

Image read_png(const std::filesystem::path& path) {
  const Decoded d = decode(path);
  const int colors = d.channels >= 3 ? 3 : 1;
  const double scale = 1.0 / (d.depth == 16 ? 65535.0 : 255.0);
  Image img = Image::zeros(d.height, d.width, colors);
  for (int r = 0; r < d.height; ++r)
    for (int c = 0; c < d.width; ++c)
      for (int k = 0; k < colors; ++k)
        img.planes[k](r, c) =
            static_cast<float>(d.samples[(static_cast<size_t>(r) * d.width + c) * d.channels + k] * scale);
  return img;
}

LabelMap read_png_labels(const std::filesystem::path& path) {
  const Decoded d = decode(path);
  if (d.channels != 1) throw IoError(path.string() + ": label PNG must be single-channel");
  LabelMap out(d.height, d.width);
  for (int r = 0; r < d.height; ++r)
    for (int c = 0; c < d.width; ++c) out(r, c) = d.samples[static_cast<size_t>(r) * d.width + c];
  return out;
}

void write_png(const std::filesystem::path& path, const Image& img, int bit_depth) {
  if (img.n_planes() != 1 && img.n_planes() != 3) throw std::invalid_argument("PNG output needs 1 or 3 planes");
  const int n = img.n_planes();
  std::vector<std::uint16_t> s(static_cast<size_t>(img.height()) * img.width() * n);
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c)
      for (int k = 0; k < n; ++k)
        s[(static_cast<size_t>(r) * img.width() + c) * n + k] = quantize(img.planes[k](r, c), bit_depth);
  encode(path, img.width(), img.height(), n, bit_depth, s);
}

void write_png(const std::filesystem::path& path, const FloatPlane& plane, int bit_depth) {
  write_png(path, Image({plane}), bit_depth);
}

void write_png_labels(const std::filesystem::path& path, const LabelMap& labels) {
  std::vector<std::uint16_t> s(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const auto v = labels.data()[i];
    if (v < 0 || v > 65535) throw std::invalid_argument("label out of 16-bit range");
    s[i] = static_cast<std::uint16_t>(v);
  }
  encode(path, static_cast<int>(labels.cols()), static_cast<int>(labels.rows()), 1, 16, s);
}

void write_raw_plane(const std::filesystem::path& path, const FloatPlane& plane) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string());
  auto put_u32 = [&](std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
  };
  put_u32(static_cast<std::uint32_t>(plane.cols()));
  put_u32(static_cast<std::uint32_t>(plane.rows()));
  for (Eigen::Index i = 0; i < plane.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, plane.data() + i, 4);
    put_u32(bits);
  }
  if (!os) throw IoError("write failed: " + path.string());
}

FloatPlane read_raw_plane(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  auto get_u32 = [&]() {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError(path.string() + ": truncated raw plane");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  };
  const std::uint32_t w = get_u32();
  const std::uint32_t h = get_u32();
  if (static_cast<std::uint64_t>(w) * h > (1ull << 30)) throw IoError(path.string() + ": implausible raw size");
  FloatPlane p(h, w);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const std::uint32_t bits = get_u32();
    std::memcpy(p.data() + i, &bits, 4);
  }
  return p;
}

}  // namespace sedge
