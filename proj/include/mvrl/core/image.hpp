#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mvrl {

// Interleaved 8-bit image, row-major, origin top-left.
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> data;

  Image8() = default;
  Image8(int w, int h, int c, uint8_t fill = 0)
      : width(w), height(h), channels(c), data(size_t(w) * h * c, fill) {}

  uint8_t& at(int x, int y, int c) { return data[(size_t(y) * width + x) * channels + c]; }
  uint8_t at(int x, int y, int c) const { return data[(size_t(y) * width + x) * channels + c]; }
  size_t size() const { return data.size(); }
  bool same_shape(const Image8& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

// Single-channel float plane (metric depth, similarity maps, heat maps).
struct PlaneF {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  PlaneF() = default;
  PlaneF(int w, int h, float fill = 0.f) : width(w), height(h), data(size_t(w) * h, fill) {}

  float& at(int x, int y) { return data[size_t(y) * width + x]; }
  float at(int x, int y) const { return data[size_t(y) * width + x]; }
};

// PNG: 8-bit gray/RGB/RGBA, no interlace. Throws std::runtime_error on malformed input.
void write_png(const std::string& path, const Image8& img);
Image8 read_png(const std::string& path);

// JPEG decode (always returns RGB) and baseline encode, via libjpeg.
Image8 read_jpeg(const std::string& path);
void write_jpeg(const std::string& path, const Image8& img, int quality = 90);

// Dispatch on file extension (.png/.jpg/.jpeg).
Image8 read_image(const std::string& path);

// zlib helpers shared by PNG io and checkpoint compression
std::vector<uint8_t> zlib_compress(const uint8_t* data, size_t n, int level = 6);
std::vector<uint8_t> zlib_decompress(const uint8_t* data, size_t n, size_t expected_size_hint = 0);

}  // namespace mvrl
