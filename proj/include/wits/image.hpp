#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wits {

// Row-major, channel-interleaved 8-bit image (1 = gray, 3 = RGB, 4 = RGBA).
struct ImageU8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;

  ImageU8() = default;
  ImageU8(int w, int h, int c)
      : width(w), height(h), channels(c),
        pixels(static_cast<size_t>(w) * h * c, 0) {}

  uint8_t& at(int y, int x, int c) {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  uint8_t at(int y, int x, int c) const {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }
};

// Same layout with float samples, nominally in [0, 1].
struct ImageF {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<float> pixels;

  ImageF() = default;
  ImageF(int w, int h, int c)
      : width(w), height(h), channels(c),
        pixels(static_cast<size_t>(w) * h * c, 0.0f) {}

  float& at(int y, int x, int c) {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
  }
};

// Minimal PNG codec (8-bit gray/RGB/RGBA, non-interlaced) over zlib.
// Encoding settings are fixed so identical pixels give identical bytes.
std::vector<uint8_t> encode_png(const ImageU8& img);
ImageU8 decode_png(const uint8_t* data, size_t size);

void write_png(const std::string& path, const ImageU8& img);
ImageU8 read_png(const std::string& path);

ImageU8 to_u8(const ImageF& img);
ImageF to_float(const ImageU8& img);

// Bilinear resize with half-pixel centers and edge clamping.
ImageF resize_bilinear(const ImageF& src, int out_w, int out_h);

// ITU-R 601 luma from an RGB image; gray images pass through.
std::vector<float> to_gray(const ImageF& img);

}  // namespace wits
