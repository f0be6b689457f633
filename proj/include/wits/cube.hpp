#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wits/annotations.hpp"
#include "wits/image.hpp"

namespace wits {

// H x W x (3k) float tensor built by channel-concatenating k RGB frames of
// one subject. Layout is row-major and channel-interleaved: element
// (y, x, c) sits at ((y*W + x)*C + c), and frame j occupies channels
// 3j..3j+2 so spatially aligned pixels share (y, x).
struct ImageCube {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  ImageCube() = default;
  ImageCube(int h, int w, int c)
      : height(h), width(w), channels(c),
        data(static_cast<size_t>(h) * w * c, 0.0f) {}

  float& at(int y, int x, int c) {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  int frames() const { return channels / 3; }
};

struct CubeOptions {
  // When positive, crops are bilinearly resized to this square size before
  // concatenation (used by the image-size protocol).
  int target_size = 0;
};

// Concatenates the records' crops into one cube. Requires all records to
// share a subject and have strictly increasing frame indices.
ImageCube build_cube(const std::vector<AnnotationRecord>& records,
                     const CropStore& store, const CubeOptions& opts = {});

// Inverse of the concatenation: frame j as an RGB float image.
ImageF extract_frame(const ImageCube& cube, int frame);

// "WCUB" container: magic, version u16, dims (u32 height, width, channels),
// then little-endian float32 data, row-major.
void write_cube(const std::string& path, const ImageCube& cube);
ImageCube read_cube(const std::string& path);

}  // namespace wits
