#include "wits/cube.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "wits/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "cube container assumes a little-endian host");

namespace wits {

ImageCube build_cube(const std::vector<AnnotationRecord>& records,
                     const CropStore& store, const CubeOptions& opts) {
  if (records.empty()) throw DataError("build_cube: no records");
  const std::string& subject = records.front().subject_id;
  for (size_t i = 0; i < records.size(); ++i) {
    if (records[i].subject_id != subject) {
      throw DataError("build_cube: records span multiple subjects");
    }
    if (i > 0 && records[i].frame_index <= records[i - 1].frame_index) {
      throw DataError("build_cube: frame indices must be strictly increasing");
    }
  }

  const int k = static_cast<int>(records.size());
  int size = opts.target_size > 0 ? opts.target_size : store.crop_size();
  ImageCube cube(size, size, 3 * k);
  for (int j = 0; j < k; ++j) {
    ImageF crop = store.load(records[j].lecture_id, records[j].subject_id,
                             records[j].frame_index);
    if (opts.target_size > 0) crop = resize_bilinear(crop, size, size);
    if (crop.width != size || crop.height != size) {
      throw DataError("build_cube: crop size mismatch");
    }
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        for (int c = 0; c < 3; ++c) {
          cube.at(y, x, 3 * j + c) = crop.at(y, x, c);
        }
      }
    }
  }
  return cube;
}

ImageF extract_frame(const ImageCube& cube, int frame) {
  if (frame < 0 || 3 * frame + 2 >= cube.channels) {
    throw DataError("extract_frame: frame out of range");
  }
  ImageF img(cube.width, cube.height, 3);
  for (int y = 0; y < cube.height; ++y) {
    for (int x = 0; x < cube.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        img.at(y, x, c) = cube.at(y, x, 3 * frame + c);
      }
    }
  }
  return img;
}

namespace {
constexpr char kMagic[4] = {'W', 'C', 'U', 'B'};
constexpr uint16_t kVersion = 1;
}  // namespace

void write_cube(const std::string& path, const ImageCube& cube) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open for writing: " + path);
  f.write(kMagic, 4);
  f.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
  uint32_t dims[3] = {static_cast<uint32_t>(cube.height),
                      static_cast<uint32_t>(cube.width),
                      static_cast<uint32_t>(cube.channels)};
  f.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  f.write(reinterpret_cast<const char*>(cube.data.data()),
          static_cast<std::streamsize>(cube.data.size() * sizeof(float)));
  if (!f) throw DataError("write failed: " + path);
}

ImageCube read_cube(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open: " + path);
  char magic[4];
  uint16_t version = 0;
  uint32_t dims[3];
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&version), sizeof(version));
  f.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!f || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("not a WCUB file: " + path);
  }
  if (version != kVersion) {
    throw DataError("unsupported WCUB version in: " + path);
  }
  ImageCube cube(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                 static_cast<int>(dims[2]));
  f.read(reinterpret_cast<char*>(cube.data.data()),
         static_cast<std::streamsize>(cube.data.size() * sizeof(float)));
  if (!f) throw DataError("truncated WCUB file: " + path);
  return cube;
}

}  // namespace wits
