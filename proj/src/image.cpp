#include "wits/image.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "wits/errors.hpp"

namespace wits {

namespace {

constexpr uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

void put_u32be(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

uint32_t get_u32be(const uint8_t* p) {
  return (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
         (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
}

void append_chunk(std::vector<uint8_t>& out, const char type[4],
                  const uint8_t* data, size_t len) {
  put_u32be(out, static_cast<uint32_t>(len));
  size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  if (len > 0) out.insert(out.end(), data, data + len);
  uint32_t crc = static_cast<uint32_t>(
      crc32(0L, out.data() + start, static_cast<uInt>(4 + len)));
  put_u32be(out, crc);
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

std::vector<uint8_t> encode_png(const ImageU8& img) {
  if (img.width <= 0 || img.height <= 0 ||
      (img.channels != 1 && img.channels != 3 && img.channels != 4)) {
    throw DataError("encode_png: unsupported image geometry");
  }
  const int bpp = img.channels;
  const size_t stride = static_cast<size_t>(img.width) * bpp;

  // Filter type 0 (None) on every scanline; simple and deterministic.
  std::vector<uint8_t> raw((stride + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    raw[(stride + 1) * y] = 0;
    std::memcpy(raw.data() + (stride + 1) * y + 1, img.pixels.data() + stride * y,
                stride);
  }

  uLongf comp_cap = compressBound(static_cast<uLong>(raw.size()));
  std::vector<uint8_t> comp(comp_cap);
  if (compress2(comp.data(), &comp_cap, raw.data(), static_cast<uLong>(raw.size()),
                6) != Z_OK) {
    throw DataError("encode_png: deflate failed");
  }
  comp.resize(comp_cap);

  std::vector<uint8_t> out(kSignature, kSignature + 8);
  uint8_t ihdr[13];
  ihdr[0] = static_cast<uint8_t>(img.width >> 24);
  ihdr[1] = static_cast<uint8_t>(img.width >> 16);
  ihdr[2] = static_cast<uint8_t>(img.width >> 8);
  ihdr[3] = static_cast<uint8_t>(img.width);
  ihdr[4] = static_cast<uint8_t>(img.height >> 24);
  ihdr[5] = static_cast<uint8_t>(img.height >> 16);
  ihdr[6] = static_cast<uint8_t>(img.height >> 8);
  ihdr[7] = static_cast<uint8_t>(img.height);
  ihdr[8] = 8;  // bit depth
  ihdr[9] = img.channels == 1 ? 0 : (img.channels == 3 ? 2 : 6);
  ihdr[10] = 0;  // compression
  ihdr[11] = 0;  // filter method
  ihdr[12] = 0;  // no interlace
  append_chunk(out, "IHDR", ihdr, sizeof(ihdr));
  append_chunk(out, "IDAT", comp.data(), comp.size());
  append_chunk(out, "IEND", nullptr, 0);
  return out;
}

ImageU8 decode_png(const uint8_t* data, size_t size) {
  if (size < 8 || std::memcmp(data, kSignature, 8) != 0) {
    throw DataError("decode_png: not a PNG file");
  }
  size_t pos = 8;
  int width = 0, height = 0, channels = 0;
  std::vector<uint8_t> idat;
  bool saw_ihdr = false, saw_iend = false;

  while (pos + 12 <= size && !saw_iend) {
    uint32_t len = get_u32be(data + pos);
    if (pos + 12 + len > size) throw DataError("decode_png: truncated chunk");
    const uint8_t* type = data + pos + 4;
    const uint8_t* body = data + pos + 8;
    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) throw DataError("decode_png: bad IHDR");
      width = static_cast<int>(get_u32be(body));
      height = static_cast<int>(get_u32be(body + 4));
      int depth = body[8], color = body[9], interlace = body[12];
      if (depth != 8 || interlace != 0) {
        throw DataError("decode_png: only 8-bit non-interlaced images supported");
      }
      switch (color) {
        case 0: channels = 1; break;
        case 2: channels = 3; break;
        case 6: channels = 4; break;
        default: throw DataError("decode_png: unsupported color type");
      }
      saw_ihdr = true;
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), body, body + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      saw_iend = true;
    }
    pos += 12 + len;
  }
  if (!saw_ihdr || width <= 0 || height <= 0) throw DataError("decode_png: missing IHDR");

  const int bpp = channels;
  const size_t stride = static_cast<size_t>(width) * bpp;
  std::vector<uint8_t> raw((stride + 1) * height);
  uLongf raw_len = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) !=
          Z_OK ||
      raw_len != raw.size()) {
    throw DataError("decode_png: inflate failed");
  }

  ImageU8 img(width, height, channels);
  std::vector<uint8_t> prev(stride, 0);
  for (int y = 0; y < height; ++y) {
    const uint8_t* line = raw.data() + (stride + 1) * y;
    uint8_t filter = line[0];
    uint8_t* cur = img.pixels.data() + stride * y;
    for (size_t i = 0; i < stride; ++i) {
      int x = line[1 + i];
      int a = i >= static_cast<size_t>(bpp) ? cur[i - bpp] : 0;
      int b = prev[i];
      int c = i >= static_cast<size_t>(bpp) ? prev[i - bpp] : 0;
      switch (filter) {
        case 0: break;
        case 1: x += a; break;
        case 2: x += b; break;
        case 3: x += (a + b) / 2; break;
        case 4: x += paeth(a, b, c); break;
        default: throw DataError("decode_png: bad filter type");
      }
      cur[i] = static_cast<uint8_t>(x & 0xff);
    }
    std::memcpy(prev.data(), cur, stride);
  }
  return img;
}

void write_png(const std::string& path, const ImageU8& img) {
  std::vector<uint8_t> bytes = encode_png(img);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("write failed: " + path);
}

ImageU8 read_png(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  return decode_png(bytes.data(), bytes.size());
}

ImageU8 to_u8(const ImageF& img) {
  ImageU8 out(img.width, img.height, img.channels);
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    float v = std::clamp(img.pixels[i], 0.0f, 1.0f);
    out.pixels[i] = static_cast<uint8_t>(std::lround(v * 255.0f));
  }
  return out;
}

ImageF to_float(const ImageU8& img) {
  ImageF out(img.width, img.height, img.channels);
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    out.pixels[i] = static_cast<float>(img.pixels[i]) * (1.0f / 255.0f);
  }
  return out;
}

ImageF resize_bilinear(const ImageF& src, int out_w, int out_h) {
  if (out_w <= 0 || out_h <= 0) throw DataError("resize_bilinear: bad target size");
  if (out_w == src.width && out_h == src.height) return src;
  ImageF dst(out_w, out_h, src.channels);
  const float sx = static_cast<float>(src.width) / out_w;
  const float sy = static_cast<float>(src.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    float fy = (y + 0.5f) * sy - 0.5f;
    int y0 = static_cast<int>(std::floor(fy));
    float wy = fy - y0;
    int y0c = std::clamp(y0, 0, src.height - 1);
    int y1c = std::clamp(y0 + 1, 0, src.height - 1);
    for (int x = 0; x < out_w; ++x) {
      float fx = (x + 0.5f) * sx - 0.5f;
      int x0 = static_cast<int>(std::floor(fx));
      float wx = fx - x0;
      int x0c = std::clamp(x0, 0, src.width - 1);
      int x1c = std::clamp(x0 + 1, 0, src.width - 1);
      for (int c = 0; c < src.channels; ++c) {
        float top = src.at(y0c, x0c, c) * (1.0f - wx) + src.at(y0c, x1c, c) * wx;
        float bot = src.at(y1c, x0c, c) * (1.0f - wx) + src.at(y1c, x1c, c) * wx;
        dst.at(y, x, c) = top * (1.0f - wy) + bot * wy;
      }
    }
  }
  return dst;
}

std::vector<float> to_gray(const ImageF& img) {
  std::vector<float> gray(static_cast<size_t>(img.width) * img.height);
  if (img.channels == 1) {
    gray.assign(img.pixels.begin(), img.pixels.end());
    return gray;
  }
  if (img.channels != 3 && img.channels != 4) {
    throw DataError("to_gray: expected 1, 3 or 4 channels");
  }
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      gray[static_cast<size_t>(y) * img.width + x] =
          0.299f * img.at(y, x, 0) + 0.587f * img.at(y, x, 1) + 0.114f * img.at(y, x, 2);
    }
  }
  return gray;
}

}  // namespace wits
