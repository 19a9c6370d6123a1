#include "mvrl/core/image.hpp"

#include <jpeglib.h>
#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mvrl {

std::vector<uint8_t> zlib_compress(const uint8_t* data, size_t n, int level) {
  uLongf bound = compressBound(uLong(n));
  std::vector<uint8_t> out(bound);
  if (compress2(out.data(), &bound, data, uLong(n), level) != Z_OK)
    throw std::runtime_error("zlib compress failed");
  out.resize(bound);
  return out;
}

std::vector<uint8_t> zlib_decompress(const uint8_t* data, size_t n, size_t hint) {
  std::vector<uint8_t> out(hint ? hint : std::max<size_t>(4 * n, 1024));
  for (;;) {
    uLongf dst_len = uLongf(out.size());
    int rc = uncompress(out.data(), &dst_len, data, uLong(n));
    if (rc == Z_OK) {
      out.resize(dst_len);
      return out;
    }
    if (rc == Z_BUF_ERROR && out.size() < (size_t(1) << 31)) {
      out.resize(out.size() * 2);
      continue;
    }
    throw std::runtime_error("zlib decompress failed");
  }
}

namespace {

void put_u32_be(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(uint8_t(x >> 24));
  v.push_back(uint8_t(x >> 16));
  v.push_back(uint8_t(x >> 8));
  v.push_back(uint8_t(x));
}

uint32_t get_u32_be(const uint8_t* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

void write_chunk(std::ofstream& f, const char type[4], const std::vector<uint8_t>& payload) {
  std::vector<uint8_t> head;
  put_u32_be(head, uint32_t(payload.size()));
  f.write(reinterpret_cast<const char*>(head.data()), 4);
  f.write(type, 4);
  if (!payload.empty()) f.write(reinterpret_cast<const char*>(payload.data()), payload.size());
  uLong crc = crc32(0, reinterpret_cast<const Bytef*>(type), 4);
  if (!payload.empty()) crc = crc32(crc, payload.data(), uInt(payload.size()));
  std::vector<uint8_t> tail;
  put_u32_be(tail, uint32_t(crc));
  f.write(reinterpret_cast<const char*>(tail.data()), 4);
}

int paeth(int a, int b, int c) {
  int p = a + b - c;
  int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

void write_png(const std::string& path, const Image8& img) {
  if (img.channels != 1 && img.channels != 3 && img.channels != 4)
    throw std::runtime_error("write_png: unsupported channel count");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_png: cannot open " + path);
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  f.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<uint8_t> ihdr;
  put_u32_be(ihdr, uint32_t(img.width));
  put_u32_be(ihdr, uint32_t(img.height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(img.channels == 1 ? 0 : (img.channels == 3 ? 2 : 6));
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  write_chunk(f, "IHDR", ihdr);

  const size_t stride = size_t(img.width) * img.channels;
  std::vector<uint8_t> raw;
  raw.reserve((stride + 1) * img.height);
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter none
    raw.insert(raw.end(), img.data.begin() + y * stride, img.data.begin() + (y + 1) * stride);
  }
  write_chunk(f, "IDAT", zlib_compress(raw.data(), raw.size()));
  write_chunk(f, "IEND", {});
  if (!f) throw std::runtime_error("write_png: write failed for " + path);
}

Image8 read_png(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_png: cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() < 8 || std::memcmp(bytes.data(), sig, 8) != 0)
    throw std::runtime_error("read_png: bad signature in " + path);

  int width = 0, height = 0, bit_depth = 0, color_type = 0, interlace = 0;
  std::vector<uint8_t> idat;
  size_t pos = 8;
  while (pos + 8 <= bytes.size()) {
    uint32_t len = get_u32_be(&bytes[pos]);
    if (pos + 12 + len > bytes.size()) throw std::runtime_error("read_png: truncated chunk");
    const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
    const uint8_t* payload = &bytes[pos + 8];
    if (std::memcmp(type, "IHDR", 4) == 0) {
      width = int(get_u32_be(payload));
      height = int(get_u32_be(payload + 4));
      bit_depth = payload[8];
      color_type = payload[9];
      interlace = payload[12];
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), payload, payload + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      break;
    }
    pos += 12 + len;
  }
  if (width <= 0 || height <= 0) throw std::runtime_error("read_png: missing IHDR");
  if (bit_depth != 8 || interlace != 0)
    throw std::runtime_error("read_png: only 8-bit non-interlaced images supported");
  int channels;
  switch (color_type) {
    case 0: channels = 1; break;
    case 2: channels = 3; break;
    case 4: channels = 2; break;
    case 6: channels = 4; break;
    default: throw std::runtime_error("read_png: palette images not supported");
  }

  const size_t stride = size_t(width) * channels;
  std::vector<uint8_t> raw = zlib_decompress(idat.data(), idat.size(), (stride + 1) * height);
  if (raw.size() != (stride + 1) * size_t(height))
    throw std::runtime_error("read_png: unexpected decompressed size");

  Image8 img(width, height, channels);
  std::vector<uint8_t> prev(stride, 0);
  for (int y = 0; y < height; ++y) {
    const uint8_t filter = raw[y * (stride + 1)];
    const uint8_t* src = &raw[y * (stride + 1) + 1];
    uint8_t* dst = &img.data[y * stride];
    for (size_t i = 0; i < stride; ++i) {
      const int a = i >= size_t(channels) ? dst[i - channels] : 0;
      const int b = prev[i];
      const int c = i >= size_t(channels) ? prev[i - channels] : 0;
      int x = src[i];
      switch (filter) {
        case 0: break;
        case 1: x += a; break;
        case 2: x += b; break;
        case 3: x += (a + b) / 2; break;
        case 4: x += paeth(a, b, c); break;
        default: throw std::runtime_error("read_png: bad filter type");
      }
      dst[i] = uint8_t(x);
    }
    std::memcpy(prev.data(), dst, stride);
  }

  // expand gray+alpha to keep the channel contract simple downstream
  if (channels == 2) {
    Image8 rgba(width, height, 4);
    for (size_t i = 0; i < size_t(width) * height; ++i) {
      rgba.data[4 * i + 0] = rgba.data[4 * i + 1] = rgba.data[4 * i + 2] = img.data[2 * i];
      rgba.data[4 * i + 3] = img.data[2 * i + 1];
    }
    return rgba;
  }
  return img;
}

namespace {

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::string message;
};

[[noreturn]] void jpeg_error_exit(j_common_ptr cinfo) {
  char buf[JMSG_LENGTH_MAX];
  (*cinfo->err->format_message)(cinfo, buf);
  throw std::runtime_error(std::string("jpeg: ") + buf);
}

}  // namespace

Image8 read_jpeg(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("read_jpeg: cannot open " + path);
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  jpeg_create_decompress(&cinfo);
  Image8 img;
  try {
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    img = Image8(int(cinfo.output_width), int(cinfo.output_height), 3);
    const size_t stride = size_t(img.width) * 3;
    while (cinfo.output_scanline < cinfo.output_height) {
      uint8_t* row = &img.data[cinfo.output_scanline * stride];
      jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
  } catch (...) {
    jpeg_destroy_decompress(&cinfo);
    std::fclose(fp);
    throw;
  }
  jpeg_destroy_decompress(&cinfo);
  std::fclose(fp);
  return img;
}

void write_jpeg(const std::string& path, const Image8& img, int quality) {
  if (img.channels != 3) throw std::runtime_error("write_jpeg: RGB input required");
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("write_jpeg: cannot open " + path);
  jpeg_compress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  jpeg_create_compress(&cinfo);
  try {
    jpeg_stdio_dest(&cinfo, fp);
    cinfo.image_width = JDIMENSION(img.width);
    cinfo.image_height = JDIMENSION(img.height);
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    const size_t stride = size_t(img.width) * 3;
    while (cinfo.next_scanline < cinfo.image_height) {
      const uint8_t* row = &img.data[cinfo.next_scanline * stride];
      JSAMPROW rows[1] = {const_cast<JSAMPROW>(row)};
      jpeg_write_scanlines(&cinfo, rows, 1);
    }
    jpeg_finish_compress(&cinfo);
  } catch (...) {
    jpeg_destroy_compress(&cinfo);
    std::fclose(fp);
    throw;
  }
  jpeg_destroy_compress(&cinfo);
  std::fclose(fp);
}

Image8 read_image(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  for (auto& c : ext) c = char(std::tolower(c));
  if (ext == "png") return read_png(path);
  if (ext == "jpg" || ext == "jpeg") return read_jpeg(path);
  throw std::runtime_error("read_image: unsupported extension on " + path);
}

}  // namespace mvrl
