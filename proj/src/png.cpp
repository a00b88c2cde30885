#include "botdna/png.hpp"

#include <zlib.h>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "botdna/error.hpp"

namespace botdna {

namespace {

constexpr unsigned char kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

void put_be32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xFF));
  }
}

std::uint32_t get_be32(std::string_view in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v = (v << 8) | static_cast<unsigned char>(in[pos + i]);
  }
  return v;
}

void put_chunk(std::string& out, const char type[4], std::string_view data) {
  put_be32(out, static_cast<std::uint32_t>(data.size()));
  std::string body(type, 4);
  body.append(data);
  out.append(body);
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                         static_cast<uInt>(body.size()));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

}  // namespace

std::string encode_png(const DnaImage& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw Error("encode_png: unsupported channel count " +
                std::to_string(img.channels));
  }
  const std::size_t side = img.side;
  const std::size_t stride = side * img.channels;

  // Filter type 0 on every scanline, channels interleaved.
  std::string raw;
  raw.reserve(side * (stride + 1));
  for (std::size_t r = 0; r < side; ++r) {
    raw.push_back('\0');
    for (std::size_t c = 0; c < side; ++c) {
      for (std::size_t ch = 0; ch < img.channels; ++ch) {
        raw.push_back(static_cast<char>(img.at(ch, r, c)));
      }
    }
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::string packed(packed_size, '\0');
  if (compress2(reinterpret_cast<Bytef*>(packed.data()), &packed_size,
                reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw Error("encode_png: deflate failed");
  }
  packed.resize(packed_size);

  std::string out(reinterpret_cast<const char*>(kSignature), 8);
  std::string ihdr;
  put_be32(ihdr, static_cast<std::uint32_t>(side));
  put_be32(ihdr, static_cast<std::uint32_t>(side));
  ihdr.push_back(8);                                  // bit depth
  ihdr.push_back(img.channels == 3 ? 2 : 0);          // colour type
  ihdr.append(std::string(3, '\0'));                  // deflate, adaptive, no interlace
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", packed);
  put_chunk(out, "IEND", "");
  return out;
}

DnaImage decode_png(std::string_view bytes) {
  if (bytes.size() < 8 ||
      bytes.substr(0, 8) != std::string_view(reinterpret_cast<const char*>(kSignature), 8)) {
    throw Error("decode_png: bad signature");
  }
  std::size_t pos = 8;
  std::uint32_t width = 0, height = 0;
  int colour = -1;
  std::string idat;
  while (pos + 12 <= bytes.size()) {
    const auto len = get_be32(bytes, pos);
    const auto type = bytes.substr(pos + 4, 4);
    if (pos + 12 + len > bytes.size()) throw Error("decode_png: truncated chunk");
    const auto data = bytes.substr(pos + 8, len);
    if (type == "IHDR") {
      width = get_be32(data, 0);
      height = get_be32(data, 4);
      if (data[8] != 8 || data[12] != 0) {
        throw Error("decode_png: only 8-bit non-interlaced images supported");
      }
      colour = static_cast<unsigned char>(data[9]);
    } else if (type == "IDAT") {
      idat.append(data);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  if (colour != 0 && colour != 2) throw Error("decode_png: unsupported colour type");
  if (width != height) throw Error("decode_png: image is not square");
  const std::size_t channels = colour == 2 ? 3 : 1;
  const std::size_t stride = width * channels;

  std::string raw(height * (stride + 1), '\0');
  uLongf raw_size = static_cast<uLongf>(raw.size());
  if (uncompress(reinterpret_cast<Bytef*>(raw.data()), &raw_size,
                 reinterpret_cast<const Bytef*>(idat.data()),
                 static_cast<uLong>(idat.size())) != Z_OK ||
      raw_size != raw.size()) {
    throw Error("decode_png: inflate failed");
  }

  std::vector<std::uint8_t> cur(stride), prev(stride, 0);
  DnaImage img;
  img.side = width;
  img.channels = channels;
  img.pixels.resize(channels * width * height);
  for (std::size_t r = 0; r < height; ++r) {
    const auto* line = reinterpret_cast<const std::uint8_t*>(raw.data()) + r * (stride + 1);
    const int filter = line[0];
    for (std::size_t i = 0; i < stride; ++i) {
      const int x = line[1 + i];
      const int a = i >= channels ? cur[i - channels] : 0;
      const int b = prev[i];
      const int c = i >= channels ? prev[i - channels] : 0;
      int v = 0;
      switch (filter) {
        case 0: v = x; break;
        case 1: v = x + a; break;
        case 2: v = x + b; break;
        case 3: v = x + (a + b) / 2; break;
        case 4: v = x + paeth(a, b, c); break;
        default: throw Error("decode_png: bad filter type");
      }
      cur[i] = static_cast<std::uint8_t>(v & 0xFF);
    }
    for (std::size_t col = 0; col < width; ++col) {
      for (std::size_t ch = 0; ch < channels; ++ch) {
        img.pixels[(ch * height + r) * width + col] = cur[col * channels + ch];
      }
    }
    std::swap(cur, prev);
  }
  return img;
}

void write_binary_file(const std::filesystem::path& path,
                       std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

std::string read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace botdna
