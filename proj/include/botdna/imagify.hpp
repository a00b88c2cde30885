#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "botdna/dna.hpp"

namespace botdna {

inline constexpr std::size_t kImageSide = 256;

struct Palette {
  Alphabet alphabet = Alphabet::Type3;
  std::map<char, std::uint8_t> level;
  std::uint8_t pad_level = 0;

  // Type3: A=85 C=170 T=255. Content5: N=51 U=102 H=153 M=204 X=255. pad 0.
  static Palette defaults(Alphabet alphabet);

  // Every symbol has a level, levels are distinct and differ from pad_level.
  void validate() const;

  // Canonical text form, e.g. "Type3:A=85,C=170,T=255;pad=0".
  std::string describe() const;
  // FNV-1a 64 of describe(), 16 hex digits.
  std::string hash() const;
};

// Overrides of the form "A=10,C=20,T=30,pad=0" applied on top of defaults.
Palette parse_palette(Alphabet alphabet, std::string_view overrides);

// Planar row-major pixels, shape (channels, side, side).
struct DnaImage {
  std::string user_id;
  std::size_t side = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> pixels;

  std::span<const std::uint8_t> plane(std::size_t c) const {
    return std::span(pixels).subspan(c * side * side, side * side);
  }
  std::uint8_t at(std::size_t c, std::size_t row, std::size_t col) const {
    return pixels[(c * side + row) * side + col];
  }
  friend bool operator==(const DnaImage&, const DnaImage&) = default;
};

// Smallest s with s*s >= max_len.
std::size_t canvas_side(std::int64_t max_len);

DnaImage paint(const DnaSequence& seq, std::size_t side,
               const Palette& palette);
DnaImage to_three_channels(const DnaImage& img);
DnaImage resize_nn(const DnaImage& img, std::size_t target = kImageSide);

// Inverse level lookup over the first `length` pixels of plane 0.
std::string unpaint(const DnaImage& img, std::size_t length,
                    const Palette& palette);

// paint -> three channels -> nearest-neighbour resize.
DnaImage render(const DnaSequence& seq, std::size_t side,
                const Palette& palette, std::size_t target = kImageSide);

struct ManifestRow {
  std::string user_id;
  std::string alphabet;
  std::size_t side = 0;
  std::string path;
  std::string palette_hash;
};

struct RenderOptions {
  std::size_t target = kImageSide;
  bool raw_dump = false;  // also write <user_id>.<alphabet>.bdna
};

// Writes one PNG per user (all on the canvas side of the longest sequence)
// plus manifest.tsv in out_dir. Rows follow user_id order.
std::vector<ManifestRow> render_corpus(
    const std::map<std::string, DnaSequence>& sequences,
    const Palette& palette, const std::filesystem::path& out_dir,
    const RenderOptions& options = {});

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRow>& rows);

// Raw dump: "BDNA1", u32 channels, u32 height, u32 width (little-endian),
// then channels*height*width bytes.
std::string encode_raw(const DnaImage& img);
DnaImage decode_raw(std::string_view bytes);

}  // namespace botdna
