#include "botdna/imagify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "botdna/error.hpp"
#include "botdna/hash.hpp"
#include "botdna/png.hpp"

namespace botdna {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i]))
         << (8 * i);
  }
  return v;
}

void check_file_safe(const std::string& id) {
  if (id.empty() || id == "." || id == ".." ||
      id.find_first_of("/\\") != std::string::npos) {
    throw Error("user_id '" + id + "' cannot be used as a file name");
  }
}

}  // namespace

Palette Palette::defaults(Alphabet alphabet) {
  Palette p;
  p.alphabet = alphabet;
  p.pad_level = 0;
  if (alphabet == Alphabet::Type3) {
    p.level = {{'A', 85}, {'C', 170}, {'T', 255}};
  } else {
    p.level = {{'N', 51}, {'U', 102}, {'H', 153}, {'M', 204}, {'X', 255}};
  }
  return p;
}

void Palette::validate() const {
  std::set<std::uint8_t> seen;
  for (char s : alphabet_symbols(alphabet)) {
    auto it = level.find(s);
    if (it == level.end()) {
      throw Error(std::string("palette has no level for symbol '") + s + "'");
    }
    if (it->second == pad_level) {
      throw Error(std::string("palette level of '") + s +
                  "' equals the pad level " + std::to_string(pad_level));
    }
    if (!seen.insert(it->second).second) {
      throw Error("palette level " + std::to_string(it->second) +
                  " assigned to more than one symbol");
    }
  }
  if (level.size() != alphabet_symbols(alphabet).size()) {
    throw Error("palette has levels for symbols outside the alphabet");
  }
}

std::string Palette::describe() const {
  std::ostringstream out;
  out << alphabet_name(alphabet) << ':';
  bool first = true;
  for (char s : alphabet_symbols(alphabet)) {
    if (!first) out << ',';
    first = false;
    auto it = level.find(s);
    out << s << '=' << (it == level.end() ? -1 : static_cast<int>(it->second));
  }
  out << ";pad=" << static_cast<int>(pad_level);
  return out.str();
}

std::string Palette::hash() const {
  return hex16(fnv1a(describe()));
}

Palette parse_palette(Alphabet alphabet, std::string_view overrides) {
  Palette p = Palette::defaults(alphabet);
  std::size_t pos = 0;
  while (pos < overrides.size()) {
    auto end = overrides.find(',', pos);
    if (end == std::string_view::npos) end = overrides.size();
    const auto item = overrides.substr(pos, end - pos);
    pos = end + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error("palette entry '" + std::string(item) + "' lacks '='");
    }
    const auto key = item.substr(0, eq);
    const std::string value(item.substr(eq + 1));
    int v = -1;
    try {
      std::size_t used = 0;
      v = std::stoi(value, &used);
      if (used != value.size()) v = -1;
    } catch (const std::exception&) {
      v = -1;
    }
    if (v < 0 || v > 255) {
      throw Error("palette level '" + value + "' is not in 0..255");
    }
    if (key == "pad") {
      p.pad_level = static_cast<std::uint8_t>(v);
    } else if (key.size() == 1 &&
               alphabet_symbols(alphabet).find(key[0]) != std::string_view::npos) {
      p.level[key[0]] = static_cast<std::uint8_t>(v);
    } else {
      throw Error("palette symbol '" + std::string(key) + "' not in alphabet " +
                  std::string(alphabet_name(alphabet)));
    }
  }
  p.validate();
  return p;
}

std::size_t canvas_side(std::int64_t max_len) {
  if (max_len <= 0) {
    throw Error("canvas_side: max_len must be positive, got " +
                std::to_string(max_len));
  }
  auto s = static_cast<std::int64_t>(std::sqrt(static_cast<double>(max_len)));
  while (s * s < max_len) ++s;
  while (s > 1 && (s - 1) * (s - 1) >= max_len) --s;
  return static_cast<std::size_t>(s);
}

DnaImage paint(const DnaSequence& seq, std::size_t side,
               const Palette& palette) {
  if (palette.alphabet != seq.alphabet) {
    throw Error("palette alphabet " +
                std::string(alphabet_name(palette.alphabet)) +
                " does not match sequence alphabet " +
                std::string(alphabet_name(seq.alphabet)));
  }
  if (side * side < seq.seq.size()) {
    throw Error("canvas side " + std::to_string(side) + " too small for " +
                std::to_string(seq.seq.size()) + " symbols");
  }
  std::array<int, 256> lut;
  lut.fill(-1);
  for (const auto& [sym, lvl] : palette.level) {
    lut[static_cast<unsigned char>(sym)] = lvl;
  }
  DnaImage img{seq.user_id, side, 1,
               std::vector<std::uint8_t>(side * side, palette.pad_level)};
  for (std::size_t k = 0; k < seq.seq.size(); ++k) {
    const int v = lut[static_cast<unsigned char>(seq.seq[k])];
    if (v < 0) {
      throw Error(std::string("symbol '") + seq.seq[k] + "' has no palette level");
    }
    img.pixels[k] = static_cast<std::uint8_t>(v);
  }
  return img;
}

DnaImage to_three_channels(const DnaImage& img) {
  if (img.channels != 1) throw Error("already 3 channels");
  DnaImage out{img.user_id, img.side, 3, {}};
  out.pixels.reserve(3 * img.pixels.size());
  for (int c = 0; c < 3; ++c) {
    out.pixels.insert(out.pixels.end(), img.pixels.begin(), img.pixels.end());
  }
  return out;
}

DnaImage resize_nn(const DnaImage& img, std::size_t target) {
  if (img.side == 0) throw Error("resize_nn: empty image");
  if (img.side == target) return img;
  DnaImage out{img.user_id, target, img.channels,
               std::vector<std::uint8_t>(img.channels * target * target)};
  std::vector<std::size_t> src(target);
  for (std::size_t i = 0; i < target; ++i) src[i] = i * img.side / target;
  for (std::size_t c = 0; c < img.channels; ++c) {
    for (std::size_t i = 0; i < target; ++i) {
      const auto* in_row = &img.pixels[(c * img.side + src[i]) * img.side];
      auto* out_row = &out.pixels[(c * target + i) * target];
      for (std::size_t j = 0; j < target; ++j) out_row[j] = in_row[src[j]];
    }
  }
  return out;
}

std::string unpaint(const DnaImage& img, std::size_t length,
                    const Palette& palette) {
  if (length > img.side * img.side) {
    throw Error("unpaint: length exceeds pixel count");
  }
  std::array<char, 256> inverse{};
  for (const auto& [sym, lvl] : palette.level) inverse[lvl] = sym;
  std::string out(length, '\0');
  for (std::size_t k = 0; k < length; ++k) {
    const char s = inverse[img.pixels[k]];
    if (s == '\0') {
      throw Error("unpaint: pixel " + std::to_string(k) +
                  " has no symbol level");
    }
    out[k] = s;
  }
  return out;
}

DnaImage render(const DnaSequence& seq, std::size_t side,
                const Palette& palette, std::size_t target) {
  return resize_nn(to_three_channels(paint(seq, side, palette)), target);
}

std::vector<ManifestRow> render_corpus(
    const std::map<std::string, DnaSequence>& sequences,
    const Palette& palette, const std::filesystem::path& out_dir,
    const RenderOptions& options) {
  if (sequences.empty()) throw Error("render_corpus: no sequences");
  palette.validate();
  std::vector<const DnaSequence*> items;
  std::size_t max_len = 0;
  const Alphabet alphabet = sequences.begin()->second.alphabet;
  for (const auto& [id, seq] : sequences) {
    if (seq.alphabet != alphabet) {
      throw Error("render_corpus: mixed alphabets (" +
                  std::string(alphabet_name(alphabet)) + " and " +
                  std::string(alphabet_name(seq.alphabet)) + ")");
    }
    check_file_safe(id);
    max_len = std::max(max_len, seq.seq.size());
    items.push_back(&seq);
  }
  const std::size_t side = canvas_side(static_cast<std::int64_t>(max_len));
  std::filesystem::create_directories(out_dir);

  const std::string alpha(alphabet_name(alphabet));
  const std::string phash = palette.hash();
  std::vector<ManifestRow> rows(items.size());
  std::vector<std::string> errors(items.size());
  const auto n = static_cast<std::int64_t>(items.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      const auto& seq = *items[i];
      const DnaImage img = render(seq, side, palette, options.target);
      const std::string stem = seq.user_id + "." + alpha;
      write_binary_file(out_dir / (stem + ".png"), encode_png(img));
      if (options.raw_dump) {
        write_binary_file(out_dir / (stem + ".bdna"), encode_raw(img));
      }
      rows[i] = {seq.user_id, alpha, side, stem + ".png", phash};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error(e);
  }
  write_manifest(out_dir / "manifest.tsv", rows);
  return rows;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "user_id\talphabet\tside\tpath\tpalette_hash\n";
  for (const auto& r : rows) {
    out << r.user_id << '\t' << r.alphabet << '\t' << r.side << '\t' << r.path
        << '\t' << r.palette_hash << '\n';
  }
}

std::string encode_raw(const DnaImage& img) {
  std::string out = "BDNA1";
  put_u32(out, static_cast<std::uint32_t>(img.channels));
  put_u32(out, static_cast<std::uint32_t>(img.side));
  put_u32(out, static_cast<std::uint32_t>(img.side));
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

DnaImage decode_raw(std::string_view bytes) {
  if (bytes.size() < 17 || bytes.substr(0, 5) != "BDNA1") {
    throw Error("not a BDNA1 image dump");
  }
  const auto channels = get_u32(bytes, 5);
  const auto height = get_u32(bytes, 9);
  const auto width = get_u32(bytes, 13);
  if (height != width) throw Error("BDNA1 dump is not square");
  const std::size_t count = std::size_t{channels} * height * width;
  if (bytes.size() != 17 + count) throw Error("BDNA1 payload size mismatch");
  DnaImage img;
  img.side = height;
  img.channels = channels;
  img.pixels.assign(bytes.begin() + 17, bytes.end());
  return img;
}

}  // namespace botdna
