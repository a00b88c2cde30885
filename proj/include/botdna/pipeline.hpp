#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "botdna/dna.hpp"
#include "botdna/encoders.hpp"
#include "botdna/imagify.hpp"
#include "botdna/ingest.hpp"
#include "botdna/train.hpp"

namespace botdna {

struct ToyInputOptions {
  Alphabet alphabet = Alphabet::Type3;
  Palette palette = Palette::defaults(Alphabet::Type3);
  VisionMode mode = VisionMode::Vgg16;
  std::uint64_t hash_seed = 0;
  // Canvas side shared by every image; 0 derives it from the longest
  // sequence of the records being prepared.
  std::size_t canvas_side = 0;
  // Read images listed in <images_dir>/manifest.tsv instead of rendering.
  std::optional<std::filesystem::path> images_dir;
};

// Canvas side of the longest timeline among the records (one symbol per
// tweet in either alphabet).
std::size_t corpus_canvas_side(const std::vector<UserRecord>& records);

// Tokenized descriptions and rendered DNA images, one sample per record.
std::vector<Sample> toy_samples(const std::vector<UserRecord>& records,
                                const ToyInputOptions& options);

// The canvas side is fixed over all splits before rendering.
Dataset prepare_toy(const Corpus& corpus, ToyInputOptions options);

std::vector<Sample> precomputed_samples(const std::vector<UserRecord>& records,
                                        const FeatureStore& store);
Dataset prepare_precomputed(const Corpus& corpus, const FeatureStore& store);

// user_id -> image file, from a manifest written by render_corpus.
std::map<std::string, std::filesystem::path> read_manifest(const std::filesystem::path& path);

}  // namespace botdna
