#include "botdna/pipeline.hpp"

#include <exception>
#include <fstream>
#include <sstream>

#include "botdna/error.hpp"
#include "botdna/png.hpp"

namespace botdna {

std::size_t corpus_canvas_side(const std::vector<UserRecord>& records) {
  std::size_t max_len = 0;
  for (const auto& rec : records) max_len = std::max(max_len, rec.tweets.size());
  return canvas_side(static_cast<std::int64_t>(max_len));
}

std::map<std::string, std::filesystem::path> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read manifest " + path.string());
  std::map<std::string, std::filesystem::path> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) continue;  // header
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() != 5) {
      throw ParseError("manifest row has " + std::to_string(cols.size()) + " columns at line " +
                           std::to_string(line_no),
                       line_no);
    }
    out[cols[0]] = path.parent_path() / cols[3];
  }
  return out;
}

std::vector<Sample> toy_samples(const std::vector<UserRecord>& records,
                                const ToyInputOptions& options) {
  const std::size_t side =
      options.canvas_side ? options.canvas_side : corpus_canvas_side(records);
  std::map<std::string, std::filesystem::path> manifest;
  if (options.images_dir) manifest = read_manifest(*options.images_dir / "manifest.tsv");

  std::vector<Sample> out(records.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(records.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      const UserRecord& rec = records[static_cast<std::size_t>(i)];
      Sample& s = out[static_cast<std::size_t>(i)];
      s.user_id = rec.user_id;
      s.label = rec.label ? static_cast<int>(*rec.label) : -1;
      s.tokens = text_input(rec.description, options.hash_seed);
      DnaImage img;
      if (options.images_dir) {
        auto it = manifest.find(rec.user_id);
        if (it == manifest.end()) throw Error("no image for user " + rec.user_id + " in manifest");
        img = decode_png(read_binary_file(it->second));
        if (img.channels == 1) img = to_three_channels(img);
      } else {
        img = render(encode(sort_chronological(rec), options.alphabet), side, options.palette);
      }
      s.vision_grid = vision_input(img, options.mode);
    } catch (...) {
#pragma omp critical(botdna_prepare_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

Dataset prepare_toy(const Corpus& corpus, ToyInputOptions options) {
  if (options.canvas_side == 0) {
    options.canvas_side = corpus_canvas_side(corpus.all_records());
  }
  Dataset data;
  data.train = toy_samples(corpus.split("train"), options);
  data.val = toy_samples(corpus.split("val"), options);
  data.test = toy_samples(corpus.split("test"), options);
  return data;
}

std::vector<Sample> precomputed_samples(const std::vector<UserRecord>& records,
                                        const FeatureStore& store) {
  std::vector<Sample> out;
  for (const auto& rec : records) {
    Sample s;
    s.user_id = rec.user_id;
    s.label = rec.label ? static_cast<int>(*rec.label) : -1;
    s.text_feature = store.text(rec.user_id);
    s.vision_feature = store.vision(rec.user_id);
    out.push_back(std::move(s));
  }
  return out;
}

Dataset prepare_precomputed(const Corpus& corpus, const FeatureStore& store) {
  Dataset data;
  data.train = precomputed_samples(corpus.split("train"), store);
  data.val = precomputed_samples(corpus.split("val"), store);
  data.test = precomputed_samples(corpus.split("test"), store);
  return data;
}

}  // namespace botdna
