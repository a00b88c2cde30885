#include "botdna/encoders.hpp"

#include <cmath>

#include "botdna/checkpoint.hpp"
#include "botdna/error.hpp"
#include "botdna/hash.hpp"
#include "botdna/ops.hpp"

namespace botdna {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || c >= 0x80;
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

// Mean of the source pixels covered by output cell i of n over a length-len
// axis, using the usual adaptive-pooling bin edges.
std::pair<std::size_t, std::size_t> bin(std::size_t i, std::size_t n, std::size_t len) {
  const std::size_t lo = (i * len) / n;
  const std::size_t hi = ((i + 1) * len + n - 1) / n;
  return {lo, hi};
}

Tensor as_sequence(const Tensor& feature) {
  if (feature.rank() == 1) return feature.reshaped({1, feature.dim(0)});
  return feature;
}

}  // namespace

std::string_view vision_mode_name(VisionMode mode) {
  return mode == VisionMode::Vgg16 ? "vgg16" : "alexnet";
}

VisionMode parse_vision_mode(std::string_view text) {
  if (text == "vgg16") return VisionMode::Vgg16;
  if (text == "alexnet") return VisionMode::AlexNet;
  throw Error("unknown vision mode '" + std::string(text) + "' (expected vgg16|alexnet)");
}

VisionGeometry vision_geometry(VisionMode mode) {
  if (mode == VisionMode::Vgg16) return {8, 64, 512};
  return {7, 49, 256};
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size() && tokens.size() < kMaxTokens) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_word_byte(c)) {
      std::string word;
      while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) {
        word.push_back(ascii_lower(text[i]));
        ++i;
      }
      tokens.push_back(std::move(word));
    } else if (c <= ' ' || c == 0x7F) {
      ++i;
    } else {
      tokens.emplace_back(1, text[i]);
      ++i;
    }
  }
  return tokens;
}

std::vector<std::uint32_t> trigram_buckets(std::string_view token, std::uint64_t hash_seed) {
  const std::string padded = "<" + std::string(token) + ">";
  const std::uint64_t basis = 0xcbf29ce484222325ULL ^ splitmix64(hash_seed);
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    const std::uint64_t h = fnv1a(std::string_view(padded).substr(i, 3), basis);
    out.push_back(static_cast<std::uint32_t>(h % kTrigramBuckets));
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> text_input(std::string_view description,
                                                   std::uint64_t hash_seed) {
  std::vector<std::vector<std::uint32_t>> out;
  for (const auto& token : tokenize(description)) {
    out.push_back(trigram_buckets(token, hash_seed));
  }
  return out;
}

Tensor vision_input(const DnaImage& img, VisionMode mode) {
  if (img.channels != 3 || img.side != kImageSide) {
    throw ShapeError("toy vision encoder expects a 3x256x256 image, got " +
                     std::to_string(img.channels) + "x" + std::to_string(img.side) + "x" +
                     std::to_string(img.side));
  }
  const std::size_t n = 2 * vision_geometry(mode).side;
  Tensor grid({3, n, n});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < n; ++y) {
      const auto [y0, y1] = bin(y, n, img.side);
      for (std::size_t x = 0; x < n; ++x) {
        const auto [x0, x1] = bin(x, n, img.side);
        double total = 0.0;
        for (std::size_t yy = y0; yy < y1; ++yy)
          for (std::size_t xx = x0; xx < x1; ++xx) total += img.at(c, yy, xx);
        const double count = static_cast<double>((y1 - y0) * (x1 - x0));
        grid[(c * n + y) * n + x] = total / (255.0 * count);
      }
    }
  }
  return grid;
}

Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
  Tensor t(std::move(shape));
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  for (auto& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

ToyTextEncoder::ToyTextEncoder(ParameterSet& params, Rng& rng, std::size_t dim,
                               std::size_t buckets) {
  // The table acts as a dense layer over one-hot bucket indicators.
  start_ = &params.add("text.start", init_uniform({dim}, buckets, rng));
  table_ = &params.add("text.table", init_uniform({buckets, dim}, buckets, rng));
}

TextFeature ToyTextEncoder::encode(Graph& g,
                                   const std::vector<std::vector<std::uint32_t>>& tokens) const {
  Var e = ops::embed_tokens(g, *start_, *table_, tokens);
  Var s = ops::add(e, ops::scaled_dot_attention(e, e, e));
  return TextFeature{ops::row(s, 0), s};
}

ToyVisionEncoder::ToyVisionEncoder(ParameterSet& params, Rng& rng, VisionMode mode,
                                   std::size_t dim)
    : mode_(mode) {
  const auto geo = vision_geometry(mode);
  conv1_w_ = &params.add("vision.conv1.w", init_uniform({kVisionHidden, 3 * 9}, 3 * 9, rng));
  conv1_b_ = &params.add("vision.conv1.b", Tensor({kVisionHidden}));
  conv2_w_ = &params.add("vision.conv2.w", init_uniform({geo.channels, kVisionHidden * 9},
                                                        kVisionHidden * 9, rng));
  conv2_b_ = &params.add("vision.conv2.b", Tensor({geo.channels}));
  proj_w_ = &params.add("vision.proj.w", init_uniform({geo.channels, dim}, geo.channels, rng));
  proj_b_ = &params.add("vision.proj.b", Tensor({dim}));
}

VisionFeature ToyVisionEncoder::encode(Graph& g, const Tensor& grid, bool with_sequence) const {
  const auto geo = vision_geometry(mode_);
  const std::size_t n = 2 * geo.side;
  if (grid.shape() != Shape{3, n, n}) {
    throw ShapeError("vision encoder (" + std::string(vision_mode_name(mode_)) +
                     ") expects input " + shape_string({3, n, n}) + ", got " +
                     shape_string(grid.shape()));
  }
  Var x = g.input(grid);
  Var h = ops::max_pool2(ops::relu(ops::conv3x3(x, *conv1_w_, *conv1_b_)));
  Var rows = ops::channels_to_rows(ops::relu(ops::conv3x3(h, *conv2_w_, *conv2_b_)));
  VisionFeature out;
  out.pooled = ops::dense(ops::global_average_pool(rows), *proj_w_, *proj_b_);
  if (with_sequence) {
    out.sequence = ops::dense(rows, *proj_w_, *proj_b_);
    out.has_sequence = true;
  }
  return out;
}

FeatureStore FeatureStore::load(const std::filesystem::path& path, std::size_t text_dim,
                                std::size_t vision_dim) {
  return from_entries(load_tensors(path), text_dim, vision_dim);
}

FeatureStore FeatureStore::from_entries(
    const std::vector<std::pair<std::string, Tensor>>& entries, std::size_t text_dim,
    std::size_t vision_dim) {
  FeatureStore store;
  for (const auto& [key, tensor] : entries) {
    const auto slash = key.rfind('/');
    if (slash == std::string::npos || slash == 0) {
      throw Error("feature entry '" + key + "' is not of the form <user_id>/text|vision");
    }
    const std::string user = key.substr(0, slash);
    const std::string kind = key.substr(slash + 1);
    std::size_t expected = 0;
    std::map<std::string, Tensor>* target = nullptr;
    if (kind == "text") {
      expected = text_dim;
      target = &store.text_;
    } else if (kind == "vision") {
      expected = vision_dim;
      target = &store.vision_;
    } else {
      throw Error("feature entry '" + key + "' has unknown modality '" + kind + "'");
    }
    if (tensor.rank() < 1 || tensor.rank() > 2 || tensor.cols() != expected ||
        tensor.size() == 0) {
      throw ShapeError("user " + user + " " + kind + " feature has shape " +
                       shape_string(tensor.shape()) + ", expected dim " +
                       std::to_string(expected));
    }
    if (!tensor.all_finite()) throw NumericError("user " + user + " " + kind + " feature is not finite");
    if (!target->emplace(user, tensor).second) throw Error("duplicate feature entry '" + key + "'");
  }
  for (const auto& [user, t] : store.text_) {
    if (!store.vision_.count(user)) throw Error("user " + user + " has text but no vision feature");
  }
  for (const auto& [user, t] : store.vision_) {
    if (!store.text_.count(user)) throw Error("user " + user + " has vision but no text feature");
  }
  return store;
}

const Tensor& FeatureStore::text(const std::string& user_id) const {
  auto it = text_.find(user_id);
  if (it == text_.end()) throw Error("user " + user_id + " absent");
  return it->second;
}

const Tensor& FeatureStore::vision(const std::string& user_id) const {
  auto it = vision_.find(user_id);
  if (it == vision_.end()) throw Error("user " + user_id + " absent");
  return it->second;
}

bool FeatureStore::contains(const std::string& user_id) const { return text_.count(user_id) > 0; }

std::vector<std::string> FeatureStore::users() const {
  std::vector<std::string> out;
  for (const auto& [user, t] : text_) out.push_back(user);
  return out;
}

TextFeature precomputed_text(Graph& g, const Tensor& feature) {
  Var seq = g.input(as_sequence(feature));
  return TextFeature{ops::row(seq, 0), seq};
}

VisionFeature precomputed_vision(Graph& g, const Tensor& feature) {
  Var seq = g.input(as_sequence(feature));
  VisionFeature out;
  out.pooled = ops::global_average_pool(seq);
  out.sequence = seq;
  out.has_sequence = true;
  return out;
}

}  // namespace botdna
