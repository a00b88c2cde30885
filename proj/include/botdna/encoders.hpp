#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "botdna/graph.hpp"
#include "botdna/imagify.hpp"
#include "botdna/rng.hpp"
#include "botdna/tensor.hpp"

namespace botdna {

inline constexpr std::size_t kFeatureDim = 768;
inline constexpr std::size_t kMaxTokens = 64;
inline constexpr std::size_t kTrigramBuckets = 4096;
inline constexpr std::size_t kVisionHidden = 16;

enum class VisionMode { Vgg16, AlexNet };

std::string_view vision_mode_name(VisionMode mode);  // "vgg16" / "alexnet"
VisionMode parse_vision_mode(std::string_view text);

struct VisionGeometry {
  std::size_t side;       // spatial side after the conv stack
  std::size_t positions;  // side * side
  std::size_t channels;   // d_v
};

// vgg16: 8x8 positions of 512 channels; alexnet: 7x7 positions of 256.
VisionGeometry vision_geometry(VisionMode mode);

// Lowercased word and punctuation tokens, at most kMaxTokens. Words are runs
// of ASCII letters, digits, '_' and non-ASCII bytes; any other visible
// character is a token of its own.
std::vector<std::string> tokenize(std::string_view text);

// Bucket ids of the byte trigrams of "<token>", hashed with a seeded FNV-1a.
std::vector<std::uint32_t> trigram_buckets(std::string_view token, std::uint64_t hash_seed);

// Per-token trigram buckets for a description.
std::vector<std::vector<std::uint32_t>> text_input(std::string_view description,
                                                   std::uint64_t hash_seed);

// Pixels scaled to [0,1] and area-averaged to [3, 2*side, 2*side].
// Throws ShapeError unless the image is 3 x 256 x 256.
Tensor vision_input(const DnaImage& img, VisionMode mode);

struct TextFeature {
  Var pooled;    // [768], first position
  Var sequence;  // [N, 768]
};

struct VisionFeature {
  Var pooled;    // [768], mean over positions
  Var sequence;  // [T, 768]; empty handle when not requested
  bool has_sequence = false;
};

// Start vector plus hashed-trigram embeddings, mixed by one residual
// self-attention pass: S = E + attention(E, E, E).
class ToyTextEncoder {
 public:
  ToyTextEncoder(ParameterSet& params, Rng& rng, std::size_t dim = kFeatureDim,
                 std::size_t buckets = kTrigramBuckets);

  TextFeature encode(Graph& g, const std::vector<std::vector<std::uint32_t>>& tokens) const;

 private:
  Parameter* start_;
  Parameter* table_;
};

// conv3x3 -> relu -> maxpool2 -> conv3x3 -> relu -> positions x d_v -> dense.
class ToyVisionEncoder {
 public:
  ToyVisionEncoder(ParameterSet& params, Rng& rng, VisionMode mode,
                   std::size_t dim = kFeatureDim);

  // The pooled feature equals the mean of the projected positions; it is
  // computed by projecting the mean position, which is cheaper.
  VisionFeature encode(Graph& g, const Tensor& grid, bool with_sequence) const;
  VisionMode mode() const { return mode_; }

 private:
  VisionMode mode_;
  Parameter* conv1_w_;
  Parameter* conv1_b_;
  Parameter* conv2_w_;
  Parameter* conv2_b_;
  Parameter* proj_w_;
  Parameter* proj_b_;
};

// Uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) weights.
Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng);

// Features exported by an external pipeline, stored in the tensor container
// under "<user_id>/text" and "<user_id>/vision". Each entry is a vector
// [dim] or a sequence [positions, dim].
class FeatureStore {
 public:
  static FeatureStore load(const std::filesystem::path& path, std::size_t text_dim,
                           std::size_t vision_dim);
  static FeatureStore from_entries(
      const std::vector<std::pair<std::string, Tensor>>& entries, std::size_t text_dim,
      std::size_t vision_dim);

  const Tensor& text(const std::string& user_id) const;
  const Tensor& vision(const std::string& user_id) const;
  bool contains(const std::string& user_id) const;
  std::vector<std::string> users() const;

 private:
  std::map<std::string, Tensor> text_;
  std::map<std::string, Tensor> vision_;
};

// Precomputed features lifted into a graph; pooled text is row 0, pooled
// vision is the row mean.
TextFeature precomputed_text(Graph& g, const Tensor& feature);
VisionFeature precomputed_vision(Graph& g, const Tensor& feature);

}  // namespace botdna
