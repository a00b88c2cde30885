#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "botdna/encoders.hpp"
#include "botdna/graph.hpp"
#include "botdna/tensor.hpp"

namespace botdna {

// TextOnly and VisionOnly are the unimodal baselines: dense(128) + ReLU over
// one pooled feature, then dense(2).
enum class FusionKind { Concat, GMU, CrossModal, TextOnly, VisionOnly };

std::string_view fusion_name(FusionKind kind);  // concat, gmu, crossmodal, text-only, vision-only
FusionKind parse_fusion(std::string_view text);
// Display name used in report tables.
std::string_view fusion_title(FusionKind kind);

enum class EncoderKind { Toy, Precomputed };

std::string_view encoder_name(EncoderKind kind);  // toy, precomputed
EncoderKind parse_encoder(std::string_view text);

struct ModelConfig {
  FusionKind fusion = FusionKind::Concat;
  EncoderKind encoder = EncoderKind::Toy;
  VisionMode mode = VisionMode::Vgg16;
  std::size_t hidden = 128;      // concat and unimodal dense layer
  std::size_t gmu_hidden = 128;  // d_h of the gated unit
  // Feature widths; the toy encoders always produce kFeatureDim.
  std::size_t text_dim = kFeatureDim;
  std::size_t vision_dim = kFeatureDim;
  std::uint64_t hash_seed = 0;  // trigram hashing of the toy text encoder
};

// One account prepared for the model. Toy encoders read `tokens` and
// `vision_grid`; the precomputed path reads the two feature tensors.
struct Sample {
  std::string user_id;
  int label = -1;  // -1 when unknown
  std::vector<std::vector<std::uint32_t>> tokens;
  Tensor vision_grid;
  Tensor text_feature;
  Tensor vision_feature;
};

struct ForwardResult {
  Var logits;  // [2]
  Var text_pooled;
  Var vision_pooled;
  Var gate;            // GMU only
  Var text_to_vision;  // CrossModal only: attention(Q=text, K=V=vision)
  bool has_gate = false;
  bool has_cross = false;
};

class FusionModel {
 public:
  FusionModel(const ModelConfig& config, std::uint64_t seed);
  FusionModel(const FusionModel&) = delete;
  FusionModel& operator=(const FusionModel&) = delete;

  ForwardResult forward(Graph& g, const Sample& sample) const;

  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const ModelConfig& config() const { return config_; }

 private:
  Parameter& add(const std::string& name, Tensor value);

  ModelConfig config_;
  ParameterSet params_;
  std::unique_ptr<ToyTextEncoder> text_;
  std::unique_ptr<ToyVisionEncoder> vision_;
  std::vector<Parameter*> head_;
};

struct Prediction {
  int label = 0;
  std::array<double, 2> probs{0.5, 0.5};
};

// argmax of softmax(logits); equal logits resolve to label 0.
Prediction prediction_from_logits(double l0, double l1);
Prediction predict(const FusionModel& model, const Sample& sample);

}  // namespace botdna
