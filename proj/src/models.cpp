#include "botdna/models.hpp"

#include <cmath>

#include "botdna/error.hpp"
#include "botdna/ops.hpp"

namespace botdna {

namespace {

constexpr std::uint64_t kInitStream = 1;

}  // namespace

std::string_view fusion_name(FusionKind kind) {
  switch (kind) {
    case FusionKind::Concat: return "concat";
    case FusionKind::GMU: return "gmu";
    case FusionKind::CrossModal: return "crossmodal";
    case FusionKind::TextOnly: return "text-only";
    case FusionKind::VisionOnly: return "vision-only";
  }
  return "?";
}

std::string_view fusion_title(FusionKind kind) {
  switch (kind) {
    case FusionKind::Concat: return "Concatenation";
    case FusionKind::GMU: return "Gated Multimodal Unit";
    case FusionKind::CrossModal: return "Cross-Modal Attention";
    case FusionKind::TextOnly: return "Text only";
    case FusionKind::VisionOnly: return "Vision only";
  }
  return "?";
}

FusionKind parse_fusion(std::string_view text) {
  for (auto kind : {FusionKind::Concat, FusionKind::GMU, FusionKind::CrossModal,
                    FusionKind::TextOnly, FusionKind::VisionOnly}) {
    if (fusion_name(kind) == text) return kind;
  }
  throw Error("unknown fusion '" + std::string(text) +
              "' (expected concat|gmu|crossmodal|text-only|vision-only)");
}

std::string_view encoder_name(EncoderKind kind) {
  return kind == EncoderKind::Toy ? "toy" : "precomputed";
}

EncoderKind parse_encoder(std::string_view text) {
  if (text == "toy") return EncoderKind::Toy;
  if (text == "precomputed") return EncoderKind::Precomputed;
  throw Error("unknown encoder '" + std::string(text) + "' (expected toy|precomputed)");
}

Parameter& FusionModel::add(const std::string& name, Tensor value) {
  Parameter& p = params_.add(name, std::move(value));
  head_.push_back(&p);
  return p;
}

FusionModel::FusionModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  if (config_.hidden == 0 || config_.gmu_hidden == 0 || config_.text_dim == 0 ||
      config_.vision_dim == 0) {
    throw Error("model dimensions must be positive");
  }
  if (config_.encoder == EncoderKind::Toy &&
      (config_.text_dim != kFeatureDim || config_.vision_dim != kFeatureDim)) {
    throw Error("toy encoders produce " + std::to_string(kFeatureDim) + "-d features, config asks " +
                std::to_string(config_.text_dim) + "/" + std::to_string(config_.vision_dim));
  }
  if (config_.fusion == FusionKind::CrossModal && config_.text_dim != config_.vision_dim) {
    throw Error("cross-modal attention needs equal text and vision widths, got " +
                std::to_string(config_.text_dim) + " and " + std::to_string(config_.vision_dim));
  }
  Rng rng = Rng::derive(seed, kInitStream);
  if (config_.encoder == EncoderKind::Toy) {
    text_ = std::make_unique<ToyTextEncoder>(params_, rng);
    vision_ = std::make_unique<ToyVisionEncoder>(params_, rng, config_.mode);
  }
  const std::size_t dt = config_.text_dim, dv = config_.vision_dim;
  const std::size_t h = config_.hidden, gh = config_.gmu_hidden;
  auto weight = [&](Shape shape) {
    const std::size_t fan_in = shape[0];
    return init_uniform(std::move(shape), fan_in, rng);
  };
  switch (config_.fusion) {
    case FusionKind::Concat:
      add("head.fc1.w", weight({dt + dv, h}));
      add("head.fc1.b", Tensor({h}));
      add("head.out.w", weight({h, 2}));
      add("head.out.b", Tensor({2}));
      break;
    case FusionKind::TextOnly:
    case FusionKind::VisionOnly: {
      const std::size_t d = config_.fusion == FusionKind::TextOnly ? dt : dv;
      add("head.fc1.w", weight({d, h}));
      add("head.fc1.b", Tensor({h}));
      add("head.out.w", weight({h, 2}));
      add("head.out.b", Tensor({2}));
      break;
    }
    case FusionKind::GMU:
      add("head.gmu.w_t", weight({dt, gh}));
      add("head.gmu.b_t", Tensor({gh}));
      add("head.gmu.w_v", weight({dv, gh}));
      add("head.gmu.b_v", Tensor({gh}));
      add("head.gmu.w_z", weight({dt + dv, gh}));
      add("head.gmu.b_z", Tensor({gh}));
      add("head.out.w", weight({gh, 2}));
      add("head.out.b", Tensor({2}));
      break;
    case FusionKind::CrossModal:
      add("head.out.w", weight({dt, 2}));
      add("head.out.b", Tensor({2}));
      break;
  }
}

ForwardResult FusionModel::forward(Graph& g, const Sample& sample) const {
  const bool need_sequence = config_.fusion == FusionKind::CrossModal;
  TextFeature text;
  VisionFeature vision;
  if (config_.encoder == EncoderKind::Toy) {
    text = text_->encode(g, sample.tokens);
    vision = vision_->encode(g, sample.vision_grid, need_sequence);
  } else {
    if (sample.text_feature.rank() == 0 || sample.text_feature.cols() != config_.text_dim) {
      throw ShapeError("user " + sample.user_id + ": text feature " +
                       shape_string(sample.text_feature.shape()) + " does not match dim " +
                       std::to_string(config_.text_dim));
    }
    if (sample.vision_feature.rank() == 0 || sample.vision_feature.cols() != config_.vision_dim) {
      throw ShapeError("user " + sample.user_id + ": vision feature " +
                       shape_string(sample.vision_feature.shape()) + " does not match dim " +
                       std::to_string(config_.vision_dim));
    }
    text = precomputed_text(g, sample.text_feature);
    vision = precomputed_vision(g, sample.vision_feature);
  }

  ForwardResult out;
  out.text_pooled = text.pooled;
  out.vision_pooled = vision.pooled;
  const auto& p = head_;
  switch (config_.fusion) {
    case FusionKind::Concat: {
      Var z = ops::concat_lastdim(text.pooled, vision.pooled);
      Var hidden = ops::relu(ops::dense(z, *p[0], *p[1]));
      out.logits = ops::dense(hidden, *p[2], *p[3]);
      break;
    }
    case FusionKind::TextOnly:
    case FusionKind::VisionOnly: {
      Var f = config_.fusion == FusionKind::TextOnly ? text.pooled : vision.pooled;
      Var hidden = ops::relu(ops::dense(f, *p[0], *p[1]));
      out.logits = ops::dense(hidden, *p[2], *p[3]);
      break;
    }
    case FusionKind::GMU: {
      const auto gmu = ops::gmu(text.pooled, vision.pooled,
                                ops::GmuParams{p[0], p[1], p[2], p[3], p[4], p[5]});
      out.logits = ops::dense(gmu.h, *p[6], *p[7]);
      out.gate = gmu.gate;
      out.has_gate = true;
      break;
    }
    case FusionKind::CrossModal: {
      Var z = ops::scaled_dot_attention(text.sequence, vision.sequence, vision.sequence);
      Var y = ops::scaled_dot_attention(vision.sequence, text.sequence, text.sequence);
      Var pooled = ops::global_average_pool(ops::concat_rows(z, y));
      out.logits = ops::dense(pooled, *p[0], *p[1]);
      out.text_to_vision = z;
      out.has_cross = true;
      break;
    }
  }
  return out;
}

Prediction prediction_from_logits(double l0, double l1) {
  Prediction pred;
  const double m = std::max(l0, l1);
  const double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
  pred.probs = {e0 / (e0 + e1), e1 / (e0 + e1)};
  pred.label = l1 > l0 ? 1 : 0;
  return pred;
}

Prediction predict(const FusionModel& model, const Sample& sample) {
  Graph g;
  const auto out = model.forward(g, sample);
  const Tensor& logits = out.logits.value();
  return prediction_from_logits(logits[0], logits[1]);
}

}  // namespace botdna
