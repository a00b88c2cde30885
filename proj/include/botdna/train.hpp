#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "botdna/checkpoint.hpp"
#include "botdna/metrics.hpp"
#include "botdna/models.hpp"

namespace botdna {

struct TrainConfig {
  double lr = 1e-5;
  std::size_t max_epochs = 30;
  std::size_t early_stop_patience = 6;
  double plateau_factor = 0.1;
  std::size_t plateau_patience = 3;
  std::size_t batch_size = 32;
  bool auto_class_weights = true;
  std::array<double, 2> class_weights{1.0, 1.0};  // used when not auto
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};

  // lr may be 0 (a null update); every other numeric field must be positive.
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double lr = 0.0;        // rate used during this epoch
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  bool stopped_early = false;
  std::array<double, 2> class_weights{1.0, 1.0};
};

// w_c = N / (2 N_c) over the labelled samples.
std::array<double, 2> auto_class_weights(const std::vector<Sample>& samples);

// Mean of w_y * -log p(y) over the samples.
double dataset_loss(const FusionModel& model, const std::vector<Sample>& samples,
                    std::array<double, 2> class_weights);

// Mini-batch Adam with plateau decay and early stopping on validation loss.
// Leaves the model holding the parameters of the best validation epoch.
TrainHistory train(FusionModel& model, const std::vector<Sample>& train_set,
                   const std::vector<Sample>& val_set, const TrainConfig& cfg,
                   std::uint64_t seed);

struct Evaluation {
  std::vector<int> predictions;
  std::vector<int> labels;
  Confusion confusion;
  MetricSet metrics;
};

Evaluation evaluate(const FusionModel& model, const std::vector<Sample>& samples);

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> val;
  std::vector<Sample> test;
};

struct SeedRun {
  std::uint64_t seed = 0;
  TrainHistory history;
  Confusion confusion;
  MetricSet metrics;
  std::vector<NamedTensor> parameters;  // best-epoch weights
};

struct RunReport {
  ModelConfig model;
  TrainConfig train;
  std::vector<SeedRun> runs;
  Aggregate aggregate;
};

// One replica per seed (replicas run concurrently), each evaluated on the
// test split, then aggregated.
RunReport run_protocol(const ModelConfig& model_cfg, const Dataset& data, const TrainConfig& cfg);

nlohmann::ordered_json to_json(const ModelConfig& cfg);
nlohmann::ordered_json to_json(const TrainConfig& cfg);
nlohmann::ordered_json to_json(const RunReport& report);
std::string markdown_report(const RunReport& report);

}  // namespace botdna
