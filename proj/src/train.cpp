#include "botdna/train.hpp"

#include <cmath>
#include <exception>
#include <numeric>

#include "botdna/error.hpp"
#include "botdna/ops.hpp"
#include "botdna/optim.hpp"
#include "botdna/rng.hpp"

namespace botdna {

namespace {

constexpr std::uint64_t kShuffleStream = 2;

double sample_loss_value(const FusionModel& model, const Sample& s,
                         std::array<double, 2> weights) {
  Graph g;
  const auto out = model.forward(g, s);
  Var loss = ops::weighted_cross_entropy(ops::reshape(out.logits, {1, 2}), {s.label}, weights);
  return loss.value()[0];
}

void require_labels(const std::vector<Sample>& samples, const char* split) {
  for (const auto& s : samples) {
    if (s.label != 0 && s.label != 1) {
      throw Error(std::string(split) + " sample " + s.user_id + " has no label");
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw Error("lr must be finite and >= 0");
  if (max_epochs == 0) throw Error("max_epochs must be positive");
  if (early_stop_patience == 0) throw Error("early_stop_patience must be positive");
  if (!(plateau_factor > 0.0)) throw Error("plateau_factor must be positive");
  if (plateau_patience == 0) throw Error("plateau_patience must be positive");
  if (batch_size == 0) throw Error("batch_size must be positive");
  if (!auto_class_weights && !(class_weights[0] > 0.0 && class_weights[1] > 0.0)) {
    throw Error("class weights must be positive");
  }
  if (seeds.empty()) throw Error("seeds must not be empty");
}

std::array<double, 2> auto_class_weights(const std::vector<Sample>& samples) {
  std::array<std::size_t, 2> counts{0, 0};
  for (const auto& s : samples) {
    if (s.label == 0 || s.label == 1) ++counts[static_cast<std::size_t>(s.label)];
  }
  if (counts[0] == 0 || counts[1] == 0) {
    throw Error("auto class weights need both classes in the training split (humans " +
                std::to_string(counts[0]) + ", bots " + std::to_string(counts[1]) + ")");
  }
  const double n = static_cast<double>(counts[0] + counts[1]);
  return {n / (2.0 * static_cast<double>(counts[0])), n / (2.0 * static_cast<double>(counts[1]))};
}

double dataset_loss(const FusionModel& model, const std::vector<Sample>& samples,
                    std::array<double, 2> class_weights) {
  if (samples.empty()) throw Error("dataset_loss: empty sample set");
  std::vector<double> losses(samples.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(samples.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      losses[static_cast<std::size_t>(i)] =
          sample_loss_value(model, samples[static_cast<std::size_t>(i)], class_weights);
    } catch (...) {
#pragma omp critical(botdna_loss_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(samples.size());
}

TrainHistory train(FusionModel& model, const std::vector<Sample>& train_set,
                   const std::vector<Sample>& val_set, const TrainConfig& cfg,
                   std::uint64_t seed) {
  cfg.validate();
  if (train_set.empty() || val_set.empty()) {
    throw Error("training needs non-empty train and validation splits (got " +
                std::to_string(train_set.size()) + " and " + std::to_string(val_set.size()) + ")");
  }
  require_labels(train_set, "train");
  require_labels(val_set, "val");

  TrainHistory history;
  history.class_weights = cfg.auto_class_weights ? auto_class_weights(train_set) : cfg.class_weights;
  const auto weights = history.class_weights;

  auto params = model.params().all();
  Adam adam(params, AdamOptions{cfg.lr});
  PlateauScheduler plateau(cfg.plateau_factor, cfg.plateau_patience);
  EarlyStopping early(cfg.early_stop_patience);
  Rng rng = Rng::derive(seed, kShuffleStream);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<NamedTensor> best = snapshot(model.params());

  double lr = cfg.lr;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      model.params().zero_grad();
      try {
        for (std::size_t i = start; i < end; ++i) {
          const Sample& s = train_set[order[i]];
          Graph g;
          const auto out = model.forward(g, s);
          Var loss = ops::weighted_cross_entropy(ops::reshape(out.logits, {1, 2}), {s.label}, weights);
          epoch_loss += loss.value()[0];
          g.backward(ops::scale(loss, inv_batch));
        }
        adam.step();
      } catch (const NumericError& e) {
        throw NumericError("non-finite value at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
    }
    EpochRecord record;
    record.epoch = epoch;
    record.lr = lr;
    record.train_loss = epoch_loss / static_cast<double>(train_set.size());
    record.val_loss = dataset_loss(model, val_set, weights);
    if (!std::isfinite(record.train_loss) || !std::isfinite(record.val_loss)) {
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
    }
    history.epochs.push_back(record);

    const bool stop = early.observe(epoch, record.val_loss);
    if (early.improved()) best = snapshot(model.params());
    lr = plateau.observe(record.val_loss, lr);
    adam.set_lr(lr);
    if (stop) {
      history.stopped_early = epoch < cfg.max_epochs;
      break;
    }
  }
  history.best_epoch = early.best_epoch();
  history.best_val_loss = early.best_value();
  restore(model.params(), best);
  return history;
}

Evaluation evaluate(const FusionModel& model, const std::vector<Sample>& samples) {
  Evaluation ev;
  ev.predictions.resize(samples.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(samples.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      ev.predictions[static_cast<std::size_t>(i)] =
          predict(model, samples[static_cast<std::size_t>(i)]).label;
    } catch (...) {
#pragma omp critical(botdna_eval_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  require_labels(samples, "evaluation");
  for (const auto& s : samples) ev.labels.push_back(s.label);
  ev.confusion = confusion(ev.predictions, ev.labels);
  ev.metrics = metrics(ev.confusion);
  return ev;
}

RunReport run_protocol(const ModelConfig& model_cfg, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.test.empty()) throw Error("run_protocol: empty test split");
  RunReport report;
  report.model = model_cfg;
  report.train = cfg;
  report.runs.resize(cfg.seeds.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::int64_t>(cfg.seeds.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      SeedRun& run = report.runs[static_cast<std::size_t>(i)];
      run.seed = cfg.seeds[static_cast<std::size_t>(i)];
      FusionModel model(model_cfg, run.seed);
      run.history = train(model, data.train, data.val, cfg, run.seed);
      const auto ev = evaluate(model, data.test);
      run.confusion = ev.confusion;
      run.metrics = ev.metrics;
      run.parameters = snapshot(model.params());
    } catch (...) {
#pragma omp critical(botdna_protocol_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<MetricMap> rows;
  for (const auto& run : report.runs) rows.push_back(to_map(run.metrics));
  report.aggregate = aggregate(rows);
  return report;
}

nlohmann::ordered_json to_json(const ModelConfig& cfg) {
  nlohmann::ordered_json j;
  j["fusion"] = std::string(fusion_name(cfg.fusion));
  j["encoder"] = std::string(encoder_name(cfg.encoder));
  j["mode"] = std::string(vision_mode_name(cfg.mode));
  j["hidden"] = cfg.hidden;
  j["gmu_hidden"] = cfg.gmu_hidden;
  j["text_dim"] = cfg.text_dim;
  j["vision_dim"] = cfg.vision_dim;
  j["hash_seed"] = cfg.hash_seed;
  return j;
}

nlohmann::ordered_json to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["lr"] = cfg.lr;
  j["max_epochs"] = cfg.max_epochs;
  j["early_stop_patience"] = cfg.early_stop_patience;
  j["plateau_factor"] = cfg.plateau_factor;
  j["plateau_patience"] = cfg.plateau_patience;
  j["batch_size"] = cfg.batch_size;
  if (cfg.auto_class_weights) {
    j["class_weights"] = "auto";
  } else {
    j["class_weights"] = {cfg.class_weights[0], cfg.class_weights[1]};
  }
  j["seeds"] = cfg.seeds;
  return j;
}

nlohmann::ordered_json to_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["architecture"] = std::string(fusion_title(report.model.fusion));
  j["model"] = to_json(report.model);
  j["train"] = to_json(report.train);
  j["positive_class"] = "bot (label 1)";
  j["std_convention"] = "population (divide by n)";
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& run : report.runs) {
    nlohmann::ordered_json r;
    r["seed"] = run.seed;
    r["best_epoch"] = run.history.best_epoch;
    r["best_val_loss"] = run.history.best_val_loss;
    r["stopped_early"] = run.history.stopped_early;
    r["class_weights"] = {run.history.class_weights[0], run.history.class_weights[1]};
    r["history"] = nlohmann::ordered_json::array();
    for (const auto& e : run.history.epochs) {
      r["history"].push_back({{"epoch", e.epoch},
                              {"lr", e.lr},
                              {"train_loss", e.train_loss},
                              {"val_loss", e.val_loss}});
    }
    r["confusion"] = {{"tp", run.confusion.tp},
                      {"fp", run.confusion.fp},
                      {"fn", run.confusion.fn},
                      {"tn", run.confusion.tn}};
    nlohmann::ordered_json m;
    const auto values = to_map(run.metrics);
    for (auto name : kMetricNames) m[std::string(name)] = values.at(std::string(name));
    r["metrics"] = m;
    r["degenerate"] = run.metrics.degenerate;
    j["runs"].push_back(r);
  }
  nlohmann::ordered_json mean, stdev;
  for (auto name : kMetricNames) {
    mean[std::string(name)] = report.aggregate.mean.at(std::string(name));
    stdev[std::string(name)] = report.aggregate.std.at(std::string(name));
  }
  j["aggregate"] = {{"n", report.aggregate.n}, {"mean", mean}, {"std", stdev}};
  return j;
}

std::string markdown_report(const RunReport& report) {
  std::string out = "Test-split metrics over " + std::to_string(report.runs.size()) +
                    " seed(s), mean \xC2\xB1 population std, in percent. Positive class: bot.\n\n";
  out += markdown_table({TableRow{std::string(fusion_title(report.model.fusion)), report.aggregate}});
  return out;
}

}  // namespace botdna
