// botdna: command-line pipeline from raw account corpora to trained fusion
// heads. Every command reads a JSON config (optional) and lets flags
// override it; reports embed the resolved settings and input hashes.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "botdna/checkpoint.hpp"
#include "botdna/dna.hpp"
#include "botdna/error.hpp"
#include "botdna/hash.hpp"
#include "botdna/imagify.hpp"
#include "botdna/ingest.hpp"
#include "botdna/lcs.hpp"
#include "botdna/pipeline.hpp"
#include "botdna/png.hpp"
#include "botdna/synth.hpp"
#include "botdna/threads.hpp"
#include "botdna/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace botdna;

namespace {

struct Settings {
  std::optional<std::string> input, corpus, dna, features, images, checkpoint, out;
  std::optional<std::string> alphabet, palette, fusion, encoder, mode, split;
  std::optional<std::uint64_t> seed, hash_seed;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<double> lr, plateau_factor;
  std::optional<std::size_t> max_epochs, early_stop_patience, plateau_patience, batch_size;
  std::optional<std::size_t> text_dim, vision_dim;
  std::optional<std::vector<double>> class_weights;  // absent = auto
  std::optional<std::vector<double>> fractions;
  std::optional<bool> balance, raw_dump;
};

template <typename T>
void take(const json& j, const char* key, std::optional<T>& slot) {
  try {
    slot = j.get<T>();
  } catch (const json::exception&) {
    throw Error(std::string("config key '") + key + "' has the wrong type");
  }
}

Settings load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("config " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!root.is_object()) throw Error("config must be a JSON object");
  Settings s;
  for (const auto& [key, value] : root.items()) {
    const char* k = key.c_str();
    if (key == "input") take(value, k, s.input);
    else if (key == "corpus") take(value, k, s.corpus);
    else if (key == "dna") take(value, k, s.dna);
    else if (key == "features") take(value, k, s.features);
    else if (key == "images") take(value, k, s.images);
    else if (key == "checkpoint") take(value, k, s.checkpoint);
    else if (key == "out") take(value, k, s.out);
    else if (key == "alphabet") take(value, k, s.alphabet);
    else if (key == "palette") take(value, k, s.palette);
    else if (key == "fusion") take(value, k, s.fusion);
    else if (key == "encoder") take(value, k, s.encoder);
    else if (key == "mode") take(value, k, s.mode);
    else if (key == "split") take(value, k, s.split);
    else if (key == "seed") take(value, k, s.seed);
    else if (key == "hash_seed") take(value, k, s.hash_seed);
    else if (key == "seeds") take(value, k, s.seeds);
    else if (key == "lr") take(value, k, s.lr);
    else if (key == "plateau_factor") take(value, k, s.plateau_factor);
    else if (key == "max_epochs") take(value, k, s.max_epochs);
    else if (key == "early_stop_patience") take(value, k, s.early_stop_patience);
    else if (key == "plateau_patience") take(value, k, s.plateau_patience);
    else if (key == "batch_size") take(value, k, s.batch_size);
    else if (key == "text_dim") take(value, k, s.text_dim);
    else if (key == "vision_dim") take(value, k, s.vision_dim);
    else if (key == "fractions") take(value, k, s.fractions);
    else if (key == "balance") take(value, k, s.balance);
    else if (key == "raw_dump") take(value, k, s.raw_dump);
    else if (key == "class_weights") {
      if (value.is_string() && value.get<std::string>() == "auto") {
        s.class_weights.reset();
      } else {
        take(value, k, s.class_weights);
        if (s.class_weights->size() != 2) throw Error("class_weights must be \"auto\" or [w0, w1]");
      }
    } else {
      throw Error("unknown config key '" + key + "'");
    }
  }
  return s;
}

// Flags given on the command line win over the config file.
template <typename T>
void overlay(std::optional<T>& base, const std::optional<T>& flag) {
  if (flag) base = flag;
}

Settings merge(Settings cfg, const Settings& flags) {
  overlay(cfg.input, flags.input);
  overlay(cfg.corpus, flags.corpus);
  overlay(cfg.dna, flags.dna);
  overlay(cfg.features, flags.features);
  overlay(cfg.images, flags.images);
  overlay(cfg.checkpoint, flags.checkpoint);
  overlay(cfg.out, flags.out);
  overlay(cfg.alphabet, flags.alphabet);
  overlay(cfg.palette, flags.palette);
  overlay(cfg.fusion, flags.fusion);
  overlay(cfg.encoder, flags.encoder);
  overlay(cfg.mode, flags.mode);
  overlay(cfg.split, flags.split);
  overlay(cfg.seed, flags.seed);
  overlay(cfg.hash_seed, flags.hash_seed);
  overlay(cfg.lr, flags.lr);
  overlay(cfg.max_epochs, flags.max_epochs);
  overlay(cfg.balance, flags.balance);
  overlay(cfg.raw_dump, flags.raw_dump);
  return cfg;
}

template <typename T>
T require(const std::optional<T>& v, const char* what) {
  if (!v) throw Error(std::string("missing required setting '") + what + "' (flag or config key)");
  return *v;
}

std::string file_hash(const fs::path& path) { return hex16(fnv1a(read_binary_file(path))); }

json input_entry(const fs::path& path) {
  return json{{"path", path.string()}, {"fnv1a64", file_hash(path)}};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_binary_file(path, text);
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

Alphabet resolved_alphabet(const Settings& s) { return parse_alphabet(s.alphabet.value_or("type3")); }

Palette resolved_palette(const Settings& s, Alphabet alphabet) {
  Palette p = parse_palette(alphabet, s.palette.value_or(""));
  p.validate();
  return p;
}

Corpus load_split_corpus(const fs::path& path) {
  auto parsed = parse_jsonl(path);
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
  if (parsed.records.empty()) throw Error(path.string() + ": corpus is empty");
  for (const auto& r : parsed.records) {
    if (!r.split) {
      throw Error(path.string() + ": record '" + r.user_id +
                  "' has no split; run `botdna ingest` on the raw file first");
    }
  }
  return corpus_from_split_field(std::move(parsed.records), path.stem().string());
}

json counts_json(const Corpus& corpus) {
  json j;
  for (auto split : kSplitNames) {
    const auto& c = corpus.class_counts.at(std::string(split));
    j[std::string(split)] = {{"human", c.human}, {"bot", c.bot}, {"unlabeled", c.unlabeled},
                             {"total", c.total()}};
  }
  return j;
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const Settings& s) {
  const fs::path input = require(s.input, "input");
  const fs::path out = require(s.out, "out");
  const std::uint64_t seed = s.seed.value_or(0);
  auto parsed = parse_jsonl(input);
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
  if (parsed.records.empty()) throw Error(input.string() + ": no records (empty file)");
  const std::size_t raw_count = parsed.records.size();

  std::vector<UserRecord> records;
  for (auto& r : filter_eligible(std::move(parsed.records))) records.push_back(sort_chronological(std::move(r)));
  if (records.empty()) throw Error("no eligible records after filtering");
  const std::size_t eligible = records.size();
  if (s.balance.value_or(false)) records = balance_downsample(std::move(records), seed);

  const bool presplit = std::all_of(records.begin(), records.end(), [](const UserRecord& r) { return r.split.has_value(); });
  Corpus corpus;
  SplitFractions fr;
  if (s.fractions) {
    if (s.fractions->size() != 3) throw Error("fractions must list train, val and test");
    fr = {(*s.fractions)[0], (*s.fractions)[1], (*s.fractions)[2]};
  }
  if (presplit) {
    corpus = corpus_from_split_field(std::move(records), input.stem().string());
  } else {
    corpus = split_corpus(std::move(records), fr, seed, input.stem().string());
  }

  fs::create_directories(out);
  const auto all = corpus.all_records();
  write_jsonl(out / "corpus.jsonl", all);

  json summary;
  summary["command"] = "ingest";
  summary["config"] = {{"input", input.string()},
                       {"out", out.string()},
                       {"seed", seed},
                       {"balance", s.balance.value_or(false)},
                       {"split_source", presplit ? "split field" : "stratified split"},
                       {"fractions", {fr.train, fr.val, fr.test}}};
  summary["inputs"] = {{"input", input_entry(input)}};
  summary["records_read"] = raw_count;
  summary["records_eligible"] = eligible;
  summary["users"] = all.size();
  summary["warnings"] = parsed.warnings.size();
  summary["splits"] = counts_json(corpus);
  write_json(out / "ingest_summary.json", summary);

  std::cout << "users: " << all.size() << " (read " << raw_count << ", eligible " << eligible << ")\n";
  for (auto split : kSplitNames) {
    const auto& c = corpus.class_counts.at(std::string(split));
    std::cout << split << ": " << c.total() << " (human " << c.human << ", bot " << c.bot
              << ", unlabeled " << c.unlabeled << ")\n";
  }
  return 0;
}

// ---------------------------------------------------------------- encode-dna

int cmd_encode(const Settings& s) {
  const fs::path corpus_path = require(s.corpus, "corpus");
  const fs::path out = require(s.out, "out");
  const Alphabet alphabet = resolved_alphabet(s);
  auto parsed = parse_jsonl(corpus_path);
  if (parsed.records.empty()) throw Error(corpus_path.string() + ": corpus is empty");
  std::vector<UserRecord> records;
  for (auto& r : filter_eligible(std::move(parsed.records))) records.push_back(sort_chronological(std::move(r)));
  const EncodedCorpus encoded = encode_records(records, alphabet);

  const std::string stem = alphabet == Alphabet::Type3 ? "dna.type3" : "dna.content5";
  fs::create_directories(out);
  write_dna_jsonl(out / (stem + ".jsonl"), encoded);
  write_dna_tsv(out / (stem + ".tsv"), encoded);
  json meta;
  meta["command"] = "encode-dna";
  meta["config"] = {{"corpus", corpus_path.string()}, {"alphabet", alphabet_name(alphabet)}, {"out", out.string()}};
  meta["inputs"] = {{"corpus", input_entry(corpus_path)}};
  meta["alphabet"] = alphabet_name(alphabet);
  meta["sequences"] = encoded.sequences.size();
  meta["max_len"] = encoded.max_len;
  meta["canvas_side"] = canvas_side(static_cast<std::int64_t>(encoded.max_len));
  write_json(out / (stem + ".meta.json"), meta);
  std::cout << "encoded " << encoded.sequences.size() << " sequences (" << alphabet_name(alphabet)
            << ", max_len " << encoded.max_len << ") -> " << (out / (stem + ".jsonl")).string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- render-images

fs::path sidecar_of(const fs::path& dna_path) {
  fs::path p = dna_path;
  return p.replace_extension(".meta.json");
}

int cmd_render(const Settings& s) {
  const fs::path dna_path = require(s.dna, "dna");
  const fs::path out = require(s.out, "out");
  const EncodedCorpus encoded = read_dna_jsonl(dna_path);
  if (encoded.sequences.empty()) throw Error(dna_path.string() + ": no sequences");
  const Alphabet alphabet = encoded.sequences.begin()->second.alphabet;
  if (s.alphabet && parse_alphabet(*s.alphabet) != alphabet) {
    throw Error("--alphabet " + *s.alphabet + " does not match the DNA file (" +
                std::string(alphabet_name(alphabet)) + ")");
  }
  const fs::path meta_path = sidecar_of(dna_path);
  if (fs::exists(meta_path)) {
    const json meta = json::parse(read_binary_file(meta_path));
    if (meta.value("max_len", std::size_t{0}) != encoded.max_len) {
      throw Error("sidecar " + meta_path.string() + " max_len disagrees with " + dna_path.string());
    }
  }
  const Palette palette = resolved_palette(s, alphabet);
  RenderOptions options;
  options.raw_dump = s.raw_dump.value_or(false);
  const auto rows = render_corpus(encoded.sequences, palette, out, options);
  json meta;
  meta["command"] = "render-images";
  meta["config"] = {{"dna", dna_path.string()},
                    {"out", out.string()},
                    {"palette", palette.describe()},
                    {"raw_dump", options.raw_dump}};
  meta["inputs"] = {{"dna", input_entry(dna_path)}};
  meta["images"] = rows.size();
  meta["canvas_side"] = rows.front().side;
  meta["palette_hash"] = palette.hash();
  write_json(out / "render.json", meta);
  std::cout << "rendered " << rows.size() << " images (canvas " << rows.front().side << " -> "
            << kImageSide << "x" << kImageSide << ") into " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- lcs-curve

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

int cmd_lcs(const Settings& s) {
  const fs::path dna_path = require(s.dna, "dna");
  const fs::path out = require(s.out, "out");
  const EncodedCorpus encoded = read_dna_jsonl(dna_path);
  std::vector<NamedString> strings;
  for (const auto& [id, seq] : encoded.sequences) strings.push_back({id, seq.seq});
  if (strings.size() < 2) {
    throw Error("lcs-curve needs at least 2 sequences, got " + std::to_string(strings.size()));
  }
  const LcsCurve curve = lcs_curve(strings);
  std::string tsv = "k\tlcs_len\tmembers\n";
  for (const auto& p : curve.points) {
    tsv += std::to_string(p.k) + "\t" + std::to_string(p.lcs_len) + "\t" + join(p.members, ",") + "\n";
  }
  fs::create_directories(out);
  write_text(out / "lcs_curve.tsv", tsv);

  json verdict;
  verdict["command"] = "lcs-curve";
  verdict["config"] = {{"dna", dna_path.string()}, {"out", out.string()}};
  verdict["inputs"] = {{"dna", input_entry(dna_path)}};
  verdict["sequences"] = strings.size();
  if (curve.points.size() >= 2) {
    const GroupVerdict v = detect_group(curve);
    verdict["split_k"] = v.split_k;
    verdict["drop_magnitude"] = v.drop_magnitude;
    verdict["bot_group"] = v.bot_group;
  } else {
    verdict["split_k"] = nullptr;
    verdict["drop_magnitude"] = 0;
    verdict["bot_group"] = json::array();
    verdict["note"] = "curve has a single point; no drop to locate";
  }
  write_json(out / "verdict.json", verdict);
  std::cout << "curve over " << strings.size() << " sequences; flagged group: "
            << join(verdict["bot_group"].get<std::vector<std::string>>(), ",") << "\n";
  return 0;
}

// ---------------------------------------------------------------- train / evaluate / predict

ModelConfig resolved_model(const Settings& s) {
  ModelConfig m;
  m.fusion = parse_fusion(s.fusion.value_or("concat"));
  m.encoder = parse_encoder(s.encoder.value_or("toy"));
  m.mode = parse_vision_mode(s.mode.value_or("vgg16"));
  m.hash_seed = s.hash_seed.value_or(0);
  m.text_dim = s.text_dim.value_or(kFeatureDim);
  m.vision_dim = s.vision_dim.value_or(kFeatureDim);
  return m;
}

TrainConfig resolved_train(const Settings& s) {
  TrainConfig t;
  if (s.lr) t.lr = *s.lr;
  if (s.max_epochs) t.max_epochs = *s.max_epochs;
  if (s.early_stop_patience) t.early_stop_patience = *s.early_stop_patience;
  if (s.plateau_factor) t.plateau_factor = *s.plateau_factor;
  if (s.plateau_patience) t.plateau_patience = *s.plateau_patience;
  if (s.batch_size) t.batch_size = *s.batch_size;
  if (s.class_weights) {
    t.auto_class_weights = false;
    t.class_weights = {(*s.class_weights)[0], (*s.class_weights)[1]};
  }
  if (s.seeds) t.seeds = *s.seeds;
  if (s.seed) t.seeds = {*s.seed};
  t.validate();
  return t;
}

// Everything needed to rebuild inputs for a trained model.
struct InputSpec {
  Alphabet alphabet = Alphabet::Type3;
  std::string palette_overrides;
  std::size_t canvas_side = 0;
};

std::vector<Sample> samples_for(const ModelConfig& model, const InputSpec& spec,
                                const std::vector<UserRecord>& records, const Settings& s) {
  if (model.encoder == EncoderKind::Precomputed) {
    const fs::path features = require(s.features, "features");
    const auto store = FeatureStore::load(features, model.text_dim, model.vision_dim);
    return precomputed_samples(records, store);
  }
  ToyInputOptions opt;
  opt.alphabet = spec.alphabet;
  opt.palette = parse_palette(spec.alphabet, spec.palette_overrides);
  opt.mode = model.mode;
  opt.hash_seed = model.hash_seed;
  opt.canvas_side = spec.canvas_side;
  if (s.images) opt.images_dir = fs::path(*s.images);
  return toy_samples(records, opt);
}

json metrics_json(const MetricSet& m) {
  json j;
  const auto map = to_map(m);
  for (auto name : kMetricNames) j[std::string(name)] = map.at(std::string(name));
  j["degenerate"] = m.degenerate;
  return j;
}

json confusion_json(const Confusion& c) {
  return json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

int cmd_train(const Settings& s) {
  const fs::path corpus_path = require(s.corpus, "corpus");
  const fs::path out = require(s.out, "out");
  const ModelConfig model = resolved_model(s);
  const TrainConfig train_cfg = resolved_train(s);
  const Corpus corpus = load_split_corpus(corpus_path);

  InputSpec spec;
  spec.alphabet = resolved_alphabet(s);
  spec.palette_overrides = s.palette.value_or("");
  resolved_palette(s, spec.alphabet);
  spec.canvas_side = corpus_canvas_side(corpus.all_records());

  Dataset data;
  data.train = samples_for(model, spec, corpus.split("train"), s);
  data.val = samples_for(model, spec, corpus.split("val"), s);
  data.test = samples_for(model, spec, corpus.split("test"), s);
  const RunReport report = run_protocol(model, data, train_cfg);

  fs::create_directories(out);
  json resolved;
  resolved["corpus"] = corpus_path.string();
  resolved["out"] = out.string();
  resolved["alphabet"] = alphabet_name(spec.alphabet);
  resolved["palette"] = parse_palette(spec.alphabet, spec.palette_overrides).describe();
  resolved["canvas_side"] = spec.canvas_side;
  if (s.features) resolved["features"] = *s.features;
  if (s.images) resolved["images"] = *s.images;
  resolved["model"] = to_json(model);
  resolved["train"] = to_json(train_cfg);
  json inputs;
  inputs["corpus"] = input_entry(corpus_path);
  if (model.encoder == EncoderKind::Precomputed) inputs["features"] = input_entry(*s.features);
  if (s.images) inputs["images_manifest"] = input_entry(fs::path(*s.images) / "manifest.tsv");

  json full;
  full["command"] = "train";
  full["config"] = resolved;
  full["inputs"] = inputs;
  full["report"] = to_json(report);
  write_json(out / "report.json", full);
  write_text(out / "report.md", markdown_report(report));

  json sidecar;
  sidecar["model"] = to_json(model);
  sidecar["alphabet"] = alphabet_name(spec.alphabet);
  sidecar["palette_overrides"] = spec.palette_overrides;
  sidecar["canvas_side"] = spec.canvas_side;
  sidecar["checkpoints"] = json::array();
  for (const auto& run : report.runs) {
    const std::string file = "model.seed" + std::to_string(run.seed) + ".bwts";
    save_tensors(out / file, run.parameters);
    sidecar["checkpoints"].push_back({{"seed", run.seed},
                                      {"file", file},
                                      {"best_epoch", run.history.best_epoch},
                                      {"test_confusion", confusion_json(run.confusion)},
                                      {"test_metrics", metrics_json(run.metrics)}});
  }
  write_json(out / "model.json", sidecar);
  std::cout << markdown_report(report);
  return 0;
}

struct LoadedModel {
  std::unique_ptr<FusionModel> model;
  InputSpec spec;
  json sidecar;
  std::string file;
};

LoadedModel load_model(const fs::path& checkpoint) {
  const fs::path sidecar_path = checkpoint.parent_path() / "model.json";
  if (!fs::exists(sidecar_path)) throw Error("model sidecar " + sidecar_path.string() + " not found");
  LoadedModel lm;
  lm.sidecar = json::parse(read_binary_file(sidecar_path));
  const json& m = lm.sidecar.at("model");
  ModelConfig cfg;
  cfg.fusion = parse_fusion(m.at("fusion").get<std::string>());
  cfg.encoder = parse_encoder(m.at("encoder").get<std::string>());
  cfg.mode = parse_vision_mode(m.at("mode").get<std::string>());
  cfg.hidden = m.at("hidden").get<std::size_t>();
  cfg.gmu_hidden = m.at("gmu_hidden").get<std::size_t>();
  cfg.text_dim = m.at("text_dim").get<std::size_t>();
  cfg.vision_dim = m.at("vision_dim").get<std::size_t>();
  cfg.hash_seed = m.at("hash_seed").get<std::uint64_t>();
  lm.spec.alphabet = parse_alphabet(lm.sidecar.at("alphabet").get<std::string>());
  lm.spec.palette_overrides = lm.sidecar.at("palette_overrides").get<std::string>();
  lm.spec.canvas_side = lm.sidecar.at("canvas_side").get<std::size_t>();
  lm.model = std::make_unique<FusionModel>(cfg, 0);
  restore(lm.model->params(), load_tensors(checkpoint));
  lm.file = checkpoint.filename().string();
  return lm;
}

int cmd_evaluate(const Settings& s) {
  const fs::path checkpoint = require(s.checkpoint, "checkpoint");
  const fs::path corpus_path = require(s.corpus, "corpus");
  const fs::path out = require(s.out, "out");
  const std::string split = s.split.value_or("test");
  const LoadedModel lm = load_model(checkpoint);
  const Corpus corpus = load_split_corpus(corpus_path);
  const auto samples = samples_for(lm.model->config(), lm.spec, corpus.split(split), s);
  if (samples.empty()) throw Error("split '" + split + "' is empty");
  const Evaluation ev = evaluate(*lm.model, samples);

  json j;
  j["command"] = "evaluate";
  j["config"] = {{"checkpoint", checkpoint.string()},
                 {"corpus", corpus_path.string()},
                 {"split", split},
                 {"out", out.string()}};
  j["inputs"] = {{"checkpoint", input_entry(checkpoint)}, {"corpus", input_entry(corpus_path)}};
  j["confusion"] = confusion_json(ev.confusion);
  j["metrics"] = metrics_json(ev.metrics);
  if (split == "test") {
    for (const auto& c : lm.sidecar.at("checkpoints")) {
      if (c.at("file").get<std::string>() != lm.file) continue;
      j["stored_test_metrics"] = c.at("test_metrics");
      j["matches_stored"] = c.at("test_metrics") == j["metrics"] && c.at("test_confusion") == j["confusion"];
    }
  }
  fs::create_directories(out);
  write_json(out / "evaluation.json", j);
  std::cout << j["metrics"].dump() << "\n";
  if (j.contains("matches_stored") && !j["matches_stored"].get<bool>()) {
    throw Error("evaluation differs from the metrics stored at training time");
  }
  return 0;
}

int cmd_predict(const Settings& s, const std::vector<std::string>& users) {
  const fs::path checkpoint = require(s.checkpoint, "checkpoint");
  const fs::path corpus_path = require(s.corpus, "corpus");
  const LoadedModel lm = load_model(checkpoint);
  auto parsed = parse_jsonl(corpus_path);
  std::map<std::string, UserRecord> by_id;
  for (auto& r : parsed.records) by_id.emplace(r.user_id, std::move(r));
  std::vector<UserRecord> chosen;
  if (users.empty()) {
    for (auto& [id, r] : by_id) chosen.push_back(r);
  } else {
    for (const auto& id : users) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw Error("user " + id + " absent");
      chosen.push_back(it->second);
    }
  }
  for (auto& r : chosen) r.label.reset();
  const auto samples = samples_for(lm.model->config(), lm.spec, chosen, s);
  std::string tsv = "user_id\tlabel\tp_human\tp_bot\n";
  for (const auto& sample : samples) {
    const Prediction p = predict(*lm.model, sample);
    char buf[128];
    std::snprintf(buf, sizeof buf, "\t%d\t%.6f\t%.6f\n", p.label, p.probs[0], p.probs[1]);
    tsv += sample.user_id + buf;
  }
  std::cout << tsv;
  if (s.out) write_text(fs::path(*s.out) / "predictions.tsv", tsv);
  return 0;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const Settings& s, const std::string& kind) {
  const fs::path out = require(s.out, "out");
  fs::create_directories(out);
  if (kind == "fixture") {
    write_jsonl(out / "fixture.jsonl", synth::fixture_corpus());
  } else if (kind == "learn") {
    write_jsonl(out / "learnability.jsonl", synth::learnability_corpus(s.seed.value_or(2024)));
  } else if (kind == "planted") {
    std::vector<std::string> bots;
    auto records = synth::records_from_type3(synth::planted_lcs_strings(s.seed.value_or(11), &bots));
    for (auto& r : records) {
      const bool bot = std::find(bots.begin(), bots.end(), r.user_id) != bots.end();
      r.label = bot ? Label::Bot : Label::Human;
    }
    write_jsonl(out / "planted.jsonl", records);
  } else if (kind == "xor") {
    const auto data = synth::xor_dataset(s.seed.value_or(99));
    write_jsonl(out / "xor.jsonl", data.records);
    save_tensors(out / "xor_features.bwts", data.features);
  } else {
    throw Error("unknown synth kind '" + kind + "' (expected fixture|learn|planted|xor)");
  }
  std::cout << "wrote " << kind << " data to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social bot detection from digital DNA: ingest, encode, render, LCS baseline, fusion heads"};
  app.require_subcommand(1);
  app.fallthrough();

  Settings flags;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its keys");
  app.add_option("--seed", flags.seed, "Seed (split seed for ingest, single training seed for train)");
  app.add_option("--alphabet", flags.alphabet, "DNA alphabet")
      ->check(CLI::IsMember({"type3", "content5", "Type3", "Content5"}));
  app.add_option("--fusion", flags.fusion, "Fusion head")
      ->check(CLI::IsMember({"concat", "gmu", "crossmodal", "text-only", "vision-only"}));
  app.add_option("--encoder", flags.encoder, "Feature source")->check(CLI::IsMember({"toy", "precomputed"}));
  app.add_option("--mode", flags.mode, "Vision encoder shape")->check(CLI::IsMember({"vgg16", "alexnet"}));
  app.add_option("--out", flags.out, "Output directory");

  auto* ingest = app.add_subcommand("ingest", "Filter, sort and split a raw JSONL corpus");
  ingest->add_option("--input,input", flags.input, "Raw JSONL file");
  bool balance = false;
  ingest->add_flag("--balance", balance, "Downsample the majority class");

  auto* encode = app.add_subcommand("encode-dna", "Encode every account as a digital DNA string");
  encode->add_option("--corpus", flags.corpus, "Canonical corpus JSONL");

  auto* render = app.add_subcommand("render-images", "Render DNA strings as 256x256 PNG images");
  render->add_option("--dna", flags.dna, "DNA JSONL from encode-dna");
  render->add_option("--palette", flags.palette, "Level overrides, e.g. A=10,C=20,T=30,pad=0");
  bool raw = false;
  render->add_flag("--raw", raw, "Also write raw .bdna dumps");

  auto* lcs = app.add_subcommand("lcs-curve", "LCS curve and coordinated-group verdict");
  lcs->add_option("--dna", flags.dna, "DNA JSONL from encode-dna");

  auto* train_cmd = app.add_subcommand("train", "Train a fusion head over one or more seeds");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a checkpoint on a corpus split");
  auto* predict_cmd = app.add_subcommand("predict", "Label accounts with a checkpoint");
  for (auto* sub : {train_cmd, evaluate_cmd, predict_cmd}) {
    sub->add_option("--corpus", flags.corpus, "Canonical corpus JSONL");
    sub->add_option("--features", flags.features, "Precomputed feature container");
    sub->add_option("--images", flags.images, "Directory written by render-images");
    sub->add_option("--palette", flags.palette, "Palette overrides used when rendering in memory");
  }
  train_cmd->add_option("--lr", flags.lr, "Learning rate");
  train_cmd->add_option("--max-epochs", flags.max_epochs, "Epoch cap");
  for (auto* sub : {evaluate_cmd, predict_cmd}) {
    sub->add_option("--checkpoint", flags.checkpoint, "model.seed<k>.bwts from train");
  }
  evaluate_cmd->add_option("--split", flags.split, "Split to evaluate")->check(CLI::IsMember({"train", "val", "test"}));
  std::vector<std::string> users;
  predict_cmd->add_option("--user", users, "User ids to label (default: all)");

  auto* synth_cmd = app.add_subcommand("synth", "Write the bundled synthetic corpora");
  std::string synth_kind;
  synth_cmd->add_option("kind", synth_kind, "fixture|learn|planted|xor")->required();

  CLI11_PARSE(app, argc, argv);
  if (balance) flags.balance = true;
  if (raw) flags.raw_dump = true;

  try {
    configure_threads_from_env();
    Settings s = config_path.empty() ? flags : merge(load_config(config_path), flags);
    if (*ingest) return cmd_ingest(s);
    if (*encode) return cmd_encode(s);
    if (*render) return cmd_render(s);
    if (*lcs) return cmd_lcs(s);
    if (*train_cmd) return cmd_train(s);
    if (*evaluate_cmd) return cmd_evaluate(s);
    if (*predict_cmd) return cmd_predict(s, users);
    if (*synth_cmd) return cmd_synth(s, synth_kind);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
