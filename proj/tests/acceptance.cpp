// Acceptance runner: one PASS/FAIL/SKIP line per criterion, exit status 1
// when any criterion fails.
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <regex>
#include <set>
#include <string>

#include "botdna/dna.hpp"
#include "botdna/encoders.hpp"
#include "botdna/imagify.hpp"
#include "botdna/ingest.hpp"
#include "botdna/lcs.hpp"
#include "botdna/metrics.hpp"
#include "botdna/ops.hpp"
#include "botdna/pipeline.hpp"
#include "botdna/png.hpp"
#include "botdna/synth.hpp"
#include "botdna/train.hpp"
#include "grad_suite.hpp"
#include "lcs_oracle.hpp"

using namespace botdna;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome dna_correctness() {
  const auto t0 = Clock::now();
  Rng rng(101);
  std::size_t bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto rec = sort_chronological(synth::random_timeline(rng, "u", 1 + rng.uniform_index(300)));
    const auto type3 = encode(rec, Alphabet::Type3);
    const auto content5 = encode(rec, Alphabet::Content5);
    std::map<char, std::size_t> kinds, symbols, contents, content_symbols;
    for (const auto& t : rec.tweets) {
      ++kinds[t.kind == TweetKind::Retweet ? 'T' : t.kind == TweetKind::Reply ? 'C' : 'A'];
      const int cats = (t.n_urls > 0) + (t.n_hashtags > 0) + (t.n_mentions > 0);
      ++contents[cats == 0 ? 'N' : cats > 1 ? 'X' : t.n_urls ? 'U' : t.n_hashtags ? 'H' : 'M'];
    }
    for (char c : type3.seq) ++symbols[c];
    for (char c : content5.seq) ++content_symbols[c];
    if (type3.seq.size() != rec.tweets.size() || content5.seq.size() != rec.tweets.size() ||
        symbols != kinds || content_symbols != contents) {
      ++bad;
    }
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 5.0 ? Status::Pass : Status::Fail,
          std::to_string(bad) + " violations in 1000 timelines, " + fmt("%.2f s (limit 5 s)", secs)};
}

Outcome image_pipeline() {
  std::string detail;
  bool ok = true;
  const auto t0 = Clock::now();
  std::size_t mismatches = 0;
  for (std::int64_t n = 1; n <= 1000000; ++n) {
    const auto s = static_cast<std::int64_t>(canvas_side(n));
    // Oracle: smallest s with s*s >= n, checked by its defining inequalities.
    if (!(s * s >= n && (s - 1) * (s - 1) < n)) ++mismatches;
  }
  const double secs = seconds_since(t0);
  ok = ok && mismatches == 0 && secs < 2.0;
  detail += "canvas_side " + std::to_string(mismatches) + " mismatches in " + fmt("%.2f s", secs);

  Rng rng(102);
  std::size_t round_trip_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Alphabet a = trial % 2 ? Alphabet::Content5 : Alphabet::Type3;
    const auto symbols = alphabet_symbols(a);
    DnaSequence seq;
    seq.alphabet = a;
    const auto n = 1 + rng.uniform_index(500);
    for (std::size_t i = 0; i < n; ++i) seq.seq += symbols[rng.uniform_index(symbols.size())];
    const auto pal = Palette::defaults(a);
    if (unpaint(paint(seq, canvas_side(static_cast<std::int64_t>(n)), pal), n, pal) != seq.seq) ++round_trip_failures;
  }
  ok = ok && round_trip_failures == 0;
  detail += "; round trip failures " + std::to_string(round_trip_failures) + "/1000";

  std::vector<UserRecord> sorted;
  for (auto& r : synth::fixture_corpus()) sorted.push_back(sort_chronological(r));
  const auto enc = encode_records(sorted, Alphabet::Type3);
  const auto dir = std::filesystem::temp_directory_path() / "botdna_acceptance_render";
  std::filesystem::remove_all(dir);
  const auto rows = render_corpus(enc.sequences, Palette::defaults(Alphabet::Type3), dir / "a");
  render_corpus(enc.sequences, Palette::defaults(Alphabet::Type3), dir / "b");
  std::size_t differing = 0;
  for (const auto& r : rows) {
    if (read_binary_file(dir / "a" / r.path) != read_binary_file(dir / "b" / r.path)) ++differing;
  }
  ok = ok && differing == 0 && rows.size() == 12;
  detail += "; fixture PNGs differing " + std::to_string(differing) + "/" + std::to_string(rows.size());
  return {ok ? Status::Pass : Status::Fail, detail};
}

Outcome lcs_equivalence() {
  const auto t0 = Clock::now();
  Rng rng(103);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = 2 + rng.uniform_index(7);
    const auto sigma = 1 + rng.uniform_index(5);
    std::vector<std::string> strings;
    std::vector<NamedString> named;
    for (std::size_t i = 0; i < n; ++i) {
      std::string s;
      const auto len = rng.uniform_index(65);
      for (std::size_t j = 0; j < len; ++j) s += static_cast<char>('A' + rng.uniform_index(sigma));
      strings.push_back(s);
      named.push_back({"s" + std::to_string(i), s});
    }
    if (lcs_among(strings) != testing::brute_lcs_among(strings)) ++mismatches;
    const auto curve = lcs_curve(named);
    const auto expected = testing::brute_curve(strings);
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (curve.points.at(i).lcs_len != expected[i]) ++mismatches;
    }
  }
  std::vector<std::string> bots;
  const auto verdict = detect_group(lcs_curve(synth::planted_lcs_strings(0, &bots)));
  const bool planted = std::set<std::string>(verdict.bot_group.begin(), verdict.bot_group.end()) ==
                       std::set<std::string>(bots.begin(), bots.end());
  const double secs = seconds_since(t0);
  return {mismatches == 0 && planted && secs < 60.0 ? Status::Pass : Status::Fail,
          std::to_string(mismatches) + " mismatches over 500 corpora; planted bots " +
              (planted ? "recovered" : "missed") + "; " + fmt("%.1f s (limit 60 s)", secs)};
}

Outcome gradient_suite() {
  Rng rng(104);
  double worst = 0.0;
  std::string worst_case;
  std::size_t trials = 0;
  const auto cases = testing::gradient_cases();
  for (int round = 0; round < 8; ++round) {
    for (const auto& c : cases) {
      const auto res = c.run(rng);
      ++trials;
      if (res.max_rel_err > worst) {
        worst = res.max_rel_err;
        worst_case = c.name + " " + res.worst;
      }
    }
  }

  double softmax_dev = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    Graph g;
    const std::size_t rows = 1 + rng.uniform_index(8), cols = 1 + rng.uniform_index(16);
    const Tensor s = ops::softmax_lastdim(g.input(testing::random_tensor({rows, cols}, rng, -40, 40))).value();
    for (std::size_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < cols; ++c) total += s.at(r, c);
      softmax_dev = std::max(softmax_dev, std::abs(total - 1.0));
    }
  }

  double gate_lo = 1.0, gate_hi = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(8), h = 1 + rng.uniform_index(8);
    const double spread = rng.uniform(0.1, 8.0);
    Parameter w_t("w_t", testing::random_tensor({d, h}, rng)), b_t("b_t", testing::random_tensor({h}, rng));
    Parameter w_v("w_v", testing::random_tensor({d, h}, rng)), b_v("b_v", testing::random_tensor({h}, rng));
    Parameter w_z("w_z", testing::random_tensor({2 * d, h}, rng, -spread, spread));
    Parameter b_z("b_z", testing::random_tensor({h}, rng, -spread, spread));
    Graph g;
    const auto out = ops::gmu(g.input(testing::random_tensor({d}, rng)), g.input(testing::random_tensor({d}, rng)),
                              ops::GmuParams{&w_t, &b_t, &w_v, &b_v, &w_z, &b_z});
    for (double z : out.gate.value().values()) {
      gate_lo = std::min(gate_lo, z);
      gate_hi = std::max(gate_hi, z);
    }
  }
  const bool ok = trials >= 100 && worst < 1e-4 && softmax_dev <= 1e-12 && gate_lo > 0.0 && gate_hi < 1.0;
  return {ok ? Status::Pass : Status::Fail,
          std::to_string(trials) + " trials over " + std::to_string(cases.size()) + " ops/heads, max rel err " +
              fmt("%.2e", worst) + " (" + worst_case + "); softmax |sum-1| " + fmt("%.1e", softmax_dev) +
              "; gate range [" + fmt("%.2e", gate_lo) + ", 1 - " + fmt("%.2e", 1.0 - gate_hi) + "]"};
}

Outcome degenerate_gates() {
  Rng rng(105);
  double worst_text = 0.0, worst_vision = 0.0, worst_attention = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dt = 2 + rng.uniform_index(8), dv = 2 + rng.uniform_index(8), h = 1 + rng.uniform_index(8);
    Parameter w_t("w_t", testing::random_tensor({dt, h}, rng)), b_t("b_t", testing::random_tensor({h}, rng));
    Parameter w_v("w_v", testing::random_tensor({dv, h}, rng)), b_v("b_v", testing::random_tensor({h}, rng));
    Parameter w_z("w_z", Tensor({dt + dv, h})), b_z("b_z", Tensor({h}, 30.0));
    const ops::GmuParams p{&w_t, &b_t, &w_v, &b_v, &w_z, &b_z};
    Graph g;
    const Var ft = g.input(testing::random_tensor({dt}, rng)), fv = g.input(testing::random_tensor({dv}, rng));
    const Tensor text_path = ops::tanh(ops::dense(ft, w_t, b_t)).value();
    const Tensor vision_path = ops::tanh(ops::dense(fv, w_v, b_v)).value();
    const Tensor h_text = ops::gmu(ft, fv, p).h.value();
    b_z.value.fill(-30.0);
    const Tensor h_vision = ops::gmu(ft, fv, p).h.value();
    for (std::size_t i = 0; i < h; ++i) {
      worst_text = std::max(worst_text, std::abs(h_text[i] - text_path[i]));
      worst_vision = std::max(worst_vision, std::abs(h_vision[i] - vision_path[i]));
    }

    const std::size_t n = 1 + rng.uniform_index(6), d = 1 + rng.uniform_index(8);
    const Tensor v = testing::random_tensor({1, d}, rng, -10, 10);
    const Tensor out = ops::scaled_dot_attention(g.input(testing::random_tensor({n, d}, rng, -10, 10)),
                                                 g.input(testing::random_tensor({1, d}, rng, -10, 10)), g.input(v))
                           .value();
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < d; ++c) worst_attention = std::max(worst_attention, std::abs(out.at(r, c) - v.at(0, c)));
    }
  }
  const bool ok = worst_text <= 1e-8 && worst_vision <= 1e-8 && worst_attention == 0.0;
  return {ok ? Status::Pass : Status::Fail,
          "gate->1 vs text path " + fmt("%.1e", worst_text) + ", gate->0 vs vision path " + fmt("%.1e", worst_vision) +
              " (limit 1e-8); single-key attention max deviation " + fmt("%.1e", worst_attention)};
}

Outcome metrics_fixture() {
  const auto m = metrics(confusion({1, 1, 1, 1, 0, 0, 0, 0, 0, 0}, {1, 1, 1, 0, 1, 0, 0, 0, 0, 0}));
  const bool values = std::abs(m.precision - 0.75) <= 1e-6 && std::abs(m.recall - 0.75) <= 1e-6 &&
                      std::abs(m.f1 - 0.75) <= 1e-6 && std::abs(m.accuracy - 0.8) <= 1e-6 &&
                      std::abs(m.specificity - 0.833333) <= 1e-6;
  Rng rng(106);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<MetricMap> rows;
    const auto n = 1 + rng.uniform_index(10);
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back(to_map(metrics({rng.uniform_index(20), rng.uniform_index(20), rng.uniform_index(20),
                                     rng.uniform_index(20)})));
    }
    const auto agg = aggregate(rows);
    for (auto name : kMetricNames) {
      const std::string key(name);
      long double sum = 0;
      for (const auto& r : rows) sum += r.at(key);
      const long double mean = sum / static_cast<long double>(n);
      long double ss = 0;
      for (const auto& r : rows) ss += (r.at(key) - mean) * (r.at(key) - mean);
      const long double sd = std::sqrt(ss / static_cast<long double>(n));
      worst = std::max(worst, static_cast<double>(std::fabs(agg.mean.at(key) - mean)));
      worst = std::max(worst, static_cast<double>(std::fabs(agg.std.at(key) - sd)));
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "P=%.6f R=%.6f F1=%.6f Acc=%.6f Spec=%.6f; aggregate recomputation max diff %.1e",
                m.precision, m.recall, m.f1, m.accuracy, m.specificity, worst);
  return {values && worst <= 1e-12 ? Status::Pass : Status::Fail, buf};
}

Outcome learnability() {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto t0 = Clock::now();
  const auto corpus = corpus_from_split_field(filter_eligible(synth::learnability_corpus()), "learnability");
  const Dataset data = prepare_toy(corpus, ToyInputOptions{});
  ModelConfig model;
  model.fusion = FusionKind::Concat;
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.seeds = {0};
  const auto report = run_protocol(model, data, cfg);
  const double secs = seconds_since(t0);
  omp_set_num_threads(saved);
  const auto& run = report.runs.at(0);
  const bool ok = run.metrics.accuracy >= 0.95 && run.history.epochs.size() <= 30 && secs < 300.0;
  return {ok ? Status::Pass : Status::Fail,
          std::to_string(data.train.size()) + "/" + std::to_string(data.val.size()) + "/" +
              std::to_string(data.test.size()) + " split, test accuracy " + fmt("%.4f", run.metrics.accuracy) +
              " (need >= 0.95), best epoch " + std::to_string(run.history.best_epoch) + " of " +
              std::to_string(run.history.epochs.size()) + ", " + fmt("%.1f s single-threaded (limit 300 s)", secs)};
}

Dataset xor_data() {
  const auto x = synth::xor_dataset();
  return prepare_precomputed(corpus_from_split_field(x.records, "xor"),
                             FeatureStore::from_entries(x.features, kFeatureDim, kFeatureDim));
}

Outcome cross_modal_advantage() {
  const Dataset data = xor_data();
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.seeds = {0};
  std::map<FusionKind, double> acc;
  std::string detail;
  for (auto kind : {FusionKind::CrossModal, FusionKind::GMU, FusionKind::TextOnly, FusionKind::VisionOnly}) {
    ModelConfig model;
    model.fusion = kind;
    model.encoder = EncoderKind::Precomputed;
    acc[kind] = run_protocol(model, data, cfg).runs.at(0).metrics.accuracy;
    detail += (detail.empty() ? "" : ", ") + std::string(fusion_name(kind)) + " " + fmt("%.3f", acc[kind]);
  }
  const bool ok = acc[FusionKind::CrossModal] >= 0.90 && acc[FusionKind::GMU] >= 0.90 &&
                  acc[FusionKind::TextOnly] <= 0.60 && acc[FusionKind::VisionOnly] <= 0.60;
  return {ok ? Status::Pass : Status::Fail,
          "test accuracy " + detail + " (fusion >= 0.90, unimodal <= 0.60)"};
}

Outcome determinism() {
  const Dataset data = xor_data();
  ModelConfig model;
  model.fusion = FusionKind::CrossModal;
  model.encoder = EncoderKind::Precomputed;
  TrainConfig cfg;
  cfg.lr = 1e-3;
  cfg.max_epochs = 4;
  const auto a = run_protocol(model, data, cfg);
  const auto b = run_protocol(model, data, cfg);
  const std::string ja = to_json(a).dump(), jb = to_json(b).dump();
  const std::string table = markdown_report(a);
  const std::regex row(R"(\| Cross-Modal Attention( \| \d+\.\d\d ± \d+\.\d\d){5} \|)");
  bool identical = ja == jb && markdown_report(b) == table;

  const auto dir = std::filesystem::temp_directory_path() / "botdna_acceptance_train";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string cli = "cd '" + dir.string() + "' && '" BOTDNA_CLI "' ";
  const std::string train_args =
      "--seed 0 --encoder precomputed --fusion crossmodal train --corpus xor.jsonl "
      "--features xor_features.bwts --lr 1e-3 --max-epochs 2 --out ";
  bool cli_identical = std::system((cli + "synth xor --out . > /dev/null").c_str()) == 0 &&
                       std::system((cli + train_args + "run > /dev/null").c_str()) == 0;
  if (cli_identical) {
    const auto report = read_binary_file(dir / "run/report.json");
    const auto weights = read_binary_file(dir / "run/model.seed0.bwts");
    cli_identical = std::system((cli + train_args + "run > /dev/null").c_str()) == 0 &&
                    read_binary_file(dir / "run/report.json") == report &&
                    read_binary_file(dir / "run/model.seed0.bwts") == weights;
  }
  identical = identical && cli_identical;
  const bool formatted = a.aggregate.n == 5 && std::regex_search(table, row);
  return {identical && formatted ? Status::Pass : Status::Fail,
          std::string("5-seed reports ") + (ja == jb ? "bit-identical" : "DIFFER") + " (" +
              std::to_string(ja.size()) + " bytes); train command reports " +
              (cli_identical ? "bit-identical" : "DIFFER") + "; table row " + (formatted ? "mean ± std" : "MALFORMED")};
}

Outcome cresci_optional() {
  const char* corpus_path = std::getenv("BOTDNA_CRESCI_CORPUS");
  const char* features_path = std::getenv("BOTDNA_CRESCI_FEATURES");
  if (!corpus_path || !features_path) {
    return {Status::Skip, "set BOTDNA_CRESCI_CORPUS and BOTDNA_CRESCI_FEATURES to run"};
  }
  auto parsed = parse_jsonl(corpus_path);
  auto records = filter_eligible(std::move(parsed.records));
  const bool presplit = std::all_of(records.begin(), records.end(), [](const auto& r) { return r.split.has_value(); });
  if (!presplit) records = balance_downsample(std::move(records), 0);
  const Corpus corpus = presplit ? corpus_from_split_field(std::move(records), "cresci")
                                 : split_corpus(std::move(records), {}, 0, "cresci");
  const Dataset data = prepare_precomputed(corpus, FeatureStore::load(features_path, kFeatureDim, kFeatureDim));
  ModelConfig model;
  model.encoder = EncoderKind::Precomputed;
  const auto report = run_protocol(model, data, TrainConfig{});
  const double f1 = report.aggregate.mean.at("f1");
  return {f1 > 0.95 ? Status::Pass : Status::Fail, "mean test F1 " + fmt("%.4f", f1) + " (need > 0.95)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"dna-correctness", dna_correctness},
      {"image-pipeline", image_pipeline},
      {"lcs-oracle-equivalence", lcs_equivalence},
      {"gradient-suite", gradient_suite},
      {"degenerate-gate-identities", degenerate_gates},
      {"metrics-fixture", metrics_fixture},
      {"end-to-end-learnability", learnability},
      {"cross-modal-advantage", cross_modal_advantage},
      {"determinism", determinism},
      {"cresci17-precomputed-f1", cresci_optional},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Skip ? "SKIP" : "FAIL";
    if (o.status == Status::Fail) ++failures;
    std::printf("%s %s: %s\n", tag, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
