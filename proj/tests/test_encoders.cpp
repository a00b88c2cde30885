#include <doctest.h>

#include "botdna/error.hpp"
#include "botdna/encoders.hpp"
#include "botdna/gradcheck.hpp"
#include "botdna/imagify.hpp"
#include "botdna/ops.hpp"
#include "helpers.hpp"

using namespace botdna;

namespace {

DnaImage blank_image(std::uint8_t level = 0) {
  DnaImage img;
  img.side = kImageSide;
  img.channels = 3;
  img.pixels.assign(3 * kImageSide * kImageSide, level);
  return img;
}

DnaImage random_image(Rng& rng) {
  DnaSequence seq;
  seq.alphabet = Alphabet::Type3;
  for (int i = 0; i < 150; ++i) seq.seq += "ACT"[rng.uniform_index(3)];
  return render(seq, canvas_side(150), Palette::defaults(Alphabet::Type3));
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", ",", "world", "!"});
  CHECK(tokenize("  ") .empty());
  CHECK(tokenize("café_bar 42") == std::vector<std::string>{"café_bar", "42"});
  std::string many;
  for (int i = 0; i < 100; ++i) many += "w ";
  CHECK(tokenize(many).size() == kMaxTokens);
}

TEST_CASE("trigram buckets") {
  const auto b = trigram_buckets("ab", 0);
  CHECK(b.size() == 2);  // "<ab" and "ab>"
  for (auto id : b) CHECK(id < kTrigramBuckets);
  CHECK(trigram_buckets("a", 0).size() == 1);
  CHECK(trigram_buckets("hello", 1) != trigram_buckets("hello", 2));
  CHECK(trigram_buckets("hello", 1) == trigram_buckets("hello", 1));
}

TEST_CASE("text encoder") {
  Rng rng(1);
  ParameterSet ps;
  const ToyTextEncoder enc(ps, rng);
  CHECK(ps.find("text.table")->value.shape() == Shape{kTrigramBuckets, kFeatureDim});

  Graph g;
  const auto empty = enc.encode(g, text_input("", 0));
  CHECK(empty.sequence.shape() == Shape{1, kFeatureDim});
  CHECK(empty.pooled.shape() == Shape{kFeatureDim});

  const auto a1 = enc.encode(g, text_input("crypto giveaway follow back", 0));
  const auto a2 = enc.encode(g, text_input("crypto giveaway follow back", 0));
  const auto b = enc.encode(g, text_input("crypto giveaway follow now", 0));
  CHECK(a1.sequence.shape() == Shape{5, kFeatureDim});
  CHECK(a1.sequence.value() == a2.sequence.value());
  CHECK(a1.pooled.value() != b.pooled.value());
  for (std::size_t i = 0; i < kFeatureDim; ++i) CHECK(a1.pooled.value()[i] == a1.sequence.value().at(0, i));
}

TEST_CASE("vision encoder geometry") {
  Rng rng(2);
  for (auto [mode, positions, channels] :
       {std::tuple{VisionMode::Vgg16, 64u, 512u}, std::tuple{VisionMode::AlexNet, 49u, 256u}}) {
    CHECK(vision_geometry(mode).positions == positions);
    CHECK(vision_geometry(mode).channels == channels);
    ParameterSet ps;
    const ToyVisionEncoder enc(ps, rng, mode);
    Graph g;
    const Tensor grid = vision_input(blank_image(), mode);
    const auto f = enc.encode(g, grid, true);
    CHECK(f.sequence.shape() == Shape{positions, kFeatureDim});
    CHECK(f.pooled.shape() == Shape{kFeatureDim});
    const auto again = enc.encode(g, grid, true);
    CHECK(f.sequence.value() == again.sequence.value());
    const auto no_seq = enc.encode(g, grid, false);
    CHECK_FALSE(no_seq.has_sequence);
    CHECK(no_seq.pooled.value() == f.pooled.value());
  }
}

TEST_CASE("vision pooled feature is the mean over positions") {
  Rng rng(3);
  ParameterSet ps;
  const ToyVisionEncoder enc(ps, rng, VisionMode::AlexNet);
  Graph g;
  const auto f = enc.encode(g, vision_input(random_image(rng), VisionMode::AlexNet), true);
  const Tensor& seq = f.sequence.value();
  for (std::size_t c = 0; c < kFeatureDim; c += 37) {
    double mean = 0.0;
    for (std::size_t r = 0; r < seq.rows(); ++r) mean += seq.at(r, c);
    mean /= static_cast<double>(seq.rows());
    CHECK(f.pooled.value()[c] == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("vision input validation") {
  DnaImage small;
  small.side = 4;
  small.channels = 3;
  small.pixels.assign(48, 0);
  CHECK_THROWS_AS(vision_input(small, VisionMode::Vgg16), ShapeError);
  const Tensor grid = vision_input(blank_image(255), VisionMode::Vgg16);
  CHECK(grid.shape() == Shape{3, 16, 16});
  for (double v : grid.values()) CHECK(v == 1.0);
  CHECK(vision_input(blank_image(), VisionMode::AlexNet).shape() == Shape{3, 14, 14});
}

TEST_CASE("text encoder plus a dense layer passes a gradient check") {
  Rng rng(4);
  ParameterSet ps;
  const ToyTextEncoder enc(ps, rng, 6, 32);
  auto& w = ps.add("w", testing::random_tensor({6, 2}, rng));
  auto& b = ps.add("b", testing::random_tensor({2}, rng));
  const auto tokens = text_input("bots love retweets, humans less", 3);
  std::vector<std::vector<std::uint32_t>> folded = tokens;
  for (auto& t : folded) for (auto& id : t) id %= 32;
  const auto res = grad_check(
      [&](Graph& g) {
        const auto f = enc.encode(g, folded);
        return ops::weighted_cross_entropy(ops::reshape(ops::dense(f.pooled, w, b), {1, 2}), {1}, {1, 1});
      },
      ps.all());
  INFO(res.worst);
  CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("vision encoder plus a dense layer passes a gradient check") {
  Rng rng(5);
  ParameterSet ps;
  const ToyVisionEncoder enc(ps, rng, VisionMode::AlexNet, 6);
  // Random biases keep ReLU inputs generic on the padded border.
  for (Parameter* p : ps.all()) {
    if (p->name.ends_with(".b")) for (auto& v : p->value.values()) v = rng.uniform(-0.3, 0.3);
  }
  auto& w = ps.add("w", testing::random_tensor({6, 2}, rng));
  auto& b = ps.add("b", testing::random_tensor({2}, rng));
  const Tensor grid = testing::random_tensor({3, 14, 14}, rng, 0, 1);
  const auto res = grad_check(
      [&](Graph& g) {
        const auto f = enc.encode(g, grid, true);
        const Var pooled = ops::global_average_pool(ops::tanh(f.sequence));
        return ops::add(ops::dot(ops::dense(f.pooled, w, b), Tensor({2}, {1, -1})),
                        ops::dot(pooled, Tensor({6}, 0.2)));
      },
      ps.all(), 1e-6, 12);
  INFO(res.worst);
  CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("feature store") {
  Rng rng(6);
  std::vector<std::pair<std::string, Tensor>> entries;
  for (int u = 1; u <= 12; ++u) {
    const std::string id = "u" + std::to_string(u);
    entries.push_back({id + "/text", testing::random_tensor({3, 8}, rng)});
    entries.push_back({id + "/vision", testing::random_tensor({8}, rng)});
  }
  const auto store = FeatureStore::from_entries(entries, 8, 8);
  CHECK(store.users().size() == 12);
  for (const auto& id : store.users()) {
    CHECK(store.text(id).cols() == 8);
    CHECK(store.vision(id).cols() == 8);
  }
  CHECK_THROWS_WITH_AS(store.text("u99"), "user u99 absent", Error);
  CHECK_THROWS_WITH_AS(FeatureStore::from_entries(entries, 768, 8), doctest::Contains("768"), ShapeError);
  CHECK_THROWS_AS(FeatureStore::from_entries({{"u1/audio", Tensor({8})}}, 8, 8), Error);
  CHECK_THROWS_AS(FeatureStore::from_entries({{"u1/text", Tensor({8})}}, 8, 8), Error);

  Graph g;
  const auto t = precomputed_text(g, store.text("u1"));
  CHECK(t.pooled.shape() == Shape{8});
  CHECK(t.pooled.value()[0] == store.text("u1").at(0, 0));
  const auto v = precomputed_vision(g, store.vision("u1"));
  CHECK(v.pooled.value() == store.vision("u1"));
}
