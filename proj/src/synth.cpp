#include "botdna/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "botdna/error.hpp"

namespace botdna::synth {

namespace {

constexpr std::int64_t kEpoch = 1500000000;  // 2017-07-14, arbitrary origin

constexpr std::array<const char*, 24> kFiller = {
    "the",  "and",   "my",    "of",   "in",     "for",   "with",  "from",
    "on",   "about", "life",  "time", "world",  "day",   "here",  "today",
    "just", "more",  "new",   "all",  "things", "views", "own",   "stuff"};

constexpr std::array<const char*, 20> kBotWords = {
    "free",   "giveaway", "crypto",  "deals",  "follow",  "win",   "bonus",
    "promo",  "click",    "offer",   "profit", "signals", "earn",  "cash",
    "forex",  "discount", "subscribe", "viral", "growth", "airdrop"};

constexpr std::array<const char*, 20> kHumanWords = {
    "teacher", "coffee",  "dad",     "mom",    "runner",    "reader", "nurse",
    "student", "hiking",  "guitar",  "cats",   "gardening", "poetry", "football",
    "cooking", "history", "science", "travel", "painter",   "family"};

template <std::size_t N>
const char* pick(Rng& rng, const std::array<const char*, N>& words) {
  return words[rng.uniform_index(N)];
}

std::string padded(std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, i);
  return buf;
}

std::string random_symbols(Rng& rng, std::size_t n, std::string_view alphabet) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(alphabet[rng.uniform_index(alphabet.size())]);
  return out;
}

std::string description(Rng& rng, bool bot) {
  std::string out;
  const std::size_t topical = 3 + rng.uniform_index(4);
  const std::size_t filler = 1 + rng.uniform_index(3);
  std::vector<std::string> words;
  for (std::size_t i = 0; i < topical; ++i) words.emplace_back(bot ? pick(rng, kBotWords) : pick(rng, kHumanWords));
  for (std::size_t i = 0; i < filler; ++i) words.emplace_back(pick(rng, kFiller));
  rng.shuffle(std::span<std::string>(words));
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

Tensor unit_vector(Rng& rng, std::size_t dim, const std::vector<const Tensor*>& against) {
  Tensor v({dim});
  for (auto& x : v.values()) x = rng.normal();
  for (const Tensor* b : against) {
    double proj = 0.0;
    for (std::size_t i = 0; i < dim; ++i) proj += v[i] * (*b)[i];
    for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * (*b)[i];
  }
  double norm = 0.0;
  for (double x : v.values()) norm += x * x;
  norm = std::sqrt(norm);
  for (auto& x : v.values()) x /= norm;
  return v;
}

}  // namespace

UserRecord random_user(Rng& rng, std::string user_id, std::size_t n_tweets,
                       const TimelineStyle& style, std::string desc) {
  UserRecord rec;
  rec.user_id = std::move(user_id);
  rec.description = std::move(desc);
  std::int64_t clock = kEpoch + static_cast<std::int64_t>(rng.uniform_index(86400));
  for (std::size_t i = 0; i < n_tweets; ++i) {
    Tweet t;
    t.id = rec.user_id + "-" + padded(i, 4);
    clock += 60 + static_cast<std::int64_t>(rng.uniform_index(7200));
    t.created_at = clock;
    const double r = rng.uniform();
    t.kind = r < style.retweet ? TweetKind::Retweet
             : r < style.retweet + style.reply ? TweetKind::Reply
                                               : TweetKind::Original;
    std::string text;
    const std::size_t words = 2 + rng.uniform_index(6);
    for (std::size_t w = 0; w < words; ++w) {
      if (w) text += ' ';
      text += pick(rng, kFiller);
    }
    if (rng.bernoulli(style.url)) {
      t.n_urls = 1 + static_cast<std::uint32_t>(rng.uniform_index(2));
      for (std::uint32_t k = 0; k < t.n_urls; ++k) text += " https://t.co/" + random_symbols(rng, 6, "abcdefgh0123");
    }
    if (rng.bernoulli(style.hashtag)) {
      t.n_hashtags = 1 + static_cast<std::uint32_t>(rng.uniform_index(3));
      for (std::uint32_t k = 0; k < t.n_hashtags; ++k) text += std::string(" #") + pick(rng, kFiller);
    }
    if (rng.bernoulli(style.mention)) {
      t.n_mentions = 1 + static_cast<std::uint32_t>(rng.uniform_index(2));
      for (std::uint32_t k = 0; k < t.n_mentions; ++k) text += " @user" + padded(rng.uniform_index(1000), 3);
    }
    t.text = std::move(text);
    rec.tweets.push_back(std::move(t));
  }
  std::reverse(rec.tweets.begin(), rec.tweets.end());
  return rec;
}

UserRecord random_timeline(Rng& rng, std::string user_id, std::size_t n_tweets) {
  TimelineStyle style;
  style.retweet = rng.uniform(0.0, 0.7);
  style.reply = rng.uniform(0.0, 1.0 - style.retweet);
  style.url = rng.uniform();
  style.hashtag = rng.uniform();
  style.mention = rng.uniform();
  return random_user(rng, std::move(user_id), n_tweets, style, "random timeline");
}

std::vector<UserRecord> fixture_corpus() {
  Rng rng(7);
  const TimelineStyle bot{0.80, 0.05, 0.60, 0.50, 0.10};
  const TimelineStyle human{0.15, 0.30, 0.15, 0.10, 0.40};
  const std::array<const char*, 6> bot_bios = {
      "Daily crypto signals. Follow for free giveaways!",
      "Best deals and promo codes, click the link",
      "Earn cash fast - forex bonus offers every day",
      "Viral growth tips | subscribe for airdrop alerts",
      "Win big: discount offers and free bonus",
      "Profit signals 24/7, follow and retweet to win"};
  const std::array<const char*, 6> human_bios = {
      "Teacher, coffee addict, dad of two.",
      "Nurse by day, guitar by night",
      "PhD student in history. Opinions my own.",
      "Runner and reader; cats > dogs",
      "Gardening, poetry and too much football",
      "Painter. Travel notes and family pictures."};
  std::vector<UserRecord> out;
  for (std::size_t i = 0; i < 12; ++i) {
    const bool is_bot = i < 6;
    auto rec = random_user(rng, "u" + padded(i + 1, 2), 200, is_bot ? bot : human,
                           is_bot ? bot_bios[i] : human_bios[i - 6]);
    rec.label = is_bot ? Label::Bot : Label::Human;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<UserRecord> learnability_corpus(std::uint64_t seed) {
  Rng rng(seed);
  const std::array<std::pair<const char*, std::size_t>, 3> splits = {
      {{"train", 600}, {"val", 200}, {"test", 200}}};
  std::vector<UserRecord> out;
  std::size_t next_id = 1;
  for (const auto& [split, size] : splits) {
    std::vector<int> labels(size);
    for (std::size_t i = 0; i < size; ++i) labels[i] = i < size / 2 ? 1 : 0;
    rng.shuffle(std::span<int>(labels));
    for (int label : labels) {
      const bool is_bot = label == 1;
      TimelineStyle style;
      style.retweet = is_bot ? rng.uniform(0.55, 0.85) : rng.uniform(0.05, 0.35);
      style.reply = rng.uniform(0.05, 0.10);
      style.url = rng.uniform(0.1, 0.6);
      style.hashtag = rng.uniform(0.1, 0.5);
      style.mention = rng.uniform(0.1, 0.5);
      const std::size_t n = 60 + rng.uniform_index(141);
      auto rec = random_user(rng, "s" + padded(next_id++, 4), n, style, description(rng, is_bot));
      rec.label = is_bot ? Label::Bot : Label::Human;
      rec.split = split;
      out.push_back(std::move(rec));
    }
  }
  return out;
}

std::vector<NamedString> planted_lcs_strings(std::uint64_t seed, std::vector<std::string>* bots) {
  Rng rng(seed);
  const std::string motif = random_symbols(rng, 7, "ACT") + "TTTTT" + random_symbols(rng, 8, "ACT");
  std::vector<NamedString> out;
  for (int i = 1; i <= 3; ++i) {
    out.push_back({"h" + std::to_string(i), random_symbols(rng, 40, "ACT")});
    const std::string id = "b" + std::to_string(i);
    out.push_back({id, random_symbols(rng, 10, "ACT") + motif + random_symbols(rng, 10, "ACT")});
    if (bots) bots->push_back(id);
  }
  return out;
}

std::vector<UserRecord> records_from_type3(const std::vector<NamedString>& strings) {
  std::vector<UserRecord> out;
  for (const auto& s : strings) {
    UserRecord rec;
    rec.user_id = s.id;
    rec.description = "synthetic account " + s.id;
    for (std::size_t i = 0; i < s.text.size(); ++i) {
      Tweet t;
      t.id = s.id + "-" + padded(i, 4);
      t.created_at = kEpoch + static_cast<std::int64_t>(i) * 600;
      switch (s.text[i]) {
        case 'A': t.kind = TweetKind::Original; break;
        case 'C': t.kind = TweetKind::Reply; break;
        case 'T': t.kind = TweetKind::Retweet; break;
        default: throw Error(std::string("symbol '") + s.text[i] + "' is not in Type3");
      }
      rec.tweets.push_back(std::move(t));
    }
    out.push_back(std::move(rec));
  }
  return out;
}

XorData xor_dataset(std::uint64_t seed, std::size_t dim) {
  if (dim < 3) throw Error("xor_dataset needs dim >= 3");
  Rng rng(seed);
  const Tensor u = unit_vector(rng, dim, {});
  const Tensor g = unit_vector(rng, dim, {&u});
  const Tensor w = unit_vector(rng, dim, {&u, &g});
  const double kappa = 15.0, beta = 15.0, gamma = 4.0, eta = 2.0, sigma = 0.05;
  constexpr std::size_t kTextRows = 4, kRegionRows = 4;

  XorData data;
  const std::array<std::pair<const char*, std::size_t>, 3> splits = {
      {{"train", 600}, {"val", 200}, {"test", 200}}};
  std::size_t next_id = 1;
  for (const auto& [split, size] : splits) {
    std::vector<int> combos(size);
    for (std::size_t i = 0; i < size; ++i) combos[i] = static_cast<int>(i % 4);
    rng.shuffle(std::span<int>(combos));
    for (int combo : combos) {
      const int tbit = combo & 1, vbit = combo >> 1;
      const double ts = tbit ? 1.0 : -1.0, vs = vbit ? 1.0 : -1.0;
      const std::string id = "x" + padded(next_id++, 4);

      Tensor text({kTextRows, dim});
      for (std::size_t r = 0; r < kTextRows; ++r)
        for (std::size_t j = 0; j < dim; ++j) text.at(r, j) = ts * kappa * u[j] + sigma * rng.normal();

      Tensor vision({2 * kRegionRows, dim});
      for (std::size_t r = 0; r < 2 * kRegionRows; ++r) {
        const bool region_a = r < kRegionRows;
        const double side = region_a ? beta : -beta;
        const bool marked = region_a ? vbit == 1 : vbit == 0;
        for (std::size_t j = 0; j < dim; ++j) {
          vision.at(r, j) = side * u[j] + (marked ? gamma * g[j] : 0.0) + vs * eta * w[j] +
                            sigma * rng.normal();
        }
      }
      data.features.emplace_back(id + "/text", std::move(text));
      data.features.emplace_back(id + "/vision", std::move(vision));

      UserRecord rec;
      rec.user_id = id;
      rec.description = "synthetic";
      rec.label = (tbit ^ vbit) ? Label::Bot : Label::Human;
      rec.split = split;
      Tweet t;
      t.id = id + "-0000";
      t.created_at = kEpoch;
      rec.tweets.push_back(std::move(t));
      data.records.push_back(std::move(rec));
    }
  }
  return data;
}

}  // namespace botdna::synth
