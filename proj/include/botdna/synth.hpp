#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "botdna/checkpoint.hpp"
#include "botdna/ingest.hpp"
#include "botdna/lcs.hpp"
#include "botdna/rng.hpp"

// Seeded generators for the bundled fixtures and the property suites.
namespace botdna::synth {

struct TimelineStyle {
  double retweet = 0.3;
  double reply = 0.2;  // the rest are originals
  double url = 0.3;    // per-tweet entity probabilities
  double hashtag = 0.2;
  double mention = 0.3;
};

// Tweets listed newest first, as exported by the platform; entity counts
// agree with the generated text.
UserRecord random_user(Rng& rng, std::string user_id, std::size_t n_tweets,
                       const TimelineStyle& style, std::string description);

// Arbitrary style drawn from rng, used by the property suites.
UserRecord random_timeline(Rng& rng, std::string user_id, std::size_t n_tweets);

// 12 accounts u01..u12, 200 tweets each; u01..u06 are bots that mostly
// retweet, u07..u12 humans that mostly post originals. A retweet-fraction
// threshold separates the classes exactly.
std::vector<UserRecord> fixture_corpus();

// 1000 accounts pre-split 600/200/200 (split field set), balanced per split.
// Bots retweet 55-85% of the time and use a promotional vocabulary; humans
// retweet 5-35% of the time.
std::vector<UserRecord> learnability_corpus(std::uint64_t seed = 2024);

// Six Type3 strings: three bots sharing a 20-symbol motif at offset 10,
// three random humans, all of length 40. `bots` receives the bot ids.
std::vector<NamedString> planted_lcs_strings(std::uint64_t seed, std::vector<std::string>* bots);

// Records whose Type3 encoding is exactly the given strings.
std::vector<UserRecord> records_from_type3(const std::vector<NamedString>& strings);

struct XorData {
  std::vector<UserRecord> records;  // labels and splits, 600/200/200
  std::vector<NamedTensor> features;  // "<id>/text" [4,dim], "<id>/vision" [8,dim]
};

// Label = text bit XOR image bit. The text bit lives only in the text
// sequence, the image bit only in the vision sequence; which vision rows
// carry a shared marker depends on both bits, so attention from text onto
// vision exposes the interaction while either pooled feature alone is
// uninformative.
XorData xor_dataset(std::uint64_t seed = 99, std::size_t dim = 768);

}  // namespace botdna::synth
