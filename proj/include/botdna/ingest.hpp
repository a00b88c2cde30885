#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace botdna {

enum class TweetKind { Original, Retweet, Reply };

std::string_view kind_name(TweetKind kind);

struct Tweet {
  std::string id;
  std::int64_t created_at = 0;  // UNIX seconds, UTC
  TweetKind kind = TweetKind::Original;
  std::uint32_t n_urls = 0;
  std::uint32_t n_hashtags = 0;
  std::uint32_t n_mentions = 0;
  std::string text;

  friend bool operator==(const Tweet&, const Tweet&) = default;
};

// Bots are the positive class everywhere.
enum class Label : int { Human = 0, Bot = 1 };

struct UserRecord {
  std::string user_id;
  std::string description;
  std::optional<Label> label;
  std::optional<std::string> split;  // "train" | "val" | "test"
  std::vector<Tweet> tweets;

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

struct ClassCounts {
  std::size_t human = 0;
  std::size_t bot = 0;
  std::size_t unlabeled = 0;

  std::size_t total() const { return human + bot + unlabeled; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

inline constexpr std::string_view kSplitNames[] = {"train", "val", "test"};

struct Corpus {
  std::string name;
  std::map<std::string, std::vector<UserRecord>> splits;
  std::map<std::string, ClassCounts> class_counts;

  // Records of every split, in train/val/test order.
  std::vector<UserRecord> all_records() const;
  const std::vector<UserRecord>& split(std::string_view name) const;
};

ClassCounts tally(const std::vector<UserRecord>& records);

struct ParseResult {
  std::vector<UserRecord> records;
  std::vector<std::string> warnings;  // unknown keys, one entry per line+key
};

// Throws ParseError for malformed lines, unknown tweet kinds, missing or
// mistyped required fields. Entity counts absent from a tweet are filled by
// count_entities_from_text.
ParseResult parse_jsonl(const std::filesystem::path& path);
ParseResult parse_jsonl_text(std::string_view text);

// Canonical single-line serialization, no trailing newline.
std::string serialize_record(const UserRecord& record);
void write_jsonl(const std::filesystem::path& path,
                 const std::vector<UserRecord>& records);

// Fallback entity extraction: http:// or https:// prefixed tokens, '#'-words
// and '@'-words.
void count_entities_from_text(Tweet& tweet);

// True when the UTF-8 text is empty after trimming Unicode whitespace.
bool is_blank(std::string_view utf8);

// Ascending created_at, ties by id; stable for identical keys.
UserRecord sort_chronological(UserRecord record);

std::vector<UserRecord> filter_eligible(std::vector<UserRecord> records);

std::vector<UserRecord> balance_downsample(std::vector<UserRecord> records,
                                           std::uint64_t seed);

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

Corpus split_corpus(std::vector<UserRecord> records, SplitFractions fractions,
                    std::uint64_t seed, std::string name = "corpus");

// For corpora shipped with an explicit split per record.
Corpus corpus_from_split_field(std::vector<UserRecord> records,
                               std::string name = "corpus");

}  // namespace botdna
