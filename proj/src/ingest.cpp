#include "botdna/ingest.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "botdna/error.hpp"
#include "botdna/rng.hpp"

namespace botdna {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::set<std::string> kRecordKeys = {"user_id", "description", "label",
                                           "split", "tweets"};
const std::set<std::string> kTweetKeys = {"id",         "created_at", "kind",
                                          "n_urls",     "n_hashtags",
                                          "n_mentions", "text"};

struct LineOutcome {
  std::optional<UserRecord> record;
  std::vector<std::string> warnings;
  std::string error;
};

[[noreturn]] void fail(const std::string& what, std::size_t line) {
  throw ParseError(what + " at line " + std::to_string(line), line);
}

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    fail(std::string("missing required field '") + key + "'", line);
  }
  return *it;
}

std::string require_string(const json& obj, const char* key,
                           std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_string()) {
    fail(std::string("field '") + key + "' must be a string", line);
  }
  return v.get<std::string>();
}

std::optional<std::uint32_t> optional_count(const json& obj, const char* key,
                                            std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
    fail(std::string("field '") + key + "' must be a non-negative integer",
         line);
  }
  return static_cast<std::uint32_t>(it->get<std::int64_t>());
}

TweetKind parse_kind(const std::string& name, std::size_t line) {
  if (name == "original") return TweetKind::Original;
  if (name == "retweet") return TweetKind::Retweet;
  if (name == "reply") return TweetKind::Reply;
  fail("unknown kind '" + name + "'", line);
}

Tweet parse_tweet(const json& obj, std::size_t line,
                  std::vector<std::string>& warnings) {
  if (!obj.is_object()) fail("tweet entries must be objects", line);
  Tweet tweet;
  tweet.id = require_string(obj, "id", line);
  const json& ts = require(obj, "created_at", line);
  if (!ts.is_number_integer()) {
    fail("field 'created_at' must be an integer UNIX timestamp", line);
  }
  tweet.created_at = ts.get<std::int64_t>();
  tweet.kind = parse_kind(require_string(obj, "kind", line), line);
  if (auto it = obj.find("text"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) fail("field 'text' must be a string", line);
    tweet.text = it->get<std::string>();
  }
  const auto urls = optional_count(obj, "n_urls", line);
  const auto tags = optional_count(obj, "n_hashtags", line);
  const auto mentions = optional_count(obj, "n_mentions", line);
  if (urls && tags && mentions) {
    tweet.n_urls = *urls;
    tweet.n_hashtags = *tags;
    tweet.n_mentions = *mentions;
  } else {
    count_entities_from_text(tweet);
    if (urls) tweet.n_urls = *urls;
    if (tags) tweet.n_hashtags = *tags;
    if (mentions) tweet.n_mentions = *mentions;
  }
  for (const auto& [key, value] : obj.items()) {
    if (!kTweetKeys.contains(key)) {
      warnings.push_back("line " + std::to_string(line) +
                         ": unknown tweet key '" + key + "' ignored");
    }
  }
  return tweet;
}

UserRecord parse_record(std::string_view text, std::size_t line,
                        std::vector<std::string>& warnings) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON (") + e.what() + ")", line);
  }
  if (!obj.is_object()) fail("line is not a JSON object", line);

  UserRecord record;
  record.user_id = require_string(obj, "user_id", line);
  record.description = require_string(obj, "description", line);

  if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer()) fail("field 'label' must be 0, 1 or null", line);
    const auto v = it->get<std::int64_t>();
    if (v != 0 && v != 1) fail("field 'label' must be 0, 1 or null", line);
    record.label = static_cast<Label>(v);
  }
  if (auto it = obj.find("split"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) fail("field 'split' must be a string or null", line);
    auto s = it->get<std::string>();
    if (s != "train" && s != "val" && s != "test") {
      fail("unknown split '" + s + "'", line);
    }
    record.split = std::move(s);
  }
  const json& tweets = require(obj, "tweets", line);
  if (!tweets.is_array()) fail("field 'tweets' must be an array", line);
  record.tweets.reserve(tweets.size());
  for (const auto& t : tweets) {
    record.tweets.push_back(parse_tweet(t, line, warnings));
  }
  for (const auto& [key, value] : obj.items()) {
    if (!kRecordKeys.contains(key)) {
      warnings.push_back("line " + std::to_string(line) + ": unknown key '" +
                         key + "' ignored");
    }
  }
  return record;
}

bool blank_line(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  });
}

// Decodes one UTF-8 code point starting at i; returns (code point, length).
// Invalid sequences decode as a single byte with code point 0xFFFD.
std::pair<char32_t, std::size_t> decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) return {static_cast<char32_t>(((b0 & 0x1F) << 6) | c1), 2};
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      return {static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2), 3};
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      return {static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) |
                                    (c2 << 6) | c3),
              4};
    }
  }
  return {0xFFFD, 1};
}

bool unicode_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 ||
         c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 ||
         c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

bool word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '_' || u >= 0x80;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

std::string_view kind_name(TweetKind kind) {
  switch (kind) {
    case TweetKind::Original: return "original";
    case TweetKind::Retweet: return "retweet";
    case TweetKind::Reply: return "reply";
  }
  return "original";
}

std::vector<UserRecord> Corpus::all_records() const {
  std::vector<UserRecord> out;
  for (auto name : kSplitNames) {
    if (auto it = splits.find(std::string(name)); it != splits.end()) {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  return out;
}

const std::vector<UserRecord>& Corpus::split(std::string_view name) const {
  auto it = splits.find(std::string(name));
  if (it == splits.end()) {
    throw Error("corpus '" + this->name + "' has no split '" +
                std::string(name) + "'");
  }
  return it->second;
}

ClassCounts tally(const std::vector<UserRecord>& records) {
  ClassCounts counts;
  for (const auto& r : records) {
    if (!r.label) {
      ++counts.unlabeled;
    } else if (*r.label == Label::Bot) {
      ++counts.bot;
    } else {
      ++counts.human;
    }
  }
  return counts;
}

ParseResult parse_jsonl_text(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }

  std::vector<LineOutcome> outcomes(lines.size());
  const auto n = static_cast<std::int64_t>(lines.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& out = outcomes[i];
    if (blank_line(lines[i])) continue;
    try {
      out.record = parse_record(lines[i], static_cast<std::size_t>(i) + 1,
                                out.warnings);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  }

  ParseResult result;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& out = outcomes[i];
    if (!out.error.empty()) throw ParseError(out.error, i + 1);
    if (out.record) result.records.push_back(std::move(*out.record));
    result.warnings.insert(result.warnings.end(), out.warnings.begin(),
                           out.warnings.end());
  }
  return result;
}

ParseResult parse_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_jsonl_text(buffer.str());
}

std::string serialize_record(const UserRecord& record) {
  ordered_json obj;
  obj["user_id"] = record.user_id;
  obj["description"] = record.description;
  obj["label"] = record.label ? ordered_json(static_cast<int>(*record.label))
                              : ordered_json(nullptr);
  obj["split"] = record.split ? ordered_json(*record.split)
                              : ordered_json(nullptr);
  ordered_json tweets = ordered_json::array();
  for (const auto& t : record.tweets) {
    ordered_json tw;
    tw["id"] = t.id;
    tw["created_at"] = t.created_at;
    tw["kind"] = kind_name(t.kind);
    tw["n_urls"] = t.n_urls;
    tw["n_hashtags"] = t.n_hashtags;
    tw["n_mentions"] = t.n_mentions;
    tw["text"] = t.text;
    tweets.push_back(std::move(tw));
  }
  obj["tweets"] = std::move(tweets);
  return obj.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<UserRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& r : records) out << serialize_record(r) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

void count_entities_from_text(Tweet& tweet) {
  tweet.n_urls = tweet.n_hashtags = tweet.n_mentions = 0;
  std::string_view text = tweet.text;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           std::isspace(static_cast<unsigned char>(text[i])) != 0) {
      ++i;
    }
    std::size_t j = i;
    while (j < text.size() &&
           std::isspace(static_cast<unsigned char>(text[j])) == 0) {
      ++j;
    }
    const auto token = text.substr(i, j - i);
    if (starts_with(token, "http://") || starts_with(token, "https://")) {
      ++tweet.n_urls;
    } else if (token.size() > 1 && token[0] == '#' && word_byte(token[1])) {
      ++tweet.n_hashtags;
    } else if (token.size() > 1 && token[0] == '@' && word_byte(token[1])) {
      ++tweet.n_mentions;
    }
    i = j;
  }
}

bool is_blank(std::string_view utf8) {
  std::size_t i = 0;
  while (i < utf8.size()) {
    const auto [cp, len] = decode_utf8(utf8, i);
    if (!unicode_space(cp)) return false;
    i += len;
  }
  return true;
}

UserRecord sort_chronological(UserRecord record) {
  std::stable_sort(record.tweets.begin(), record.tweets.end(),
                   [](const Tweet& a, const Tweet& b) {
                     if (a.created_at != b.created_at) {
                       return a.created_at < b.created_at;
                     }
                     return a.id < b.id;
                   });
  return record;
}

std::vector<UserRecord> filter_eligible(std::vector<UserRecord> records) {
  std::erase_if(records, [](const UserRecord& r) {
    return r.tweets.empty() || is_blank(r.description);
  });
  return records;
}

std::vector<UserRecord> balance_downsample(std::vector<UserRecord> records,
                                           std::uint64_t seed) {
  std::vector<UserRecord> humans, bots;
  for (auto& r : records) {
    if (!r.label) {
      throw Error("balance_downsample: record '" + r.user_id +
                  "' has no label");
    }
    (*r.label == Label::Bot ? bots : humans).push_back(std::move(r));
  }
  if (humans.empty() || bots.empty()) {
    throw Error("balance_downsample: both classes must be present");
  }
  auto& majority = humans.size() >= bots.size() ? humans : bots;
  auto& minority = humans.size() >= bots.size() ? bots : humans;

  Rng rng = Rng::derive(seed, 1);
  std::vector<std::size_t> order(majority.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span(order));
  order.resize(minority.size());
  std::sort(order.begin(), order.end());

  std::vector<UserRecord> out;
  out.reserve(2 * minority.size());
  for (auto i : order) out.push_back(std::move(majority[i]));
  for (auto& r : minority) out.push_back(std::move(r));
  rng.shuffle(std::span(out));
  return out;
}

namespace {

void check_unique_ids(const std::vector<UserRecord>& records) {
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.user_id).second) {
      throw Error("duplicate user_id '" + r.user_id + "'");
    }
  }
}

// Largest-remainder apportionment of n items over the three fractions, with
// every split receiving at least one item.
std::array<std::size_t, 3> apportion(std::size_t n,
                                     const std::array<double, 3>& f) {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> rem{};
  std::size_t used = 0;
  for (int s = 0; s < 3; ++s) {
    const double exact = f[s] * static_cast<double>(n);
    counts[s] = static_cast<std::size_t>(std::floor(exact));
    rem[s] = exact - std::floor(exact);
    used += counts[s];
  }
  while (used < n) {
    int best = 0;
    for (int s = 1; s < 3; ++s) {
      if (rem[s] > rem[best]) best = s;
    }
    ++counts[best];
    rem[best] = -1.0;
    ++used;
  }
  for (int s = 0; s < 3; ++s) {
    if (counts[s] == 0) {
      auto donor = std::max_element(counts.begin(), counts.end());
      --*donor;
      counts[s] = 1;
    }
  }
  return counts;
}

Corpus make_corpus(std::string name,
                   std::array<std::vector<UserRecord>, 3> parts) {
  Corpus corpus;
  corpus.name = std::move(name);
  for (int s = 0; s < 3; ++s) {
    const std::string key(kSplitNames[s]);
    for (auto& r : parts[s]) r.split = key;
    corpus.class_counts[key] = tally(parts[s]);
    corpus.splits[key] = std::move(parts[s]);
  }
  return corpus;
}

}  // namespace

Corpus split_corpus(std::vector<UserRecord> records, SplitFractions fractions,
                    std::uint64_t seed, std::string name) {
  const std::array<double, 3> f = {fractions.train, fractions.val,
                                   fractions.test};
  for (double x : f) {
    if (!(x > 0.0)) throw Error("split fractions must be positive");
  }
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) {
    throw Error("fractions sum ≠ 1");
  }
  check_unique_ids(records);

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].label) {
      throw Error("split_corpus: record '" + records[i].user_id +
                  "' has no label");
    }
    by_class[static_cast<int>(*records[i].label)].push_back(i);
  }

  std::vector<int> assignment(records.size(), -1);
  for (int c = 0; c < 2; ++c) {
    auto& idx = by_class[c];
    if (idx.size() < 3) {
      throw Error("split_corpus: class " + std::to_string(c) + " has " +
                  std::to_string(idx.size()) +
                  " records, fewer than the 3 splits");
    }
    Rng rng = Rng::derive(seed, 100 + static_cast<std::uint64_t>(c));
    rng.shuffle(std::span(idx));
    const auto counts = apportion(idx.size(), f);
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t k = 0; k < counts[s]; ++k) assignment[idx[pos++]] = s;
    }
  }

  std::array<std::vector<UserRecord>, 3> parts;
  for (std::size_t i = 0; i < records.size(); ++i) {
    parts[assignment[i]].push_back(std::move(records[i]));
  }
  return make_corpus(std::move(name), std::move(parts));
}

Corpus corpus_from_split_field(std::vector<UserRecord> records,
                               std::string name) {
  check_unique_ids(records);
  std::array<std::vector<UserRecord>, 3> parts;
  for (auto& r : records) {
    if (!r.split) {
      throw Error("record '" + r.user_id + "' has no split field");
    }
    const auto it = std::find(std::begin(kSplitNames), std::end(kSplitNames),
                              *r.split);
    parts[it - std::begin(kSplitNames)].push_back(std::move(r));
  }
  return make_corpus(std::move(name), std::move(parts));
}

}  // namespace botdna
