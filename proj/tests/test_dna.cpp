#include <doctest.h>

#include <algorithm>
#include <map>

#include "botdna/dna.hpp"
#include "botdna/error.hpp"
#include "botdna/synth.hpp"
#include "helpers.hpp"

using namespace botdna;

namespace {

Tweet of_kind(TweetKind kind, std::int64_t t = 0) {
  Tweet tw;
  tw.id = std::to_string(t);
  tw.created_at = t;
  tw.kind = kind;
  return tw;
}

Tweet with_entities(std::uint32_t urls, std::uint32_t tags, std::uint32_t mentions) {
  Tweet tw;
  tw.n_urls = urls;
  tw.n_hashtags = tags;
  tw.n_mentions = mentions;
  return tw;
}

}  // namespace

TEST_CASE("type symbols") {
  CHECK(symbol_of_type(of_kind(TweetKind::Retweet)) == 'T');
  CHECK(symbol_of_type(of_kind(TweetKind::Reply)) == 'C');
  CHECK(symbol_of_type(of_kind(TweetKind::Original)) == 'A');
}

TEST_CASE("content symbols over every presence combination") {
  CHECK(symbol_of_content(with_entities(0, 0, 0)) == 'N');
  CHECK(symbol_of_content(with_entities(2, 0, 0)) == 'U');
  CHECK(symbol_of_content(with_entities(0, 3, 0)) == 'H');
  CHECK(symbol_of_content(with_entities(0, 0, 1)) == 'M');
  CHECK(symbol_of_content(with_entities(1, 1, 0)) == 'X');
  CHECK(symbol_of_content(with_entities(1, 0, 1)) == 'X');
  CHECK(symbol_of_content(with_entities(0, 1, 1)) == 'X');
  CHECK(symbol_of_content(with_entities(4, 5, 6)) == 'X');
}

TEST_CASE("encode") {
  UserRecord r;
  r.user_id = "u";
  r.tweets = {of_kind(TweetKind::Original, 1), of_kind(TweetKind::Reply, 2),
              of_kind(TweetKind::Retweet, 3), of_kind(TweetKind::Original, 4)};
  CHECK(encode(r, Alphabet::Type3).seq == "ACTA");
  CHECK(encode(r, Alphabet::Type3) == encode(r, Alphabet::Type3));

  UserRecord single;
  single.tweets = {with_entities(0, 0, 0)};
  CHECK(encode(single, Alphabet::Content5).seq == "N");

  CHECK_THROWS_AS(encode(UserRecord{}, Alphabet::Type3), Error);
}

TEST_CASE("encode_records max_len spans every record") {
  std::vector<UserRecord> records;
  for (std::size_t n : {3u, 7u, 5u}) {
    UserRecord r;
    r.user_id = "u" + std::to_string(n);
    for (std::size_t i = 0; i < n; ++i) r.tweets.push_back(of_kind(TweetKind::Original, static_cast<std::int64_t>(i)));
    records.push_back(r);
  }
  CHECK(encode_records(records, Alphabet::Type3).max_len == 7);
  CHECK_THROWS_WITH_AS(encode_records({}, Alphabet::Type3), "no eligible users", Error);
}

TEST_CASE("fixture corpus encodes to 12 sequences of length 200") {
  std::vector<UserRecord> sorted;
  for (auto& r : synth::fixture_corpus()) sorted.push_back(sort_chronological(r));
  for (auto alphabet : {Alphabet::Type3, Alphabet::Content5}) {
    const auto enc = encode_records(sorted, alphabet);
    CHECK(enc.sequences.size() == 12);
    CHECK(enc.max_len == 200);
    for (const auto& [id, seq] : enc.sequences) CHECK(seq.seq.size() == 200);
  }
}

TEST_CASE("length, histogram and storage-order invariants") {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = sort_chronological(synth::random_timeline(rng, "u", 1 + rng.uniform_index(60)));
    const auto type3 = encode(r, Alphabet::Type3);
    const auto content5 = encode(r, Alphabet::Content5);
    CHECK(type3.seq.size() == r.tweets.size());
    CHECK(content5.seq.size() == r.tweets.size());
    std::map<char, std::size_t> expected;
    for (const auto& t : r.tweets) ++expected[symbol_of_type(t)];
    std::map<char, std::size_t> got;
    for (char c : type3.seq) ++got[c];
    CHECK(got == expected);

    auto shuffled = r;
    rng.shuffle(std::span(shuffled.tweets));
    CHECK(encode(sort_chronological(shuffled), Alphabet::Type3) == type3);
  }
}

TEST_CASE("DNA JSONL round trip") {
  const auto dir = testing::scratch_dir("dna_jsonl");
  std::vector<UserRecord> sorted;
  for (auto& r : synth::fixture_corpus()) sorted.push_back(sort_chronological(r));
  const auto enc = encode_records(sorted, Alphabet::Content5);
  write_dna_jsonl(dir / "dna.jsonl", enc);
  const auto back = read_dna_jsonl(dir / "dna.jsonl");
  CHECK(back.sequences == enc.sequences);
  CHECK(back.max_len == enc.max_len);
}

TEST_CASE("alphabet names") {
  CHECK(parse_alphabet("type3") == Alphabet::Type3);
  CHECK(parse_alphabet("Content5") == Alphabet::Content5);
  CHECK(alphabet_symbols(Alphabet::Content5) == "NUHMX");
  CHECK_THROWS_AS(parse_alphabet("type4"), Error);
}
