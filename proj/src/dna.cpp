#include "botdna/dna.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "botdna/error.hpp"

namespace botdna {

std::string_view alphabet_name(Alphabet alphabet) {
  return alphabet == Alphabet::Type3 ? "Type3" : "Content5";
}

std::string_view alphabet_symbols(Alphabet alphabet) {
  return alphabet == Alphabet::Type3 ? "ACT" : "NUHMX";
}

Alphabet parse_alphabet(std::string_view text) {
  if (text == "type3" || text == "Type3") return Alphabet::Type3;
  if (text == "content5" || text == "Content5") return Alphabet::Content5;
  throw Error("unknown alphabet '" + std::string(text) +
              "' (expected type3 or content5)");
}

char symbol_of_type(const Tweet& tweet) {
  switch (tweet.kind) {
    case TweetKind::Retweet: return 'T';
    case TweetKind::Reply: return 'C';
    case TweetKind::Original: return 'A';
  }
  return 'A';
}

char symbol_of_content(const Tweet& tweet) {
  const int categories = (tweet.n_urls > 0 ? 1 : 0) +
                         (tweet.n_hashtags > 0 ? 1 : 0) +
                         (tweet.n_mentions > 0 ? 1 : 0);
  if (categories == 0) return 'N';
  if (categories >= 2) return 'X';
  if (tweet.n_urls > 0) return 'U';
  if (tweet.n_hashtags > 0) return 'H';
  return 'M';
}

DnaSequence encode(const UserRecord& record, Alphabet alphabet) {
  if (record.tweets.empty()) {
    throw Error("cannot encode '" + record.user_id +
                "': empty timeline (ineligible record)");
  }
  DnaSequence out{record.user_id, alphabet, {}};
  out.seq.reserve(record.tweets.size());
  for (const auto& t : record.tweets) {
    out.seq.push_back(alphabet == Alphabet::Type3 ? symbol_of_type(t)
                                                  : symbol_of_content(t));
  }
  return out;
}

EncodedCorpus encode_records(const std::vector<UserRecord>& records,
                             Alphabet alphabet) {
  if (records.empty()) throw Error("no eligible users");
  std::vector<DnaSequence> encoded(records.size());
  std::vector<std::string> errors(records.size());
  const auto n = static_cast<std::int64_t>(records.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      encoded[i] = encode(records[i], alphabet);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  EncodedCorpus out;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (!errors[i].empty()) throw Error(errors[i]);
    out.max_len = std::max(out.max_len, encoded[i].seq.size());
    const auto id = encoded[i].user_id;
    if (!out.sequences.emplace(id, std::move(encoded[i])).second) {
      throw Error("duplicate user_id '" + id + "'");
    }
  }
  return out;
}

EncodedCorpus encode_corpus(const Corpus& corpus, Alphabet alphabet) {
  return encode_records(corpus.all_records(), alphabet);
}

std::string dna_to_json(const DnaSequence& seq) {
  nlohmann::ordered_json obj;
  obj["user_id"] = seq.user_id;
  obj["alphabet"] = alphabet_name(seq.alphabet);
  obj["seq"] = seq.seq;
  return obj.dump();
}

void write_dna_jsonl(const std::filesystem::path& path,
                     const EncodedCorpus& encoded) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [id, seq] : encoded.sequences) {
    out << dna_to_json(seq) << '\n';
  }
}

void write_dna_tsv(const std::filesystem::path& path,
                   const EncodedCorpus& encoded) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [id, seq] : encoded.sequences) {
    out << id << '\t' << seq.seq << '\n';
  }
}

EncodedCorpus read_dna_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  EncodedCorpus out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("malformed DNA line at line " + std::to_string(lineno),
                       lineno);
    }
    try {
      DnaSequence seq;
      seq.user_id = obj.at("user_id").get<std::string>();
      seq.alphabet = parse_alphabet(obj.at("alphabet").get<std::string>());
      seq.seq = obj.at("seq").get<std::string>();
      const auto symbols = alphabet_symbols(seq.alphabet);
      for (char c : seq.seq) {
        if (symbols.find(c) == std::string_view::npos) {
          throw Error(std::string("symbol '") + c + "' not in alphabet " +
                      std::string(alphabet_name(seq.alphabet)));
        }
      }
      out.max_len = std::max(out.max_len, seq.seq.size());
      auto id = seq.user_id;
      if (!out.sequences.emplace(id, std::move(seq)).second) {
        throw Error("duplicate user_id '" + id + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string(e.what()) + " at line " +
                           std::to_string(lineno),
                       lineno);
    }
  }
  return out;
}

}  // namespace botdna
