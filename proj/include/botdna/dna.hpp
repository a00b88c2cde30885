#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "botdna/ingest.hpp"

namespace botdna {

// Symbol order is fixed; it defines the default palette assignment.
enum class Alphabet { Type3, Content5 };

std::string_view alphabet_name(Alphabet alphabet);      // "Type3" / "Content5"
std::string_view alphabet_symbols(Alphabet alphabet);   // "ACT" / "NUHMX"
// Accepts "type3", "Type3", "content5", "Content5".
Alphabet parse_alphabet(std::string_view text);

// original -> 'A', reply -> 'C', retweet -> 'T'.
char symbol_of_type(const Tweet& tweet);

// 'N' no entities, 'U'/'H'/'M' exactly one entity category present,
// 'X' two or more categories.
char symbol_of_content(const Tweet& tweet);

struct DnaSequence {
  std::string user_id;
  Alphabet alphabet = Alphabet::Type3;
  std::string seq;

  friend bool operator==(const DnaSequence&, const DnaSequence&) = default;
};

// The record must already be in chronological order.
DnaSequence encode(const UserRecord& record, Alphabet alphabet);

struct EncodedCorpus {
  std::map<std::string, DnaSequence> sequences;
  std::size_t max_len = 0;
};

// max_len spans every split so all images share one canvas.
EncodedCorpus encode_corpus(const Corpus& corpus, Alphabet alphabet);
EncodedCorpus encode_records(const std::vector<UserRecord>& records,
                             Alphabet alphabet);

std::string dna_to_json(const DnaSequence& seq);
void write_dna_jsonl(const std::filesystem::path& path,
                     const EncodedCorpus& encoded);
void write_dna_tsv(const std::filesystem::path& path,
                   const EncodedCorpus& encoded);
// Reads the JSONL form; max_len is recomputed from the sequences.
EncodedCorpus read_dna_jsonl(const std::filesystem::path& path);

}  // namespace botdna
