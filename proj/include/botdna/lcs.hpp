#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace botdna {

struct NamedString {
  std::string id;
  std::string text;
};

// Length of the longest contiguous substring shared by a and b.
std::size_t lcs_pair(std::string_view a, std::string_view b);

// Length of the longest substring common to every input (at least two).
std::size_t lcs_among(const std::vector<std::string>& strings);

struct LcsPoint {
  std::size_t k = 0;
  std::size_t lcs_len = 0;
  // k ids attaining lcs_len together, in input order.
  std::vector<std::string> members;
};

// lcs_len(k) is the best lcs_among over all size-k subsets, k = 2..n.
struct LcsCurve {
  std::vector<LcsPoint> points;
};

LcsCurve lcs_curve(const std::vector<NamedString>& sequences);

struct GroupVerdict {
  std::vector<std::string> bot_group;
  std::size_t split_k = 0;
  std::size_t drop_magnitude = 0;
};

// Steepest consecutive drop lcs_len(k) - lcs_len(k+1), ties toward smaller k.
// A flat curve yields an empty group with drop 0.
GroupVerdict detect_group(const LcsCurve& curve);

// Generalized suffix array over several documents joined by unique
// separators. Exposed for testing.
class GeneralizedSuffixArray {
 public:
  explicit GeneralizedSuffixArray(const std::vector<std::string>& docs);

  std::size_t text_size() const { return sa_.size(); }
  const std::vector<int>& suffix_array() const { return sa_; }
  const std::vector<int>& lcp() const { return lcp_; }  // lcp_[i] = LCP(sa[i-1], sa[i])
  const std::vector<int>& doc_of_rank() const { return doc_of_rank_; }

  // For every k in 1..docs, the longest string depth shared by suffixes
  // from at least k distinct documents, and one SA interval realising it.
  struct Best {
    std::size_t length = 0;
    std::size_t lo = 0;
    std::size_t hi = 0;  // inclusive
    bool found = false;
  };
  std::vector<Best> best_by_coverage() const;

  // Distinct documents (ascending) among ranks lo..hi.
  std::vector<int> documents_in(std::size_t lo, std::size_t hi) const;

 private:
  std::size_t docs_ = 0;
  std::vector<int> text_;
  std::vector<int> sa_;
  std::vector<int> lcp_;
  std::vector<int> doc_of_rank_;
};

}  // namespace botdna
