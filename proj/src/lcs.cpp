#include "botdna/lcs.hpp"

#include <algorithm>
#include <numeric>

#include "botdna/error.hpp"

namespace botdna {

namespace {

// Prefix doubling; stops as soon as every rank is distinct, which the unique
// document separators guarantee eventually.
std::vector<int> build_suffix_array(const std::vector<int>& text) {
  const int n = static_cast<int>(text.size());
  std::vector<int> sa(n), rank(text.begin(), text.end()), tmp(n);
  std::iota(sa.begin(), sa.end(), 0);
  if (n <= 1) return sa;
  for (int k = 1;; k <<= 1) {
    auto key = [&](int i) {
      return std::pair<int, int>(rank[i], i + k < n ? rank[i + k] : -1);
    };
    std::sort(sa.begin(), sa.end(),
              [&](int a, int b) { return key(a) < key(b); });
    tmp[sa[0]] = 0;
    for (int i = 1; i < n; ++i) {
      tmp[sa[i]] = tmp[sa[i - 1]] + (key(sa[i - 1]) < key(sa[i]) ? 1 : 0);
    }
    rank.swap(tmp);
    if (rank[sa[n - 1]] == n - 1) break;
  }
  return sa;
}

// Kasai et al.: lcp[r] = LCP of the suffixes ranked r-1 and r; lcp[0] = 0.
std::vector<int> build_lcp(const std::vector<int>& text,
                           const std::vector<int>& sa) {
  const int n = static_cast<int>(text.size());
  std::vector<int> rank(n), lcp(n, 0);
  for (int i = 0; i < n; ++i) rank[sa[i]] = i;
  int h = 0;
  for (int i = 0; i < n; ++i) {
    if (rank[i] == 0) {
      h = 0;
      continue;
    }
    const int j = sa[rank[i] - 1];
    while (i + h < n && j + h < n && text[i + h] == text[j + h]) ++h;
    lcp[rank[i]] = h;
    if (h > 0) --h;
  }
  return lcp;
}

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i, int delta) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
  }
  int prefix(std::size_t i) const {  // sum over [0, i)
    int s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<int> tree_;
};

struct Interval {
  int depth;
  std::size_t lo;
  std::size_t hi;
};

}  // namespace

GeneralizedSuffixArray::GeneralizedSuffixArray(
    const std::vector<std::string>& docs)
    : docs_(docs.size()) {
  const int separators = static_cast<int>(docs.size());
  std::vector<int> doc_of_pos;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (unsigned char c : docs[d]) {
      text_.push_back(separators + c);
      doc_of_pos.push_back(static_cast<int>(d));
    }
    text_.push_back(static_cast<int>(d));
    doc_of_pos.push_back(static_cast<int>(d));
  }
  sa_ = build_suffix_array(text_);
  lcp_ = build_lcp(text_, sa_);
  doc_of_rank_.resize(sa_.size());
  for (std::size_t r = 0; r < sa_.size(); ++r) {
    doc_of_rank_[r] = doc_of_pos[sa_[r]];
  }
}

std::vector<GeneralizedSuffixArray::Best>
GeneralizedSuffixArray::best_by_coverage() const {
  const std::size_t n = sa_.size();
  std::vector<Interval> intervals;
  {
    // Bottom-up traversal of the lcp-interval tree.
    struct Open {
      int depth;
      std::size_t lo;
    };
    std::vector<Open> stack{{0, 0}};
    for (std::size_t i = 1; i <= n; ++i) {
      const int cur = i < n ? lcp_[i] : 0;
      std::size_t lo = i - 1;
      while (cur < stack.back().depth) {
        const Open top = stack.back();
        stack.pop_back();
        intervals.push_back({top.depth, top.lo, i - 1});
        lo = top.lo;
      }
      if (cur > stack.back().depth) stack.push_back({cur, lo});
    }
  }

  // Distinct documents per interval, answered offline by right end.
  std::vector<int> prev(n, -1), last(docs_, -1);
  for (std::size_t r = 0; r < n; ++r) {
    prev[r] = last[doc_of_rank_[r]];
    last[doc_of_rank_[r]] = static_cast<int>(r);
  }
  std::vector<std::size_t> order(intervals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return intervals[a].hi < intervals[b].hi;
  });
  std::vector<Best> exact(docs_ + 1);
  Fenwick fenwick(n);
  std::size_t q = 0;
  for (std::size_t r = 0; r < n && q < order.size(); ++r) {
    fenwick.add(r, 1);
    if (prev[r] >= 0) fenwick.add(static_cast<std::size_t>(prev[r]), -1);
    while (q < order.size() && intervals[order[q]].hi == r) {
      const auto& iv = intervals[order[q]];
      const auto count = static_cast<std::size_t>(fenwick.prefix(r + 1) -
                                                  fenwick.prefix(iv.lo));
      auto& slot = exact[count];
      const auto depth = static_cast<std::size_t>(iv.depth);
      if (!slot.found || depth > slot.length ||
          (depth == slot.length && iv.lo < slot.lo)) {
        slot = {depth, iv.lo, iv.hi, true};
      }
      ++q;
    }
  }

  std::vector<Best> best(docs_ + 1);
  Best running;
  for (std::size_t k = docs_; k >= 1; --k) {
    if (exact[k].found && (!running.found || exact[k].length > running.length)) {
      running = exact[k];
    }
    best[k] = running;
  }
  return best;
}

std::vector<int> GeneralizedSuffixArray::documents_in(std::size_t lo,
                                                      std::size_t hi) const {
  std::vector<int> docs(doc_of_rank_.begin() + static_cast<std::ptrdiff_t>(lo),
                        doc_of_rank_.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
  std::sort(docs.begin(), docs.end());
  docs.erase(std::unique(docs.begin(), docs.end()), docs.end());
  return docs;
}

std::size_t lcs_pair(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return best;
}

std::size_t lcs_among(const std::vector<std::string>& strings) {
  if (strings.size() < 2) {
    throw Error("lcs_among needs at least 2 strings, got " +
                std::to_string(strings.size()));
  }
  const GeneralizedSuffixArray gsa(strings);
  return gsa.best_by_coverage()[strings.size()].length;
}

LcsCurve lcs_curve(const std::vector<NamedString>& sequences) {
  const std::size_t n = sequences.size();
  if (n < 2) {
    throw Error("lcs_curve needs at least 2 sequences, got " + std::to_string(n));
  }
  std::vector<std::string> docs;
  docs.reserve(n);
  for (const auto& s : sequences) docs.push_back(s.text);
  const GeneralizedSuffixArray gsa(docs);
  const auto best = gsa.best_by_coverage();

  LcsCurve curve;
  for (std::size_t k = 2; k <= n; ++k) {
    LcsPoint point{k, 0, {}};
    std::vector<int> members;
    if (best[k].found && best[k].length > 0) {
      point.lcs_len = best[k].length;
      members = gsa.documents_in(best[k].lo, best[k].hi);
      members.resize(k);
    } else {
      members.resize(k);
      std::iota(members.begin(), members.end(), 0);
    }
    for (int d : members) point.members.push_back(sequences[d].id);
    curve.points.push_back(std::move(point));
  }
  return curve;
}

GroupVerdict detect_group(const LcsCurve& curve) {
  if (curve.points.size() < 2) {
    throw Error("detect_group needs a curve with at least 2 points");
  }
  GroupVerdict verdict;
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
    const auto& a = curve.points[i];
    const auto& b = curve.points[i + 1];
    const std::size_t drop = a.lcs_len > b.lcs_len ? a.lcs_len - b.lcs_len : 0;
    if (drop > verdict.drop_magnitude) {
      verdict.drop_magnitude = drop;
      verdict.split_k = a.k;
      verdict.bot_group = a.members;
    }
  }
  return verdict;
}

}  // namespace botdna
