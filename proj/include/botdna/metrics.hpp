#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace botdna {

// Positive class = bot (label 1).
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

Confusion confusion(const std::vector<int>& preds, const std::vector<int>& labels);

inline constexpr std::array<std::string_view, 5> kMetricNames = {
    "precision", "recall", "f1", "accuracy", "specificity"};

struct MetricSet {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double specificity = 0.0;
  // Names of metrics whose ratio was 0/0 and was therefore set to 0.
  std::vector<std::string> degenerate;
};

MetricSet metrics(const Confusion& c);

using MetricMap = std::map<std::string, double>;
MetricMap to_map(const MetricSet& m);

struct Aggregate {
  MetricMap mean;
  MetricMap std;  // population standard deviation (divides by n)
  std::size_t n = 0;
};

Aggregate aggregate(const std::vector<MetricMap>& per_seed);

struct TableRow {
  std::string architecture;
  Aggregate aggregate;
};

// Markdown table: Architecture | Precision | Recall | F1-score | Accuracy |
// Specificity, cells "mean ± std" in percent with two decimals.
std::string markdown_table(const std::vector<TableRow>& rows);

}  // namespace botdna
