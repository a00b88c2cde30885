#include <doctest.h>

#include <cmath>

#include "botdna/error.hpp"
#include "botdna/metrics.hpp"

using namespace botdna;
using doctest::Approx;

TEST_CASE("confusion tallies") {
  CHECK(confusion({1, 1, 0}, {1, 1, 0}) == Confusion{2, 0, 0, 1});
  CHECK(confusion({1, 0}, {0, 1}) == Confusion{0, 1, 1, 0});
  // Hand tally: positions 0-2 true positives, 3 a false positive,
  // 4 a false negative, 5-9 true negatives.
  const std::vector<int> preds = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const std::vector<int> labels = {1, 1, 1, 0, 1, 0, 0, 0, 0, 0};
  CHECK(confusion(preds, labels) == Confusion{3, 1, 1, 5});
  CHECK_THROWS_AS(confusion({1}, {1, 0}), Error);
  CHECK_THROWS_AS(confusion({2}, {1}), Error);
}

TEST_CASE("metrics from (3,1,1,5)") {
  const auto m = metrics({3, 1, 1, 5});
  CHECK(m.precision == Approx(0.75).epsilon(1e-12));
  CHECK(m.recall == Approx(0.75).epsilon(1e-12));
  CHECK(m.f1 == Approx(0.75).epsilon(1e-12));
  CHECK(m.accuracy == Approx(0.8).epsilon(1e-12));
  CHECK(std::abs(m.specificity - 0.833333) < 1e-6);
  CHECK(m.degenerate.empty());
}

TEST_CASE("degenerate ratios are zero and flagged") {
  const auto perfect = metrics({4, 0, 0, 6});
  for (const auto& [k, v] : to_map(perfect)) CHECK(v == 1.0);
  const auto none = metrics({0, 0, 3, 5});
  CHECK(none.precision == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(std::find(none.degenerate.begin(), none.degenerate.end(), "precision") != none.degenerate.end());
  const auto empty = metrics({0, 0, 0, 0});
  CHECK(empty.accuracy == 0.0);
  CHECK(empty.degenerate.size() == 5);
}

TEST_CASE("metric identities over every small confusion matrix") {
  for (std::size_t tp = 0; tp < 5; ++tp)
    for (std::size_t fp = 0; fp < 5; ++fp)
      for (std::size_t fn = 0; fn < 5; ++fn)
        for (std::size_t tn = 0; tn < 5; ++tn) {
          const Confusion c{tp, fp, fn, tn};
          if (c.total() == 0 || tp + fn == 0 || tn + fp == 0) continue;
          const auto m = metrics(c);
          const double pos = static_cast<double>(tp + fn), neg = static_cast<double>(tn + fp);
          CHECK(m.accuracy == Approx((m.recall * pos + m.specificity * neg) / static_cast<double>(c.total())).epsilon(1e-14));
          if (tp > 0) {
            CHECK(m.f1 >= std::min(m.precision, m.recall) - 1e-15);
            CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-15);
          }
          // Swapping the labels without swapping the positive class exchanges
          // recall and specificity.
          const auto swapped = metrics(Confusion{tn, fn, fp, tp});
          CHECK(swapped.recall == Approx(m.specificity).epsilon(1e-15));
          CHECK(swapped.specificity == Approx(m.recall).epsilon(1e-15));
        }
}

TEST_CASE("aggregate") {
  const auto one = aggregate({{{"a", 0.3}}});
  CHECK(one.std.at("a") == 0.0);
  CHECK(one.n == 1);
  const auto two = aggregate({{{"a", 0.8}}, {{"a", 0.9}}});
  CHECK(two.mean.at("a") == Approx(0.85).epsilon(1e-14));
  CHECK(two.std.at("a") == Approx(0.05).epsilon(1e-12));
  CHECK_THROWS_AS(aggregate({}), Error);
  CHECK_THROWS_AS(aggregate({{{"a", 1.0}}, {{"b", 1.0}}}), Error);
}

TEST_CASE("aggregate agrees with an independent recomputation") {
  const std::vector<Confusion> rows = {{3, 1, 1, 5}, {4, 0, 0, 6}, {2, 2, 2, 4}, {3, 0, 1, 6}, {1, 1, 3, 5}};
  std::vector<MetricMap> maps;
  for (const auto& c : rows) maps.push_back(to_map(metrics(c)));
  const auto agg = aggregate(maps);
  for (auto name : kMetricNames) {
    const std::string key(name);
    long double sum = 0;
    for (const auto& m : maps) sum += m.at(key);
    const long double mean = sum / maps.size();
    long double ss = 0;
    for (const auto& m : maps) ss += (m.at(key) - mean) * (m.at(key) - mean);
    CHECK(std::abs(agg.mean.at(key) - static_cast<double>(mean)) <= 1e-12);
    CHECK(std::abs(agg.std.at(key) - static_cast<double>(std::sqrt(ss / maps.size()))) <= 1e-12);
  }
}

TEST_CASE("markdown table layout") {
  const auto agg = aggregate({{{"precision", 0.5}, {"recall", 1}, {"f1", 0.6}, {"accuracy", 0.7}, {"specificity", 0.2}},
                              {{"precision", 0.7}, {"recall", 1}, {"f1", 0.6}, {"accuracy", 0.7}, {"specificity", 0.4}}});
  const auto table = markdown_table({{"Concatenation", agg}});
  CHECK(table.find("| Architecture | Precision | Recall | F1-score | Accuracy | Specificity |") != std::string::npos);
  CHECK(table.find("| Concatenation | 60.00 ± 10.00 | 100.00 ± 0.00 |") != std::string::npos);
}
