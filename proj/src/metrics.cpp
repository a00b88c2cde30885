#include "botdna/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "botdna/error.hpp"

namespace botdna {

Confusion confusion(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size()) {
    throw Error("confusion: " + std::to_string(preds.size()) + " predictions for " +
                std::to_string(labels.size()) + " labels");
  }
  Confusion c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i], y = labels[i];
    if ((p != 0 && p != 1) || (y != 0 && y != 1)) {
      throw Error("confusion: values must be 0 or 1 (index " + std::to_string(i) + ")");
    }
    if (p == 1 && y == 1) ++c.tp;
    else if (p == 1 && y == 0) ++c.fp;
    else if (p == 0 && y == 1) ++c.fn;
    else ++c.tn;
  }
  return c;
}

MetricSet metrics(const Confusion& c) {
  MetricSet m;
  auto ratio = [&](double num, double den, const char* name) {
    if (den == 0.0) {
      m.degenerate.emplace_back(name);
      return 0.0;
    }
    return num / den;
  };
  const auto tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const auto fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
  m.precision = ratio(tp, tp + fp, "precision");
  m.recall = ratio(tp, tp + fn, "recall");
  m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall, "f1");
  m.accuracy = ratio(tp + tn, static_cast<double>(c.total()), "accuracy");
  m.specificity = ratio(tn, tn + fp, "specificity");
  return m;
}

MetricMap to_map(const MetricSet& m) {
  return {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"accuracy", m.accuracy},
          {"specificity", m.specificity}};
}

Aggregate aggregate(const std::vector<MetricMap>& per_seed) {
  if (per_seed.empty()) throw Error("aggregate: no runs to aggregate");
  Aggregate out;
  out.n = per_seed.size();
  for (const auto& run : per_seed) {
    if (run.size() != per_seed.front().size()) throw Error("aggregate: metric keys differ between runs");
    for (const auto& [key, value] : per_seed.front()) {
      if (!run.count(key)) throw Error("aggregate: metric '" + key + "' missing from a run");
    }
  }
  const auto n = static_cast<double>(per_seed.size());
  for (const auto& [key, unused] : per_seed.front()) {
    double total = 0.0;
    for (const auto& run : per_seed) total += run.at(key);
    const double mean = total / n;
    double sq = 0.0;
    for (const auto& run : per_seed) {
      const double d = run.at(key) - mean;
      sq += d * d;
    }
    out.mean[key] = mean;
    out.std[key] = std::sqrt(sq / n);
  }
  return out;
}

std::string markdown_table(const std::vector<TableRow>& rows) {
  std::string out =
      "| Architecture | Precision | Recall | F1-score | Accuracy | Specificity |\n"
      "|---|---|---|---|---|---|\n";
  for (const auto& row : rows) {
    out += "| " + row.architecture + " |";
    for (auto name : kMetricNames) {
      const std::string key(name);
      char cell[64];
      std::snprintf(cell, sizeof cell, " %.2f \xC2\xB1 %.2f |", 100.0 * row.aggregate.mean.at(key),
                    100.0 * row.aggregate.std.at(key));
      out += cell;
    }
    out += "\n";
  }
  return out;
}

}  // namespace botdna
