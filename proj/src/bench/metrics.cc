#include "asb/metrics.h"

#include <cmath>
#include <map>

#include "asb/error.h"

namespace asb {

double weighted_f1(const std::vector<std::string>& y_true,
                   const std::vector<std::string>& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) {
    throw UsageError("weighted_f1: needs two equal-length nonempty label lists");
  }
  struct Counts {
    size_t support = 0, predicted = 0, hit = 0;
  };
  std::map<std::string, Counts> per_class;
  for (size_t i = 0; i < y_true.size(); ++i) {
    per_class[y_true[i]].support++;
    per_class[y_pred[i]].predicted++;
    if (y_true[i] == y_pred[i]) per_class[y_true[i]].hit++;
  }
  double total = 0;
  for (const auto& [label, c] : per_class) {
    if (c.support == 0 || c.hit == 0) continue;
    const double precision = static_cast<double>(c.hit) / static_cast<double>(c.predicted);
    const double recall = static_cast<double>(c.hit) / static_cast<double>(c.support);
    total += static_cast<double>(c.support) * 2 * precision * recall / (precision + recall);
  }
  return total / static_cast<double>(y_true.size());
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  double ss = 0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(values.size()));
  return out;
}

}  // namespace asb
