#ifndef ASB_METRICS_H_
#define ASB_METRICS_H_

#include <string>
#include <vector>

namespace asb {

// Support-weighted mean of per-class F1 over the classes present in y_true.
// A class with zero precision and recall scores 0.
double weighted_f1(const std::vector<std::string>& y_true,
                   const std::vector<std::string>& y_pred);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd mean_std(const std::vector<double>& values);

}  // namespace asb

#endif  // ASB_METRICS_H_
