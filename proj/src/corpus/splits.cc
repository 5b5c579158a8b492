#include <algorithm>
#include <cmath>
#include <map>

#include "asb/corpus.h"
#include "asb/error.h"
#include "asb/rng.h"

namespace asb {

namespace {

std::map<std::string, std::vector<size_t>> group_by_label(
    const std::vector<TaskInstance>& instances) {
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < instances.size(); ++i) {
    groups[instances[i].label].push_back(i);
  }
  return groups;
}

}  // namespace

std::vector<size_t> SplitPlan::train_indices(int split) const {
  std::vector<size_t> out;
  const auto& a = assignments.at(static_cast<size_t>(split));
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == Fold::kTrain) out.push_back(i);
  }
  return out;
}

std::vector<size_t> SplitPlan::test_indices(int split) const {
  std::vector<size_t> out;
  const auto& a = assignments.at(static_cast<size_t>(split));
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == Fold::kTest) out.push_back(i);
  }
  return out;
}

SplitPlan make_splits(const std::vector<TaskInstance>& instances, int n_splits,
                      double train_fraction, uint64_t seed) {
  if (n_splits < 1) throw UsageError("n_splits must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train_fraction must lie in (0, 1)");
  }
  const auto groups = group_by_label(instances);
  for (const auto& [label, members] : groups) {
    if (members.size() < 2) {
      throw DataError("stratification error: class \"" + label + "\" has " +
                      std::to_string(members.size()) +
                      " instance(s); at least 2 are required");
    }
  }

  SplitPlan plan;
  plan.n_splits = n_splits;
  plan.train_fraction = train_fraction;
  plan.seed = seed;
  plan.instance_ids.reserve(instances.size());
  for (const auto& inst : instances) plan.instance_ids.push_back(inst.message_id);

  for (int s = 0; s < n_splits; ++s) {
    std::vector<Fold> assign(instances.size(), Fold::kTest);
    Rng rng(derive_seed(seed, static_cast<uint64_t>(s)));
    for (const auto& [label, members] : groups) {
      std::vector<size_t> shuffled = members;
      rng.shuffle(shuffled);
      const auto n = static_cast<long>(members.size());
      // Half-up, with slack so 0.7 * 165 (115.4999... in binary) rounds to 116.
      long n_train = static_cast<long>(std::floor(train_fraction * static_cast<double>(n) + 0.5 + 1e-9));
      n_train = std::clamp(n_train, 1L, n - 1);
      for (long k = 0; k < n_train; ++k) assign[shuffled[k]] = Fold::kTrain;
    }
    plan.assignments.push_back(std::move(assign));
  }
  return plan;
}

std::vector<TaskInstance> undersample(const std::vector<TaskInstance>& instances,
                                      uint64_t seed) {
  if (instances.empty()) throw UsageError("undersample: empty instance list");
  const auto groups = group_by_label(instances);
  size_t minority = instances.size();
  for (const auto& [label, members] : groups) {
    minority = std::min(minority, members.size());
  }
  Rng rng(seed);
  std::vector<size_t> keep;
  // Classes are visited in label order; each is reduced by a partial
  // Fisher-Yates pass taking the first `minority` positions.
  for (const auto& [label, members] : groups) {
    std::vector<size_t> pool = members;
    if (pool.size() > minority) {
      for (size_t i = 0; i < minority; ++i) {
        const size_t j = i + rng.uniform_index(pool.size() - i);
        std::swap(pool[i], pool[j]);
      }
      pool.resize(minority);
    }
    keep.insert(keep.end(), pool.begin(), pool.end());
  }
  std::sort(keep.begin(), keep.end());
  std::vector<TaskInstance> out;
  out.reserve(keep.size());
  for (size_t i : keep) out.push_back(instances[i]);
  return out;
}

}  // namespace asb
