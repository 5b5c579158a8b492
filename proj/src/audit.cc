#include "asb/audit.h"

namespace asb {

LeakageAudit::LeakageAudit(const LeakageAudit& other) {
  std::lock_guard<std::mutex> lock(other.mu_);
  test_ids_ = other.test_ids_;
  touches_ = other.touches_;
  violations_ = other.violations_;
}

LeakageAudit& LeakageAudit::operator=(const LeakageAudit& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  test_ids_ = other.test_ids_;
  touches_ = other.touches_;
  violations_ = other.violations_;
  return *this;
}

void LeakageAudit::touch(std::string_view stage, std::string_view instance_id) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string key(stage);
  ++touches_[key];
  if (test_ids_.count(std::string(instance_id))) ++violations_[key];
}

void LeakageAudit::merge(const LeakageAudit& other) {
  if (this == &other) return;
  std::scoped_lock lock(mu_, other.mu_);
  for (const auto& [k, v] : other.touches_) touches_[k] += v;
  for (const auto& [k, v] : other.violations_) violations_[k] += v;
}

size_t LeakageAudit::violations() const {
  std::lock_guard<std::mutex> lock(mu_);
  size_t n = 0;
  for (const auto& [k, v] : violations_) n += v;
  return n;
}

size_t LeakageAudit::touches() const {
  std::lock_guard<std::mutex> lock(mu_);
  size_t n = 0;
  for (const auto& [k, v] : touches_) n += v;
  return n;
}

std::map<std::string, size_t> LeakageAudit::touches_by_stage() const {
  std::lock_guard<std::mutex> lock(mu_);
  return touches_;
}

std::map<std::string, size_t> LeakageAudit::violations_by_stage() const {
  std::lock_guard<std::mutex> lock(mu_);
  return violations_;
}

}  // namespace asb
