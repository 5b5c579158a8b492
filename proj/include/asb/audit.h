#ifndef ASB_AUDIT_H_
#define ASB_AUDIT_H_

#include <map>
#include <mutex>
#include <set>
#include <string>
#include <string_view>

namespace asb {

// Counts which instance ids each fitting stage touched, and how many of those
// touches hit the held-out test fold. A clean run has violations() == 0.
class LeakageAudit {
 public:
  LeakageAudit() = default;
  explicit LeakageAudit(std::set<std::string> test_ids)
      : test_ids_(std::move(test_ids)) {}

  LeakageAudit(const LeakageAudit& other);
  LeakageAudit& operator=(const LeakageAudit& other);

  void touch(std::string_view stage, std::string_view instance_id);
  // Folds another audit's counters into this one.
  void merge(const LeakageAudit& other);

  size_t violations() const;
  size_t touches() const;
  std::map<std::string, size_t> touches_by_stage() const;
  std::map<std::string, size_t> violations_by_stage() const;

 private:
  mutable std::mutex mu_;
  std::set<std::string> test_ids_;
  std::map<std::string, size_t> touches_;
  std::map<std::string, size_t> violations_;
};

}  // namespace asb

#endif  // ASB_AUDIT_H_
