#ifndef ASB_HASH_H_
#define ASB_HASH_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace asb {

inline constexpr uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr uint64_t kFnvPrime = 1099511628211ull;

// FNV-1a over bytes; stable across platforms and runs.
class Fnv1a {
 public:
  Fnv1a& bytes(std::string_view s) {
    for (unsigned char c : s) {
      state_ ^= c;
      state_ *= kFnvPrime;
    }
    return *this;
  }
  Fnv1a& u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (v >> (8 * i)) & 0xffu;
      state_ *= kFnvPrime;
    }
    return *this;
  }
  Fnv1a& i64(int64_t v) { return u64(static_cast<uint64_t>(v)); }
  uint64_t digest() const { return state_; }

 private:
  uint64_t state_ = kFnvOffset;
};

inline uint64_t fnv1a(std::string_view s) { return Fnv1a().bytes(s).digest(); }

std::string to_hex(uint64_t v);

}  // namespace asb

#endif  // ASB_HASH_H_
