#ifndef ASB_RNG_H_
#define ASB_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace asb {

// Portable random source. std::mt19937_64's output sequence is fixed by the
// standard; the std:: distributions are not, so every draw we depend on goes
// through the helpers below.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). Raw draws below (2^64 mod bound) are
  // rejected, then the result is u % bound.
  uint64_t uniform_index(uint64_t bound);

  // Uniform double in [0, 1) using the top 53 bits.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller (no cached second value).
  double normal();

  bool bernoulli(double p) { return uniform01() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer.
uint64_t mix64(uint64_t x);

// Deterministic child seed for a named sub-stream.
uint64_t derive_seed(uint64_t seed, std::string_view key);
uint64_t derive_seed(uint64_t seed, uint64_t index);

}  // namespace asb

#endif  // ASB_RNG_H_
