#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace refsel {

// All randomness in the workbench flows from one master seed. Sub-streams
// are derived by hashing a label into the master seed and scrambling:
//   derive_seed(master, label) = splitmix64(master ^ fnv1a64(label))
// Labels are stable strings such as "train.run:2" or "probe.DisStat:0",
// so adding a new consumer never perturbs existing streams.

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index);

// mt19937_64 with portable value mappings. The engine's output sequence is
// fixed by the standard; std::uniform_*_distribution is not, so the
// mappings are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n), unbiased via rejection
  std::uint64_t uniform_int(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    shuffle(p);
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace refsel
