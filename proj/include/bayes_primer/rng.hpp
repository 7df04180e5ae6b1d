#ifndef BAYES_PRIMER_RNG_HPP_
#define BAYES_PRIMER_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

namespace bayes_primer {

using Seed = std::uint64_t;

// splitmix64 finalizer; used to derive independent per-chain or
// per-replicate seeds from one user-facing seed.
inline Seed derive_seed(Seed seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic pseudo-random stream.  Identical seed + identical call
// sequence gives bit-identical output; there is no global state.  All
// variate transforms live in distributions.hpp so that results do not
// depend on the standard library's unspecified <random> distributions.
class RngStream {
 public:
  explicit RngStream(Seed seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1); never returns an exact 0 or 1,
  // so log(u) and logit(u) are always finite.
  double next_u01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Marsaglia's polar method.  The paired second
  // variate is discarded; no state is carried between calls.
  double next_normal() {
    double v1 = 0.0;
    double v2 = 0.0;
    double s = 0.0;
    do {
      v1 = 2.0 * next_u01() - 1.0;
      v2 = 2.0 * next_u01() - 1.0;
      s = v1 * v1 + v2 * v2;
    } while (s >= 1.0 || s == 0.0);
    return v1 * std::sqrt(-2.0 * std::log(s) / s);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bayes_primer

#endif  // BAYES_PRIMER_RNG_HPP_
