#pragma once

#include <cstdint>
#include <random>

namespace dwi {

// splitmix64 finalizer applied to (root, stream); used to give every block of
// work its own generator so results do not depend on how blocks map to threads.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dwi
