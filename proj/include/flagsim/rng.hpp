#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace flagsim {

// Philox 4x64-10 counter-based generator. Streams are keyed by
// (master_seed, path_index), so path k of a run draws the same numbers no
// matter which thread simulates it or in what order paths are scheduled.
// The block function matches numpy.random.Philox (modulo numpy's one-block
// counter pre-increment); see the frozen vectors in the rng tests.
class PathRng {
 public:
  PathRng(std::uint64_t master_seed, std::uint64_t path_index)
      : key_{master_seed, path_index} {}

  std::uint64_t next_u64() {
    if (pos_ == 4) refill();
    return block_[pos_++];
  }

  // Uniform on the open interval (0,1); safe under log().
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. The spare is cached, so draws come in a
  // fixed per-stream sequence independent of the platform's libm internals.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double gaussian(double sd) { return sd * gaussian(); }

  static std::array<std::uint64_t, 4> block(
      const std::array<std::uint64_t, 4>& counter,
      const std::array<std::uint64_t, 2>& key);

 private:
  void refill() {
    block_ = block(counter_, key_);
    pos_ = 0;
    // 256-bit counter increment
    if (++counter_[0] == 0 && ++counter_[1] == 0 && ++counter_[2] == 0)
      ++counter_[3];
  }

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_{{0, 0, 0, 0}};
  std::array<std::uint64_t, 4> block_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace flagsim
