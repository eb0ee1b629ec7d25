// Counter-based Gaussian noise for reproducible, order-independent ensembles.
//
// Philox4x32-10 counter-based generator keyed by the 64-bit master seed; the
// 128-bit counter holds (block, trajectory index). Trajectory i therefore
// sees the same stream no matter which worker runs it or when.
#pragma once

#include <array>
#include <cstdint>

namespace spinmix {

class Philox4x32 {
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key);
};

class NoiseStream {
  public:
    NoiseStream(std::uint64_t seed, std::uint64_t trajectory_index);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t trajectory_index() const { return index_; }
    // Number of normal deviates consumed so far.
    std::uint64_t position() const { return drawn_; }

    // Uniform on (0, 1].
    double uniform_open();
    double standard_normal();
    // dW ~ Normal(0, dt).
    double wiener_increment(double dt);

  private:
    std::uint64_t next_u64();

    std::uint64_t seed_;
    std::uint64_t index_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_words_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
    std::uint64_t drawn_ = 0;
};

}  // namespace spinmix
