#include "spinmix/noise.hpp"

#include <cmath>
#include <numbers>

namespace spinmix {

namespace {

constexpr std::uint32_t kMultA = 0xD2511F53u;
constexpr std::uint32_t kMultB = 0xCD9E8D57u;
constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;
constexpr int kRounds = 10;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi)
{
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(product);
    hi = static_cast<std::uint32_t>(product >> 32);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key)
{
    for (int round = 0; round < kRounds; ++round) {
        if (round > 0) {
            key[0] += kWeylA;
            key[1] += kWeylB;
        }
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kMultA, ctr[0], lo0, hi0);
        mulhilo(kMultB, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t trajectory_index)
    : seed_(seed), index_(trajectory_index)
{
}

std::uint64_t NoiseStream::next_u64()
{
    if (buffered_words_ == 0) {
        const Philox4x32::Counter ctr = {
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32)};
        const Philox4x32::Key key = {static_cast<std::uint32_t>(seed_),
                                     static_cast<std::uint32_t>(seed_ >> 32)};
        buffer_ = Philox4x32::generate(ctr, key);
        buffered_words_ = 4;
        ++block_;
    }
    const int at = 4 - buffered_words_;
    buffered_words_ -= 2;
    return (static_cast<std::uint64_t>(buffer_[at + 1]) << 32) | buffer_[at];
}

double NoiseStream::uniform_open()
{
    // 53 random bits mapped to (0, 1]
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double NoiseStream::standard_normal()
{
    ++drawn_;
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform_open()));
    const double angle = 2.0 * std::numbers::pi * uniform_open();
    spare_normal_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

double NoiseStream::wiener_increment(double dt)
{
    return std::sqrt(dt) * standard_normal();
}

}  // namespace spinmix
